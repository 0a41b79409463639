//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its elapsed time. Criteria run serialized behind a lock so
//! the per-criterion runtime budgets measure isolated work.

use std::sync::Mutex;
use std::time::Instant;

use hqc_core::averaging::{
    a_infinity_ratio, alpha, chain_check_2d, chain_check_3d_gradient, log_hessian_det_field,
    log_jacobian_field, superharmonicity_check,
};
use hqc_core::fixtures::{by_name, registry};
use hqc_core::geometry::DomainSpec;
use hqc_core::lipschitz::lipschitz_scan;
use hqc_core::mapspec::LoadedMap;
use hqc_core::potential::{green_potential, sobolev_bootstrap, GreenKernel};
use hqc_core::qc_analysis::{distortion_scan, harnack_chain_check, w_field_inequality};
use hqc_core::quasihyperbolic::{build_graph, qh_bilipschitz_scan, Neighborhood};
use hqc_core::sampling::{BallQuadrature, SamplingPlan};
use hqc_core::vec::Vector;

static SERIAL: Mutex<()> = Mutex::new(());

struct Criterion {
    name: &'static str,
    budget_s: f64,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn start(name: &'static str, budget_s: f64) -> (std::sync::MutexGuard<'static, ()>, Self) {
        let guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
        (
            guard,
            Self {
                name,
                budget_s,
                started: Instant::now(),
                failures: Vec::new(),
            },
        )
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn check_close(&mut self, what: &str, got: f64, expected: f64, tol: f64) {
        if !((got - expected).abs() <= tol) {
            self.failures
                .push(format!("{what}: got {got}, expected {expected} (tol {tol})"));
        }
    }

    fn finish(self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("[criterion] {}: {status} ({elapsed:.2} s)", self.name);
        assert!(
            self.failures.is_empty(),
            "criterion {} failed:\n  {}",
            self.name,
            self.failures.join("\n  ")
        );
        assert!(
            elapsed < self.budget_s,
            "criterion {} blew its {} s budget: {elapsed:.2} s",
            self.name,
            self.budget_s
        );
    }
}

fn load(name: &str) -> LoadedMap {
    by_name(name)
        .unwrap_or_else(|| panic!("fixture {name} missing"))
        .build()
        .unwrap()
}

#[test]
fn criterion_01_exact_linear_suite() {
    let (_guard, mut c) = Criterion::start("01 exact linear suite", 5.0);
    let tol = 1e-9;
    let ball3 = DomainSpec::unit_ball(3);
    let ball2 = DomainSpec::unit_ball(2);
    let quad = BallQuadrature::monte_carlo(1024, 7);
    let plan = SamplingPlan::uniform(512, 7);

    // diag(2, -1, -1)
    let lin = load("linear3");
    let jet = lin
        .as_map()
        .jet(&Vector::new(vec![0.1, -0.2, 0.3]), false)
        .unwrap();
    c.check_close("sv0", jet.singular_values[0], 2.0, tol);
    c.check_close("sv1", jet.singular_values[1], 1.0, tol);
    c.check_close("sv2", jet.singular_values[2], 1.0, tol);
    c.check_close("jacobian", jet.jacobian, 2.0, tol);
    let scan = distortion_scan(lin.as_map(), &plan).unwrap();
    c.check_close("k_outer", scan.sup_k_outer, 4.0, tol);
    c.check_close("k_inner", scan.sup_k_inner, 2.0, tol);
    let a = alpha(lin.as_map(), &Vector::new(vec![0.2, 0.1, 0.0]), &ball3, &quad).unwrap();
    c.check_close("alpha", a.value, 2f64.powf(1.0 / 3.0), tol);
    let lip = lipschitz_scan(lin.as_map(), &plan).unwrap();
    c.check_close("l_hat", lip.l_hat, 2.0, tol);
    c.check_close("inv_hat", lip.inv_hat, 1.0, tol);

    // shear c = 0.5
    let shear = load("shear05");
    let jet = shear
        .as_map()
        .jet(&Vector::new(vec![0.3, -0.1]), false)
        .unwrap();
    c.check_close("shear sv0", jet.singular_values[0], 1.5, tol);
    c.check_close("shear sv1", jet.singular_values[1], 0.5, tol);
    c.check_close("shear jacobian", jet.jacobian, 0.75, tol);
    let scan = distortion_scan(shear.as_map(), &plan).unwrap();
    c.check_close("shear k_outer", scan.sup_k_outer, 3.0, tol);
    c.check_close("shear k_inner", scan.sup_k_inner, 3.0, tol);
    let a = alpha(shear.as_map(), &Vector::new(vec![0.2, 0.1]), &ball2, &quad).unwrap();
    c.check_close("shear alpha", a.value, 0.75f64.sqrt(), tol);
    let lip = lipschitz_scan(shear.as_map(), &plan).unwrap();
    c.check_close("shear l_hat", lip.l_hat, 1.5, tol);
    c.check_close("shear inv_hat", lip.inv_hat, 0.5, tol);

    c.finish();
}

#[test]
fn criterion_02_sobolev_bootstrap() {
    let (_guard, mut c) = Criterion::start("02 sobolev bootstrap", 1.0);
    let trace = sobolev_bootstrap(3, 3.3).unwrap();
    c.check("terminated", trace.terminated);
    c.check("length 4", trace.sequence.len() == 4);
    c.check_close("p0", trace.sequence[0], 3.3, 1e-12);
    c.check_close("p1 = 11/3", trace.sequence[1], 11.0 / 3.0, 1e-12);
    c.check_close("p2 = 33/7", trace.sequence[2], 33.0 / 7.0, 1e-12);
    c.check_close("p3 = 11", trace.sequence[3], 11.0, 1e-9);
    c.check("p3 > 2n", trace.sequence[3] > 6.0);
    for (l, p) in trace.sequence.iter().enumerate() {
        let bound = 3.0 * (1.0 + 0.1 * (1u64 << l) as f64);
        c.check(
            &format!("doubling bound p_{l} > {bound}"),
            *p > bound - 1e-9,
        );
    }
    c.finish();
}

#[test]
fn criterion_03_green_calibration() {
    let (_guard, mut c) = Criterion::start("03 green calibration", 10.0);
    let kernel = GreenKernel::new(3).unwrap();
    let plan = SamplingPlan::uniform(4000, 13).with_max_radius(0.9);
    let h = 1e-6;
    let mut checked = 0;
    let mut i = 0usize;
    while checked < 100 {
        let x = plan.point(3, 300, 2 * i);
        let y = plan.point(3, 300, 2 * i + 1);
        i += 1;
        if x.dist(&y) < 0.1 {
            continue;
        }
        let grad = kernel.green_gradient(&x, &y).unwrap();
        for k in 0..3 {
            let mut fwd = x.as_slice().to_vec();
            fwd[k] += h;
            let mut bwd = x.as_slice().to_vec();
            bwd[k] -= h;
            let fd = (kernel.green(&Vector::new(fwd), &y).unwrap()
                - kernel.green(&Vector::new(bwd), &y).unwrap())
                / (2.0 * h);
            let rel = (fd - grad[k]).abs() / (1.0 + grad[k].abs());
            c.check(&format!("fd gradient pair {i} comp {k}"), rel < 1e-6);
        }
        checked += 1;
    }

    let plan = SamplingPlan::uniform(2000, 17).with_max_radius(0.999);
    for pair in plan.points(3, 301).chunks(2) {
        let (x, y) = (&pair[0], &pair[1]);
        if x.dist(y) < 1e-9 {
            continue;
        }
        let g = kernel.green_gradient(x, y).unwrap();
        let bound = 2.0 * kernel.c1 * y.dist(x).powi(-2);
        c.check("gradient bound", bound - g.norm() >= 0.0);
    }

    let plan = SamplingPlan::uniform(2_000_000, 23);
    let mut min_slack = f64::INFINITY;
    for i in 0..1_000_000usize {
        let x = plan.point(3, 302, 2 * i);
        let y = plan.point(3, 302, 2 * i + 1);
        let lhs = y.norm() * x.dist(&y);
        let rhs = y.sub(&x.scale(y.norm_sq())).norm();
        min_slack = min_slack.min(rhs - lhs);
    }
    c.check(
        &format!("key inequality min slack {min_slack:.2e}"),
        min_slack >= -1e-12,
    );
    c.finish();
}

#[test]
fn criterion_04_green_potential() {
    let (_guard, mut c) = Criterion::start("04 green potential", 30.0);
    let quad = BallQuadrature::monte_carlo(1 << 20, 42);
    let w0 = green_potential(|_| 1.0, &Vector::zeros(3), &quad).unwrap();
    c.check_close("w(0)", w0.value, -1.0 / 6.0, 1e-3);
    let wh = green_potential(|_| 1.0, &Vector::new(vec![0.5, 0.0, 0.0]), &quad).unwrap();
    c.check_close("w(0.5 e1)", wh.value, -0.125, 1e-3);
    c.finish();
}

#[test]
fn criterion_05_quasihyperbolic_convergence() {
    let (_guard, mut c) = Criterion::start("05 quasihyperbolic convergence", 60.0);
    let exact_ball = -(0.1f64.ln()); // log 10

    // ball, n = 2, h = 0.01 within 2%, halving reduces the error
    let mut ball2_errors = Vec::new();
    for h in [0.01, 0.005] {
        let g = build_graph(&DomainSpec::unit_ball(2), h, Neighborhood::Radius2).unwrap();
        let d = g
            .qh_distance(&Vector::zeros(2), &Vector::new(vec![0.9, 0.0]))
            .unwrap();
        ball2_errors.push((d - exact_ball).abs() / exact_ball);
    }
    c.check(
        &format!("ball2 error {:.4}% at h=0.01", ball2_errors[0] * 100.0),
        ball2_errors[0] < 0.02,
    );
    c.check(
        &format!(
            "halving reduced ball error ({:.3e} -> {:.3e})",
            ball2_errors[0], ball2_errors[1]
        ),
        ball2_errors[1] <= ball2_errors[0] * 1.1,
    );

    // ball, n = 3, h = 0.04 within 4%
    let g = build_graph(&DomainSpec::unit_ball(3), 0.04, Neighborhood::Radius2).unwrap();
    let predicted_nodes =
        (4.0 / 3.0) * std::f64::consts::PI * 0.96f64.powi(3) / 0.04f64.powi(3);
    c.check(
        &format!("ball3 node count {} tracks the lattice estimate", g.node_count()),
        (g.node_count() as f64 / predicted_nodes - 1.0).abs() < 0.02,
    );
    let d = g
        .qh_distance(&Vector::zeros(3), &Vector::new(vec![0.9, 0.0, 0.0]))
        .unwrap();
    let err3 = (d - exact_ball).abs() / exact_ball;
    c.check(&format!("ball3 error {:.4}% at h=0.04", err3 * 100.0), err3 < 0.04);

    // half-space vertical pair, k = log(b/a) with a = 1, b = e
    let hs = DomainSpec::half_space(Vector::basis(2, 1), 0.0).unwrap();
    let a = Vector::new(vec![0.0, 1.0]);
    let b = Vector::new(vec![0.0, std::f64::consts::E]);
    let mut hs_errors = Vec::new();
    for h in [0.05, 0.025] {
        let g = build_graph(&hs, h, Neighborhood::Radius2).unwrap();
        let d = g.qh_distance(&a, &b).unwrap();
        hs_errors.push((d - 1.0).abs());
    }
    c.check(
        &format!("halfspace error {:.4}% at h=0.05", hs_errors[0] * 100.0),
        hs_errors[0] < 0.02,
    );
    c.check(
        &format!(
            "halving reduced halfspace error ({:.3e} -> {:.3e})",
            hs_errors[0], hs_errors[1]
        ),
        hs_errors[1] <= hs_errors[0] * 1.1,
    );
    c.finish();
}

#[test]
fn criterion_06_superharmonicity() {
    let (_guard, mut c) = Criterion::start("06 superharmonicity", 120.0);
    let plan = SamplingPlan::uniform(256, 3).with_max_radius(0.7);

    // 2D Poisson-extension QC fixture: log J_f
    let poisson = load("poisson2");
    let ball2 = DomainSpec::unit_ball(2);
    let field = log_jacobian_field(poisson.as_map());
    for i in 0..plan.count {
        let z = plan.point(2, 400, i);
        let d = ball2.boundary_distance(&z).unwrap();
        let rep =
            superharmonicity_check(&field, &z, &[0.3 * d, 0.6 * d, 0.9 * d], 32, &ball2).unwrap();
        for s in &rep.slacks {
            c.check(
                &format!("poisson2 slack {:.2e} at z index {i}, r {:.3}", s.slack, s.radius),
                s.slack >= -3.0 * s.quad_error,
            );
        }
    }

    // 3D perturbed-cubic gradient fixture: log det H_u
    let cubic = load("cubic3");
    let g = cubic.as_gradient().unwrap();
    let ball3 = DomainSpec::unit_ball(3);
    let field = log_hessian_det_field(g);
    for i in 0..plan.count {
        let z = plan.point(3, 401, i);
        let d = ball3.boundary_distance(&z).unwrap();
        let rep =
            superharmonicity_check(&field, &z, &[0.3 * d, 0.6 * d, 0.9 * d], 32, &ball3).unwrap();
        for s in &rep.slacks {
            c.check(
                &format!("cubic3 slack {:.2e} at z index {i}, r {:.3}", s.slack, s.radius),
                s.slack >= -3.0 * s.quad_error,
            );
        }
    }

    // constant-Jacobian fixtures: slack 0 within 1e-9
    let shear = load("shear05");
    let field = log_jacobian_field(shear.as_map());
    let rep = superharmonicity_check(
        &field,
        &Vector::new(vec![0.2, 0.1]),
        &[0.1, 0.3, 0.5],
        32,
        &ball2,
    )
    .unwrap();
    c.check(
        &format!("shear slack {:.2e}", rep.min_slack),
        rep.min_slack.abs() <= 1e-9,
    );
    let lin = load("linear3");
    let gl = lin.as_gradient().unwrap();
    let field = log_hessian_det_field(gl);
    let rep = superharmonicity_check(
        &field,
        &Vector::new(vec![0.1, 0.0, -0.2]),
        &[0.1, 0.3, 0.5],
        32,
        &ball3,
    )
    .unwrap();
    c.check(
        &format!("linear3 slack {:.2e}", rep.min_slack),
        rep.min_slack.abs() <= 1e-9,
    );
    c.finish();
}

#[test]
fn criterion_07_inequality_chains() {
    let (_guard, mut c) = Criterion::start("07 inequality chains", 120.0);
    let quad = BallQuadrature::monte_carlo(8192, 11);
    let ball3 = DomainSpec::unit_ball(3);
    let ball2 = DomainSpec::unit_ball(2);

    for name in ["linear3", "cubic3"] {
        let loaded = load(name);
        let g = loaded.as_gradient().unwrap();
        let sup_k = distortion_scan(g.map(), &SamplingPlan::uniform(2048, 7))
            .unwrap()
            .sup_k_outer;
        let plan = SamplingPlan::uniform(512, 5).with_max_radius(0.85);
        for i in 0..plan.count {
            let z = plan.point(3, 500, i);
            let rep = chain_check_3d_gradient(g, &z, &ball3, &quad, sup_k).unwrap();
            c.check(
                &format!("{name} first link at {i}: slack {:.2e}", rep.first_slack),
                rep.first_slack >= -3.0 * rep.alpha_cubed_error,
            );
            c.check(
                &format!("{name} second link at {i}: slack {:.2e}", rep.second_slack),
                rep.second_slack >= 0.0,
            );
        }
    }

    for name in ["identity2", "shear05", "poisson2"] {
        let loaded = load(name);
        let target = by_name(name).unwrap().target;
        let plan = SamplingPlan::uniform(256, 5).with_max_radius(0.85);
        for i in 0..plan.count {
            let z = plan.point(2, 501, i);
            let rep = chain_check_2d(loaded.as_map(), &z, &ball2, &target, &quad).unwrap();
            c.check(
                &format!("{name} 2d first link at {i}: slack {:.2e}", rep.first_slack),
                rep.first_slack >= -1e-12,
            );
            c.check(
                &format!("{name} 2d second link at {i}: slack {:.2e}", rep.second_slack),
                rep.second_slack >= -3.0 * rep.alpha_sq_error,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_08_harnack_chain() {
    let (_guard, mut c) = Criterion::start("08 harnack chain", 30.0);
    let plan = SamplingPlan::uniform(2048, 7);
    for f in registry() {
        let loaded = f.build().unwrap();
        let rep = harnack_chain_check(loaded.as_map(), &f.target, &plan).unwrap();
        c.check(
            &format!("{} min slack {:.2e}", f.name, rep.min_slack),
            rep.min_slack >= -1e-10,
        );
    }
    c.finish();
}

#[test]
fn criterion_09_w_field_identities() {
    let (_guard, mut c) = Criterion::start("09 w-field identities", 10.0);
    let plan = SamplingPlan::uniform(4096, 7);
    for f in registry() {
        let loaded = f.build().unwrap();
        let rep = w_field_inequality(loaded.as_map(), &plan).unwrap();
        c.check(
            &format!("{} laplacian identity defect {:.2e}", f.name, rep.max_identity_defect),
            rep.max_identity_defect <= 1e-10,
        );
        c.check(
            &format!("{} sandwich upper slack {:.2e}", f.name, rep.min_upper_slack),
            rep.min_upper_slack >= 0.0,
        );
    }
    c.finish();
}

#[test]
fn criterion_10_qh_bilipschitz() {
    let (_guard, mut c) = Criterion::start("10 qh bilipschitz", 120.0);

    // identity: ratios exactly 1 (well within twice the discretization
    // tolerance 2h)
    let g2 = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius2).unwrap();
    let id = load("identity2");
    let plan = SamplingPlan::uniform(64, 5).with_max_radius(0.85);
    let scan = qh_bilipschitz_scan(id.as_map(), &g2, &g2, &plan).unwrap();
    let tol = 2.0 * 2.0 * 0.02;
    for p in &scan.pairs {
        c.check(
            &format!("identity ratio {:.6}", p.ratio),
            (p.ratio - 1.0).abs() <= tol,
        );
    }

    // linear and cubic gradient fixtures into their ellipsoid targets
    for name in ["linear3", "cubic3"] {
        let f = by_name(name).unwrap();
        let loaded = f.build().unwrap();
        let src = build_graph(&DomainSpec::unit_ball(3), 0.08, Neighborhood::Radius2).unwrap();
        let tgt = build_graph(&f.target, 0.08, Neighborhood::Radius2).unwrap();
        let scan = qh_bilipschitz_scan(loaded.as_map(), &src, &tgt, &plan).unwrap();
        c.check(
            &format!("{name} m_hat {:.4} finite", scan.m_hat),
            scan.m_hat.is_finite() && scan.m_hat >= 1.0,
        );
        c.check(&format!("{name} 64 pairs"), scan.pairs.len() == 64);
        for p in &scan.pairs {
            c.check(
                &format!("{name} ratio {:.4} within band", p.ratio),
                p.ratio >= 1.0 / scan.m_hat - 1e-12 && p.ratio <= scan.m_hat + 1e-12,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_11_jensen_a_infinity() {
    let (_guard, mut c) = Criterion::start("11 jensen a-infinity", 30.0);
    let quad = BallQuadrature::monte_carlo(8192, 13);
    for f in registry() {
        let loaded = f.build().unwrap();
        let n = f.dim();
        let source = DomainSpec::unit_ball(n);
        let plan = SamplingPlan::uniform(8, 9).with_max_radius(0.8);
        let constant_jacobian = matches!(f.name, "identity2" | "identity3" | "shear05" | "linear3");
        for i in 0..plan.count {
            let z = plan.point(n, 600, i);
            for p in [0.5, 1.0] {
                let r = a_infinity_ratio(loaded.as_map(), &z, p, &source, &quad).unwrap();
                c.check(
                    &format!("{} jensen ratio {r:.12} (p = {p})", f.name),
                    r <= 1.0 + 1e-10,
                );
                if constant_jacobian {
                    c.check(
                        &format!("{} constant ratio {r:.12} (p = {p})", f.name),
                        (r - 1.0).abs() <= 1e-10,
                    );
                }
            }
        }
    }
    c.finish();
}
