//! Subcommand implementations: each builds a deterministic `Report`
//! (plus CSV/SVG side files) from a loaded map specification.

use serde_json::json;

use hqc_core::averaging::{
    a_infinity_ratio, alpha, chain_check_2d, chain_check_3d_gradient, koebe_ratio,
    log_hessian_det_field, log_jacobian_field, superharmonicity_check,
};
use hqc_core::error::{Error, Result};
use hqc_core::fixtures::Fixture;
use hqc_core::geometry::DomainSpec;
use hqc_core::lipschitz::{gradient_map_certificate, lipschitz_scan};
use hqc_core::mapspec::MapSpecFile;
use hqc_core::potential::{green_potential, riesz_potential, GreenKernel};
use hqc_core::qc_analysis::{
    bloch_ratio, delta_bound, distortion_scan, harnack_chain_check, w_field_inequality,
};
use hqc_core::quasihyperbolic::{build_graph, gehring_osgood_check, qh_bilipschitz_scan, Neighborhood};
use hqc_core::report::{digest, svg_heatmap, CsvTable, Report, Verdict};
use hqc_core::sampling::{BallQuadrature, SamplingPlan};
use hqc_core::vec::Vector;

// anchor strings: the inequalities the verdicts assert, written out once
pub const ANCHOR_JACOBIAN: &str = "J_f(x) > 0";
pub const ANCHOR_SANDWICH_UPPER: &str = "|grad w| <= 2 |f| sigma_max";
pub const ANCHOR_SANDWICH_LOWER: &str = "|grad w| >= 2 |f| sigma_max / H";
pub const ANCHOR_LAP_IDENTITY: &str = "lap(1 - |f|^2) = -2 ||Df||_HS^2";
pub const ANCHOR_DELTA: &str = "1 - |x| + |f(x)| >= delta > 0";
pub const ANCHOR_COLIP: &str = "inf |f(x)-f(y)|/|x-y| > 0";
pub const ANCHOR_HARNACK: &str =
    "d(f(z), bd) >= (1-|z|)/(1+|z|)^(n-1) * d(f(0), bd)";
pub const ANCHOR_CHAIN2_FIRST: &str = "sigma_max^2 >= J_f";
pub const ANCHOR_CHAIN2_SECOND: &str = "J_f >= alpha^2 (1 - 3 qerr)";
pub const ANCHOR_CHAIN3_FIRST: &str = "alpha^3 <= J_f (1 + 3 qerr)";
pub const ANCHOR_CHAIN3_SECOND: &str = "J_f <= (sup K_outer)^2 sigma_min^3";
pub const ANCHOR_JENSEN: &str = "alpha^n <= (mean J_f^p)^(1/p)";
pub const ANCHOR_SUPERHARMONIC: &str = "scalar(z) >= mean over S(z,r) - 3 qerr";
pub const ANCHOR_BILIP: &str = "1/M k(x,y) <= k'(f x, f y) <= M k(x,y)";
pub const ANCHOR_CERTIFICATE: &str = "det H_u > 0 on the sample set";
pub const ANCHOR_GRAD_FD: &str = "analytic grad G matches finite differences to 1e-6";
pub const ANCHOR_GRAD_BOUND: &str = "|grad G| <= 2 c1(n) |y-x|^(1-n)";
pub const ANCHOR_KEY_INEQ: &str = "|y| |x-y| <= |y - |y|^2 x|";
pub const ANCHOR_GREEN_SYMMETRY: &str = "G(x,y) = G(y,x)";
pub const ANCHOR_GREEN_BOUNDARY: &str = "G(x,y) -> 0 as |x| -> 1";
pub const ANCHOR_POTENTIAL_CONST: &str = "green potential of 1 matches (|x|^2 - 1)/(2n)";
pub const ANCHOR_RIESZ_RADIAL: &str = "riesz potential of 1 at 0 matches the radial integral";

fn spec_digest(spec: &MapSpecFile) -> String {
    digest(spec.to_json().as_bytes())
}

fn vector_cells(v: &Vector) -> Vec<f64> {
    v.as_slice().to_vec()
}

/// Distortion + delta + Bloch + w-field + Lipschitz scans.
pub fn analyze(spec: &MapSpecFile, samples: usize, seed: u64) -> Result<(Report, String)> {
    let loaded = spec.build()?;
    let map = loaded.as_map();
    let n = map.dim();
    let plan = SamplingPlan::uniform(samples, seed);

    let scan = distortion_scan(map, &plan)?;
    let lip = lipschitz_scan(map, &plan)?;
    let bloch = bloch_ratio(map, &plan)?;

    let mut report = Report::new(
        "analyze",
        spec_digest(spec),
        json!({"samples": samples, "seed": seed, "strategy": "uniform-ball"}),
    );
    report.verdicts.push(Verdict::new(
        "jacobian-positive",
        ANCHOR_JACOBIAN,
        scan.inf_jacobian,
        scan.inf_jacobian > 0.0,
    ));
    report.verdicts.push(Verdict::new(
        "co-lipschitz",
        ANCHOR_COLIP,
        lip.inv_hat,
        lip.inv_hat > 0.0,
    ));

    let mut aggregates = json!({
        "sup_k_outer": scan.sup_k_outer,
        "sup_k_inner": scan.sup_k_inner,
        "sup_linear_dilatation": scan.sup_linear_dilatation,
        "inf_jacobian": scan.inf_jacobian,
        "sup_jacobian": scan.sup_jacobian,
        "l_hat": lip.l_hat,
        "inv_hat": lip.inv_hat,
        "l_hat_pair": {"x": lip.max_pair.x, "y": lip.max_pair.y, "ratio": lip.max_pair.ratio},
        "inv_hat_pair": {"x": lip.min_pair.x, "y": lip.min_pair.y, "ratio": lip.min_pair.ratio},
        "ratio_histogram": lip.histogram,
        "bloch_ratio": bloch.sup_ratio,
        "bloch_sup_f": bloch.sup_f_norm,
    });

    if let Ok(wf) = w_field_inequality(map, &plan) {
        report.verdicts.push(Verdict::new(
            "sandwich-upper",
            ANCHOR_SANDWICH_UPPER,
            wf.min_upper_slack,
            wf.min_upper_slack >= 0.0,
        ));
        report.verdicts.push(Verdict::new(
            "sandwich-lower",
            ANCHOR_SANDWICH_LOWER,
            wf.min_lower_slack,
            wf.min_lower_slack >= -1e-12,
        ));
        report.verdicts.push(Verdict::new(
            "laplacian-identity",
            ANCHOR_LAP_IDENTITY,
            1e-10 - wf.max_identity_defect,
            wf.max_identity_defect <= 1e-10,
        ));
        aggregates["w_field_a_hat"] = json!(wf.a_hat);
        aggregates["w_field_b_hat"] = json!(wf.b_hat);
    }

    match delta_bound(map, &plan) {
        Ok(delta) => {
            report.verdicts.push(Verdict::new(
                "delta-positive",
                ANCHOR_DELTA,
                delta.inf,
                delta.inf > 0.0,
            ));
            aggregates["delta_inf"] = json!(delta.inf);
        }
        Err(Error::Range(reason)) => {
            aggregates["delta_inf"] = json!(null);
            aggregates["delta_note"] = json!(format!("not a self-map of the ball: {reason}"));
        }
        Err(e) => return Err(e),
    }

    if let Some(g) = loaded.as_gradient() {
        let cert = gradient_map_certificate(g, &plan)?;
        report.verdicts.push(Verdict::new(
            "gradient-certificate",
            ANCHOR_CERTIFICATE,
            cert.inf_jacobian,
            cert.passed,
        ));
        aggregates["certificate_inf_jacobian"] = json!(cert.inf_jacobian);
    }

    report.aggregates = aggregates;

    let mut csv = CsvTable::new(match n {
        2 => vec!["x1", "x2", "k_outer", "k_inner", "linear_dilatation", "jacobian"],
        _ => vec!["x1", "x2", "x3", "k_outer", "k_inner", "linear_dilatation", "jacobian"],
    });
    for rec in &scan.records {
        let mut cells = vector_cells(&rec.point);
        cells.extend([rec.k_outer, rec.k_inner, rec.linear_dilatation, rec.jacobian]);
        csv.push_floats(&cells);
    }
    Ok((report, csv.render()))
}

/// Averaged derivative over a grid. For n = 3 the grid covers the
/// equatorial slice x3 = 0.
pub fn alpha_field(
    spec: &MapSpecFile,
    grid: usize,
    nodes: usize,
    seed: u64,
) -> Result<(Report, String, Option<String>)> {
    let loaded = spec.build()?;
    let map = loaded.as_map();
    let n = map.dim();
    let source = DomainSpec::unit_ball(n);
    let quad = BallQuadrature::monte_carlo(nodes, seed);

    let mut csv = CsvTable::new(match n {
        2 => vec!["x1", "x2", "alpha", "stderr", "d_ratio"],
        _ => vec!["x1", "x2", "x3", "alpha", "stderr", "d_ratio"],
    });
    let mut cells: Vec<Vec<Option<f64>>> = vec![vec![None; grid]; grid];
    let mut min_alpha = f64::INFINITY;
    let mut max_alpha = f64::NEG_INFINITY;
    for i in 0..grid {
        for j in 0..grid {
            let x1 = -1.0 + (j as f64 + 0.5) * 2.0 / grid as f64;
            let x2 = -1.0 + (i as f64 + 0.5) * 2.0 / grid as f64;
            let mut coords = vec![x1, x2];
            if n == 3 {
                coords.push(0.0);
            }
            let z = Vector::new(coords);
            if z.norm() > 0.95 {
                continue;
            }
            let a = alpha(map, &z, &source, &quad)?;
            min_alpha = min_alpha.min(a.value);
            max_alpha = max_alpha.max(a.value);
            cells[i][j] = Some(a.value);
            let d_ratio = match &spec.target {
                Some(target) => {
                    let fz = map.evaluate(&z)?;
                    if target.contains(&fz)? {
                        target.boundary_distance(&fz)? / a.radius
                    } else {
                        f64::NAN
                    }
                }
                None => f64::NAN,
            };
            let mut row = vector_cells(&z);
            row.extend([a.value, a.error, d_ratio]);
            csv.push_floats(&row);
        }
    }

    let mut report = Report::new(
        "alpha-field",
        spec_digest(spec),
        json!({"grid": grid, "nodes": nodes, "seed": seed}),
    );
    report.aggregates = json!({
        "min_alpha": min_alpha,
        "max_alpha": max_alpha,
    });
    report.verdicts.push(Verdict::new(
        "alpha-positive",
        "alpha_f(z) > 0 over the grid",
        min_alpha,
        min_alpha > 0.0 && min_alpha.is_finite(),
    ));
    let svg = if n == 2 {
        Some(svg_heatmap(&cells, 16, "alpha_f"))
    } else {
        None
    };
    Ok((report, csv.render(), svg))
}

/// Superharmonicity slack table.
pub fn superharmonic(
    spec: &MapSpecFile,
    use_hessian: bool,
    points: usize,
    order: usize,
    seed: u64,
) -> Result<(Report, String)> {
    let loaded = spec.build()?;
    let n = loaded.dim();
    let domain = DomainSpec::unit_ball(n);
    let plan = SamplingPlan::uniform(points, seed).with_max_radius(0.75);

    let mut csv = CsvTable::new(match n {
        2 => vec!["x1", "x2", "radius", "slack", "quad_error"],
        _ => vec!["x1", "x2", "x3", "radius", "slack", "quad_error"],
    });
    let mut min_adjusted = f64::INFINITY;
    for i in 0..points {
        let z = plan.point(n, 70, i);
        let d = domain.boundary_distance(&z)?;
        let radii = [0.3 * d, 0.6 * d, 0.9 * d];
        let report = if use_hessian {
            let g = loaded.as_gradient().ok_or_else(|| {
                Error::Precondition(
                    "logdetH needs a gradient-potential map specification".into(),
                )
            })?;
            superharmonicity_check(log_hessian_det_field(g), &z, &radii, order, &domain)?
        } else {
            superharmonicity_check(log_jacobian_field(loaded.as_map()), &z, &radii, order, &domain)?
        };
        for s in &report.slacks {
            min_adjusted = min_adjusted.min(s.slack + 3.0 * s.quad_error);
            let mut row = vector_cells(&z);
            row.extend([s.radius, s.slack, s.quad_error]);
            csv.push_floats(&row);
        }
    }

    let quantity = if use_hessian { "logdetH" } else { "logJ" };
    let mut report = Report::new(
        "superharmonic",
        spec_digest(spec),
        json!({"quantity": quantity, "points": points, "order": order, "seed": seed}),
    );
    report.aggregates = json!({"min_slack_plus_3qerr": min_adjusted});
    report.verdicts.push(Verdict::new(
        "superharmonic",
        ANCHOR_SUPERHARMONIC,
        min_adjusted,
        min_adjusted >= 0.0,
    ));
    Ok((report, csv.render()))
}

/// Distance between two points with a convergence row at h/2 and an
/// optional polyline export from the fine graph.
pub fn qh_dist(
    domain: &DomainSpec,
    domain_name: &str,
    x: &Vector,
    y: &Vector,
    h: f64,
    export_path: bool,
) -> Result<(Report, Option<String>)> {
    let coarse = build_graph(domain, h, Neighborhood::Radius2)?;
    let d_coarse = coarse.qh_distance(x, y)?;
    let fine = build_graph(domain, h / 2.0, Neighborhood::Radius2)?;
    let (d_fine, polyline) = fine.qh_path(x, y)?;

    let mut report = Report::new(
        "qh-dist",
        digest(format!("{domain_name}:{x}:{y}:{h}").as_bytes()),
        json!({"domain": domain_name, "h": h}),
    );
    report.aggregates = json!({
        "distance_coarse": d_coarse,
        "distance_fine": d_fine,
        "h_coarse": h,
        "h_fine": h / 2.0,
        "coarse_nodes": coarse.node_count(),
        "fine_nodes": fine.node_count(),
        "gap": (d_coarse - d_fine).abs(),
    });
    let path_csv = if export_path {
        let n = domain.dim();
        let mut csv = CsvTable::new(if n == 2 {
            vec!["x1", "x2"]
        } else {
            vec!["x1", "x2", "x3"]
        });
        for p in &polyline {
            csv.push_floats(p.as_slice());
        }
        Some(csv.render())
    } else {
        None
    };
    Ok((report, path_csv))
}

/// Quasihyperbolic bi-Lipschitz scan between the unit ball and the
/// declared target domain.
pub fn qh_bilip(
    spec: &MapSpecFile,
    pairs: usize,
    h: Option<f64>,
    seed: u64,
) -> Result<(Report, String)> {
    let loaded = spec.build()?;
    let map = loaded.as_map();
    let n = map.dim();
    let target_domain = spec.target.clone().ok_or_else(|| {
        Error::Precondition("bi-Lipschitz scan needs a target domain in the mapspec".into())
    })?;
    let h = h.unwrap_or(if n == 2 { 0.02 } else { 0.08 });
    let source = build_graph(&DomainSpec::unit_ball(n), h, Neighborhood::Radius2)?;
    let target = build_graph(&target_domain, h, Neighborhood::Radius2)?;
    let plan = SamplingPlan::uniform(pairs, seed).with_max_radius(0.85);
    let scan = qh_bilipschitz_scan(map, &source, &target, &plan)?;

    let mut worst_in_band = f64::INFINITY;
    for p in &scan.pairs {
        worst_in_band = worst_in_band
            .min(scan.m_hat - p.ratio)
            .min(p.ratio - 1.0 / scan.m_hat);
    }

    let mut report = Report::new(
        "qh-bilip",
        spec_digest(spec),
        json!({"pairs": pairs, "h": h, "seed": seed}),
    );
    let mut aggregates = json!({
        "m_hat": scan.m_hat,
        "min_ratio": scan.min_ratio,
        "max_ratio": scan.max_ratio,
        "source_nodes": source.node_count(),
        "target_nodes": target.node_count(),
    });
    report.verdicts.push(Verdict::new(
        "bilipschitz-band",
        ANCHOR_BILIP,
        worst_in_band,
        scan.m_hat.is_finite() && worst_in_band >= -1e-12,
    ));
    if let Some(k) = spec.declared_k {
        let go = gehring_osgood_check(map, &source, &target, &plan, k)?;
        aggregates["gehring_osgood_c"] = json!(go.c_emp);
        aggregates["gehring_osgood_alpha"] = json!(go.alpha);
    }
    report.aggregates = aggregates;

    let mut csv = CsvTable::new(match n {
        2 => vec!["x1", "x2", "y1", "y2", "k_source", "k_target", "ratio"],
        _ => vec!["x1", "x2", "x3", "y1", "y2", "y3", "k_source", "k_target", "ratio"],
    });
    for p in &scan.pairs {
        let mut row = vector_cells(&p.x);
        row.extend(vector_cells(&p.y));
        row.extend([p.k_source, p.k_target, p.ratio]);
        csv.push_floats(&row);
    }
    Ok((report, csv.render()))
}

/// Green kernel calibration: closed-form gradient vs finite differences,
/// the gradient bound, the reflected-distance inequality, symmetry,
/// boundary vanishing, and the closed-form potential checks.
pub fn green_verify() -> Result<Report> {
    let mut report = Report::new("green-verify", digest(b"green-verify"), json!({}));

    for n in [2usize, 3] {
        let kernel = GreenKernel::new(n)?;
        let plan = SamplingPlan::uniform(4000, 13).with_max_radius(0.9);
        let h = 1e-6;
        let mut checked = 0;
        let mut max_rel: f64 = 0.0;
        let mut i = 0usize;
        while checked < 100 {
            let x = plan.point(n, 60, 2 * i);
            let y = plan.point(n, 60, 2 * i + 1);
            i += 1;
            if x.dist(&y) < 0.1 {
                continue;
            }
            let grad = kernel.green_gradient(&x, &y)?;
            for k in 0..n {
                let mut fwd = x.as_slice().to_vec();
                fwd[k] += h;
                let mut bwd = x.as_slice().to_vec();
                bwd[k] -= h;
                let fd = (kernel.green(&Vector::new(fwd), &y)?
                    - kernel.green(&Vector::new(bwd), &y)?)
                    / (2.0 * h);
                max_rel = max_rel.max((fd - grad[k]).abs() / (1.0 + grad[k].abs()));
            }
            checked += 1;
        }
        report.verdicts.push(Verdict::new(
            &format!("gradient-vs-fd-n{n}"),
            ANCHOR_GRAD_FD,
            1e-6 - max_rel,
            max_rel < 1e-6,
        ));

        let plan = SamplingPlan::uniform(2000, 17).with_max_radius(0.999);
        let mut min_slack = f64::INFINITY;
        for pair in plan.points(n, 61).chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            if x.dist(y) < 1e-9 {
                continue;
            }
            let g = kernel.green_gradient(x, y)?;
            let bound = 2.0 * kernel.c1 * y.dist(x).powi(1 - n as i32);
            min_slack = min_slack.min(bound - g.norm());
        }
        report.verdicts.push(Verdict::new(
            &format!("gradient-bound-n{n}"),
            ANCHOR_GRAD_BOUND,
            min_slack,
            min_slack >= 0.0,
        ));
    }

    // reflected-distance inequality on 10^6 random pairs in B^3
    let plan = SamplingPlan::uniform(2_000_000, 23);
    let mut min_slack = f64::INFINITY;
    for i in 0..1_000_000usize {
        let x = plan.point(3, 62, 2 * i);
        let y = plan.point(3, 62, 2 * i + 1);
        let lhs = y.norm() * x.dist(&y);
        let rhs = y.sub(&x.scale(y.norm_sq())).norm();
        min_slack = min_slack.min(rhs - lhs);
    }
    report.verdicts.push(Verdict::new(
        "reflected-distance",
        ANCHOR_KEY_INEQ,
        min_slack,
        min_slack >= -1e-12,
    ));

    // symmetry and boundary vanishing in B^3
    let kernel = GreenKernel::new(3)?;
    let plan = SamplingPlan::uniform(200, 9).with_max_radius(0.95);
    let mut max_rel: f64 = 0.0;
    for pair in plan.points(3, 63).chunks(2) {
        let (x, y) = (&pair[0], &pair[1]);
        if x.dist(y) < 0.05 {
            continue;
        }
        let gxy = kernel.green(x, y)?;
        let gyx = kernel.green(y, x)?;
        max_rel = max_rel.max((gxy - gyx).abs() / gxy.abs().max(1e-6));
    }
    report.verdicts.push(Verdict::new(
        "green-symmetry",
        ANCHOR_GREEN_SYMMETRY,
        1e-10 - max_rel,
        max_rel <= 1e-10,
    ));
    let near_boundary = kernel
        .green(&Vector::new(vec![1.0 - 1e-6, 0.0, 0.0]), &Vector::zeros(3))?
        .abs();
    report.verdicts.push(Verdict::new(
        "green-boundary",
        ANCHOR_GREEN_BOUNDARY,
        1e-5 - near_boundary,
        near_boundary < 1e-5,
    ));

    // closed-form potential checks
    let quad = BallQuadrature::monte_carlo(1 << 20, 42);
    let w0 = green_potential(|_| 1.0, &Vector::zeros(3), &quad)?;
    let w_half = green_potential(|_| 1.0, &Vector::new(vec![0.5, 0.0, 0.0]), &quad)?;
    let err0 = (w0.value + 1.0 / 6.0).abs();
    let err_half = (w_half.value + 0.125).abs();
    report.verdicts.push(Verdict::new(
        "potential-at-0",
        ANCHOR_POTENTIAL_CONST,
        1e-3 - err0,
        err0 < 1e-3,
    ));
    report.verdicts.push(Verdict::new(
        "potential-at-half",
        ANCHOR_POTENTIAL_CONST,
        1e-3 - err_half,
        err_half < 1e-3,
    ));
    let r = riesz_potential(2.0, |_| 1.0, &Vector::zeros(3), &quad)?;
    let riesz_err = (r.value - 2.0 * std::f64::consts::PI).abs();
    report.verdicts.push(Verdict::new(
        "riesz-radial",
        ANCHOR_RIESZ_RADIAL,
        2.0 * std::f64::consts::PI * 1e-2 - riesz_err,
        riesz_err < 2.0 * std::f64::consts::PI * 1e-2,
    ));

    report.aggregates = json!({
        "potential_at_0": w0.value,
        "potential_at_half_e1": w_half.value,
        "riesz_s2_at_0": r.value,
    });
    Ok(report)
}

/// The per-fixture asserted-property suite behind `fixtures run-all`.
pub fn fixture_suite(fixture: &Fixture) -> Result<(Report, String)> {
    let loaded = fixture.build()?;
    let map = loaded.as_map();
    let n = map.dim();
    let plan = SamplingPlan::uniform(2048, 7);
    let quad = BallQuadrature::monte_carlo(8192, 11);
    let source = DomainSpec::unit_ball(n);

    let mut report = Report::new(
        "fixture-suite",
        spec_digest(&fixture.spec),
        json!({"fixture": fixture.name, "samples": 2048, "seed": 7, "quad_nodes": 8192}),
    );

    let scan = distortion_scan(map, &plan)?;
    report.verdicts.push(Verdict::new(
        "jacobian-positive",
        ANCHOR_JACOBIAN,
        scan.inf_jacobian,
        scan.inf_jacobian > 0.0,
    ));

    let wf = w_field_inequality(map, &plan)?;
    report.verdicts.push(Verdict::new(
        "sandwich-upper",
        ANCHOR_SANDWICH_UPPER,
        wf.min_upper_slack,
        wf.min_upper_slack >= 0.0,
    ));
    report.verdicts.push(Verdict::new(
        "sandwich-lower",
        ANCHOR_SANDWICH_LOWER,
        wf.min_lower_slack,
        wf.min_lower_slack >= -1e-12,
    ));
    report.verdicts.push(Verdict::new(
        "laplacian-identity",
        ANCHOR_LAP_IDENTITY,
        1e-10 - wf.max_identity_defect,
        wf.max_identity_defect <= 1e-10,
    ));

    let mut aggregates = json!({
        "sup_k_outer": scan.sup_k_outer,
        "sup_k_inner": scan.sup_k_inner,
        "inf_jacobian": scan.inf_jacobian,
    });

    if fixture.into_ball {
        let delta = delta_bound(map, &plan)?;
        report.verdicts.push(Verdict::new(
            "delta-positive",
            ANCHOR_DELTA,
            delta.inf,
            delta.inf > 0.0,
        ));
        aggregates["delta_inf"] = json!(delta.inf);
    }

    let bloch = bloch_ratio(map, &SamplingPlan::uniform(1024, 7))?;
    aggregates["bloch_ratio"] = json!(bloch.sup_ratio);

    let harnack = harnack_chain_check(map, &fixture.target, &plan)?;
    report.verdicts.push(Verdict::new(
        "harnack-chain",
        ANCHOR_HARNACK,
        harnack.min_slack,
        harnack.min_slack >= -1e-10,
    ));

    let lip = lipschitz_scan(map, &plan)?;
    report.verdicts.push(Verdict::new(
        "co-lipschitz",
        ANCHOR_COLIP,
        lip.inv_hat,
        lip.inv_hat > 0.0,
    ));
    aggregates["l_hat"] = json!(lip.l_hat);
    aggregates["inv_hat"] = json!(lip.inv_hat);

    // inequality chains over a reduced point set
    let chain_plan = SamplingPlan::uniform(64, 5).with_max_radius(0.8);
    if n == 2 {
        let mut min_first = f64::INFINITY;
        let mut min_second = f64::INFINITY;
        for i in 0..chain_plan.count {
            let z = chain_plan.point(2, 71, i);
            let rep = chain_check_2d(map, &z, &source, &fixture.target, &quad)?;
            min_first = min_first.min(rep.first_slack);
            min_second = min_second.min(rep.second_slack + 3.0 * rep.alpha_sq_error);
        }
        report.verdicts.push(Verdict::new(
            "chain2-first",
            ANCHOR_CHAIN2_FIRST,
            min_first,
            min_first >= -1e-12,
        ));
        report.verdicts.push(Verdict::new(
            "chain2-second",
            ANCHOR_CHAIN2_SECOND,
            min_second,
            min_second >= 0.0,
        ));
    }
    if let Some(g) = loaded.as_gradient() {
        if n == 3 {
            let mut min_first = f64::INFINITY;
            let mut min_second = f64::INFINITY;
            for i in 0..chain_plan.count {
                let z = chain_plan.point(3, 72, i);
                let rep = chain_check_3d_gradient(g, &z, &source, &quad, scan.sup_k_outer)?;
                min_first = min_first.min(rep.first_slack + 3.0 * rep.alpha_cubed_error);
                min_second = min_second.min(rep.second_slack);
            }
            report.verdicts.push(Verdict::new(
                "chain3-first",
                ANCHOR_CHAIN3_FIRST,
                min_first,
                min_first >= 0.0,
            ));
            report.verdicts.push(Verdict::new(
                "chain3-second",
                ANCHOR_CHAIN3_SECOND,
                min_second,
                min_second >= 0.0,
            ));
            let cert = gradient_map_certificate(g, &SamplingPlan::uniform(4096, 7))?;
            report.verdicts.push(Verdict::new(
                "gradient-certificate",
                ANCHOR_CERTIFICATE,
                cert.inf_jacobian,
                cert.passed,
            ));
            aggregates["certificate_inf_jacobian"] = json!(cert.inf_jacobian);
        }
    }

    // Jensen direction for the A-infinity comparison
    let jensen_plan = SamplingPlan::uniform(16, 9).with_max_radius(0.8);
    let mut max_jensen = f64::NEG_INFINITY;
    for i in 0..jensen_plan.count {
        let z = jensen_plan.point(n, 73, i);
        let quad_small = BallQuadrature::monte_carlo(4096, 13);
        let r = a_infinity_ratio(map, &z, 0.5, &source, &quad_small)?;
        max_jensen = max_jensen.max(r);
    }
    report.verdicts.push(Verdict::new(
        "jensen",
        ANCHOR_JENSEN,
        1.0 + 1e-8 - max_jensen,
        max_jensen <= 1.0 + 1e-8,
    ));
    aggregates["max_jensen_ratio"] = json!(max_jensen);

    // superharmonicity of log J holds for planar harmonic QC maps and of
    // log det H for spatial gradient maps; test exactly those cases
    let sh_plan = SamplingPlan::uniform(24, 3).with_max_radius(0.7);
    let mut min_adjusted = f64::INFINITY;
    let mut run_sh = |field: &dyn Fn(&Vector) -> Result<f64>| -> Result<()> {
        for i in 0..sh_plan.count {
            let z = sh_plan.point(n, 74, i);
            let d = source.boundary_distance(&z)?;
            let radii = [0.3 * d, 0.6 * d, 0.9 * d];
            let rep = superharmonicity_check(field, &z, &radii, 32, &source)?;
            for s in &rep.slacks {
                min_adjusted = min_adjusted.min(s.slack + 3.0 * s.quad_error);
            }
        }
        Ok(())
    };
    if n == 2 {
        let field = log_jacobian_field(map);
        run_sh(&field)?;
    } else if let Some(g) = loaded.as_gradient() {
        let field = log_hessian_det_field(g);
        run_sh(&field)?;
    }
    if min_adjusted.is_finite() {
        report.verdicts.push(Verdict::new(
            "superharmonic",
            ANCHOR_SUPERHARMONIC,
            min_adjusted,
            min_adjusted >= 0.0,
        ));
    }

    // Koebe ratio range over a small scan
    let koebe_plan = SamplingPlan::uniform(16, 11).with_max_radius(0.8);
    let mut koebe_min = f64::INFINITY;
    let mut koebe_max = f64::NEG_INFINITY;
    for i in 0..koebe_plan.count {
        let z = koebe_plan.point(n, 75, i);
        let k = koebe_ratio(map, &z, &source, &fixture.target, &quad)?;
        koebe_min = koebe_min.min(k.ratio);
        koebe_max = koebe_max.max(k.ratio);
    }
    aggregates["koebe_min"] = json!(koebe_min);
    aggregates["koebe_max"] = json!(koebe_max);

    report.aggregates = aggregates;

    let mut csv = CsvTable::new(match n {
        2 => vec!["x1", "x2", "k_outer", "k_inner", "linear_dilatation", "jacobian"],
        _ => vec!["x1", "x2", "x3", "k_outer", "k_inner", "linear_dilatation", "jacobian"],
    });
    for rec in &scan.records {
        let mut cells = vector_cells(&rec.point);
        cells.extend([rec.k_outer, rec.k_inner, rec.linear_dilatation, rec.jacobian]);
        csv.push_floats(&cells);
    }
    Ok((report, csv.render()))
}
