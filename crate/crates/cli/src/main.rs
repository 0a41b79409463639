//! `hqc`: harmonic quasiconformal map laboratory.
//!
//! Exit codes: 0 all assertions pass, 2 assertion failure, 3 input
//! error, 4 accuracy/convergence failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hqc_core::error::Error;
use hqc_core::geometry::DomainSpec;
use hqc_core::mapspec::MapSpecFile;
use hqc_core::report::Report;
use hqc_core::vec::Vector;

mod run;

#[derive(Debug, Parser)]
#[command(name = "hqc", version, about = "harmonic quasiconformal map laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distortion, delta, Bloch, w-field and Lipschitz scans of a map.
    Analyze {
        mapspec: PathBuf,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Averaged derivative over a grid; CSV plus an SVG heatmap in 2D.
    AlphaField {
        mapspec: PathBuf,
        #[arg(long, default_value_t = 24)]
        grid: usize,
        #[arg(long, default_value_t = 32768)]
        nodes: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Superharmonicity slack table for log J or log det H.
    Superharmonic {
        mapspec: PathBuf,
        #[arg(long, value_enum, default_value_t = Quantity::LogJ)]
        quantity: Quantity,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 32)]
        order: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Quasihyperbolic distance between two points of a named domain.
    QhDist {
        /// ball2, ball3, halfspace2 or halfspace3
        domain: String,
        /// comma-separated coordinates, e.g. "0,0"
        x: String,
        y: String,
        #[arg(long)]
        h: f64,
        /// also export the realizing node polyline as CSV
        #[arg(long)]
        path: bool,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Quasihyperbolic bi-Lipschitz ratio scan of a map.
    QhBilip {
        mapspec: PathBuf,
        #[arg(long, default_value_t = 64)]
        pairs: usize,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Integrability bootstrap trace as JSON.
    Bootstrap {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p0: f64,
    },
    /// Green kernel and potential calibration suite.
    GreenVerify {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Built-in fixture registry.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Debug, Subcommand)]
enum FixturesAction {
    /// List fixture names and descriptions.
    List,
    /// Write a fixture's map specification to `<out>/<name>.json`.
    Export {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run every fixture's asserted-property suite; nonzero exit on any
    /// failure.
    RunAll {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// log of the Jacobian determinant.
    #[value(name = "logJ")]
    LogJ,
    /// log of the Hessian determinant of the potential (gradient maps).
    #[value(name = "logdetH")]
    LogdetH,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::Precondition(_)
        | Error::DimensionMismatch { .. }
        | Error::NotHarmonic { .. }
        | Error::OutsideDomain(_)
        | Error::Capability(_) => 3,
        Error::Accuracy(_) | Error::Resolution(_) | Error::Connectivity(_) => 4,
        Error::Degenerate(_)
        | Error::NonPositiveJacobian { .. }
        | Error::Range(_)
        | Error::Singularity(_) => 2,
    }
}

fn parse_vector(text: &str) -> Result<Vector, Error> {
    let coords = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad coordinate {c:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::new(coords))
}

fn parse_domain(name: &str) -> Result<DomainSpec, Error> {
    match name {
        "ball2" => Ok(DomainSpec::unit_ball(2)),
        "ball3" => Ok(DomainSpec::unit_ball(3)),
        "halfspace2" => DomainSpec::half_space(Vector::basis(2, 1), 0.0),
        "halfspace3" => DomainSpec::half_space(Vector::basis(3, 2), 0.0),
        other => Err(Error::Parse(format!(
            "unknown domain {other:?} (expected ball2, ball3, halfspace2, halfspace3)"
        ))),
    }
}

fn write_outputs(
    out: &Path,
    stem: &str,
    report: &mut Report,
    csv: Option<(&str, String)>,
) -> Result<(), Error> {
    std::fs::create_dir_all(out)
        .map_err(|e| Error::Parse(format!("cannot create {}: {e}", out.display())))?;
    if let Some((suffix, body)) = csv {
        let csv_name = format!("{stem}_{suffix}.csv");
        let csv_path = out.join(&csv_name);
        std::fs::write(&csv_path, body)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", csv_path.display())))?;
        // the report references its table by (relative) file name
        report.per_point_csv = Some(csv_name);
    }
    let json_path = out.join(format!("{stem}.json"));
    std::fs::write(&json_path, report.to_json())
        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", json_path.display())))?;
    Ok(())
}

fn print_verdicts(report: &Report) {
    for v in &report.verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} :: {} (slack {:+.6e})", v.check, v.anchor, v.slack);
    }
}

fn run_command(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Analyze {
            mapspec,
            samples,
            seed,
            out,
        } => {
            let spec = MapSpecFile::load(&mapspec)?;
            let stem = file_stem(&mapspec);
            let (mut report, csv) = run::analyze(&spec, samples, seed)?;
            write_outputs(&out, &format!("{stem}_analyze"), &mut report, Some(("points", csv)))?;
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::AlphaField {
            mapspec,
            grid,
            nodes,
            seed,
            out,
        } => {
            let spec = MapSpecFile::load(&mapspec)?;
            let stem = file_stem(&mapspec);
            let (mut report, csv, svg) = run::alpha_field(&spec, grid, nodes, seed)?;
            write_outputs(&out, &format!("{stem}_alpha"), &mut report, Some(("field", csv)))?;
            if let Some(svg) = svg {
                let svg_path = out.join(format!("{stem}_alpha.svg"));
                std::fs::write(&svg_path, svg).map_err(|e| {
                    Error::Parse(format!("cannot write {}: {e}", svg_path.display()))
                })?;
            }
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::Superharmonic {
            mapspec,
            quantity,
            points,
            order,
            seed,
            out,
        } => {
            let spec = MapSpecFile::load(&mapspec)?;
            let stem = file_stem(&mapspec);
            let use_hessian = quantity == Quantity::LogdetH;
            let (mut report, csv) = run::superharmonic(&spec, use_hessian, points, order, seed)?;
            write_outputs(
                &out,
                &format!("{stem}_superharmonic"),
                &mut report,
                Some(("slacks", csv)),
            )?;
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::QhDist {
            domain,
            x,
            y,
            h,
            path,
            out,
        } => {
            let dom = parse_domain(&domain)?;
            let xv = parse_vector(&x)?;
            let yv = parse_vector(&y)?;
            let (mut report, path_csv) = run::qh_dist(&dom, &domain, &xv, &yv, h, path)?;
            let csv = path_csv.map(|body| ("path", body));
            write_outputs(&out, &format!("qh_dist_{domain}"), &mut report, csv)?;
            println!("k({x} -> {y}) = {}", report.aggregates["distance_fine"]);
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::QhBilip {
            mapspec,
            pairs,
            h,
            seed,
            out,
        } => {
            let spec = MapSpecFile::load(&mapspec)?;
            let stem = file_stem(&mapspec);
            let (mut report, csv) = run::qh_bilip(&spec, pairs, h, seed)?;
            write_outputs(&out, &format!("{stem}_qh_bilip"), &mut report, Some(("ratios", csv)))?;
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::Bootstrap { n, p0 } => {
            let trace = hqc_core::potential::sobolev_bootstrap(n, p0)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&trace).expect("trace serialization cannot fail")
            );
            Ok(true)
        }
        Command::GreenVerify { out } => {
            let mut report = run::green_verify()?;
            write_outputs(&out, "green_verify", &mut report, None)?;
            print_verdicts(&report);
            Ok(report.passed())
        }
        Command::Fixtures { action } => match action {
            FixturesAction::List => {
                for f in hqc_core::fixtures::registry() {
                    println!("{:<12} n={}  {}", f.name, f.dim(), f.description);
                }
                Ok(true)
            }
            FixturesAction::Export { name, out } => {
                let f = hqc_core::fixtures::by_name(&name).ok_or_else(|| {
                    Error::Parse(format!("unknown fixture {name:?}; see `fixtures list`"))
                })?;
                std::fs::create_dir_all(&out)
                    .map_err(|e| Error::Parse(format!("cannot create {}: {e}", out.display())))?;
                let path = out.join(format!("{name}.json"));
                std::fs::write(&path, f.spec.to_json())
                    .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
                println!("wrote {}", path.display());
                Ok(true)
            }
            FixturesAction::RunAll { out } => {
                let mut all_pass = true;
                for f in hqc_core::fixtures::registry() {
                    let (mut report, csv) = run::fixture_suite(&f)?;
                    write_outputs(&out, &format!("{}_suite", f.name), &mut report, Some(("points", csv)))?;
                    println!("== fixture {} ==", f.name);
                    print_verdicts(&report);
                    all_pass &= report.passed();
                }
                Ok(all_pass)
            }
        },
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hqc: assertion failure (see verdicts above)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("hqc: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
