//! Command dispatch: resolve the configuration, evaluate, and emit one table
//! plus a one-line summary. Tables go to the configured file (summary to
//! stdout) or to stdout (summary to stderr). All scans are sequential and
//! seeded, so identical configurations produce identical bytes.

use super::config::{GridConfig, OutputFormat, RunConfig};
use crate::equilibrium::{closed_form_metric, curvature_with_step, pullback_metric, MetricField};
use crate::error::{GtdError, Result};
use crate::extremal::ng_residual;
use crate::phasespace::{all_subsets, check_legendre_invariance, PhaseMetricSpec, PhasePoint};
use crate::processes::{annotate_second_law, integrate_geodesic, shoot_between, GeodesicPath};
use crate::systems::FundamentalEquation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// The five front-end commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Tabulate the induced metric by both routes.
    Metric,
    /// Tabulate curvature over a grid.
    Curvature,
    /// Integrate or solve one process.
    Geodesic,
    /// Tabulate the extremality residual over a grid.
    NgCheck,
    /// Sample the invariance defect over all index subsets.
    LegendreCheck,
}

impl Command {
    fn native_format(self) -> OutputFormat {
        match self {
            Command::Metric | Command::Curvature | Command::Geodesic => OutputFormat::Csv,
            Command::NgCheck | Command::LegendreCheck => OutputFormat::Json,
        }
    }
}

/// Load the configuration file and execute one command.
pub fn run(command: Command, config_path: &Path, out_override: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config_path)?;
    let cfg = RunConfig::from_json(&text)?;
    dispatch(command, &cfg, out_override)
}

/// Execute one command against an already-parsed configuration.
pub fn dispatch(command: Command, cfg: &RunConfig, out_override: Option<&Path>) -> Result<()> {
    let eq = cfg.system.build()?;
    let spec = cfg.metric.build()?;
    if spec.representation != eq.representation() {
        return Err(GtdError::Config(format!(
            "metric representation {:?} does not match system {:?} ({:?})",
            spec.representation,
            eq.name(),
            eq.representation()
        )));
    }

    let path: Option<PathBuf> = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone().map(PathBuf::from)));
    let format = cfg
        .output
        .as_ref()
        .and_then(|o| o.format)
        .unwrap_or_else(|| command.native_format());

    let (table, summary) = match command {
        Command::Metric => metric_tables(cfg, &eq, &spec, format)?,
        Command::Curvature => curvature_tables(cfg, &eq, &spec, format)?,
        Command::Geodesic => geodesic_tables(cfg, &eq, &spec, format)?,
        Command::NgCheck => ng_tables(cfg, &eq, &spec, format)?,
        Command::LegendreCheck => legendre_tables(cfg, &eq, &spec, format)?,
    };

    match path {
        Some(p) => {
            std::fs::write(&p, table)?;
            println!("{summary}");
            println!("table written to {}", p.display());
        }
        None => {
            print!("{table}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Format one value for CSV; negative zero is normalized so coincident runs
/// emit coincident bytes.
fn fmt(v: f64) -> String {
    let v = v + 0.0;
    format!("{v}")
}

fn require_grid(cfg: &RunConfig, n: usize) -> Result<&GridConfig> {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| GtdError::Config("this command needs a \"grid\" section".into()))?;
    grid.validate(n)?;
    Ok(grid)
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

fn finish_json(rows: Vec<Value>) -> String {
    let mut text = serde_json::to_string_pretty(&Value::Array(rows)).expect("table serializes");
    text.push('\n');
    text
}

fn metric_tables(
    cfg: &RunConfig,
    eq: &FundamentalEquation,
    spec: &PhaseMetricSpec,
    format: OutputFormat,
) -> Result<(String, String)> {
    let n = eq.n();
    let grid = require_grid(cfg, n)?;
    let points = grid.points();
    let mut worst = 0.0f64;
    let mut csv = String::new();
    let mut rows = Vec::new();

    if format == OutputFormat::Csv {
        let mut header: Vec<String> = eq.coords().to_vec();
        for a in 0..n {
            for b in a..n {
                header.push(format!("g_{}{}", a + 1, b + 1));
            }
        }
        for a in 0..n {
            for b in a..n {
                header.push(format!("pb_{}{}", a + 1, b + 1));
            }
        }
        header.push("discrepancy".into());
        csv.push_str(&header.join(","));
        csv.push('\n');
    }

    for e in &points {
        let cf = closed_form_metric(spec, eq, e)?;
        let pb = pullback_metric(spec, eq, e)?;
        let disc = (&pb - &cf).abs().max();
        worst = worst.max(disc);
        match format {
            OutputFormat::Csv => {
                let mut cells: Vec<String> = e.iter().map(|v| fmt(*v)).collect();
                for a in 0..n {
                    for b in a..n {
                        cells.push(fmt(cf[(a, b)]));
                    }
                }
                for a in 0..n {
                    for b in a..n {
                        cells.push(fmt(pb[(a, b)]));
                    }
                }
                cells.push(fmt(disc));
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            OutputFormat::Json => rows.push(json!({
                "E": e,
                "closed_form": matrix_rows(&cf),
                "pullback": matrix_rows(&pb),
                "discrepancy": disc,
            })),
        }
    }

    let table = match format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => finish_json(rows),
    };
    let summary = format!(
        "metric scan: {} points, max |pullback - closed-form| = {:.3e}",
        points.len(),
        worst
    );
    Ok((table, summary))
}

fn curvature_tables(
    cfg: &RunConfig,
    eq: &FundamentalEquation,
    spec: &PhaseMetricSpec,
    format: OutputFormat,
) -> Result<(String, String)> {
    let n = eq.n();
    let grid = require_grid(cfg, n)?;
    let points = grid.points();
    let field = MetricField::induced(spec, eq)?;
    let scale = cfg.tolerances.fd_step_scale;

    let mut csv = String::new();
    let mut rows = Vec::new();
    if format == OutputFormat::Csv {
        let mut header: Vec<String> = eq.coords().to_vec();
        header.push("det_g".into());
        header.push("R".into());
        csv.push_str(&header.join(","));
        csv.push('\n');
    }
    let mut min_abs = f64::INFINITY;
    let mut max_abs = 0.0f64;
    let mut worst_bianchi = 0.0f64;
    for e in &points {
        let rep = curvature_with_step(&field, e, scale)?;
        min_abs = min_abs.min(rep.scalar.abs());
        max_abs = max_abs.max(rep.scalar.abs());
        worst_bianchi = worst_bianchi.max(rep.bianchi_residual);
        match format {
            OutputFormat::Csv => {
                let mut cells: Vec<String> = e.iter().map(|v| fmt(*v)).collect();
                cells.push(fmt(rep.det_g));
                cells.push(fmt(rep.scalar));
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            OutputFormat::Json => rows.push(json!({
                "E": e,
                "det_g": rep.det_g,
                "R": rep.scalar,
                "bianchi_residual": rep.bianchi_residual,
            })),
        }
    }

    let table = match format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => finish_json(rows),
    };
    let summary = format!(
        "curvature scan: {} points, |R| in [{:.3e}, {:.3e}], worst Bianchi residual {:.3e}",
        points.len(),
        min_abs,
        max_abs,
        worst_bianchi
    );
    Ok((table, summary))
}

fn geodesic_tables(
    cfg: &RunConfig,
    eq: &FundamentalEquation,
    spec: &PhaseMetricSpec,
    format: OutputFormat,
) -> Result<(String, String)> {
    let n = eq.n();
    let gcfg = cfg
        .geodesic
        .as_ref()
        .ok_or_else(|| GtdError::Config("the geodesic command needs a \"geodesic\" section".into()))?;
    gcfg.validate(n)?;
    let field = MetricField::induced(spec, eq)?;

    let mut path: GeodesicPath = match (&gcfg.velocity, &gcfg.end) {
        (Some(v), None) => integrate_geodesic(&field, &gcfg.start, v, gcfg.tau_max, gcfg.step)?,
        (None, Some(end)) => shoot_between(&field, &gcfg.start, end, cfg.tolerances.shoot)?,
        _ => unreachable!("validated above"),
    };
    annotate_second_law(eq, &mut path)?;

    let table = match format {
        OutputFormat::Csv => {
            let mut header = vec!["tau".to_string()];
            header.extend(eq.coords().iter().cloned());
            header.extend(eq.coords().iter().map(|c| format!("d{c}")));
            header.push("S".into());
            header.push("cumulative_L".into());
            let mut csv = header.join(",");
            csv.push('\n');
            for (i, s) in path.samples.iter().enumerate() {
                let mut cells = vec![fmt(s.tau)];
                cells.extend(s.e.iter().map(|v| fmt(*v)));
                cells.extend(s.de.iter().map(|v| fmt(*v)));
                cells.push(fmt(path.entropy_trace[i]));
                cells.push(fmt(path.cumulative_length[i]));
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            csv
        }
        OutputFormat::Json => {
            let samples: Vec<Value> = path
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    json!({
                        "tau": s.tau,
                        "E": s.e,
                        "dE": s.de,
                        "S": path.entropy_trace[i],
                        "cumulative_L": path.cumulative_length[i],
                    })
                })
                .collect();
            let obj = json!({
                "samples": samples,
                "length": path.length,
                "admissible": path.admissible,
                "violation_tau": path.violation_tau,
                "exited_domain": path.exited_domain,
                "speed_drift": path.speed_drift,
            });
            let mut text = serde_json::to_string_pretty(&obj).expect("table serializes");
            text.push('\n');
            text
        }
    };

    let mut summary = format!(
        "geodesic: {} samples, length {:.12}, admissible {}, speed drift {:.3e}",
        path.samples.len(),
        path.length,
        match path.admissible {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        },
        path.speed_drift
    );
    if let Some(tau) = path.violation_tau {
        summary.push_str(&format!(", second-law violation at tau = {tau}"));
    }
    if path.exited_domain {
        summary.push_str(", left the domain early");
    }
    Ok((table, summary))
}

fn ng_tables(
    cfg: &RunConfig,
    eq: &FundamentalEquation,
    spec: &PhaseMetricSpec,
    format: OutputFormat,
) -> Result<(String, String)> {
    let n = eq.n();
    let grid = require_grid(cfg, n)?;
    let points = grid.points();
    let dim = 2 * n + 1;

    let mut worst = 0.0f64;
    let mut csv = String::new();
    let mut rows = Vec::new();
    if format == OutputFormat::Csv {
        let mut header: Vec<String> = eq.coords().to_vec();
        header.push("max_norm".into());
        for i in 0..dim {
            header.push(format!("r{i}"));
        }
        csv.push_str(&header.join(","));
        csv.push('\n');
    }
    for e in &points {
        let rep = ng_residual(spec, eq, e)?;
        worst = worst.max(rep.max_norm);
        match format {
            OutputFormat::Csv => {
                let mut cells: Vec<String> = e.iter().map(|v| fmt(*v)).collect();
                cells.push(fmt(rep.max_norm));
                cells.extend(rep.ng_residual.iter().map(|v| fmt(*v)));
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            OutputFormat::Json => rows.push(json!({
                "E": e,
                "max_norm": rep.max_norm,
                "components": rep.ng_residual,
            })),
        }
    }

    let table = match format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => finish_json(rows),
    };
    let verdict = if worst <= cfg.tolerances.ng { "PASS" } else { "FAIL" };
    let summary = format!(
        "ng-check: {} points, worst max_norm = {:.3e} ({} at tolerance {:.1e})",
        points.len(),
        worst,
        verdict,
        cfg.tolerances.ng
    );
    Ok((table, summary))
}

fn legendre_tables(
    cfg: &RunConfig,
    eq: &FundamentalEquation,
    spec: &PhaseMetricSpec,
    format: OutputFormat,
) -> Result<(String, String)> {
    let n = eq.n();
    let lcfg = cfg.legendre.clone().unwrap_or_default();
    if lcfg.samples == 0 {
        return Err(GtdError::Config("legendre sampling needs at least one point".into()));
    }

    // Deterministic positive phase points keep every coordinate product away
    // from zero, so all exponents are valid.
    let mut rng = ChaCha8Rng::seed_from_u64(lcfg.seed);
    let mut points = Vec::with_capacity(lcfg.samples);
    for _ in 0..lcfg.samples {
        let z: Vec<f64> = (0..2 * n + 1).map(|_| rng.random_range(0.5..2.0)).collect();
        points.push(PhasePoint::new(spec.representation, z)?);
    }

    let subsets = all_subsets(n);
    let mut worst = 0.0f64;
    let mut csv = String::new();
    let mut rows = Vec::new();
    if format == OutputFormat::Csv {
        csv.push_str("subset,samples,max_residual\n");
    }
    for subset in &subsets {
        let mut max_res = 0.0f64;
        for z in &points {
            let r = check_legendre_invariance(spec, z, subset)?;
            max_res = max_res.max(r);
        }
        worst = worst.max(max_res);
        let one_based: Vec<usize> = subset.iter().map(|i| i + 1).collect();
        match format {
            OutputFormat::Csv => {
                let label = if one_based.is_empty() {
                    "-".to_string()
                } else {
                    one_based.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("+")
                };
                csv.push_str(&format!("{label},{},{}\n", lcfg.samples, fmt(max_res)));
            }
            OutputFormat::Json => rows.push(json!({
                "subset": one_based,
                "samples": lcfg.samples,
                "max_residual": max_res,
            })),
        }
    }

    let table = match format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => finish_json(rows),
    };
    let summary = format!(
        "legendre-check: n = {}, {} subsets x {} points, worst residual = {:.3e}",
        n,
        subsets.len(),
        lcfg.samples,
        worst
    );
    Ok((table, summary))
}
