use crate::args::{DmpkArgs, Method};
use crate::error::{internal, invalid, CliError};
use crate::output::{emit, num, Payload, Run, Table};
use symrmt::dmpk::{mc_dmpk_path, mc_transfer_path, DmpkEnsemble, DmpkError, ExactDensity, ExactOptions, SdeOptions};
use symrmt::ensembles::{splitmix64, Beta};

/// Salt for the seed of the `--compare` method, so the two runs draw
/// independent streams.
const COMPARE_SALT: u64 = 0x636f_6d70_6172_6500;

/// Width of the `x = arsinh √λ` histogram bins.
const X_BIN: f64 = 0.05;

struct Point {
    s: f64,
    mean: f64,
    stderr: f64,
    var: f64,
}

struct MethodRun {
    method: Method,
    points: Vec<Point>,
    ensembles: Vec<DmpkEnsemble>,
}

fn label(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Sde => "sde",
        Method::Slices => "slices",
    }
}

/// Guard errors caused by the request itself map to exit 2.
fn classify(e: DmpkError) -> CliError {
    match e {
        DmpkError::Collision { .. } | DmpkError::Conditioning(_) => internal(e),
        _ => invalid(e),
    }
}

fn from_ensembles(method: Method, ensembles: Vec<DmpkEnsemble>) -> MethodRun {
    let points = ensembles
        .iter()
        .map(|e| {
            let st = e.conductance_stats();
            Point {
                s: e.s,
                mean: st.mean,
                stderr: st.stderr,
                var: st.var,
            }
        })
        .collect();
    MethodRun {
        method,
        points,
        ensembles,
    }
}

fn run_method(a: &DmpkArgs, beta: Beta, method: Method, seed: Option<u64>) -> Result<MethodRun, CliError> {
    let s_max = *a.s.last().expect("s is non-empty");
    match method {
        Method::Exact => {
            if beta != Beta::Two {
                return Err(CliError::Validation(format!(
                    "the exact solution exists only for beta = 2 (got beta = {})",
                    a.beta
                )));
            }
            let opts = ExactOptions {
                k_max_factor: a.k_max_factor,
                k_nodes: a.k_nodes,
                ..ExactOptions::default()
            };
            let mut points = Vec::with_capacity(a.s.len());
            for &s in &a.s {
                let m = ExactDensity::new(a.n, s, opts)
                    .and_then(|d| d.moments())
                    .map_err(classify)?;
                points.push(Point {
                    s,
                    mean: m.mean_g,
                    stderr: 0.0,
                    var: m.var_g,
                });
            }
            Ok(MethodRun {
                method,
                points,
                ensembles: Vec::new(),
            })
        }
        Method::Sde => {
            let dt = a.dt.unwrap_or(1e-3 * s_max);
            let seed = seed.expect("sampled methods are seeded");
            let ens = mc_dmpk_path(a.n, beta, &a.s, a.walkers, SdeOptions::with_dt(dt), seed).map_err(classify)?;
            Ok(from_ensembles(method, ens))
        }
        Method::Slices => {
            if beta != Beta::Two {
                return Err(CliError::Validation(format!(
                    "slice products are implemented for beta = 2 only (got beta = {})",
                    a.beta
                )));
            }
            if !(a.delta_s > 0.0) {
                return Err(CliError::Validation("--delta-s must be positive".into()));
            }
            let checkpoints: Vec<usize> = a.s.iter().map(|s| ((s / a.delta_s).round() as usize).max(1)).collect();
            let seed = seed.expect("sampled methods are seeded");
            let ens = mc_transfer_path(a.n, a.delta_s, &checkpoints, a.walkers, seed).map_err(classify)?;
            Ok(from_ensembles(method, ens))
        }
    }
}

fn lambda_histogram(runs: &[&MethodRun]) -> Table {
    let mut t = Table::new(vec!["method", "s", "x_lo", "x_hi", "count", "density"]);
    t.note("x", "arsinh(sqrt(lambda))");
    for r in runs {
        for e in &r.ensembles {
            let xs: Vec<f64> = e.states.iter().flat_map(|st| st.xs()).collect();
            let top = xs.iter().fold(0.0f64, |m, &x| m.max(x));
            let bins = ((top / X_BIN).floor() as usize + 1).max(1);
            let mut counts = vec![0u64; bins];
            for &x in &xs {
                counts[((x / X_BIN) as usize).min(bins - 1)] += 1;
            }
            let total = xs.len() as f64;
            for (i, c) in counts.iter().enumerate() {
                t.rows.push(vec![
                    label(r.method).into(),
                    num(e.s),
                    num(i as f64 * X_BIN),
                    num((i + 1) as f64 * X_BIN),
                    c.to_string(),
                    num(*c as f64 / (total * X_BIN)),
                ]);
            }
        }
    }
    t
}

pub fn needs_seed(a: &DmpkArgs) -> bool {
    a.method != Method::Exact || a.compare.is_some_and(|m| m != Method::Exact)
}

pub fn run(a: &DmpkArgs, seed: Option<u64>) -> Result<(), CliError> {
    let beta = Beta::try_from(a.beta).map_err(invalid)?;
    if a.s.is_empty() || a.s.iter().any(|s| !(*s > 0.0)) || a.s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation(
            "--s must be positive and strictly increasing".into(),
        ));
    }
    if a.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    if a.method != Method::Exact && a.walkers < 2 {
        return Err(CliError::Validation("--walkers must be at least 2".into()));
    }
    let primary = run_method(a, beta, a.method, seed)?;
    let second = match a.compare {
        Some(m) => Some(run_method(a, beta, m, seed.map(|s| splitmix64(s ^ COMPARE_SALT)))?),
        None => None,
    };

    let mut t = Table::new(vec!["s", "mean_g", "stderr", "var_g", "method"]);
    for r in std::iter::once(&primary).chain(second.as_ref()) {
        for p in &r.points {
            t.rows.push(vec![
                num(p.s),
                num(p.mean),
                num(p.stderr),
                num(p.var),
                label(r.method).into(),
            ]);
        }
    }
    if let Some(b) = &second {
        let mut all = true;
        for (p, q) in primary.points.iter().zip(&b.points) {
            let sigma = (p.stderr.powi(2) + q.stderr.powi(2)).sqrt();
            let z = (p.mean - q.mean).abs() / sigma;
            let ok = (p.mean - q.mean).abs() <= 3.0 * sigma;
            all &= ok;
            let line = format!(
                "s={}: {} {} vs {} {}, |diff|/sigma = {}, {}",
                num(p.s),
                label(primary.method),
                num(p.mean),
                label(b.method),
                num(q.mean),
                num(z),
                if ok { "agree" } else { "DISAGREE" }
            );
            eprintln!("{line}");
            t.note("compare", line);
        }
        t.note(
            "agreement",
            if all {
                "all points within 3 combined stderr"
            } else {
                "FAILED"
            },
        );
    }
    let sampled: Vec<&MethodRun> = std::iter::once(&primary)
        .chain(second.as_ref())
        .filter(|r| !r.ensembles.is_empty())
        .collect();
    let extras = if sampled.is_empty() {
        Vec::new()
    } else {
        vec![("lambda", Payload::Csv(lambda_histogram(&sampled)))]
    };
    let run = Run::new("dmpk", a, seed)?;
    emit(&run, a.out.as_deref(), Payload::Csv(t), extras)
}
