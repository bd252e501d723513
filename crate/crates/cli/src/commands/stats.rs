use crate::args::{Observable, StatsArgs, Surrogate, UnfoldArg};
use crate::error::{invalid, CliError};
use crate::output::{emit, num, Payload, Run, Table};
use std::collections::BTreeMap;
use std::path::Path;
use symrmt::ensembles::{draw_rng, par_draws, Spectrum};
use symrmt::spectra::{
    cluster_function, number_variance, poisson_surrogate, spacing_distribution, spectral_rigidity, unfold,
    unfold_with_fallback, Binning, ObservableCurve, UnfoldMethod, UnfoldedSpectrum,
};

/// Reads the `sample` schema. Rows flagged as zero modes are dropped: they
/// are exactly degenerate and carry no fluctuation information.
fn read_spectra(path: &Path) -> Result<Vec<Spectrum>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(invalid)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let missing: Vec<&str> = ["draw", "level"].into_iter().filter(|c| col(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: missing columns: {}",
            path.display(),
            missing.join(", ")
        )));
    }
    let (di, li, zi) = (col("draw").unwrap(), col("level").unwrap(), col("zero"));
    let mut draws: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(invalid)?;
        let bad = |what: &str| CliError::Validation(format!("{}: record {}: bad {what}", path.display(), line + 1));
        let d: u64 = rec
            .get(di)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("draw"))?;
        let l: f64 = rec
            .get(li)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("level"))?;
        if zi.and_then(|z| rec.get(z)).is_some_and(|z| z.trim() == "1") {
            continue;
        }
        draws.entry(d).or_default().push(l);
    }
    if draws.is_empty() {
        return Err(CliError::Validation(format!("{}: no levels", path.display())));
    }
    draws
        .into_values()
        .map(|l| Spectrum::from_raw(l, 1).map_err(invalid))
        .collect()
}

fn grid(step: f64, max: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(max >= step) {
        return Err(CliError::Validation(format!(
            "need 0 < step <= max, got step {step}, max {max}"
        )));
    }
    let k = (max / step + 1e-9).floor() as usize;
    Ok((1..=k).map(|i| i as f64 * step).collect())
}

fn curve_table(c: &ObservableCurve, x: &'static str) -> Table {
    let mut t = Table::new(vec![x, "value", "stderr"]);
    for i in 0..c.len() {
        t.rows
            .push(vec![num(c.abscissa[i]), num(c.values[i]), num(c.stderr[i])]);
    }
    t
}

pub fn run(a: &StatsArgs, seed: Option<u64>) -> Result<(), CliError> {
    let (spectra, default_unfold, default_density) = match (&a.input, a.surrogate) {
        (Some(p), _) => {
            let s = read_spectra(p)?;
            let n = s[0].len() as f64;
            (s, UnfoldArg::Poly, n / (2.0 * std::f64::consts::PI))
        }
        (None, Some(Surrogate::Poisson)) => {
            let seed = seed.expect("surrogates are seeded by the caller");
            if a.n < 2 || a.draws == 0 {
                return Err(CliError::Validation("surrogate needs --n >= 2 and --draws >= 1".into()));
            }
            let s = par_draws(a.draws, |d| poisson_surrogate(a.n, &mut draw_rng(seed, d)));
            (s, UnfoldArg::Uniform, 1.0)
        }
        (None, None) => return Err(CliError::Validation("give --in FILE or --surrogate poisson".into())),
    };
    let how = a.unfold.unwrap_or(default_unfold);
    let batch: Vec<UnfoldedSpectrum> = spectra
        .iter()
        .map(|s| match how {
            UnfoldArg::Poly => unfold_with_fallback(s, a.degree),
            UnfoldArg::Local => unfold(s, UnfoldMethod::LocalMeanSpacing { window: a.window }),
            UnfoldArg::Uniform => unfold(
                s,
                UnfoldMethod::Uniform {
                    density: a.density.unwrap_or(default_density),
                },
            ),
            UnfoldArg::Semicircle => unfold(s, UnfoldMethod::Semicircle { n: s.len(), v: a.v }),
        })
        .collect::<Result<_, _>>()
        .map_err(invalid)?;
    let table = match a.observable {
        Observable::Ps => {
            let binning = match a.bin_width {
                Some(width) => Binning::Fixed { width, max: a.smax },
                None => Binning::FreedmanDiaconis,
            };
            let h = spacing_distribution(&batch, binning).map_err(invalid)?;
            let mut t = curve_table(&h.curve, "s");
            t.note("samples", h.samples);
            t.note("overflow", num(h.overflow));
            t.note("mean_spacing", num(h.mean));
            t
        }
        Observable::Sigma2 => curve_table(&number_variance(&batch, &grid(a.dl, a.l_max)?).map_err(invalid)?, "L"),
        Observable::Delta3 => curve_table(&spectral_rigidity(&batch, &grid(a.dl, a.l_max)?).map_err(invalid)?, "L"),
        Observable::Y2 => {
            let mut edges = vec![0.0];
            edges.extend(grid(a.dr, a.rmax)?);
            curve_table(&cluster_function(&batch, &edges).map_err(invalid)?, "r")
        }
    };
    let mut table = table;
    table.note("draws", batch.len());
    table.note("unfolding", serde_json::to_string(&batch[0].method).unwrap_or_default());
    let run = Run::new("stats", a, seed)?;
    emit(&run, a.out.as_deref(), Payload::Csv(table), Vec::new())
}
