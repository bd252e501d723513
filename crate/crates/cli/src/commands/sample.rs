use crate::args::{KindArg, SampleArgs};
use crate::error::{internal, invalid, CliError};
use crate::output::{emit, num, Payload, Run, Table};
use symrmt::ensembles::{sample_spectra, Beta, EnsembleSpec};

/// Levels below this fraction of the spectral scale count as exact zero modes.
const ZERO_MODE_TOL: f64 = 1e-9;

pub fn run(a: &SampleArgs, seed: u64) -> Result<(), CliError> {
    let beta = Beta::try_from(a.beta).map_err(invalid)?;
    let spec = match a.kind {
        KindArg::Gaussian => EnsembleSpec::gaussian(beta, a.n, a.v, seed),
        KindArg::Circular => EnsembleSpec::circular(beta, a.n, seed),
        KindArg::Chiral => EnsembleSpec::chiral(beta, a.p, a.q, a.v, seed),
    };
    spec.validate().map_err(invalid)?;
    if a.draws == 0 {
        return Err(CliError::Validation("--draws must be at least 1".into()));
    }
    let spectra = sample_spectra(&spec, a.draws).map_err(internal)?;
    let mut t = Table::new(vec!["draw", "index", "level", "zero"]);
    if a.kind == KindArg::Chiral {
        t.note("zero_modes_per_draw", spec.nu());
    }
    for (d, s) in spectra.iter().enumerate() {
        let scale = s.levels.iter().fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
        for (i, &l) in s.levels.iter().enumerate() {
            let zero = a.kind == KindArg::Chiral && l.abs() <= ZERO_MODE_TOL * scale;
            t.rows
                .push(vec![d.to_string(), i.to_string(), num(l), u8::from(zero).to_string()]);
        }
    }
    let run = Run::new("sample", a, Some(seed))?;
    emit(&run, a.out.as_deref(), Payload::Csv(t), Vec::new())
}
