use crate::args::{CsCheckArgs, FamilyArg, PotentialArg};
use crate::error::{invalid, CliError};
use crate::output::{emit, num, Payload, Run, Table};
use symrmt::cs::{mapping_convergence, CsModel, PotentialType};
use symrmt::roots::{build_root_system, Family, Multiplicities};

/// Default box: centers strictly decreasing and positive, so the box sits
/// inside the chamber; type III centers stay inside the fundamental cell
/// for rank up to 3.
fn default_box(potential: PotentialType, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let (step, half) = match potential {
        PotentialType::III => (0.35, 0.1),
        _ => (0.5, 0.2),
    };
    let offset = if potential == PotentialType::III { 0.35 } else { 0.6 };
    let centers: Vec<f64> = (0..dim).map(|i| step * (dim - i) as f64 + offset - step).collect();
    (
        centers.iter().map(|c| c - half).collect(),
        centers.iter().map(|c| c + half).collect(),
    )
}

pub fn run(a: &CsCheckArgs) -> Result<(), CliError> {
    let family = match a.family {
        FamilyArg::A => Family::A,
        FamilyArg::B => Family::B,
        FamilyArg::C => Family::C,
        FamilyArg::D => Family::D,
        FamilyArg::BC => Family::BC,
    };
    let potential = match a.potential {
        PotentialArg::I => PotentialType::I,
        PotentialArg::II => PotentialType::II,
        PotentialArg::III => PotentialType::III,
    };
    let rs = build_root_system(family, a.rank, Multiplicities::new(a.m_o, a.m_l, a.m_s)).map_err(invalid)?;
    let dim = rs.dim();
    let (lo, hi) = match (&a.lo, &a.hi) {
        (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
        _ => default_box(potential, dim),
    };
    if lo.len() != dim || hi.len() != dim {
        return Err(CliError::Validation(format!(
            "box corners need {dim} coordinates for {family}_{}",
            a.rank
        )));
    }
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let f = |q: &[f64]| (-q.iter().zip(&center).map(|(x, c)| (x - c).powi(2)).sum::<f64>()).exp();
    let model = CsModel::at_root_values(rs, potential);
    let conv = mapping_convergence(&model, &lo, &hi, &a.h, f).map_err(invalid)?;

    let mut t = Table::new(vec!["h", "residual"]);
    t.note("couplings", serde_json::to_string(&model.couplings).unwrap_or_default());
    t.note("box_lo", format!("{lo:?}"));
    t.note("box_hi", format!("{hi:?}"));
    t.note("slope", num(conv.slope));
    for (h, r) in conv.h.iter().zip(&conv.residual) {
        t.rows.push(vec![num(*h), num(*r)]);
    }
    let run = Run::new("cs-check", a, None)?;
    emit(&run, a.out.as_deref(), Payload::Csv(t), Vec::new())
}
