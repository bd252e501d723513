use crate::args::{ClassifyArgs, Format};
use crate::error::{invalid, CliError};
use crate::output::{emit, num, Payload, Run, Table};
use symrmt::cartan::{catalog_lookup, CartanClass, CatalogRow, ClassParams, SymmetricSpaceEntry, CATALOG};
use symrmt::roots::rho_vector;

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("({})", parts.join(","))
}

fn symbolic_table() -> Table {
    let mut t = Table::new(vec![
        "class",
        "compact",
        "noncompact",
        "restricted",
        "m_o",
        "m_l",
        "m_s",
        "tag_plus",
        "tag_zero",
        "tag_minus",
    ]);
    for r in &CATALOG {
        t.rows.push(
            [
                r.class,
                r.compact,
                r.noncompact,
                r.restricted,
                r.m_o,
                r.m_l,
                r.m_s,
                r.tags[0],
                r.tags[1],
                r.tags[2],
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        );
    }
    t
}

fn symbolic_text(r: &CatalogRow) -> String {
    let tag = |s: &str| if s.is_empty() { "-".to_string() } else { s.to_string() };
    format!(
        "{:<10} {} | {}\n           restricted {}, (m_o,m_l,m_s) = ({},{},{}), tags + {} | 0 {} | - {}\n",
        r.class,
        r.compact,
        r.noncompact,
        r.restricted,
        r.m_o,
        r.m_l,
        r.m_s,
        tag(r.tags[0]),
        tag(r.tags[1]),
        tag(r.tags[2])
    )
}

fn rho(e: &SymmetricSpaceEntry) -> Result<Vec<f64>, CliError> {
    Ok(rho_vector(&e.root_system().map_err(invalid)?))
}

pub fn run(a: &ClassifyArgs) -> Result<(), CliError> {
    let run = Run::new("classify", a, None)?;
    if a.all {
        let payload = match a.format {
            Format::Csv => Payload::Csv(symbolic_table()),
            Format::Text => Payload::Text(CATALOG.iter().map(symbolic_text).collect()),
        };
        return emit(&run, a.out.as_deref(), payload, Vec::new());
    }
    let label = a.class.as_deref().expect("clap requires --class without --all");
    let class: CartanClass = label.parse().map_err(invalid)?;
    let params = match (a.p, a.q, a.n) {
        (Some(p), Some(q), _) => Some(ClassParams::Split { p, q }),
        (_, _, Some(n)) => Some(ClassParams::Size(n)),
        _ if class.takes_split() => None,
        _ => Some(ClassParams::Size(2)),
    };
    let triplet = params.map(|p| catalog_lookup(class, p)).transpose().map_err(invalid)?;
    let payload = match a.format {
        Format::Text => {
            let mut s = symbolic_text(class.row());
            match &triplet {
                None => s.push_str("           give --p and --q for the concrete root system\n"),
                Some(t) => {
                    let e = &t[0];
                    let size = match params.expect("triplet implies params") {
                        ClassParams::Size(n) => format!("N = {n}"),
                        ClassParams::Split { p, q } => format!("(p,q) = ({p},{q})"),
                    };
                    s.push_str(&format!(
                        "{size}: restricted system {}_{}, multiplicities {}\n",
                        e.restricted_family, e.rank, e.multiplicities
                    ));
                    for e in t.iter() {
                        s.push_str(&format!(
                            "  {} {}  [{}]\n",
                            e.curvature.symbol(),
                            e.space_name(),
                            e.ensemble_tag.as_deref().unwrap_or("-")
                        ));
                    }
                    s.push_str(&format!("rho = {}\n", vector(&rho(e)?)));
                    let b = e.boundary_parameters();
                    s.push_str(&format!(
                        "boundary index alpha = m_s + m_l = {}; Laguerre/Jacobi lambda = rho = (m_s+m_l-1)/2 = {}, sigma = (m_l-1)/2 = {}\n",
                        num(b.boundary_index),
                        num(b.lambda),
                        num(b.sigma)
                    ));
                }
            }
            Payload::Text(s)
        }
        Format::Csv => {
            let mut t = Table::new(vec![
                "class",
                "curvature",
                "space",
                "family",
                "rank",
                "m_o",
                "m_l",
                "m_s",
                "tag",
                "rho",
                "alpha",
                "lambda",
                "sigma",
            ]);
            for e in triplet.iter().flatten() {
                let m = e.multiplicities;
                let b = e.boundary_parameters();
                t.rows.push(vec![
                    class.label().to_string(),
                    e.curvature.symbol().to_string(),
                    e.space_name(),
                    e.restricted_family.to_string(),
                    e.rank.to_string(),
                    m.ordinary.to_string(),
                    m.long.to_string(),
                    m.short.to_string(),
                    e.ensemble_tag.clone().unwrap_or_default(),
                    vector(&rho(e)?),
                    num(b.boundary_index),
                    num(b.lambda),
                    num(b.sigma),
                ]);
            }
            Payload::Csv(t)
        }
    };
    emit(&run, a.out.as_deref(), payload, Vec::new())
}
