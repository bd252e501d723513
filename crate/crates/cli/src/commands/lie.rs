use crate::args::LieFixturesArgs;
use crate::error::CliError;
use crate::output::{emit, Payload, Run};
use symrmt::lie::fixtures::killing_fixture_checks;

/// Prints one line per fixture; any failure is an internal error.
pub fn run(a: &LieFixturesArgs) -> Result<(), CliError> {
    let checks = killing_fixture_checks();
    let text: String = checks
        .iter()
        .map(|c| {
            format!(
                "{} {} (max error {:.1e})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_error
            )
        })
        .collect();
    let run = Run::new("lie-fixtures", a, None)?;
    emit(&run, a.out.as_deref(), Payload::Text(text), Vec::new())?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "Killing-form fixtures failed: {}",
            failed.join(", ")
        )))
    }
}
