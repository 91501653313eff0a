//! Round trip through the JSON run-spec format, as read by `blockfree simulate`.

use blockfree::runspec::{parse_run_spec, OutputOptions, RunSpec};
use blockfree::scenarios::case_study;

fn main() -> blockfree::Result<()> {
    let spec = RunSpec { scenario: case_study(0), output: OutputOptions::default() };
    let text = spec.to_json();
    println!("{text}");
    assert_eq!(parse_run_spec(&text)?, spec);

    let typo = text.replacen("\"dt\"", "\"dtt\"", 1);
    println!("\nwith a typo: {}", parse_run_spec(&typo).unwrap_err());
    Ok(())
}
