// Driving a batch run from code: validate a configuration, run it and emit
// the CSV the command line would write.

use magnonspec::cli::{emit, run, CommandKind, Provenance, RunConfig, Settings};

pub fn run_example() -> magnonspec::Result<String> {
    let settings: Settings = toml::from_str("a = 1.0\nb = 1.0\nN = 2\ngap_max = 3\ntau = 0.0\n")
        .map_err(|e| magnonspec::Error::InvalidConfig(e.to_string()))?;
    let cfg = RunConfig::validate(CommandKind::Fiber, settings)?;
    let outcome = run(&cfg)?;
    let csv = emit(&outcome.table, cfg.format, &Provenance::of(&cfg));
    print!("{csv}");
    Ok(csv)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("csv example");
}
