// Runs the whole pipeline on a seeded synthetic market for one sample and
// lists the files it writes.

use cryptolink::cli::{execute, Command, RunOptions};
use cryptolink::presets::replication_config;

pub fn run_example() -> cryptolink::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| cryptolink::LinkError::InvalidArgument(e.to_string()))?;
    let mut config = replication_config();
    config.output_dir = dir.path().to_path_buf();
    // coarse rolling step keeps the demo quick
    config.rolling.step = 90;
    let options = RunOptions { sample: Some("sample1".into()), seed: Some(2020), ..Default::default() };
    let report = execute(Command::Report, &config, &options)?;
    for a in &report.analyses {
        println!("{:<10} {:<8} {:<10} {:?}", a.analysis, a.sample, a.kind.as_deref().unwrap_or("-"), a.status);
    }
    for f in report.files().iter().filter(|f| !f.starts_with("synthetic_data")) {
        println!("  {f}");
    }
    println!("failed: {}", report.any_failed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
