//! Runs an experiment config in-process, as the `varexp-solve` binary does.

use std::path::PathBuf;

use varexp::cli::{run, Overrides};

fn main() -> varexp::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/model_fountain.toml")));
    let out = std::env::temp_dir().join("varexp-run-config");
    let outcome = run(
        &path,
        &Overrides {
            output_dir: Some(out),
            ..Overrides::default()
        },
    )?;
    println!("exit code {}", outcome.exit_code);
    println!("report {}", outcome.report_path.display());
    for f in &outcome.files {
        println!("  {}", f.display());
    }
    Ok(())
}
