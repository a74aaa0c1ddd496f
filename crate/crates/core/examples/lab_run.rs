//! Runs a configured experiment and lists the manifest.

use irrlab::lab::{run, ExperimentConfig};

const CONFIG: &str = r#"
schema = 1
kind = "irregularity"

[model]
family = "gaussian"
dim = 1
process = { type = "fbm", hurst = 0.6 }

[grid]
n = 8192
levels = 6

[mc]
samples = 3
seed = 42

[output]
format = "both"
"#;

fn main() -> irrlab::Result<()> {
    let mut cfg = ExperimentConfig::from_toml(CONFIG)?;
    cfg.output.dir = std::env::temp_dir().join("irrlab-example");
    let manifest = run(&cfg)?;
    println!("config {} ({} stages)", &manifest.config_hash[..12], manifest.stages.len());
    for s in &manifest.stages {
        println!("  {:<24} {}", s.name, if s.ok { "ok" } else { "failed" });
    }
    for f in &manifest.files {
        println!("  {:<28} {:>8} B  {}", f.name, f.bytes, &f.sha256[..16]);
    }
    Ok(())
}
