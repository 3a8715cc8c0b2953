//! Drives the command layer from code: a config, a run directory and its manifest.

use coulomb_lab::cli::{run, Command, Ensemble, ExperimentConfig};

fn main() -> coulomb_lab::Result<()> {
    let dir = std::env::temp_dir().join("coulomb-lab-example");
    let cfg = ExperimentConfig {
        command: Some(Command::Variance),
        ensemble: Ensemble::Ginibre,
        n: 64,
        reps: 300,
        output_dir: Some(dir.clone()),
        ..ExperimentConfig::from_json(r#"{"u": {"name": "bump", "radius": 0.6}, "tolerance": 0.3}"#)?
    };
    for d in cfg.validate() {
        println!("{:?}: {}", d.level, d.message);
    }
    let (outcome, manifest) = run(&cfg)?;
    print!("{}", outcome.payload);
    if let Some(m) = manifest {
        println!(
            "{} in {:.2}s, files in {}",
            m.summary,
            m.wall_time_seconds,
            dir.display()
        );
    }
    Ok(())
}
