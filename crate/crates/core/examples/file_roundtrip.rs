// Writes a scenario to CSV, then runs the experiment from a JSON config that
// points at those files, the way the `orl` binary does.

use orl::cli::{cmd_run, cmd_synth, RunConfig};
use orl::datagen::{standard_expert_mix, DynamicsKind, SyntheticScenario};

pub fn run_example() -> orl::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| orl::OrlError::io("temporary directory", e))?;
    let (trajectory, offline) = (dir.path().join("trajectory.csv"), dir.path().join("offline.csv"));
    let scenario = SyntheticScenario::new(
        2,
        2,
        500,
        DynamicsKind::DriftingLinear,
        0.5,
        standard_expert_mix(2, 500, 4),
        5,
    );
    cmd_synth(&scenario, &trajectory, &offline)?;

    let text = format!(
        r#"{{"k": 3, "gamma": 0.8, "lambda": 1e-3, "D": 5.0, "methods": ["orl", "best_offline"],
            "trajectory": {:?}, "offline": {:?}, "out": {:?}}}"#,
        trajectory,
        offline,
        dir.path().join("results")
    );
    let config = RunConfig::from_json(&text)?;
    for r in cmd_run(&config)? {
        println!("{:14} ade_sq {:.4}", r.method.name(), r.ade_sq);
    }
    let mut files: Vec<_> = std::fs::read_dir(dir.path().join("results"))
        .map_err(|e| orl::OrlError::io("results", e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("wrote {files:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
