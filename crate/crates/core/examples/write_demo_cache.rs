//! Regenerates the files under `demo/`: the cached report of the demo
//! tensor and a synthetic run config over the demo registry.

use std::path::Path;

use seedbench::demo::{demo_profile, demo_tensor, DEMO_CACHE_FILE, DEMO_RUN_CONFIG_FILE};
use seedbench::runner::{ExecutorSettings, RunConfig, TaskRef, TaskSelector};
use seedbench::{build_report, cache_save, ReportConfig};

fn main() -> seedbench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("demo");
    let report = build_report(&demo_tensor(), &ReportConfig::default())?;
    cache_save(&report, dir.join(DEMO_CACHE_FILE))?;

    let tasks = demo_tensor()
        .tasks()
        .iter()
        .map(|t| TaskRef::Name(t.name.clone()))
        .collect();
    let mut config = RunConfig::new(TaskSelector::Tasks(tasks));
    config.executors.insert(
        "default".into(),
        ExecutorSettings::Synthetic {
            profile: demo_profile(0.02),
        },
    );
    let mut text = serde_json::to_string_pretty(&config)?;
    text.push('\n');
    std::fs::write(dir.join(DEMO_RUN_CONFIG_FILE), text)?;
    Ok(())
}
