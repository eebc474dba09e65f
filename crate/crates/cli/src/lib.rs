//! Command-line front end: config files, scenario runs and output bundles.

pub mod config;
pub mod output;
pub mod svg;

use std::path::Path;

use anyhow::Result;
use spinguide::scenarios::ScenarioResult;

pub use config::{parse_config, parse_config_str, ConfigError};
pub use output::OutputBundle;

/// Writes the full bundle for a result: CSV tables, reports, optional plots
/// and finally the manifest with the hashes of everything else.
pub fn write_bundle(result: &ScenarioResult, out_dir: &Path, svg: bool) -> Result<OutputBundle> {
    let (trajectories, events) = output::emit_csv(result, out_dir)?;
    let reports = output::emit_reports(result, out_dir)?;
    let plots = if svg { svg::emit_svg(result, out_dir)? } else { vec![] };
    let mut files = vec![trajectories.clone(), events.clone(), reports.clone()];
    files.extend(plots.iter().cloned());
    let manifest = output::write_manifest(result, out_dir, &files)?;
    Ok(OutputBundle {
        dir: out_dir.to_path_buf(),
        trajectories,
        events,
        reports,
        plots,
        manifest,
    })
}
