//! `track`, `hcp` and `plot`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use rayon::prelude::*;

use neotrack_core::hcp::hcp_timeline;
use neotrack_core::plot::{render_timeline_plot, stage_traces};
use neotrack_core::stream::{ingest, parse_episodes};
use neotrack_core::timelines::{
    stages_file_name, track_file_name, write_hcp_csv, write_stages_csv, write_track_csv, HCP_FILE_NAME,
};
use neotrack_core::trackpost::track_object_stages;
use neotrack_core::{Episode, ObjectClass, PipelineConfig};

use crate::output::{check_component, Staged};
use crate::settings::pipeline_config;
use crate::{PipelineArgs, UsageError};

#[derive(Args)]
pub struct TrackArgs {
    /// Detection stream (JSON lines)
    #[arg(long)]
    input: PathBuf,

    /// Output directory; one subdirectory per episode
    #[arg(long)]
    out: PathBuf,

    /// Classes to track
    #[arg(long, value_delimiter = ',', default_values_t = ObjectClass::TRACKED)]
    classes: Vec<ObjectClass>,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
pub struct HcpArgs {
    /// Detection stream (JSON lines)
    #[arg(long)]
    input: PathBuf,

    /// Output directory; one subdirectory per episode
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Detection stream (JSON lines)
    #[arg(long)]
    input: PathBuf,

    /// Output SVG file
    #[arg(long)]
    out: PathBuf,

    /// Tracked class to plot
    #[arg(long, default_value_t = ObjectClass::Bmr)]
    class: ObjectClass,

    /// Episode to plot; required when the stream holds several
    #[arg(long)]
    episode: Option<String>,

    /// Coordinate to plot
    #[arg(long, default_value = "x", value_parser = ["x", "y"])]
    axis: String,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn load(input: &Path, staged: &mut Staged, cfg: &PipelineConfig) -> Result<Vec<Episode>> {
    let text = staged.read_input(input)?;
    let episodes = parse_episodes(&text).with_context(|| format!("parsing {}", input.display()))?;
    for ep in &episodes {
        check_component(&ep.episode_id)?;
    }
    Ok(episodes.into_par_iter().map(|e| ingest(e, cfg)).collect())
}

pub fn run_track(args: TrackArgs) -> Result<()> {
    let cfg = pipeline_config(&args.pipeline)?;
    if let Some(c) = args.classes.iter().find(|c| !c.is_tracked()) {
        return Err(UsageError(format!("{c} is not a tracked class")).into());
    }
    let mut staged = Staged::new("track", cfg.to_text(), None);
    let episodes = load(&args.input, &mut staged, &cfg)?;
    let files: Vec<Vec<(PathBuf, String)>> = episodes
        .par_iter()
        .map(|ep| {
            args.classes
                .iter()
                .flat_map(|&class| {
                    let result = track_object_stages(ep, class, &cfg);
                    let dir = Path::new(&ep.episode_id);
                    [
                        (dir.join(track_file_name(class)), write_track_csv(&result.timeline)),
                        (dir.join(stages_file_name(class)), write_stages_csv(&result)),
                    ]
                })
                .collect()
        })
        .collect();
    for (path, text) in files.into_iter().flatten() {
        staged.add(path, text);
    }
    staged.commit(&args.out, "manifest_track.json")?;
    info!("tracked {} episode(s) into {}", episodes.len(), args.out.display());
    Ok(())
}

pub fn run_hcp(args: HcpArgs) -> Result<()> {
    let cfg = pipeline_config(&args.pipeline)?;
    let mut staged = Staged::new("hcp", cfg.to_text(), None);
    let episodes = load(&args.input, &mut staged, &cfg)?;
    let files: Vec<(PathBuf, String)> = episodes
        .par_iter()
        .map(|ep| {
            let t = hcp_timeline(ep, &cfg);
            (Path::new(&ep.episode_id).join(HCP_FILE_NAME), write_hcp_csv(&t))
        })
        .collect();
    for (path, text) in files {
        staged.add(path, text);
    }
    staged.commit(&args.out, "manifest_hcp.json")?;
    info!("counted providers for {} episode(s)", episodes.len());
    Ok(())
}

pub fn run_plot(args: PlotArgs) -> Result<()> {
    let cfg = pipeline_config(&args.pipeline)?;
    if !args.class.is_tracked() {
        return Err(UsageError(format!("{} is not a tracked class", args.class)).into());
    }
    let mut staged = Staged::new("plot", cfg.to_text(), None);
    let episodes = load(&args.input, &mut staged, &cfg)?;
    let episode = match (&args.episode, episodes.len()) {
        (None, 0) => Episode::empty(),
        (None, 1) => episodes.into_iter().next().unwrap(),
        (None, _) => {
            let ids: Vec<&str> = episodes.iter().map(|e| e.episode_id.as_str()).collect();
            return Err(UsageError(format!("stream holds several episodes, pick one with --episode: {}", ids.join(", "))).into());
        }
        (Some(id), _) => episodes
            .into_iter()
            .find(|e| &e.episode_id == id)
            .ok_or_else(|| neotrack_core::Error::Validation(format!("episode `{id}` not in stream")))?,
    };
    let result = track_object_stages(&episode, args.class, &cfg);
    let stages = if args.axis == "x" { &result.x } else { &result.y };
    let title = if episode.episode_id.is_empty() {
        args.class.to_string()
    } else {
        format!("{} {}", episode.episode_id, args.class)
    };
    let svg = render_timeline_plot(&title, &format!("{} (px)", args.axis), &stage_traces(&args.axis, stages));

    let file_name = args
        .out
        .file_name()
        .ok_or_else(|| UsageError(format!("--out {} is not a file path", args.out.display())))?
        .to_string_lossy()
        .into_owned();
    let root = args.out.parent().unwrap_or(Path::new("")).to_path_buf();
    staged.add(&file_name, svg);
    staged.commit(&root, &format!("{file_name}.manifest.json"))?;
    Ok(())
}
