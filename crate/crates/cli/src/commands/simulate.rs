//! `simulate`: scripted detection streams with ground truth.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;

use neotrack_core::annotation::{write_annotations, write_truth_boxes};
use neotrack_core::simulate::{generate_episode, Scenario};
use neotrack_core::stream::write_detection_stream;
use neotrack_core::Error;

use crate::output::Staged;
use crate::UsageError;

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario TOML file; repeat for a multi-episode stream
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,

    /// Detection stream to write (JSON lines)
    #[arg(long)]
    out: PathBuf,

    /// Reference interval CSV to write
    #[arg(long)]
    truth: PathBuf,

    /// True object box CSV to write
    #[arg(long)]
    boxes: Option<PathBuf>,

    /// Replace the scenario seed
    #[arg(long)]
    seed: Option<u64>,
}

fn file_name(p: &Path, flag: &str) -> Result<String> {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| UsageError(format!("{flag} {} is not a file path", p.display())).into())
}

pub fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut staged = Staged::new("simulate", String::new(), args.seed);
    let mut scenarios = Vec::with_capacity(args.scenario.len());
    for path in &args.scenario {
        let mut s = Scenario::from_toml(&staged.read_input(path)?)
            .with_context(|| format!("in scenario {}", path.display()))?;
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        scenarios.push(s);
    }
    for (i, s) in scenarios.iter().enumerate() {
        if scenarios[..i].iter().any(|t| t.episode == s.episode) {
            return Err(Error::Validation(format!("episode `{}` appears in two scenarios", s.episode)).into());
        }
    }

    let sims = scenarios
        .par_iter()
        .map(generate_episode)
        .collect::<neotrack_core::Result<Vec<_>>>()?;

    let stream: String = sims.iter().map(|s| write_detection_stream(&s.episode)).collect();
    let annotations: Vec<_> = sims.iter().map(|s| s.annotation.clone()).collect();
    let truth: Vec<_> = sims.iter().map(|s| s.truth.clone()).collect();

    // all outputs are addressed relative to the stream's directory
    let root = args.out.parent().unwrap_or(Path::new("")).to_path_buf();
    let rel = |p: &Path| -> PathBuf {
        p.strip_prefix(&root).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf())
    };
    let out_name = file_name(&args.out, "--out")?;
    staged.add(&out_name, stream);
    staged.add(rel(&args.truth), write_annotations(&annotations));
    if let Some(b) = &args.boxes {
        staged.add(rel(b), write_truth_boxes(&truth));
    }
    staged.commit(&root, &format!("{out_name}.manifest.json"))?;
    Ok(())
}
