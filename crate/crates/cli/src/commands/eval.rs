//! `eval`: Table-style report over a results directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use neotrack_core::annotation::{parse_annotations, parse_truth_boxes, TruthBoxes};
use neotrack_core::metrics::{detectedness, parse_box_rows, GroundTruth, GroundTruthSet};
use neotrack_core::report::{evaluate, EpisodeEvaluation};
use neotrack_core::timelines::{parse_hcp_csv, parse_track_csv, track_file_name, HCP_FILE_NAME};
use neotrack_core::{Error, ObjectClass};

use crate::output::Staged;
use crate::{PipelineArgs, UsageError};

#[derive(Args)]
pub struct EvalArgs {
    /// Directory written by `track` and `hcp`
    #[arg(long)]
    results: PathBuf,

    /// Reference interval CSV
    #[arg(long)]
    annotations: PathBuf,

    /// True object boxes (`episode,frame,class,x,y,w,h`), used when the
    /// annotations carry no detected_<CLASS> intervals
    #[arg(long)]
    truth_boxes: Option<PathBuf>,

    /// Single-image ground truth boxes (`image,class,x,y,w,h`)
    #[arg(long, requires = "pred")]
    gt: Option<PathBuf>,

    /// Single-image predictions (`image,class,x,y,w,h,score`)
    #[arg(long, requires = "gt")]
    pred: Option<PathBuf>,

    /// Output directory for report.txt and report.json
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub fn run_eval(args: EvalArgs) -> Result<()> {
    // thresholds do not enter the scores; the snapshot documents the run
    let cfg = crate::settings::pipeline_config(&args.pipeline)?;
    let mut staged = Staged::new("eval", cfg.to_text(), None);

    let annotations = parse_annotations(&staged.read_input(&args.annotations)?)
        .with_context(|| format!("parsing {}", args.annotations.display()))?;
    let truth: Vec<TruthBoxes> = match &args.truth_boxes {
        Some(p) => parse_truth_boxes(&staged.read_input(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    if !args.results.is_dir() {
        return Err(UsageError(format!("results directory {} not found", args.results.display())).into());
    }

    let ann_ids: BTreeSet<&str> = annotations.iter().map(|a| a.episode_id.as_str()).collect();
    let mut result_ids = BTreeSet::new();
    for entry in fs::read_dir(&args.results)? {
        let entry = entry?;
        if entry.path().join(HCP_FILE_NAME).is_file() {
            result_ids.insert(entry.file_name().to_string_lossy().into_owned());
        }
    }
    let mut problems = Vec::new();
    for id in &ann_ids {
        if !result_ids.contains(*id) {
            problems.push(format!("`{id}` is annotated but has no results"));
        }
    }
    for id in &result_ids {
        if !ann_ids.contains(id.as_str()) {
            problems.push(format!("`{id}` has results but no annotations"));
        }
    }
    for t in &truth {
        if !ann_ids.contains(t.episode_id.as_str()) {
            problems.push(format!("`{}` has truth boxes but no annotations", t.episode_id));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(format!("episode ids do not match:\n  {}", problems.join("\n  "))).into());
    }

    let mut episodes = Vec::with_capacity(annotations.len());
    for ann in annotations {
        let dir = args.results.join(&ann.episode_id);
        let hcp_path = dir.join(HCP_FILE_NAME);
        let hcp = parse_hcp_csv(&staged.read_input(&hcp_path)?)
            .with_context(|| format!("parsing {}", hcp_path.display()))?;
        let n = hcp.len();
        let boxes = truth.iter().find(|t| t.episode_id == ann.episode_id);
        let mut detected: [Vec<bool>; 3] = Default::default();
        for (k, &class) in ObjectClass::TRACKED.iter().enumerate() {
            detected[k] = match (ann.detected_timeline(class, n), boxes) {
                (Some(d), _) => d,
                (None, Some(b)) => {
                    let path = dir.join(track_file_name(class));
                    let track = parse_track_csv(&staged.read_input(&path)?, class)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    if track.len() != n {
                        return Err(Error::Validation(format!(
                            "{} has {} frames, {} has {n}",
                            path.display(),
                            track.len(),
                            hcp_path.display()
                        ))
                        .into());
                    }
                    detectedness(&track, &b.timeline(class, n))
                }
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "episode `{}`: no detected_{class} intervals and no truth boxes",
                        ann.episode_id
                    ))
                    .into())
                }
            };
        }
        episodes.push(EpisodeEvaluation {
            episode_id: ann.episode_id.clone(),
            n_frames: n,
            detected,
            providers: hcp.providers,
            annotation: ann,
        });
    }

    let boxes = match (&args.gt, &args.pred) {
        (Some(gt), Some(pred)) => {
            let ground_truths = parse_box_rows(&staged.read_input(gt)?, false)
                .with_context(|| format!("parsing {}", gt.display()))?
                .into_iter()
                .map(|(c, p)| (c, GroundTruth { image: p.image, bbox: p.bbox }))
                .collect();
            let predictions = parse_box_rows(&staged.read_input(pred)?, true)
                .with_context(|| format!("parsing {}", pred.display()))?;
            Some(GroundTruthSet {
                ground_truths,
                predictions,
            })
        }
        _ => None,
    };

    let report = evaluate(&episodes, boxes.as_ref())?;
    let text = report.render_text();
    staged.add("report.txt", text.clone());
    staged.add("report.json", report.to_json() + "\n");
    staged.commit(&args.out, "manifest_eval.json")?;
    print!("{text}");
    Ok(())
}
