//! `synth`: composite training scenes and their box annotations.

use std::fmt::Write as _;
use std::io::Cursor;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use image::{ImageFormat, RgbImage};
use log::info;
use rayon::prelude::*;

use neotrack_core::synthgen::{
    generate_scenes, histogram_match, load_images, load_object_pools, split_image, write_annotation_file,
    Annotation, MaskPools,
};
use neotrack_core::{Error, ObjectClass};

use crate::output::Staged;
use crate::settings::synth_config;

#[derive(Args)]
pub struct SynthArgs {
    /// Directory of background PNGs
    #[arg(long)]
    backgrounds: PathBuf,

    /// Directory with one subdirectory of blue-screen PNGs per class
    /// (BMR, SP, HRS, HCPH)
    #[arg(long)]
    objects: PathBuf,

    /// Output directory
    #[arg(long)]
    out: PathBuf,

    /// Number of scenes
    #[arg(long, default_value_t = 10)]
    count: u64,

    /// Seed; overrides the config file
    #[arg(long)]
    seed: Option<u64>,

    /// `key = value` synthesis config file
    #[arg(long, env = "NEOTRACK_SYNTH_CONFIG")]
    config: Option<PathBuf>,

    /// Override one synthesis config key
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Also write the five split tiles of every scene
    #[arg(long)]
    split: bool,

    /// Histogram-match every scene to this PNG
    #[arg(long)]
    histogram_reference: Option<PathBuf>,
}

fn png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    image.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

fn record_dir(staged: &mut Staged, dir: &std::path::Path) -> Result<()> {
    for p in neotrack_core::synthgen::png_files(dir)? {
        let bytes = std::fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
        staged.input(&p, &bytes);
    }
    Ok(())
}

pub fn run_synth(args: SynthArgs, parallel: bool) -> Result<()> {
    let cfg = synth_config(args.config.as_deref(), &args.set, args.seed)?;
    let mut staged = Staged::new("synth", cfg.to_text(), Some(cfg.seed));

    let backgrounds = load_images(&args.backgrounds)
        .with_context(|| format!("loading backgrounds from {}", args.backgrounds.display()))?;
    record_dir(&mut staged, &args.backgrounds)?;
    let pools: MaskPools = load_object_pools(&args.objects, &cfg)
        .with_context(|| format!("loading objects from {}", args.objects.display()))?;
    for class in ObjectClass::ALL {
        let dir = args.objects.join(class.as_str());
        if dir.is_dir() {
            record_dir(&mut staged, &dir)?;
        }
    }
    let reference = match &args.histogram_reference {
        Some(p) => {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            staged.input(p, &bytes);
            Some(image::load_from_memory(&bytes)?.to_rgb8())
        }
        None => None,
    };
    if backgrounds.is_empty() {
        return Err(Error::Empty("no background PNGs found").into());
    }

    let scenes = generate_scenes(args.count, &backgrounds, &pools, &cfg, parallel)?;
    let encode = |(i, scene): (usize, &neotrack_core::synthgen::SynthScene)| -> Result<Vec<(String, Vec<u8>, String)>> {
        let image = match &reference {
            Some(r) => histogram_match(&scene.image, r),
            None => scene.image.clone(),
        };
        let name = format!("scene_{i:06}");
        let mut out = vec![(name.clone(), png(&image)?, write_annotation_file(&scene.annotations))];
        if args.split {
            for (t, sub) in split_image(&image, &scene.annotations).iter().enumerate() {
                let anns: Vec<Annotation> = sub.annotations.clone();
                out.push((format!("{name}_tile{t}"), png(&sub.image)?, write_annotation_file(&anns)));
            }
        }
        Ok(out)
    };
    let encoded: Vec<Vec<(String, Vec<u8>, String)>> = if parallel {
        scenes.par_iter().enumerate().map(encode).collect::<Result<_>>()?
    } else {
        scenes.iter().enumerate().map(encode).collect::<Result<_>>()?
    };

    let mut listing = String::new();
    for (name, image, labels) in encoded.into_iter().flatten() {
        let img_rel = format!("images/{name}.png");
        let lbl_rel = format!("labels/{name}.txt");
        let _ = writeln!(listing, "{img_rel} {lbl_rel}");
        staged.add(img_rel, image);
        staged.add(lbl_rel, labels);
    }
    staged.add("manifest.txt", listing);
    staged.commit(&args.out, "manifest_synth.json")?;
    info!("wrote {} scene(s) to {}", args.count, args.out.display());
    Ok(())
}
