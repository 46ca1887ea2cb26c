//! Dataset loading: a flat directory of `.ppm`/`.png` files is an image set;
//! a directory of subdirectories (each holding frames) is a video set. Files
//! and subdirectories are consumed in lexicographic order.

use anyhow::{bail, Context, Result};
use std::path::Path;
use tipatch_core::evalkit::Video;
use tipatch_core::imagery::{load_image, Image};

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .map(|e| {
            let e = e.to_string_lossy().to_ascii_lowercase();
            e == "ppm" || e == "png"
        })
        .unwrap_or(false)
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    entries.sort();
    Ok(entries)
}

pub fn load_images(dir: &Path) -> Result<Vec<Image>> {
    let mut images = Vec::new();
    for path in sorted_entries(dir)? {
        if path.is_file() && is_image_file(&path) {
            images.push(load_image(&path)?);
        }
    }
    if images.is_empty() {
        bail!("no .ppm/.png images found in {}", dir.display());
    }
    Ok(images)
}

pub fn load_videos(dir: &Path) -> Result<Vec<Video>> {
    let mut videos = Vec::new();
    for sub in sorted_entries(dir)? {
        if !sub.is_dir() {
            continue;
        }
        let mut frames = Vec::new();
        for path in sorted_entries(&sub)? {
            if path.is_file() && is_image_file(&path) {
                frames.push(load_image(&path)?);
            }
        }
        if frames.is_empty() {
            bail!("video directory {} holds no frames", sub.display());
        }
        let name = sub
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "video".into());
        videos.push(Video { name, frames });
    }
    if videos.is_empty() {
        bail!(
            "no video subdirectories found in {} (frames go in one directory per video)",
            dir.display()
        );
    }
    Ok(videos)
}
