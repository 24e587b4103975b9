//! Image collections: the seeded synthetic scene generator and directory
//! loading/saving.

use std::fs;
use std::path::{Path, PathBuf};

use gvif_core::analysis::ImportanceSource;
use gvif_core::filter::ClassModel;
use gvif_core::transform::{reconstruct_image, ExtractorConfig, Padding};
use gvif_core::{Dims, ImageTensor, Tensor3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{format_err, io_err, Result, StageExt};
use crate::formats::{class_model, gvtf, ppm};

#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub image: ImageTensor,
    pub class_model: Option<ClassModel>,
}

impl Scene {
    /// Class activation when a class model is attached, saliency otherwise.
    pub fn importance_source(&self) -> ImportanceSource<'_> {
        match &self.class_model {
            Some(m) => ImportanceSource::ClassModel(m),
            None => ImportanceSource::Saliency,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub scenes: Vec<Scene>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    /// Loads `*.ppm`, `*.pgm` and three-channel `*.gvtf` images in name
    /// order. `<stem>.cam.gvtf` plus `<stem>.cam.txt` attach a class model.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
            .collect::<Result<_>>()?;
        paths.sort();
        let mut scenes = Vec::new();
        for path in paths {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if name.contains(".cam.") {
                continue;
            }
            let Some((stem, ext)) = name.rsplit_once('.') else { continue };
            let image = match ext {
                "ppm" | "pgm" => ppm::read(&path)?,
                "gvtf" => ImageTensor::new(gvtf::read(&path)?.into_f64())?,
                _ => continue,
            };
            let maps = dir.join(format!("{stem}.cam.gvtf"));
            let weights = dir.join(format!("{stem}.cam.txt"));
            let class_model =
                if maps.exists() && weights.exists() { Some(class_model::read(&maps, &weights)?) } else { None };
            scenes.push(Scene { name: stem.to_string(), image, class_model });
        }
        if scenes.is_empty() {
            return Err(format_err("dataset", format!("no images in {}", dir.display())));
        }
        Ok(Dataset { scenes })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for s in &self.scenes {
            ppm::write(&dir.join(format!("{}.ppm", s.name)), &s.image)?;
            if let Some(m) = &s.class_model {
                class_model::write(
                    &dir.join(format!("{}.cam.gvtf", s.name)),
                    &dir.join(format!("{}.cam.txt", s.name)),
                    m,
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { count: 32, width: 128, height: 128, seed: 0 }
    }
}

pub const CLASS_LABELS: [&str; 3] = ["object", "background", "texture"];

fn scene_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One scene per index: an elliptical object of raised brightness and
/// raised detail scale on a flat background, built in the feature domain.
/// Detail coefficients are Gaussian with scale `(12 + 40 w) 0.7^(k + l)`
/// where `w` is the soft object membership of the block, so the object
/// carries both the higher scale field and the higher importance. Pixels
/// are rounded to integers so that the scene survives an 8-bit raster
/// roundtrip unchanged.
pub fn synthetic_scene(spec: &SyntheticSpec, index: usize, cfg: &ExtractorConfig) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed(spec.seed, index));
    let b = cfg.block_size;
    let fd = cfg.feature_dims(spec.width, spec.height);
    let (gw, gh) = (fd.width as f64, fd.height as f64);
    let cx = rng.random_range(0.3 * gw..=0.7 * gw);
    let cy = rng.random_range(0.3 * gh..=0.7 * gh);
    let rx = rng.random_range(2.5..=5.0) * gw / 16.0;
    let ry = rng.random_range(2.5..=5.0) * gh / 16.0;
    let bg: [f64; 3] = core::array::from_fn(|_| rng.random_range(40.0..120.0));
    let obj: [f64; 3] = core::array::from_fn(|_| rng.random_range(130.0..220.0));
    let weight = |i: usize, j: usize| {
        let dx = (i as f64 + 0.5 - cx) / rx;
        let dy = (j as f64 + 0.5 - cy) / ry;
        1.0 / (1.0 + (6.0 * (dx.hypot(dy) - 1.0)).exp())
    };
    let bb = b * b;
    let features = Tensor3::from_fn(fd, |i, j, c| {
        let w = weight(i, j);
        let (color, k, l) = (c / bb, (c % bb) / b, c % b);
        let u: f64 = StandardNormal.sample(&mut rng);
        if k == 0 && l == 0 {
            b as f64 * (bg[color] * (1.0 - w) + obj[color] * w) + 4.0 * u
        } else {
            (12.0 + 40.0 * w) * 0.7f64.powi((k + l) as i32) * u
        }
    });
    let image =
        reconstruct_image(&features, cfg, Padding { width: spec.width, height: spec.height }).stage("synthesize")?;
    let image = ImageTensor::new(image.pixels().map(f64::round))?;

    let md = Dims::new(fd.width.div_ceil(2), fd.height.div_ceil(2), 3);
    let mut maps = Tensor3::filled(md, 0.0);
    for mi in 0..md.width {
        for mj in 0..md.height {
            let cells: Vec<f64> = (2 * mi..(2 * mi + 2).min(fd.width))
                .flat_map(|i| (2 * mj..(2 * mj + 2).min(fd.height)).map(move |j| (i, j)))
                .map(|(i, j)| weight(i, j))
                .collect();
            let w = cells.iter().sum::<f64>() / cells.len() as f64;
            maps.set(mi, mj, 0, w);
            maps.set(mi, mj, 1, 1.0 - w);
            maps.set(mi, mj, 2, rng.random_range(-1.0..1.0));
        }
    }
    let weights = vec![vec![6.0, 0.0, 0.1], vec![0.0, 0.5, 0.1], vec![0.1, 0.1, 1.0]];
    let labels = CLASS_LABELS.iter().map(|s| s.to_string()).collect();
    let class_model = ClassModel::new(maps, weights, labels)?;
    Ok(Scene { name: format!("scene_{index:03}"), image, class_model: Some(class_model) })
}

pub fn synthetic_dataset(spec: &SyntheticSpec, cfg: &ExtractorConfig) -> Result<Dataset> {
    let scenes = (0..spec.count).map(|k| synthetic_scene(spec, k, cfg)).collect::<Result<_>>()?;
    Ok(Dataset { scenes })
}
