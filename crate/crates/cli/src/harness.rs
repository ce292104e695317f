//! Render orchestration: run a configuration, score each iteration against
//! a reference, and write the standard output files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use g3d_core::guide::GuiderKind;
use g3d_core::render::{Image, IterationStats, RenderConfig, Renderer};
use g3d_core::scene::Scene;

use crate::image_io::{heatmap, write_pfm, write_ppm};
use crate::metrics::{mse, ssim, MetricsRow, MetricsWriter};
use crate::{io_err, Result};

/// File names written into an output directory.
pub const IMAGE_FILE: &str = "image.pfm";
pub const PREVIEW_FILE: &str = "preview.ppm";
pub const RADIUS_FILE: &str = "radius.ppm";
pub const METRICS_FILE: &str = "metrics.csv";

/// Result of one finished run.
pub struct RenderRun {
    pub renderer: Renderer,
    pub stats: Vec<IterationStats>,
    pub rows: Vec<MetricsRow>,
}

impl RenderRun {
    /// Caustic radiance, the image all metrics are computed on.
    pub fn caustic(&self) -> Image {
        self.renderer.framebuffer().caustic()
    }

    pub fn final_row(&self) -> &MetricsRow {
        self.rows.last().expect("at least one iteration ran")
    }
}

/// Runs every iteration, producing one metrics row each. Rows carry MSE and
/// `1 - SSIM` of the caustic image when a reference is given.
pub fn render(
    scene: Scene,
    config: RenderConfig,
    reference: Option<&Image>,
    mut on_row: impl FnMut(&MetricsRow) -> Result<()>,
) -> Result<RenderRun> {
    let mut renderer = Renderer::new(scene, config)?;
    let mut rows = Vec::new();
    let mut stats = Vec::new();
    let mut elapsed = 0.0;
    while !renderer.is_done() {
        let s = renderer.step();
        elapsed += s.seconds;
        let (m, sc) = match reference {
            Some(r) => {
                let img = renderer.framebuffer().caustic();
                (Some(mse(&img, r)?), Some(1.0 - ssim(&img, r)?))
            }
            None => (None, None),
        };
        let row = MetricsRow {
            iteration: s.iteration,
            mse: m,
            ssim_comp: sc,
            gathered: s.gathered,
            seconds: elapsed,
        };
        on_row(&row)?;
        rows.push(row);
        stats.push(s);
    }
    Ok(RenderRun { renderer, stats, rows })
}

/// Long uniform run whose caustic image serves as ground truth.
pub fn reference_image(scene: Scene, base: &RenderConfig, iterations: usize) -> Result<Image> {
    let config = RenderConfig {
        guider: GuiderKind::Uniform,
        iterations,
        ..base.clone()
    };
    Ok(render(scene, config, None, |_| Ok(()))?.caustic())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Renders into `dir`, streaming `metrics.csv` as iterations finish, then
/// writes the HDR caustic image, a tonemapped preview of the full image and
/// the gather-radius heatmap.
pub fn render_to_dir(
    scene: Scene,
    config: RenderConfig,
    reference: Option<&Image>,
    dir: &Path,
    exposure: f64,
    mut progress: impl FnMut(&MetricsRow),
) -> Result<RenderRun> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut csv = MetricsWriter::new(create(&dir.join(METRICS_FILE))?);
    let run = render(scene, config, reference, |row| {
        progress(row);
        csv.write(row)
    })?;
    let fb = run.renderer.framebuffer();
    let at = |name: &str| -> PathBuf { dir.join(name) };
    write_pfm(&fb.caustic(), create(&at(IMAGE_FILE))?).map_err(io_err(at(IMAGE_FILE)))?;
    write_ppm(&fb.combined(), exposure, create(&at(PREVIEW_FILE))?).map_err(io_err(at(PREVIEW_FILE)))?;
    let cam = &run.renderer.scene().camera;
    let radius = heatmap(fb.radius(), cam.width, cam.height);
    write_ppm(&radius, 1.0, create(&at(RADIUS_FILE))?).map_err(io_err(at(RADIUS_FILE)))?;
    Ok(run)
}
