use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use g3d_core::guide::{GuiderKind, LightGuide};
use g3d_core::render::{Image, InitMode, LightSamplerMode, RenderConfig};
use g3d_core::scene::Scene;
use g3d_core::Vec3;
use g3d_cli::harness::{self, render_to_dir};
use g3d_cli::image_io::{heatmap, read_pfm, write_pfm, write_ppm};
use g3d_cli::scene_io::{builtin_scene, load_scene, BUILTIN_SCENES};
use g3d_cli::{dist_test, viz};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "g3d", version, about = "Photon emission guiding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render one configuration into an output directory.
    Render {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed of the random streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Render several guiders with the same seed and rank them against a reference.
    Compare {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: u64,
        /// Comma-separated guider names.
        #[arg(long, value_delimiter = ',', default_value = "g3d,uniform,bound", value_parser = parse_guider)]
        guiders: Vec<GuiderKind>,
        /// Iterations of the uniform reference run when no reference image is given.
        #[arg(long, default_value_t = 4096)]
        reference_iterations: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Train a guide, then plot its directional pdf and its spatial mixture.
    Viz {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        light: usize,
        /// Observation point `x,y,z`; defaults to the light's center.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        at: Option<Vec<f64>>,
        /// Width of the equirectangular plot; the height is half of it.
        #[arg(long, default_value_t = 512)]
        viz_width: usize,
        #[arg(long, short, default_value = "viz")]
        out: PathBuf,
    },
    /// Check the directional density: closed form, normalization, sampling.
    TestDist {
        /// Comma-separated d / sigma ratios.
        #[arg(long, value_delimiter = ',', default_value = "0,1,5")]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SceneArgs {
    /// Scene JSON file.
    #[arg(long, conflicts_with = "builtin")]
    scene: Option<PathBuf>,
    /// Built-in scene name instead of a file.
    #[arg(long)]
    builtin: Option<String>,
    /// Image size override as `WIDTHxHEIGHT`.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with base settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_guider)]
    guider: Option<GuiderKind>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    photons: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bound_beta: Option<f64>,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, value_parser = parse_serde::<InitMode>)]
    init: Option<InitMode>,
    #[arg(long, value_parser = parse_serde::<LightSamplerMode>)]
    light_sampler: Option<LightSamplerMode>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    radius_factor: Option<f64>,
    #[arg(long)]
    histogram_resolution: Option<usize>,
    #[arg(long)]
    mcmc_chains: Option<usize>,
    /// Shade pixel centers instead of jittered positions
    #[arg(long)]
    no_jitter: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Reference PFM for the MSE and SSIM columns.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    exposure: f64,
    #[arg(long, short)]
    quiet: bool,
}

fn parse_guider(s: &str) -> Result<GuiderKind, String> {
    s.parse().map_err(|e: g3d_core::Error| e.to_string())
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let p = |v: &str| v.parse::<usize>().map_err(|e| e.to_string());
    Ok((p(w)?, p(h)?))
}

impl SceneArgs {
    fn load(&self) -> Result<Scene> {
        let scene = match (&self.scene, &self.builtin) {
            (Some(path), _) => load_scene(path)?,
            (None, Some(name)) => builtin_scene(name, 160, 120)
                .with_context(|| format!("unknown built-in '{name}', expected one of {BUILTIN_SCENES:?}"))?,
            (None, None) => bail!("give --scene FILE or --builtin NAME"),
        };
        match self.size {
            Some((w, h)) => {
                let mut desc = scene.desc().clone();
                desc.camera.width = w;
                desc.camera.height = h;
                let base = self.scene.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
                Ok(g3d_cli::scene_io::build_scene(desc, base)?)
            }
            None => Ok(scene),
        }
    }
}

impl ConfigArgs {
    fn build(&self, seed: u64) -> Result<RenderConfig> {
        let mut c: RenderConfig = match &self.config {
            Some(p) => {
                let f = File::open(p).with_context(|| p.display().to_string())?;
                serde_json::from_reader(BufReader::new(f)).with_context(|| p.display().to_string())?
            }
            None => RenderConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => { $(if let Some(v) = self.$flag { c.$field = v; })* };
        }
        set!(guider <- guider, iterations <- iterations, photons_per_iteration <- photons,
             beta <- beta, bound_beta <- bound_beta, components <- components, init <- init,
             light_sampler <- light_sampler, max_depth <- max_depth, radius_factor <- radius_factor,
             histogram_resolution <- histogram_resolution, mcmc_chains <- mcmc_chains);
        if self.no_jitter {
            c.pixel_jitter = false;
        }
        c.seed = seed;
        c.validate()?;
        Ok(c)
    }
}

fn read_reference(path: &Path) -> Result<Image> {
    let f = File::open(path).with_context(|| path.display().to_string())?;
    Ok(read_pfm(BufReader::new(f)).with_context(|| path.display().to_string())?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6e}"))
}

fn cmd_render(scene: Scene, config: RenderConfig, out: &OutputArgs) -> Result<()> {
    let reference = out.reference.as_deref().map(read_reference).transpose()?;
    let quiet = out.quiet;
    let run = render_to_dir(scene, config, reference.as_ref(), &out.out, out.exposure, |row| {
        if !quiet {
            eprintln!(
                "iter {:>5}  gathered {:>8}  mse {}  1-ssim {}  {:.2}s",
                row.iteration,
                row.gathered,
                fmt_opt(row.mse),
                fmt_opt(row.ssim_comp),
                row.seconds
            );
        }
    })?;
    let last = run.final_row();
    println!(
        "{}: {} iterations, mse {}, 1-ssim {}, {:.2}s",
        out.out.display(),
        last.iteration + 1,
        fmt_opt(last.mse),
        fmt_opt(last.ssim_comp),
        last.seconds
    );
    Ok(())
}

fn cmd_compare(
    scene: Scene,
    config: RenderConfig,
    guiders: &[GuiderKind],
    reference_iterations: usize,
    out: &OutputArgs,
) -> Result<()> {
    fs::create_dir_all(&out.out)?;
    let reference = match &out.reference {
        Some(p) => read_reference(p)?,
        None => {
            eprintln!("rendering uniform reference ({reference_iterations} iterations)");
            let mut ref_config = config.clone();
            // Independent of the compared runs.
            ref_config.seed = config.seed.wrapping_add(0x9e37_79b9);
            let r = harness::reference_image(scene.clone(), &ref_config, reference_iterations)?;
            let path = out.out.join("reference.pfm");
            write_pfm(&r, File::create(&path)?)?;
            r
        }
    };
    let mut summary = csv::Writer::from_path(out.out.join("summary.csv"))?;
    summary.write_record(["guider", "mse", "ssim_comp", "gathered", "seconds"])?;
    let mut results = Vec::new();
    for &g in guiders {
        let cfg = RenderConfig { guider: g, ..config.clone() };
        let dir = out.out.join(g.name());
        let run = render_to_dir(scene.clone(), cfg, Some(&reference), &dir, out.exposure, |row| {
            if !out.quiet {
                eprintln!("{g:>8} iter {:>5}  mse {}", row.iteration, fmt_opt(row.mse));
            }
        })?;
        let last = run.final_row().clone();
        let gathered: usize = run.rows.iter().map(|r| r.gathered).sum();
        summary.write_record([
            g.name().to_string(),
            fmt_opt(last.mse),
            fmt_opt(last.ssim_comp),
            gathered.to_string(),
            format!("{:.3}", last.seconds),
        ])?;
        results.push((g, last.mse.unwrap_or(f64::INFINITY), last.ssim_comp, gathered));
    }
    summary.flush()?;
    results.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (rank, (g, m, s, gathered)) in results.iter().enumerate() {
        println!(
            "{}. {:<8} mse {:.6e}  1-ssim {}  gathered {}",
            rank + 1,
            g.name(),
            m,
            fmt_opt(*s),
            gathered
        );
    }
    Ok(())
}

fn cmd_viz(scene: Scene, config: RenderConfig, light: usize, at: Option<Vec<f64>>, width: usize, out: &Path) -> Result<()> {
    if light >= scene.lights.len() {
        bail!("light {light} out of range for {} lights", scene.lights.len());
    }
    let run = harness::render(scene, config, None, |_| Ok(()))?;
    let r = &run.renderer;
    let x0 = match at {
        Some(v) => Vec3::new(v[0], v[1], v[2]),
        None => r.scene().lights[light]
            .center()
            .context("directional lights have no center; pass --at")?,
    };
    let guide = &r.guides()[light];
    let (w, h) = (width.max(2), (width / 2).max(1));
    let values = viz::directional_heatmap(|d| guide.direction_pdf(x0, d), w, h);
    fs::create_dir_all(out)?;
    write_ppm(&heatmap(&values, w, h), 1.0, File::create(out.join("pdf.ppm"))?)?;
    let mixtures: Vec<_> = r
        .guides()
        .iter()
        .filter_map(|g| match g {
            LightGuide::Gaussian(gg) => Some(gg.mixture()),
            _ => None,
        })
        .collect();
    write_ppm(&viz::splat_mixtures(r.scene(), &mixtures), 1.0, File::create(out.join("splats.ppm"))?)?;
    println!(
        "guide {} for light {light} seen from {:?}: pdf integral {:.6}",
        r.config().guider,
        x0.to_array(),
        viz::heatmap_integral(&values, w, h)
    );
    Ok(())
}

fn cmd_test_dist(ratios: &[f64], samples: usize, bins: usize, seed: u64) -> Result<()> {
    println!("d/sigma  closed-form-rel-err  normalization  chi2      dof  p-value");
    let mut ok = true;
    for &d in ratios {
        let r = dist_test::run(d, samples, bins, seed);
        println!(
            "{:<7}  {:<19.3e}  {:<13.8}  {:<8.2}  {:<3}  {:.4}",
            d, r.closed_form_rel_err, r.normalization, r.chi2, r.dof, r.p_value
        );
        ok &= r.closed_form_rel_err < 1e-6 && (r.normalization - 1.0).abs() < 1e-4 && r.p_value > 0.01;
    }
    if !ok {
        bail!("at least one check failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Render { scene, config, seed, output } => cmd_render(scene.load()?, config.build(seed)?, &output),
        Command::Compare { scene, config, seed, guiders, reference_iterations, output } => {
            cmd_compare(scene.load()?, config.build(seed)?, &guiders, reference_iterations, &output)
        }
        Command::Viz { scene, config, seed, light, at, viz_width, out } => {
            cmd_viz(scene.load()?, config.build(seed)?, light, at, viz_width, &out)
        }
        Command::TestDist { ratios, samples, bins, seed } => cmd_test_dist(&ratios, samples, bins, seed),
    }
}
