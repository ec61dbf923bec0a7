use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use omnipoint::{AreaUnit, Stepping};
use omnipoint_pipeline::annotate::annotate_file;
use omnipoint_pipeline::evaluate::all_modes;
use omnipoint_pipeline::render::{load_scene_image, render_views, Stage};
use omnipoint_pipeline::schema::{read_json, to_json_bytes, write_json, FrameKind};
use omnipoint_pipeline::synth::{synth_dataset, Preset, SynthOptions, SynthParams};
use omnipoint_pipeline::{
    estimate, evaluate, train, Dataset, FreqScope, Mode, ModelFile, PipelineConfig, ProjectionMode, ResultRecord,
    Selector,
};

#[derive(Parser)]
#[command(name = "omnipoint", version, about = "Find the object a person points at in a 360° panorama")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: ConfigFlags,
    #[command(subcommand)]
    command: Command,
}

fn enum_arg<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long, global = true)]
    step_deg: Option<f64>,
    #[arg(long, global = true)]
    fov_deg: Option<f64>,
    #[arg(long, global = true)]
    view_size: Option<u32>,
    #[arg(long, global = true)]
    num_views: Option<usize>,
    #[arg(long, global = true)]
    dedup_iou: Option<f64>,
    #[arg(long, global = true)]
    extended_deg: Option<f64>,
    #[arg(long, global = true)]
    kp_min: Option<f64>,
    #[arg(long, global = true)]
    gt_iou: Option<f64>,
    /// arc | longitude
    #[arg(long, global = true, value_parser = enum_arg::<Stepping>)]
    stepping: Option<Stepping>,
    /// steradian | pixel
    #[arg(long, global = true, value_parser = enum_arg::<AreaUnit>)]
    area_unit: Option<AreaUnit>,
    /// corpus | image
    #[arg(long, global = true, value_parser = enum_arg::<FreqScope>)]
    freq_scope: Option<FreqScope>,
    #[arg(long, global = true)]
    person_margin: Option<f64>,
    #[arg(long, global = true)]
    person_fov_min_deg: Option<f64>,
    #[arg(long, global = true)]
    person_fov_max_deg: Option<f64>,
    #[arg(long, global = true)]
    samples_per_edge: Option<usize>,
    #[arg(long, global = true)]
    svc_c: Option<f64>,
    #[arg(long, global = true)]
    svc_tol: Option<f64>,
    #[arg(long, global = true)]
    svc_max_iter: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl ConfigFlags {
    fn apply(&self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(step_deg, fov_deg, view_size, num_views, dedup_iou, extended_deg, kp_min, gt_iou, stepping, area_unit,
            freq_scope, person_margin, person_fov_min_deg, person_fov_max_deg, samples_per_edge, svc_c, svc_tol,
            svc_max_iter, seed);
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SkeletonArg {
    View,
    Equirect,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectionArg {
    Views,
    Equirect,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectorArg {
    Distance,
    Svc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectorsArg {
    Both,
    Distance,
    Svc,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Clean,
    Distractors,
    Hard,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Person,
    Scan,
}

#[derive(Args)]
struct ProjectionArgs {
    /// Frame the skeleton keypoints were estimated in.
    #[arg(long, value_enum, default_value = "view")]
    skeleton: SkeletonArg,
    /// Where objects were detected: scan views or the raw panorama.
    #[arg(long, value_enum, default_value = "views")]
    detection: DetectionArg,
}

impl ProjectionArgs {
    fn mode(&self) -> ProjectionMode {
        ProjectionMode {
            projection_skeleton: matches!(self.skeleton, SkeletonArg::View),
            projection_detection: matches!(self.detection, DetectionArg::Views),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rank the candidates of one scene.
    Estimate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scene: String,
        #[command(flatten)]
        projection: ProjectionArgs,
        #[arg(long, value_enum, default_value = "distance")]
        selector: SelectorArg,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the SVC on the train split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        projection: ProjectionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-1 accuracy on the test split for both selectors and all three projection modes.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Use this model for the SVC rows instead of training one per projection mode.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        selectors: SelectorsArg,
        /// Full report with per-scene results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a result onto the scene's panorama.
    Annotate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scene: String,
        #[arg(long)]
        result: PathBuf,
        /// Panorama to draw on; defaults to the scene's image.
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate synthetic scenes with exact ground truth.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "clean")]
        preset: PresetArg,
        #[arg(long, default_value_t = 0)]
        train: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long = "scene-seed", default_value_t = 0)]
        scene_seed: u64,
        #[arg(long)]
        noise_px: Option<f64>,
        #[arg(long)]
        width: Option<u32>,
        /// Also render each panorama as PNG.
        #[arg(long)]
        png: bool,
    },
    /// Export perspective views (PNG + views.json) for the external detectors.
    RenderViews {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scene: String,
        #[arg(long, value_enum)]
        stage: StageArg,
        /// Skeleton used to place the scan views.
        #[arg(long, value_enum, default_value = "view")]
        skeleton: SkeletonArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<ModelFile> {
    let m: ModelFile = read_json(path)?;
    if let Err(e) = m.check() {
        bail!("{}: {e}", path.display());
    }
    Ok(m)
}

fn frame_kind(s: SkeletonArg) -> FrameKind {
    match s {
        SkeletonArg::View => FrameKind::View,
        SkeletonArg::Equirect => FrameKind::Equirect,
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Estimate { manifest, scene, projection, selector, model, out } => {
            let ds = Dataset::load(&manifest)?;
            let selector = match selector {
                SelectorArg::Distance => Selector::Distance,
                SelectorArg::Svc => Selector::Svc,
            };
            let model = model.as_deref().map(load_model).transpose()?;
            let record = estimate(ds.scene(&scene)?, &cfg, Mode::new(projection.mode(), selector), model.as_ref())?;
            emit(&to_json_bytes(&record)?, out.as_deref())
        }
        Command::Train { manifest, projection, out } => {
            let ds = Dataset::load(&manifest)?;
            let outcome = train(&ds, &cfg, projection.mode())?;
            for (id, why) in &outcome.skipped {
                eprintln!("skipped {id}: {why}");
            }
            let meta = &outcome.model.metadata;
            eprintln!(
                "trained on {} scenes ({} samples, {} positive), {} skipped",
                meta.scenes_used, meta.training_size, meta.positives, meta.scenes_skipped
            );
            write_json(&out, &outcome.model)?;
            Ok(())
        }
        Command::Evaluate { manifest, model, selectors, out } => {
            let ds = Dataset::load(&manifest)?;
            let model = model.as_deref().map(load_model).transpose()?;
            let modes: Vec<Mode> = all_modes()
                .into_iter()
                .filter(|m| match selectors {
                    SelectorsArg::Both => true,
                    SelectorsArg::Distance => m.selector == Selector::Distance,
                    SelectorsArg::Svc => m.selector == Selector::Svc,
                })
                .collect();
            let report = evaluate(&ds, &cfg, &modes, model.as_ref())?;
            print!("{}", report.table());
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
            Ok(())
        }
        Command::Annotate { manifest, scene, result, image, top, out } => {
            let ds = Dataset::load(&manifest)?;
            let s = ds.scene(&scene)?;
            let record: ResultRecord = read_json(&result)?;
            if record.scene_id != s.id {
                bail!("result is for scene {}, not {}", record.scene_id, s.id);
            }
            let image = match image.or_else(|| s.image.clone()) {
                Some(p) => p,
                None => bail!("scene {} has no image; pass --image", s.id),
            };
            annotate_file(&image, &record, &out, top)?;
            Ok(())
        }
        Command::Synth { out, preset, train, test, scene_seed, noise_px, width, png } => {
            let mut params = SynthParams::preset(match preset {
                PresetArg::Clean => Preset::Clean,
                PresetArg::Distractors => Preset::Distractors,
                PresetArg::Hard => Preset::Hard,
            });
            if let Some(n) = noise_px {
                params.noise_px = n;
            }
            if let Some(w) = width {
                params.width = w;
            }
            let opts = SynthOptions { params, seed: scene_seed, train, test, png };
            let manifest = synth_dataset(&out, &opts, &cfg)?;
            eprintln!("wrote {} scenes to {}", manifest.scenes.len(), out.display());
            Ok(())
        }
        Command::RenderViews { manifest, scene, stage, skeleton, out } => {
            let ds = Dataset::load(&manifest)?;
            let s = ds.scene(&scene)?;
            let img = load_scene_image(s)?;
            let stage = match stage {
                StageArg::Person => Stage::Person,
                StageArg::Scan => Stage::Scan(frame_kind(skeleton)),
            };
            let vm = render_views(s, &img, &cfg, stage, &out)?;
            eprintln!("wrote {} views to {}", vm.views.len(), out.display());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
