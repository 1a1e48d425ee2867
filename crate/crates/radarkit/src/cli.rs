//! Command-line interface.
//!
//! Subcommands: `fit-attenuation`, `augment`, `detect`, `evaluate`,
//! `simulate`, `msad`. Global flags `--config`, `--seed`, `--jobs` and
//! `--output` apply everywhere. Exit codes: 0 success, 1 usage error,
//! 2 data or processing error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::augment::{
    auto_threshold, mean_object_power, segment_threshold, AttenuationModel, AugmentationPlan,
    SourceSample,
};
use crate::detect::{
    detect_pipeline, Classifier, NearestCentroidClassifier, SingleClassClassifier,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate_dataset, msad_slices, GtBox};
use crate::geometry::{polar_to_cartesian, CartesianImage};
use crate::io::{
    self, load_cartesian_scan, DatasetManifest, DetectionsFile, GroundTruthFile, ManifestRecord,
    Scan, SceneFile, ToolConfig,
};
use crate::rng::child_rng;
use crate::sim::render_scene;

#[derive(Parser)]
#[command(
    name = "radarkit",
    version,
    about = "Radar image augmentation, CFAR+DBSCAN detection and evaluation"
)]
struct Cli {
    /// TOML configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for all randomized steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    output: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit per-class attenuation lines from a dataset manifest.
    #[command(allow_negative_numbers = true)]
    FitAttenuation {
        #[arg(long)]
        manifest: PathBuf,
        /// Fixed segmentation threshold in dB (default: per-image estimate).
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Generate augmented samples from a manifest, model and plan.
    #[command(allow_negative_numbers = true)]
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Plan JSON; defaults come from the configuration.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Also export every record as a 16-bit PNG.
        #[arg(long)]
        export_png: bool,
    },
    /// Run CFAR + DBSCAN + classification on polar scans.
    Detect {
        /// Scan payload paths.
        #[arg(required = true)]
        scans: Vec<PathBuf>,
        /// Directory of per-class template patches for the baseline
        /// classifier (subdirectory per class, cartesian scans inside).
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Score detections against ground truth.
    Evaluate {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        /// Also write the precision-recall curves as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Render synthetic scenes to polar scans plus ground truth.
    Simulate {
        /// Scene description JSON files.
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        #[arg(long)]
        export_png: bool,
    },
    /// Mean sum of absolute differences between two scans.
    Msad { a: PathBuf, b: PathBuf },
}

/// Parse and execute. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };

    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let jobs = cli.jobs.unwrap_or(config.jobs);
    let body = || match execute(&cli, &config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    if jobs > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(body),
            Err(e) => {
                eprintln!("error: building worker pool: {e}");
                2
            }
        }
    } else {
        body()
    }
}

fn load_config(cli: &Cli) -> Result<ToolConfig> {
    let mut config = match &cli.config {
        Some(path) => ToolConfig::load(path)?,
        None => ToolConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn execute(cli: &Cli, config: &ToolConfig) -> Result<()> {
    std::fs::create_dir_all(&cli.output)?;
    match &cli.command {
        Command::FitAttenuation {
            manifest,
            threshold,
        } => fit_attenuation_cmd(
            manifest,
            threshold.or(config.segment_threshold_db),
            config,
            &cli.output,
        ),
        Command::Augment {
            manifest,
            model,
            plan,
            threshold,
            export_png,
        } => augment_cmd(
            manifest,
            model,
            plan.as_deref(),
            threshold.or(config.segment_threshold_db),
            *export_png,
            cli.seed,
            config,
            &cli.output,
        ),
        Command::Detect { scans, templates } => {
            detect_cmd(scans, templates.as_deref(), config, &cli.output)
        }
        Command::Evaluate {
            detections,
            ground_truth,
            csv,
        } => evaluate_cmd(detections, ground_truth, *csv, config, &cli.output),
        Command::Simulate { scenes, export_png } => {
            simulate_cmd(scenes, *export_png, config, &cli.output)
        }
        Command::Msad { a, b } => msad_cmd(a, b),
    }
}

/// Load a manifest record's scan as a Cartesian image, converting polar
/// scans with the configured grid settings.
fn load_record_image(
    base: &Path,
    record: &ManifestRecord,
    config: &ToolConfig,
) -> Result<CartesianImage> {
    match io::load_any_scan(&base.join(&record.scan))? {
        Scan::Cartesian(img) => Ok(img),
        Scan::Polar(polar) => {
            let mpp = config.meters_per_pixel.unwrap_or(polar.range_resolution_m);
            polar_to_cartesian(&polar, mpp, config.interp, config.fill_db)
        }
    }
}

fn fit_attenuation_cmd(
    manifest_path: &Path,
    threshold: Option<f64>,
    config: &ToolConfig,
    output: &Path,
) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let samples: Vec<(String, (f64, f64))> = manifest
        .records
        .par_iter()
        .map(|record| -> Result<(String, (f64, f64))> {
            let img = load_record_image(base, record, config)?;
            let t = threshold.unwrap_or_else(|| auto_threshold(&img));
            let mask = segment_threshold(&img, t);
            let power = mean_object_power(&img, &mask)?;
            Ok((record.class.clone(), (record.range_m, power)))
        })
        .collect::<Result<_>>()?;

    let mut by_class: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (class, sample) in samples {
        by_class.entry(class).or_default().push(sample);
    }
    let model = AttenuationModel::fit(&by_class)?;
    let path = output.join("attenuation_model.json");
    std::fs::write(&path, serde_json::to_string_pretty(&model)?)?;
    for (class, entry) in model.classes() {
        println!(
            "{class}: slope {:.4} dB/m, intercept {:.4} dB, rmse {:.4} dB ({} points)",
            entry.slope_db_per_m, entry.intercept_db, entry.rmse, entry.n_points
        );
    }
    println!("model written to {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn augment_cmd(
    manifest_path: &Path,
    model_path: &Path,
    plan_path: Option<&Path>,
    threshold: Option<f64>,
    export_png: bool,
    seed_override: Option<u64>,
    config: &ToolConfig,
    output: &Path,
) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let model: AttenuationModel = serde_json::from_str(&std::fs::read_to_string(model_path)?)
        .map_err(|e| Error::format(model_path.display().to_string(), format!("bad model: {e}")))?;
    let mut plan: AugmentationPlan = match plan_path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| Error::format(p.display().to_string(), format!("bad plan: {e}")))?,
        None => AugmentationPlan {
            seed: config.seed,
            ..config.augmentation_plan()
        },
    };
    if let Some(seed) = seed_override {
        plan.seed = seed;
    }

    let samples: Vec<SourceSample> = manifest
        .records
        .iter()
        .enumerate()
        .map(|(i, record)| -> Result<SourceSample> {
            let image = load_record_image(base, record, config)?;
            let stem = Path::new(&record.scan)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("sample{i:04}"));
            Ok(SourceSample {
                id: stem,
                class: record.class.clone(),
                range_m: record.range_m,
                image,
            })
        })
        .collect::<Result<_>>()?;

    let scans_dir = output.join("scans");
    std::fs::create_dir_all(&scans_dir)?;
    let run_manifest = crate::augment::augment_dataset(
        &samples,
        &plan,
        &model,
        &manifest.sensor,
        threshold,
        |record| {
            let path = scans_dir.join(format!("{}.bin", record.id));
            io::save_cartesian_scan(&record.image, &path)?;
            if export_png {
                io::export_png16(
                    record.image.data(),
                    record.image.width(),
                    record.image.height(),
                    &scans_dir.join(format!("{}.png", record.id)),
                )?;
            }
            Ok(())
        },
    )?;

    // Output manifest reuses the dataset schema so it re-loads and
    // re-validates as an input.
    let source_meta: BTreeMap<&str, &ManifestRecord> = samples
        .iter()
        .map(|s| s.id.as_str())
        .zip(manifest.records.iter())
        .collect();
    let mut out_manifest = DatasetManifest::new(manifest.sensor.clone());
    for entry in &run_manifest.records {
        let src = source_meta
            .get(entry.source_id.as_str())
            .ok_or_else(|| Error::invalid(format!("unknown source id {}", entry.source_id)))?;
        out_manifest.records.push(ManifestRecord {
            scan: format!("scans/{}.bin", entry.id),
            class: entry.class.clone(),
            range_m: entry.range_m,
            rotation_deg: src.rotation_deg,
            receiver: src.receiver.clone(),
            boxes: Vec::new(),
            augmentation: entry.recipe.clone(),
        });
    }
    out_manifest.save(&output.join("manifest.json"))?;
    println!(
        "{} augmented + {} originals written to {}",
        run_manifest.augmented_count(),
        run_manifest.total_count() - run_manifest.augmented_count(),
        output.display()
    );
    Ok(())
}

fn load_templates(dir: &Path) -> Result<Box<dyn Classifier>> {
    let mut patches = Vec::new();
    let mut class_dirs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();
    for class_dir in class_dirs {
        let class = class_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&class_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "bin"))
            .collect();
        files.sort();
        for file in files {
            patches.push((load_cartesian_scan(&file)?, class.clone()));
        }
    }
    Ok(Box::new(NearestCentroidClassifier::train(&patches)?))
}

fn detect_cmd(
    scans: &[PathBuf],
    templates: Option<&Path>,
    config: &ToolConfig,
    output: &Path,
) -> Result<()> {
    let classifier: Box<dyn Classifier> = match templates {
        Some(dir) => load_templates(dir)?,
        None => Box::new(SingleClassClassifier::new("target")),
    };
    let params = config.pipeline_params();

    let per_scan: Vec<(String, Vec<crate::detect::LabeledBox>)> = scans
        .par_iter()
        .map(|path| -> Result<(String, Vec<crate::detect::LabeledBox>)> {
            let polar = io::load_scan(path)?;
            let out = detect_pipeline(&polar, &params, classifier.as_ref())?;
            let key = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((key, out.boxes))
        })
        .collect::<Result<_>>()?;

    let mut detections = DetectionsFile::new();
    for (key, boxes) in per_scan {
        println!("{key}: {} detections", boxes.len());
        detections.insert(key, boxes);
    }
    let path = output.join("detections.json");
    io::save_detections(&detections, &path)?;
    println!("detections written to {}", path.display());
    Ok(())
}

fn evaluate_cmd(
    detections: &Path,
    ground_truth: &Path,
    csv: bool,
    config: &ToolConfig,
    output: &Path,
) -> Result<()> {
    let dets = io::load_detections(detections)?;
    let gts = io::load_ground_truth(ground_truth)?;
    let images = io::join_by_key(&dets, &gts);
    let report = evaluate_dataset(&images, config.iou_threshold, config.ap_variant)?;

    for (class, eval) in &report.per_class {
        println!(
            "{class}: AP {:.4} (tp {}, fp {}, fn {})",
            eval.ap, eval.tp, eval.fp, eval.fn_
        );
    }
    println!("mAP {:.4} at IoU {}", report.map, report.iou_threshold);

    io::save_report(&report, &output.join("report.json"))?;
    if csv {
        io::save_pr_csv(&report, &output.join("pr_curves.csv"))?;
    }
    Ok(())
}

fn simulate_cmd(
    scenes: &[PathBuf],
    export_png: bool,
    config: &ToolConfig,
    output: &Path,
) -> Result<()> {
    let mut ground_truth = GroundTruthFile::new();
    for (i, scene_path) in scenes.iter().enumerate() {
        let scene = SceneFile::load(scene_path)?;
        let mut rng = child_rng(config.seed, i as u64, 0);
        let polar = render_scene(&scene.scatterers, &scene.sensor, &scene.sim, &mut rng)?;

        let stem = scene_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("scene{i:03}"));
        let scan_name = format!("{stem}.bin");
        io::save_scan(&polar, &output.join(&scan_name))?;
        if export_png {
            io::export_png16(
                polar.data(),
                polar.range_bins(),
                polar.azimuth_bins(),
                &output.join(format!("{stem}.png")),
            )?;
        }

        // Ground-truth boxes on the same grid the detector will build.
        let mpp = config.meters_per_pixel.unwrap_or(polar.range_resolution_m);
        let cart = polar_to_cartesian(&polar, mpp, config.interp, config.fill_db)?;
        let side_w = config.box_side_px.min(cart.width());
        let side_h = config.box_side_px.min(cart.height());
        let boxes: Vec<GtBox> = scene
            .scatterers
            .iter()
            .map(|s| {
                let (col, row) = cart.world_to_pixel(s.x_m, s.y_m);
                let x = (col.round() as i64 - (side_w / 2) as i64)
                    .clamp(0, (cart.width() - side_w) as i64);
                let y = (row.round() as i64 - (side_h / 2) as i64)
                    .clamp(0, (cart.height() - side_h) as i64);
                GtBox {
                    class: s.class.clone().unwrap_or_else(|| "target".into()),
                    x: x as f64,
                    y: y as f64,
                    width: side_w as f64,
                    height: side_h as f64,
                }
            })
            .collect();
        println!(
            "{scan_name}: {} scatterers rendered",
            scene.scatterers.len()
        );
        ground_truth.insert(scan_name, boxes);
    }
    io::save_ground_truth(&ground_truth, &output.join("ground_truth.json"))?;
    Ok(())
}

fn msad_cmd(a: &Path, b: &Path) -> Result<()> {
    let value = match (io::load_any_scan(a)?, io::load_any_scan(b)?) {
        (Scan::Polar(x), Scan::Polar(y)) => {
            if x.azimuth_bins() != y.azimuth_bins() || x.range_bins() != y.range_bins() {
                return Err(Error::invalid(format!(
                    "scan grids differ: {}x{} vs {}x{}",
                    x.azimuth_bins(),
                    x.range_bins(),
                    y.azimuth_bins(),
                    y.range_bins()
                )));
            }
            msad_slices(x.data(), y.data())?
        }
        (Scan::Cartesian(x), Scan::Cartesian(y)) => crate::eval::msad(&x, &y, None)?,
        _ => {
            return Err(Error::invalid(
                "cannot compare a polar scan with a cartesian scan",
            ))
        }
    };
    println!("{value}");
    Ok(())
}
