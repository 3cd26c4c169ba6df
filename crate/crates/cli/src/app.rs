//! Subcommand definitions and dispatch.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when an internal
//! check fails.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read as _, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use compseq_core::eval::{evaluate, EvalConfig, EvalReport, GroundTruthInstance, IouBackend, ScoredInstance};
use compseq_core::geometry::{assemble, decompose, decompose_with, split_long_sides};
use compseq_core::gradcheck::gradient_check;
use compseq_core::matching::{match_sequences, MatchParams};
use compseq_core::piou::{
    piou_exact_with, piou_mc, PIoUConfig, Tolerance, DEFAULT_RASTER_RESOLUTION, DEFAULT_RELATIVE_TOLERANCE,
    DEFAULT_SAMPLES,
};
use compseq_core::study::{interp_compare, length_sweep, ribbons, Reference};
use compseq_core::synth::{derive_seed, gen_scene, perturb, PerturbParams, RibbonParams};
use compseq_core::{ComponentSequence, FormatHint, SideFit};
use serde_json::json;
use thiserror::Error;

use crate::ingest::{read_ctw1500, read_jsonl_str, read_pairs_str, to_jsonl_string, AnnotationRecord, IngestError, Instance};
use crate::render::{render_svg, RenderOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_err(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "compseq", version, about = "Component-sequence tools for arbitrary-shaped text instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split annotations into component sequences.
    Decompose(DecomposeArgs),
    /// Rebuild polygons from component sequences.
    Assemble(AssembleArgs),
    /// Overlap of instance pairs (Monte-Carlo, or exact with --exact).
    Piou(PiouArgs),
    /// Optimal assignment of predicted to ground-truth sequences.
    Match(MatchArgs),
    /// Precision, recall and F-measure at an IoU threshold.
    Eval(EvalArgs),
    /// Generate seeded synthetic scenes.
    Synth(SynthArgs),
    /// Verify loss gradients against finite differences.
    GradCheck(GradCheckArgs),
    /// Compare B-spline and Bezier side reconstruction on synthetic ribbons.
    InterpCompare(InterpCompareArgs),
    /// Draw polygons and components as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Jsonl,
    Ctw1500,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    /// Find head and tail edges from polygon corners.
    Auto,
    /// First half of the vertices is one long side, second half the other.
    Ctw1500,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fit {
    Interpolate,
    ControlPolygon,
}

impl From<Fit> for SideFit {
    fn from(f: Fit) -> Self {
        match f {
            Fit::Interpolate => SideFit::Interpolate,
            Fit::ControlPolygon => SideFit::ControlPolygon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Curvature {
    Straight,
    Moderate,
    High,
}

impl Curvature {
    fn params(self) -> RibbonParams {
        match self {
            Curvature::Straight => RibbonParams::straight(),
            Curvature::Moderate => RibbonParams::moderate(),
            Curvature::High => RibbonParams::high_curvature(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    MonteCarlo,
    Bbox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnnotationInput {
    /// Input annotations ("-" reads standard input).
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    format: InputFormat,
    /// Image id for CTW1500 input (defaults to the file stem).
    #[arg(long)]
    image: Option<String>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: AnnotationInput,
    /// Components per instance.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    /// Long-side split rule (defaults to ctw1500 for CTW1500 input, auto otherwise).
    #[arg(long, value_enum)]
    layout: Option<Layout>,
    #[arg(long, value_enum, default_value_t = Fit::Interpolate)]
    fit: Fit,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    /// Canonical JSONL whose instances carry components.
    input: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SequenceOptions {
    /// Components per instance when an instance has none.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
}

#[derive(Debug, Args)]
struct McOptions {
    /// Interior samples per instance.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    k: usize,
    /// Cell size as a fraction of the joint bounding-box diagonal.
    #[arg(long, default_value_t = DEFAULT_RELATIVE_TOLERANCE, conflicts_with = "tolerance_px")]
    tolerance: f64,
    /// Cell size in pixels.
    #[arg(long)]
    tolerance_px: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl McOptions {
    fn config(&self) -> CliResult<PIoUConfig> {
        let cfg = PIoUConfig {
            k_samples: self.k,
            tolerance: match self.tolerance_px {
                Some(px) => Tolerance::Absolute(px),
                None => Tolerance::RelativeToDiagonal(self.tolerance),
            },
            seed: self.seed,
            ..PIoUConfig::default()
        };
        cfg.validate().map_err(|e| input_err("invalid Monte-Carlo options", e))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct PiouArgs {
    /// Pair file: one {"a": instance, "b": instance} object per line.
    input: PathBuf,
    /// Rasterized exact IoU of the polygons instead of the Monte-Carlo estimate.
    #[arg(long)]
    exact: bool,
    /// Raster resolution for --exact.
    #[arg(long, default_value_t = DEFAULT_RASTER_RESOLUTION)]
    resolution: usize,
    #[command(flatten)]
    mc: McOptions,
    #[command(flatten)]
    seq: SequenceOptions,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Predictions (canonical JSONL, instances need a score).
    #[arg(long)]
    pred: PathBuf,
    /// Ground truth (canonical JSONL).
    #[arg(long)]
    gt: PathBuf,
    /// Maximum predictions per image.
    #[arg(long, default_value_t = 100)]
    n_max: usize,
    #[arg(long, default_value_t = 0.25)]
    focal_alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    focal_gamma: f64,
    #[command(flatten)]
    seq: SequenceOptions,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
    #[command(flatten)]
    mc: McOptions,
    #[command(flatten)]
    seq: SequenceOptions,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of images.
    #[arg(long, default_value_t = 1)]
    images: usize,
    /// Instances per image.
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 640.0)]
    width: f64,
    #[arg(long, default_value_t = 480.0)]
    height: f64,
    #[arg(long, value_enum, default_value_t = Curvature::Moderate)]
    curvature: Curvature,
    /// Also emit component sequences of this length.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    t: Option<u32>,
    /// Emit jittered, scored predictions with this vertex noise (pixels).
    #[arg(long)]
    noise: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Maximum accepted relative error.
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct InterpCompareArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Curvature::High)]
    curvature: Curvature,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[command(flatten)]
    input: AnnotationInput,
    /// Record to draw when the input holds several images.
    #[arg(long)]
    select: Option<String>,
    #[arg(long)]
    no_polygons: bool,
    #[arg(long)]
    no_components: bool,
    /// Label components with their frame index.
    #[arg(long)]
    frame_labels: bool,
    #[command(flatten)]
    out: Output,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Assemble(a) => cmd_assemble(a),
        Command::Piou(a) => cmd_piou(a),
        Command::Match(a) => cmd_match(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::GradCheck(a) => cmd_grad_check(a),
        Command::InterpCompare(a) => cmd_interp_compare(a),
        Command::Render(a) => cmd_render(a),
    }
}

// ---------------------------------------------------------------------------
// IO helpers

fn read_text(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io { path: path.into(), source })?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn emit(out: &Output, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn load_jsonl(path: &Path) -> CliResult<Vec<AnnotationRecord>> {
    read_jsonl_str(&read_text(path)?).map_err(|source| CliError::Ingest { path: path.into(), source })
}

fn load_annotations(input: &AnnotationInput) -> CliResult<Vec<AnnotationRecord>> {
    match input.format {
        InputFormat::Jsonl => load_jsonl(&input.input),
        InputFormat::Ctw1500 => {
            let image = input.image.clone().unwrap_or_else(|| {
                input.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            });
            let text = read_text(&input.input)?;
            let record =
                read_ctw1500(&image, &text).map_err(|source| CliError::Ingest { path: input.input.clone(), source })?;
            Ok(vec![record])
        }
    }
}

/// Component sequence of an instance: its own components when present,
/// otherwise a decomposition of its polygon. A score is broadcast to every
/// component.
fn instance_sequence(inst: &Instance, t: usize, hint: Option<FormatHint>) -> compseq_core::Result<ComponentSequence> {
    let quads = match &inst.components {
        Some(q) => q.clone(),
        None => decompose(&split_long_sides(&inst.polygon, hint)?, t)?.quads().to_vec(),
    };
    match inst.score {
        Some(s) => {
            let n = quads.len();
            ComponentSequence::prediction(quads, vec![s; n])
        }
        None => ComponentSequence::ground_truth(quads),
    }
}

fn by_image(records: Vec<AnnotationRecord>, what: &str) -> CliResult<(Vec<String>, HashMap<String, Vec<Instance>>)> {
    let mut order = Vec::new();
    let mut map = HashMap::new();
    for r in records {
        if map.contains_key(&r.image) {
            return Err(CliError::Input(format!("{what}: duplicate image id `{}`", r.image)));
        }
        order.push(r.image.clone());
        map.insert(r.image, r.instances);
    }
    Ok((order, map))
}

/// Ground-truth images in file order, then prediction-only images.
fn joined_images(gt_order: &[String], pred_order: &[String], gts: &HashMap<String, Vec<Instance>>) -> Vec<String> {
    let mut images = gt_order.to_vec();
    images.extend(pred_order.iter().filter(|p| !gts.contains_key(*p)).cloned());
    images
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_decompose(a: DecomposeArgs) -> CliResult<()> {
    let mut records = load_annotations(&a.input)?;
    let layout = a.layout.unwrap_or(match a.input.format {
        InputFormat::Ctw1500 => Layout::Ctw1500,
        InputFormat::Jsonl => Layout::Auto,
    });
    let hint = match layout {
        Layout::Auto => None,
        Layout::Ctw1500 => Some(FormatHint::Ctw1500),
    };
    for rec in &mut records {
        for (i, inst) in rec.instances.iter_mut().enumerate() {
            let ctx = || format!("image `{}` instance {i}", rec.image);
            let contour = split_long_sides(&inst.polygon, hint).map_err(|e| input_err(ctx(), e))?;
            let seq = decompose_with(&contour, a.t as usize, a.fit.into()).map_err(|e| input_err(ctx(), e))?;
            inst.components = Some(seq.quads().to_vec());
        }
    }
    emit(&a.out, &to_jsonl_string(&records))
}

fn cmd_assemble(a: AssembleArgs) -> CliResult<()> {
    let mut records = load_jsonl(&a.input)?;
    for rec in &mut records {
        for (i, inst) in rec.instances.iter_mut().enumerate() {
            let ctx = || format!("image `{}` instance {i}", rec.image);
            let quads = inst.components.clone().ok_or_else(|| input_err(ctx(), "no components"))?;
            let seq = ComponentSequence::ground_truth(quads).map_err(|e| input_err(ctx(), e))?;
            inst.polygon = assemble(&seq);
        }
    }
    emit(&a.out, &to_jsonl_string(&records))
}

fn cmd_piou(a: PiouArgs) -> CliResult<()> {
    let pairs = read_pairs_str(&read_text(&a.input)?).map_err(|source| CliError::Ingest { path: a.input.clone(), source })?;
    let mut out = String::new();
    if a.exact {
        if a.resolution == 0 {
            return Err(CliError::Input("--resolution must be >= 1".into()));
        }
        for (i, (x, y)) in pairs.iter().enumerate() {
            let v = piou_exact_with(&x.polygon, &y.polygon, a.resolution);
            out.push_str(&json!({"pair": i, "method": "exact", "resolution": a.resolution, "piou": v}).to_string());
            out.push('\n');
        }
    } else {
        let cfg = a.mc.config()?;
        eprintln!("seed: {}", cfg.seed);
        let t = a.seq.t as usize;
        for (i, (x, y)) in pairs.iter().enumerate() {
            let ctx = || format!("pair {i}");
            let sx = instance_sequence(x, t, None).map_err(|e| input_err(ctx(), e))?;
            let sy = instance_sequence(y, t, None).map_err(|e| input_err(ctx(), e))?;
            let est = piou_mc(&sx, &sy, &cfg).map_err(|e| input_err(ctx(), e))?;
            out.push_str(
                &json!({
                    "pair": i,
                    "method": "monte-carlo",
                    "seed": cfg.seed,
                    "k": cfg.k_samples,
                    "tolerance_px": est.tolerance_px,
                    "intersection_cells": est.intersection_cells,
                    "union_cells": est.union_cells,
                    "piou": est.value,
                })
                .to_string(),
            );
            out.push('\n');
        }
    }
    emit(&a.out, &out)
}

fn cmd_match(a: MatchArgs) -> CliResult<()> {
    let params = MatchParams { focal_alpha: a.focal_alpha, focal_gamma: a.focal_gamma, ..MatchParams::default() };
    params.validate().map_err(|e| input_err("invalid matching options", e))?;
    let (pred_order, preds) = by_image(load_jsonl(&a.pred)?, "predictions")?;
    let (gt_order, gts) = by_image(load_jsonl(&a.gt)?, "ground truth")?;
    let t = a.seq.t as usize;
    let mut out = String::new();
    for image in joined_images(&gt_order, &pred_order, &gts) {
        let p = preds.get(&image).map(Vec::as_slice).unwrap_or_default();
        let g = gts.get(&image).map(Vec::as_slice).unwrap_or_default();
        if p.len() > a.n_max {
            return Err(CliError::Input(format!(
                "image `{image}`: {} predictions exceed --n-max {}",
                p.len(),
                a.n_max
            )));
        }
        let mut pseqs = Vec::with_capacity(p.len());
        for (i, inst) in p.iter().enumerate() {
            let ctx = || format!("image `{image}` prediction {i}");
            if inst.score.is_none() {
                return Err(input_err(ctx(), "missing score"));
            }
            pseqs.push(instance_sequence(inst, t, None).map_err(|e| input_err(ctx(), e))?);
        }
        // Ignored ground truths take no part in matching.
        let kept: Vec<usize> = (0..g.len()).filter(|&j| !g[j].ignore).collect();
        let mut gseqs = Vec::with_capacity(kept.len());
        for &j in &kept {
            let inst = Instance { score: None, ..g[j].clone() };
            gseqs.push(instance_sequence(&inst, t, None).map_err(|e| input_err(format!("image `{image}` gt {j}"), e))?);
        }
        let result = match_sequences(&pseqs, &gseqs, &params).map_err(|e| input_err(format!("image `{image}`"), e))?;
        let assignments: Vec<_> = result
            .pred_to_gt
            .iter()
            .zip(&result.per_pair_cost)
            .enumerate()
            .map(|(i, (gt, cost))| json!({"pred": i, "gt": gt.map(|j| kept[j]), "cost": cost}))
            .collect();
        out.push_str(&json!({"image": image, "total_cost": result.total_cost, "assignments": assignments}).to_string());
        out.push('\n');
    }
    emit(&a.out, &out)
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let backend = match a.backend {
        Backend::Exact => IouBackend::Exact { resolution: DEFAULT_RASTER_RESOLUTION },
        Backend::Bbox => IouBackend::BoundingBox,
        Backend::MonteCarlo => {
            let config = a.mc.config()?;
            eprintln!("seed: {}", config.seed);
            IouBackend::MonteCarlo { config, t: a.seq.t as usize }
        }
    };
    let cfg = EvalConfig { iou_threshold: a.iou, backend };
    let (pred_order, preds) = by_image(load_jsonl(&a.pred)?, "predictions")?;
    let (gt_order, gts) = by_image(load_jsonl(&a.gt)?, "ground truth")?;
    let images = joined_images(&gt_order, &pred_order, &gts);
    let mut p_all = Vec::with_capacity(images.len());
    let mut g_all = Vec::with_capacity(images.len());
    for image in &images {
        p_all.push(
            preds
                .get(image)
                .into_iter()
                .flatten()
                .map(|i| ScoredInstance { polygon: i.polygon.clone(), score: i.score.unwrap_or(1.0) })
                .collect::<Vec<_>>(),
        );
        g_all.push(
            gts.get(image)
                .into_iter()
                .flatten()
                .map(|i| GroundTruthInstance { polygon: i.polygon.clone(), ignore: i.ignore })
                .collect::<Vec<_>>(),
        );
    }
    let report = evaluate(&p_all, &g_all, &cfg).map_err(|e| input_err("evaluation", e))?;
    let text = match a.report {
        ReportFormat::Json => eval_json(&report, &images, a.backend, &a.mc),
        ReportFormat::Csv => eval_csv(&report, &images),
    };
    emit(&a.out, &text)
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Exact => "exact",
        Backend::MonteCarlo => "monte-carlo",
        Backend::Bbox => "bbox",
    }
}

fn eval_json(r: &EvalReport, images: &[String], backend: Backend, mc: &McOptions) -> String {
    let per_image: Vec<_> = r
        .per_image
        .iter()
        .zip(images)
        .map(|(c, im)| {
            json!({
                "image": im,
                "true_positives": c.true_positives,
                "false_positives": c.false_positives,
                "false_negatives": c.false_negatives,
                "ignored_predictions": c.ignored_predictions,
            })
        })
        .collect();
    let mut v = json!({
        "precision": r.precision,
        "recall": r.recall,
        "f_measure": r.f_measure,
        "iou_threshold": r.iou_threshold,
        "backend": backend_name(backend),
        "true_positives": r.true_positives,
        "false_positives": r.false_positives,
        "false_negatives": r.false_negatives,
        "ignored_predictions": r.ignored_predictions,
        "images": per_image,
    });
    if backend == Backend::MonteCarlo {
        v["seed"] = json!(mc.seed);
    }
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn eval_csv(r: &EvalReport, images: &[String]) -> String {
    let mut s = String::from("image,true_positives,false_positives,false_negatives,ignored_predictions,precision,recall,f_measure\n");
    let row = |s: &mut String, name: &str, tp: usize, fp: usize, fn_: usize, ig: usize| {
        let (p, rc, f) = compseq_core::eval::prf(tp, fp, fn_);
        s.push_str(&format!("{},{tp},{fp},{fn_},{ig},{p},{rc},{f}\n", csv_field(name)));
    };
    for (c, im) in r.per_image.iter().zip(images) {
        row(&mut s, im, c.true_positives, c.false_positives, c.false_negatives, c.ignored_predictions);
    }
    row(&mut s, "ALL", r.true_positives, r.false_positives, r.false_negatives, r.ignored_predictions);
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    if let Some(n) = a.noise {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(CliError::Input("--noise must be a non-negative number".into()));
        }
    }
    eprintln!("seed: {}", a.seed);
    let params = a.curvature.params();
    let mut records = Vec::with_capacity(a.images);
    for img in 0..a.images {
        let scene_seed = derive_seed(a.seed, img as u64);
        let scene = gen_scene(scene_seed, a.count, (a.width, a.height), &params).map_err(|e| input_err("synth", e))?;
        let mut instances = Vec::with_capacity(scene.len());
        for (k, ribbon) in scene.iter().enumerate() {
            let inst = match a.noise {
                Some(noise_px) => {
                    let pp = PerturbParams { t: a.t.unwrap_or(6) as usize, noise_px, ..PerturbParams::default() };
                    let seq = perturb(&ribbon.contour, &pp, derive_seed(scene_seed, (a.count + k) as u64))
                        .map_err(|e| input_err("synth", e))?;
                    Instance {
                        polygon: assemble(&seq),
                        score: seq.scores().map(|s| s[0]),
                        ignore: false,
                        components: Some(seq.quads().to_vec()),
                    }
                }
                None => {
                    let mut inst = Instance::new(ribbon.contour.to_polygon());
                    if let Some(t) = a.t {
                        let seq = decompose(&ribbon.contour, t as usize).map_err(|e| input_err("synth", e))?;
                        inst.components = Some(seq.quads().to_vec());
                    }
                    inst
                }
            };
            instances.push(inst);
        }
        records.push(AnnotationRecord { image: format!("synth_{}_{img}", a.seed), instances });
    }
    emit(&a.out, &to_jsonl_string(&records))
}

fn cmd_grad_check(a: GradCheckArgs) -> CliResult<()> {
    eprintln!("seed: {}", a.seed);
    if !(a.epsilon > 0.0) {
        return Err(CliError::Input("--epsilon must be positive".into()));
    }
    let r = gradient_check(a.seed, a.points, a.epsilon).map_err(|e| input_err("grad-check", e))?;
    let stationarity_tolerance = 1e-8;
    let pass = r.passes(a.tolerance, stationarity_tolerance);
    let v = json!({
        "seed": r.seed,
        "points": r.points,
        "epsilon": r.epsilon,
        "tolerance": a.tolerance,
        "psc_max_rel_error": r.psc_max_rel_error,
        "focal_max_rel_error": r.focal_max_rel_error,
        "l1_max_rel_error": r.l1_max_rel_error,
        "stationarity_max_grad": r.stationarity_max_grad,
        "stationarity_tolerance": stationarity_tolerance,
        "pass": pass,
    });
    emit(&a.out, &format!("{v}\n"))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Internal("gradient check failed".into()))
    }
}

fn cmd_interp_compare(a: InterpCompareArgs) -> CliResult<()> {
    eprintln!("seed: {}", a.seed);
    let t = a.t as usize;
    let rs = ribbons(a.seed, a.count, &a.curvature.params()).map_err(|e| input_err("interp-compare", e))?;
    let c = interp_compare(&rs, t).map_err(|e| input_err("interp-compare", e))?;
    let sweep = length_sweep(&rs, &[4, 6, 8], Reference::TrueOutline).map_err(|e| input_err("interp-compare", e))?;
    let curvature = match a.curvature {
        Curvature::Straight => "straight",
        Curvature::Moderate => "moderate",
        Curvature::High => "high",
    };
    let v = json!({
        "seed": a.seed,
        "count": c.count,
        "curvature": curvature,
        "t": c.t,
        "bspline_mean_piou": c.bspline_mean,
        "bezier_mean_piou": c.bezier_mean,
        "control_polygon_mean_piou": c.control_polygon_mean,
        "bspline_wins": c.bspline_wins,
        "bspline_better": c.bspline_mean > c.bezier_mean,
        "length_sweep_true_outline": sweep.iter().map(|(t, m)| json!({"t": t, "mean_piou": m})).collect::<Vec<_>>(),
    });
    eprintln!(
        "B-spline {:.4} vs Bezier {:.4} over {} ribbons (B-spline better on {})",
        c.bspline_mean, c.bezier_mean, c.count, c.bspline_wins
    );
    emit(&a.out, &format!("{v}\n"))
}

fn cmd_render(a: RenderArgs) -> CliResult<()> {
    let records = load_annotations(&a.input)?;
    let record = match &a.select {
        Some(id) => records
            .iter()
            .find(|r| &r.image == id)
            .ok_or_else(|| CliError::Input(format!("no image `{id}` in input")))?,
        None => match records.as_slice() {
            [only] => only,
            [] => return Err(CliError::Input("input holds no images".into())),
            _ => return Err(CliError::Input("input holds several images; pick one with --select".into())),
        },
    };
    let opts = RenderOptions {
        polygons: !a.no_polygons,
        components: !a.no_components,
        frame_labels: a.frame_labels,
        ..RenderOptions::default()
    };
    emit(&a.out, &render_svg(record, &opts))
}
