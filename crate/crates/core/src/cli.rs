//! The `celforge` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when inputs are missing,
//! malformed or inconsistent.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{aggregate, apply_tags, score_pair, MetricRow};
use crate::formats::{
    read_cuts, read_flo, read_png, read_tags, write_gray8, write_manifest, write_mask_png,
    write_png, DirFlows, DirFrames,
};
use crate::imgproc::{BinaryMask, ImageF32};
use crate::linework::{self, edt::oracle::brute_force_squared_edt, squared_edt};
use crate::mining::{
    self, dedup_features, fit_dedup, DedupModel, DedupSample, FrameSource, MineParams, TripletFlows,
};
use crate::warp::{halfway_guess_with, softmax_splat, FlowField};

#[derive(Debug, Parser)]
#[command(
    name = "celforge",
    version,
    about = "Line metrics, forward warping and triplet mining for 2D animation"
)]
struct Cli {
    /// TOML configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: one per logical core).
    #[arg(long, global = true, env = "CELFORGE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate every triplet of a frame sequence and pick one per cut.
    Mine(MineArgs),
    /// Print the linear discrepancy of one triplet.
    Rrld(RrldArgs),
    /// Fit or apply a duplicate-frame model.
    #[command(subcommand)]
    Dedup(DedupCommand),
    /// Synthesize an intermediate frame from two frames and their flows.
    Interp(InterpArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Write the normalized distance transform of an image's line drawing.
    Edt(EdtArgs),
    /// Time one operation on synthetic input.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Directory of PNG frames, ordered by file name.
    #[arg(long)]
    frames: PathBuf,
    /// Directory of `<from>_to_<to>.flo` files named by frame stem.
    #[arg(long)]
    flows: PathBuf,
    /// `cut_id,start,end` lines.
    #[arg(long)]
    cuts: PathBuf,
    /// Triplets at or above this are rejected (default 0.3)
    #[arg(long)]
    rrld_threshold: Option<f64>,
    /// Flow magnitude a pixel needs in both directions to be rated (default 2)
    #[arg(long)]
    min_norm: Option<f64>,
    /// Seed for choosing one triplet per cut
    #[arg(long)]
    seed: Option<u64>,
    /// Model from `dedup fit`; without one no frame is treated as a hold
    #[arg(long)]
    dedup_model: Option<PathBuf>,
    /// Manifest output, one JSON record per line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RrldArgs {
    /// Flow from the middle frame to the earlier frame.
    #[arg(long)]
    flow_prev: PathBuf,
    /// Flow from the middle frame to the later frame.
    #[arg(long)]
    flow_next: PathBuf,
    /// Flow magnitude a pixel needs in both directions to be rated (default 2)
    #[arg(long)]
    min_norm: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum DedupCommand {
    /// Fit a model from labelled frame pairs.
    Fit {
        /// `frame_a,frame_b,label` lines, label 1 for duplicates; paths are
        /// relative to this file.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every consecutive pair of a frame directory.
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        frames: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InterpArgs {
    #[arg(long)]
    frame0: PathBuf,
    #[arg(long)]
    frame1: PathBuf,
    /// Flow from frame 0 to frame 1.
    #[arg(long)]
    flow01: PathBuf,
    /// Flow from frame 1 to frame 0.
    #[arg(long)]
    flow10: PathBuf,
    /// Time of the output frame between frame 0 and frame 1
    #[arg(long, default_value_t = 0.5)]
    t: f32,
    #[arg(long)]
    out: PathBuf,
    /// Also write pixels covered by neither warp as a mask.
    #[arg(long)]
    holes: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// `sample_id,tag[,tag...]` lines.
    #[arg(long)]
    tags: Option<PathBuf>,
    /// Output prefix; writes `<out>.jsonl` and `<out>.txt`.
    #[arg(long)]
    out: PathBuf,
    /// Score only `top,left,height,width`.
    #[arg(long, value_parser = parse_crop)]
    crop: Option<[usize; 4]>,
}

#[derive(Debug, Args)]
struct EdtArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Falloff as a fraction of image height (default 15/540)
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BenchOp {
    /// Exact distance transform of a random sketch.
    Edt,
    /// Sketches, distance transforms, NEDT and chamfer for an image pair.
    Metric,
    /// Softmax splatting of an RGB frame.
    Splat,
    /// Production distance transform against the brute-force reference.
    EdtOracle,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    op: BenchOp,
    /// `HEIGHTxWIDTH`
    #[arg(long, value_parser = parse_size, default_value = "540x960")]
    size: (usize, usize),
    #[arg(long, default_value_t = 10)]
    iters: usize,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HEIGHTxWIDTH, got {s:?}"))?;
    let dim = |d: &str| match d.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("bad dimension {d:?}")),
    };
    Ok((dim(h)?, dim(w)?))
}

fn parse_crop(s: &str) -> std::result::Result<[usize; 4], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| "expected top,left,height,width".to_string())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) => 1,
                _ => 2,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(cli.command, config))
}

fn dispatch(command: Command, mut config: Config) -> Result<()> {
    match command {
        Command::Mine(a) => {
            if let Some(v) = a.rrld_threshold {
                config.rrld_threshold = v;
            }
            if let Some(v) = a.min_norm {
                config.min_norm = v;
            }
            if let Some(v) = a.seed {
                config.seed = v;
            }
            config.validate()?;
            cmd_mine(&a, &config)
        }
        Command::Rrld(a) => {
            let min_norm = a.min_norm.unwrap_or(config.min_norm);
            let flows = TripletFlows::new(read_flo(&a.flow_prev)?, read_flo(&a.flow_next)?)?;
            println!("{:.6}", mining::rrld(&flows, min_norm)?);
            Ok(())
        }
        Command::Dedup(DedupCommand::Fit { pairs, out }) => cmd_dedup_fit(&pairs, &out),
        Command::Dedup(DedupCommand::Apply { model, frames, out }) => {
            cmd_dedup_apply(&model, &frames, out.as_deref())
        }
        Command::Interp(a) => cmd_interp(&a, &config),
        Command::Eval(a) => cmd_eval(&a, &config),
        Command::Edt(a) => {
            let img = read_png(&a.image)?;
            let tau = a.tau.unwrap_or(config.nedt_tau);
            let field = linework::nedt(&img, tau, &config.dog.scaled_to_height(img.height()))?;
            write_gray8(&field.to_gray8(), field.height(), field.width(), &a.out)
        }
        Command::Bench(a) => cmd_bench(&a, &config),
    }
}

fn cmd_mine(a: &MineArgs, config: &Config) -> Result<()> {
    let frames = DirFrames::open(&a.frames)?;
    let flows = DirFlows::new(&a.flows, frames.stems());
    let cuts = read_cuts(&a.cuts)?;
    let dedup = a.dedup_model.as_deref().map(read_dedup_model).transpose()?;
    let params = MineParams {
        rrld_threshold: config.rrld_threshold,
        min_norm: config.min_norm,
        pan: config.pan,
        seed: config.seed,
        dedup,
    };
    let records = mining::mine(&frames, &flows, &cuts, &params)?;
    write_manifest(&records, &a.out)?;
    let accepted = records.iter().filter(|r| r.accepted).count();
    eprintln!("{} triplets rated, {accepted} accepted", records.len());
    Ok(())
}

fn read_dedup_model(path: &Path) -> Result<DedupModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse().map_err(|e: String| Error::format(path, e))
}

fn cmd_dedup_fit(pairs: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(pairs).map_err(|e| Error::io(pairs, e))?;
    let base = pairs.parent().unwrap_or(Path::new("."));
    let mut jobs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [a, b, label] = fields[..] else {
            return Err(Error::format(
                pairs,
                format!("line {}: expected frame_a,frame_b,label", n + 1),
            ));
        };
        let label = match label {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(Error::format(
                    pairs,
                    format!("line {}: bad label {other:?}", n + 1),
                ))
            }
        };
        jobs.push((base.join(a), base.join(b), label));
    }
    let samples: Vec<DedupSample> = jobs
        .par_iter()
        .map(|(a, b, label)| {
            Ok(DedupSample {
                features: dedup_features(&read_png(a)?, &read_png(b)?)?,
                is_duplicate: *label,
            })
        })
        .collect::<Result<_>>()?;
    let model = fit_dedup(&samples)?;
    std::fs::write(out, model.to_string()).map_err(|e| Error::io(out, e))
}

fn cmd_dedup_apply(model: &Path, frames: &Path, out: Option<&Path>) -> Result<()> {
    let model = read_dedup_model(model)?;
    let frames = DirFrames::open(frames)?;
    let lines: Vec<String> = (1..frames.len())
        .into_par_iter()
        .map(|i| {
            let f = dedup_features(&frames.load(i - 1)?, &frames.load(i)?)?;
            Ok(format!(
                "{},{},{},{},{},{}",
                frames.name(i - 1),
                frames.name(i),
                f.mean,
                f.max,
                model.score(f),
                model.is_duplicate(f) as u8
            ))
        })
        .collect::<Result<_>>()?;
    let mut text = String::from("frame_a,frame_b,mean,max,score,duplicate\n");
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_interp(a: &InterpArgs, config: &Config) -> Result<()> {
    let (i0, i1) = (read_png(&a.frame0)?, read_png(&a.frame1)?);
    let (f01, f10) = (read_flo(&a.flow01)?, read_flo(&a.flow10)?);
    let shape = |h: usize, w: usize| format!("{h}x{w}");
    if i0.height() != i1.height() || i0.width() != i1.width() {
        return Err(Error::InvalidInput(format!(
            "frame0 is {} but frame1 is {}",
            shape(i0.height(), i0.width()),
            shape(i1.height(), i1.width())
        )));
    }
    for (flow, name) in [(&f01, "flow01"), (&f10, "flow10")] {
        if flow.height() != i0.height() || flow.width() != i0.width() {
            return Err(Error::InvalidInput(format!(
                "{name} is {} but frames are {}",
                shape(flow.height(), flow.width()),
                shape(i0.height(), i0.width())
            )));
        }
    }
    let out = halfway_guess_with(&i0, &i1, &f01, &f10, a.t, config.open_kernel)?;
    write_png(&out.image, &a.out)?;
    if let Some(path) = &a.holes {
        write_mask_png(&out.holes(), path)?;
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs, config: &Config) -> Result<()> {
    let pred = DirFrames::open(&a.pred)?;
    let gt_dir = &a.gt;
    if pred.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no PNG files in {}",
            a.pred.display()
        )));
    }
    let tags = a
        .tags
        .as_deref()
        .map(read_tags)
        .transpose()?
        .unwrap_or_default();
    let stems = pred.stems();
    let mut rows: Vec<MetricRow> = (0..pred.len())
        .into_par_iter()
        .map(|i| {
            let gt_path = gt_dir.join(pred.name(i));
            if !gt_path.is_file() {
                return Err(Error::InvalidInput(format!(
                    "no ground truth for {} (expected {})",
                    pred.name(i),
                    gt_path.display()
                )));
            }
            let (mut p, mut g) = (pred.load(i)?, read_png(&gt_path)?);
            if let Some([top, left, h, w]) = a.crop {
                p = p.crop(top, left, h, w)?;
                g = g.crop(top, left, h, w)?;
            }
            let dog = config.dog.scaled_to_height(g.height());
            score_pair(&stems[i], &p, &g, &dog)
        })
        .collect::<Result<_>>()?;
    apply_tags(&mut rows, &tags);
    let report = aggregate(&rows);
    let with_ext = |ext: &str| {
        let mut s = a.out.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    let (jsonl, table) = (with_ext(".jsonl"), with_ext(".txt"));
    std::fs::write(&jsonl, report.to_jsonl()).map_err(|e| Error::io(&jsonl, e))?;
    let text = report.to_table();
    std::fs::write(&table, &text).map_err(|e| Error::io(&table, e))?;
    print!("{text}");
    Ok(())
}

fn random_sketch(h: usize, w: usize, density: f64, rng: &mut ChaCha8Rng) -> BinaryMask {
    BinaryMask::from_fn(h, w, |_, _| rng.random_bool(density))
}

// Dark strokes on white, so the DoG sketch resembles line art.
fn random_line_art(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ImageF32 {
    let mut img = ImageF32::filled(h, w, 3, 1.0);
    for _ in 0..40 {
        let (y0, x0) = (rng.random_range(0..h) as f64, rng.random_range(0..w) as f64);
        let (y1, x1) = (rng.random_range(0..h) as f64, rng.random_range(0..w) as f64);
        let steps = (y1 - y0).abs().max((x1 - x0).abs()).max(1.0) as usize;
        for s in 0..=steps {
            let f = s as f64 / steps as f64;
            let (y, x) = ((y0 + f * (y1 - y0)) as usize, (x0 + f * (x1 - x0)) as usize);
            for c in 0..3 {
                img.set(c, y.min(h - 1), x.min(w - 1), 0.0);
            }
        }
    }
    img
}

fn time_iters(iters: usize, mut f: impl FnMut() -> Result<()>) -> Result<Vec<Duration>> {
    (0..iters.max(1))
        .map(|_| {
            let start = Instant::now();
            f()?;
            Ok(start.elapsed())
        })
        .collect()
}

fn report_times(label: &str, pixels: usize, times: &[Duration]) -> Duration {
    let mut sorted = times.to_vec();
    sorted.sort();
    let median = sorted[sorted.len() / 2];
    for (i, t) in times.iter().enumerate() {
        println!(
            "{label} iter {i}: {:.3} ms, {:.3e} px/s",
            t.as_secs_f64() * 1e3,
            pixels as f64 / t.as_secs_f64()
        );
    }
    println!(
        "{label} median: {:.3} ms, {:.3e} px/s over {} iterations",
        median.as_secs_f64() * 1e3,
        pixels as f64 / median.as_secs_f64(),
        times.len()
    );
    median
}

fn cmd_bench(a: &BenchArgs, config: &Config) -> Result<()> {
    let (h, w) = a.size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    println!(
        "bench {:?} {h}x{w} on {} worker(s)",
        a.op,
        rayon::current_num_threads()
    );
    match a.op {
        BenchOp::Edt => {
            let sketch = random_sketch(h, w, 0.05, &mut rng);
            let times = time_iters(a.iters, || {
                std::hint::black_box(squared_edt(&sketch));
                Ok(())
            })?;
            report_times("edt", h * w, &times);
        }
        BenchOp::Metric => {
            let (p, g) = (
                random_line_art(h, w, &mut rng),
                random_line_art(h, w, &mut rng),
            );
            let dog = config.dog.scaled_to_height(h);
            let times = time_iters(a.iters, || {
                std::hint::black_box(linework::line_metrics(&p, &g, config.nedt_tau, &dog)?);
                Ok(())
            })?;
            report_times("metric", h * w, &times);
        }
        BenchOp::Splat => {
            let img = ImageF32::from_fn(h, w, 3, |_, _, _| rng.random::<f32>());
            let flow = FlowField::from_fn(h, w, |y, x| {
                (
                    ((x * 7 + y) % 13) as f32 * 0.37 - 2.0,
                    ((y * 5 + x) % 11) as f32 * 0.29 - 1.5,
                )
            });
            let z = ImageF32::zeros(h, w, 1);
            let times = time_iters(a.iters, || {
                std::hint::black_box(softmax_splat(&img, &flow, &z)?);
                Ok(())
            })?;
            report_times("splat", h * w, &times);
        }
        BenchOp::EdtOracle => {
            let sketch = random_sketch(h, w, 0.05, &mut rng);
            let mut fast_out = None;
            let fast = time_iters(a.iters, || {
                fast_out = Some(squared_edt(&sketch));
                Ok(())
            })?;
            let fast = report_times("edt", h * w, &fast);
            let mut slow_out = None;
            let slow = time_iters(a.iters.min(3), || {
                slow_out = Some(brute_force_squared_edt(&sketch));
                Ok(())
            })?;
            let slow = report_times("edt-oracle", h * w, &slow);
            if fast_out != slow_out {
                return Err(Error::InvalidInput("distance transforms disagree".into()));
            }
            println!("speedup: {:.1}x", slow.as_secs_f64() / fast.as_secs_f64());
        }
    }
    Ok(())
}
