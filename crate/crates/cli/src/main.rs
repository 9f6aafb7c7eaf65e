// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use retinet::data::{DatasetKind, Split};
use retinet::engine::TrainConfig;
use retinet::error::ErrorClass;
use retinet::net::{
    build_model, checkpoint, train, Architecture, ModelSpec, DEFAULT_DROPOUT, DEFAULT_KERNEL_SIZE,
    FIRST_PRECORTICAL_CONV,
};
use retinet::retina::io::{read_pgm, write_lift_csv, write_pgm};
use retinet::retina::suite::{argmax_suite, bump_panels, lipschitz_suite, BUMP_ANGLES};
use retinet::retina::{directional_response, orientation_field, orientation_lift, ScalarField};
use retinet::robustness::{
    evaluate, run_sweep, stats_csv, sweep_csv, sweep_layer_stats, Axis, Grid, PerturbationSpec,
    SWEEP_HEADER,
};
use retinet::Error;

use config::{ConfigFile, Resolve};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

/// Train LeNet-5 and RetiLeNet, sweep them under luminosity and contrast
/// perturbations, and exercise the retinal center-surround model.
///
/// Every flag may also be given in a `--config` file as `key=value` lines
/// (key = flag name without dashes); flags on the command line win.
///
/// Exit status: 0 success, 1 configuration error, 2 data or I/O error,
/// 3 training diverged, 4 a verification check failed.
#[derive(Debug, Parser)]
#[command(name = "retinet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a per-epoch log CSV.
    Train(TrainArgs),
    /// Print the test accuracy of a checkpoint.
    Eval(EvalArgs),
    /// Accuracy under a mean-offset (mu) or contrast (sigma) sweep.
    Sweep(SweepArgs),
    /// Directional responses and orientation field of the bump image or a PGM.
    Orient(OrientArgs),
    /// Lipschitz and orientation-argmax verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// key=value file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed for initialization, dropout and shuffling [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// mnist | fashionmnist | svhn [default: mnist]
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding <dataset>/ subdirectories [default: data]
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// lenet5 | retilenet [default: lenet5]
    #[arg(long)]
    model: Option<String>,
    /// Precortical kernel size, odd [default: 7]
    #[arg(long)]
    kernel_size: Option<usize>,
    /// Precortical dropout probability [default: 0.2]
    #[arg(long)]
    dropout: Option<f32>,
    /// Training epochs [default: 20]
    #[arg(long)]
    epochs: Option<usize>,
    /// ADAM learning rate [default: 0.001]
    #[arg(long)]
    lr: Option<f64>,
    /// Mini-batch size [default: 128]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Checkpoint path [default: runs/<model>-<dataset>-s<seed>.rnet]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training-log CSV path [default: checkpoint path with .csv extension]
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// Checkpoint to evaluate
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// Checkpoint to sweep
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// mu | sigma; both when omitted
    #[arg(long)]
    axis: Option<String>,
    /// start:stop:step [default: -2:2:0.2 for mu, 0.1:3.9:0.2 for sigma]
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Sweep CSV path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also record first precortical conv input/output statistics per grid point
    #[arg(long)]
    tap_first_conv: bool,
    /// Statistics CSV path [default: sweep path with -stats.csv suffix, or stdout]
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OrientArgs {
    #[command(flatten)]
    common: Common,
    /// PGM image to analyse instead of the bump function
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory [default: orient]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bump grid cells per side [default: 321]
    #[arg(long)]
    size: Option<usize>,
    /// Bump grid spacing [default: 0.05]
    #[arg(long)]
    spacing: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Random fields per kernel geometry [default: 50]
    #[arg(long)]
    fields: Option<usize>,
    /// Point pairs sampled per field [default: 2000]
    #[arg(long)]
    pairs: Option<usize>,
    /// Smooth fields for the argmax check [default: 100]
    #[arg(long)]
    smooth_fields: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numeric => EXIT_DIVERGED,
            })
        }
    }
}

fn run(cli: Cli) -> retinet::Result<u8> {
    match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Orient(a) => cmd_orient(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("# unix time {secs}")
}

fn write_out(path: &Path, text: &str) -> retinet::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

struct Data {
    kind: DatasetKind,
    dir: PathBuf,
}

fn resolve_data(args: &DataArgs, cfg: &ConfigFile) -> retinet::Result<Data> {
    let kind = DatasetKind::parse(&args.dataset.clone().resolve(cfg, "dataset", || "mnist".to_string())?)?;
    let dir = args.data_dir.clone().resolve(cfg, "data-dir", || PathBuf::from("data"))?;
    Ok(Data { kind, dir })
}

fn cmd_train(a: TrainArgs) -> retinet::Result<u8> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let data = resolve_data(&a.data, &cfg)?;
    let arch = Architecture::parse(&a.model.resolve(&cfg, "model", || "lenet5".to_string())?)?;
    let kernel_size = a.kernel_size.resolve(&cfg, "kernel-size", || DEFAULT_KERNEL_SIZE)?;
    let dropout = a.dropout.resolve(&cfg, "dropout", || DEFAULT_DROPOUT)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        learning_rate: a.lr.resolve(&cfg, "lr", || defaults.learning_rate)?,
        batch_size: a.batch_size.resolve(&cfg, "batch-size", || defaults.batch_size)?,
        epochs: a.epochs.resolve(&cfg, "epochs", || defaults.epochs)?,
        seed: a.common.seed.resolve(&cfg, "seed", || 0)?,
        ..defaults
    };
    let out = a.out.resolve(&cfg, "out", || {
        PathBuf::from(format!("runs/{}-{}-s{}.rnet", arch.name(), data.kind.name(), config.seed))
    })?;
    let log = a.log.resolve(&cfg, "log", || out.with_extension("csv"))?;
    cfg.reject_unused()?;

    let (c, s) = (data.kind.channels(), data.kind.input_size());
    let spec = match arch {
        Architecture::LeNet5 => ModelSpec::lenet5(c, s),
        Architecture::RetiLeNet => ModelSpec::retilenet(c, s, kernel_size, dropout),
    };
    spec.validate()?;
    config.validate()?;
    let train_set = data.kind.load(&data.dir, Split::Train)?;
    let test_set = data.kind.load(&data.dir, Split::Test)?;

    println!("{}", timestamp());
    println!(
        "training {} on {} ({} train / {} test), {} epochs, seed {}",
        arch.name(),
        data.kind.name(),
        train_set.len(),
        test_set.len(),
        config.epochs,
        config.seed
    );
    let mut model = build_model(spec, config.seed)?;
    let mut csv = String::from("epoch,mean_loss,test_accuracy\n");
    let logs = train(&mut model, &train_set, Some(&test_set), &config, |l| {
        let acc = l.test_accuracy.unwrap_or(f64::NAN);
        println!("epoch {} loss {:.6} test_accuracy {:.4}", l.epoch, l.mean_loss, acc);
        println!("# epoch {} took {:.1} s", l.epoch, l.seconds);
        let _ = writeln!(csv, "{},{},{}", l.epoch, l.mean_loss, acc);
    })?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    checkpoint::save(&model, &out)?;
    write_out(&log, &csv)?;
    let last = logs.last().and_then(|l| l.test_accuracy).unwrap_or(f64::NAN);
    println!("final test_accuracy {last}");
    println!("checkpoint {}", out.display());
    println!("log {}", log.display());
    Ok(0)
}

fn checkpoint_path(path: Option<PathBuf>, cfg: &ConfigFile) -> retinet::Result<PathBuf> {
    path.map(Ok)
        .or_else(|| cfg.get::<PathBuf>("checkpoint").transpose())
        .transpose()?
        .ok_or_else(|| Error::Config("--checkpoint is required".into()))
}

fn cmd_eval(a: EvalArgs) -> retinet::Result<u8> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let data = resolve_data(&a.data, &cfg)?;
    let _ = a.common.seed.resolve(&cfg, "seed", || 0)?;
    let path = checkpoint_path(a.checkpoint, &cfg)?;
    cfg.reject_unused()?;
    let model = checkpoint::load(&path)?;
    let test = data.kind.load(&data.dir, Split::Test)?;
    println!("{}", evaluate(&model, &test, PerturbationSpec::IDENTITY)?);
    Ok(0)
}

fn cmd_sweep(a: SweepArgs) -> retinet::Result<u8> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let data = resolve_data(&a.data, &cfg)?;
    let _ = a.common.seed.resolve(&cfg, "seed", || 0)?;
    let path = checkpoint_path(a.checkpoint, &cfg)?;
    let axis = a.axis.map(Ok).or_else(|| cfg.get::<String>("axis").transpose()).transpose()?;
    let grid = a.grid.map(Ok).or_else(|| cfg.get::<String>("grid").transpose()).transpose()?;
    let out = a.out.map(Ok).or_else(|| cfg.get::<PathBuf>("out").transpose()).transpose()?;
    let tap = a.tap_first_conv || cfg.get::<bool>("tap-first-conv")?.unwrap_or(false);
    let stats_out = a
        .stats_out
        .map(Ok)
        .or_else(|| cfg.get::<PathBuf>("stats-out").transpose())
        .transpose()?;
    cfg.reject_unused()?;

    let axes = match &axis {
        Some(s) => vec![Axis::parse(s)?],
        None => vec![Axis::Mu, Axis::Sigma],
    };
    let grids: Vec<Vec<f64>> = match &grid {
        Some(g) if axes.len() == 1 => vec![g.parse::<Grid>()?.values()?],
        Some(_) => return Err(Error::Config("--grid needs a single --axis".into())),
        None => axes.iter().map(|a| a.default_grid().values()).collect::<retinet::Result<_>>()?,
    };
    for (axis, grid) in axes.iter().zip(&grids) {
        for &v in grid {
            axis.spec(v)?;
        }
    }
    let model = checkpoint::load(&path)?;
    if tap {
        model.layer(FIRST_PRECORTICAL_CONV)?;
    }
    let test = data.kind.load(&data.dir, Split::Test)?;

    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut stats = String::new();
    for (axis, grid) in axes.iter().zip(&grids) {
        let result = run_sweep(&model, &test, *axis, grid)?;
        csv.push_str(sweep_csv(&result).split_once('\n').map(|x| x.1).unwrap_or(""));
        if tap {
            let points = sweep_layer_stats(&model, &test, *axis, grid, FIRST_PRECORTICAL_CONV)?;
            let text = stats_csv(&result.model_name, &result.dataset_name, *axis, &points);
            if stats.is_empty() {
                stats = text;
            } else {
                stats.push_str(text.split_once('\n').map(|x| x.1).unwrap_or(""));
            }
        }
    }
    match &out {
        Some(p) => write_out(p, &csv)?,
        None => print!("{csv}"),
    }
    if tap {
        let stats_path = stats_out.or_else(|| {
            out.as_ref().map(|p| {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                p.with_file_name(format!("{stem}-stats.csv"))
            })
        });
        match stats_path {
            Some(p) => write_out(&p, &stats)?,
            None => print!("{stats}"),
        }
    }
    Ok(0)
}

fn theta_label(theta: f64) -> String {
    // multiples of π/4 as e.g. "3pi4"
    let quarters = (theta / std::f64::consts::FRAC_PI_4).round() as i64;
    format!("{quarters}pi4")
}

fn cmd_orient(a: OrientArgs) -> retinet::Result<u8> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let _ = a.common.seed.resolve(&cfg, "seed", || 0)?;
    let input = a.input.map(Ok).or_else(|| cfg.get::<PathBuf>("input").transpose()).transpose()?;
    let out = a.out.resolve(&cfg, "out", || PathBuf::from("orient"))?;
    let size = a.size.resolve(&cfg, "size", || 321)?;
    let spacing = a.spacing.resolve(&cfg, "spacing", || 0.05)?;
    cfg.reject_unused()?;
    if size < 3 || !(spacing > 0.0) {
        return Err(Error::Config("--size must be at least 3 and --spacing positive".into()));
    }
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    let (field, responses): (ScalarField, Vec<(f64, ScalarField)>) = match &input {
        None => {
            let (field, panels) = bump_panels(size, spacing)?;
            for p in &panels {
                println!(
                    "theta {} peak at ({:.3}, {:.3}) radius {:.3}, expected ({:.3}, {:.3}): {}",
                    theta_label(p.theta),
                    p.peak.0,
                    p.peak.1,
                    p.peak_radius,
                    p.expected.0,
                    p.expected.1,
                    if p.pass { "ok" } else { "off" }
                );
            }
            (field, panels.into_iter().map(|p| (p.theta, p.response)).collect())
        }
        Some(path) => {
            let field = read_pgm(path)?;
            let responses = BUMP_ANGLES
                .iter()
                .map(|&t| Ok((t, directional_response(&field, t)?)))
                .collect::<retinet::Result<_>>()?;
            (field, responses)
        }
    };
    write_pgm(&field, &out.join("field.pgm"), false)?;
    let (ci, cj) = (field.height() / 2, field.width() / 2);
    for (theta, r) in &responses {
        write_pgm(r, &out.join(format!("response_{}.pgm", theta_label(*theta))), false)?;
        // + 0.0 folds a negative zero into 0
        println!("theta {} response at centre {}", theta_label(*theta), r.get(ci, cj) + 0.0);
    }
    let of = orientation_field(&field, None);
    let lift = orientation_lift(&of);
    write_lift_csv(&lift, &out.join("orientation.csv"))?;
    println!("{} regular points of {}", lift.points.len(), field.values().len());
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> retinet::Result<u8> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = a.common.seed.resolve(&cfg, "seed", || 0)?;
    let fields = a.fields.resolve(&cfg, "fields", || 50)?;
    let pairs = a.pairs.resolve(&cfg, "pairs", || 2000)?;
    let smooth = a.smooth_fields.resolve(&cfg, "smooth-fields", || 100)?;
    cfg.reject_unused()?;
    if fields == 0 || pairs == 0 || smooth == 0 {
        return Err(Error::Config("--fields, --pairs and --smooth-fields must be positive".into()));
    }

    let mut all_pass = true;
    let reports = lipschitz_suite(seed, fields, pairs)?;
    for chunk in reports.chunks(fields) {
        let r0 = &chunk[0];
        let passed = chunk.iter().filter(|r| r.pass).count();
        let worst = chunk.iter().map(|r| r.l_empirical / r.l_bound).fold(0.0, f64::max);
        let ok = passed == chunk.len();
        all_pass &= ok;
        println!(
            "{} lipschitz rho={} epsilon={}: {passed}/{} fields within bound, worst ratio {:.3}",
            if ok { "PASS" } else { "FAIL" },
            r0.rho,
            r0.epsilon,
            chunk.len(),
            worst
        );
    }
    let am = argmax_suite(seed, smooth, 3600)?;
    all_pass &= am.pass;
    println!(
        "{} orientation argmax: {} points on {} fields, max gap {:.2e} rad (step {:.2e}), max tied {}",
        if am.pass { "PASS" } else { "FAIL" },
        am.regular_points,
        am.fields,
        am.max_gap,
        std::f64::consts::TAU / am.steps as f64,
        am.max_tied
    );
    Ok(if all_pass { 0 } else { EXIT_VERIFY_FAILED })
}
