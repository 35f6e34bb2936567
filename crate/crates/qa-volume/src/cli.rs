//! Command-line harness: figure-named presets resolved through a config
//! file and flag overrides, executed on a worker pool, emitting CSV series,
//! fit JSON, and a run manifest.
//!
//! Output contract: every series CSV has the header `x,mean,stddev,n` and
//! identical bytes for identical (preset, config, seed) regardless of the
//! thread count. The manifest records wall time and is exempt from that
//! guarantee.

use crate::circuit::{Boundary, CircuitSpec, Family};
use crate::codes::DistanceScan;
use crate::experiments::{self, DistanceKind};
use crate::stats::{
    central_decade, fit_power_law, moments_csv, EnsembleSeries, FitError, FitResult, Moments,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

// ===== presets =====

#[derive(Clone, Copy)]
enum THint {
    /// Default horizon = ceil(factor · L).
    PerL(f64),
    /// Fixed default horizon (walk models, fixed-depth scans).
    Fixed(usize),
}

struct Preset {
    name: &'static str,
    summary: &'static str,
    /// Reference values the run should land near, for `describe`.
    reference: &'static str,
    l: usize,
    p: f64,
    t: THint,
    samples: usize,
    boundary: Boundary,
    outputs: &'static str,
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3a",
        summary: "steady-state half-cut entanglement across system sizes",
        reference: "fluctuation exponent of stddev(S) vs L near 0.322 at p=0.04",
        l: 512,
        p: 0.04,
        t: THint::PerL(1.5),
        samples: 2000,
        boundary: Boundary::Periodic,
        outputs: "fig3a_delta_s_by_size.csv, fig3a_fit.json",
    },
    Preset {
        name: "fig3b",
        summary: "half-cut entanglement growth on a log time grid",
        reference: "fluctuation growth exponent near 0.307 at p=0 and p=0.04",
        l: 512,
        p: 0.04,
        t: THint::PerL(0.5),
        samples: 2000,
        boundary: Boundary::Periodic,
        outputs: "fig3b_entropy_growth.csv, fig3b_fit.json",
    },
    Preset {
        name: "fig4a",
        summary: "single-species basis growth -log2 K(t) at the half cut",
        reference: "fluctuation growth exponent near 0.294 at p=0.04",
        l: 512,
        p: 0.04,
        t: THint::PerL(0.5),
        samples: 600,
        boundary: Boundary::Periodic,
        outputs: "fig4a_k_growth.csv, fig4a_fit.json",
    },
    Preset {
        name: "fig4b",
        summary: "steady single-species -log2 K across cut sizes (L = 2 L_A)",
        reference: "steady fluctuation exponent vs L_A near 0.245 at p=0.04",
        l: 512,
        p: 0.04,
        t: THint::PerL(4.0),
        samples: 400,
        boundary: Boundary::Periodic,
        outputs: "fig4b_k_steady.csv, fig4b_fit.json",
    },
    Preset {
        name: "fig5a",
        summary: "sampled survival entropy -log2 P(t) at the half cut",
        reference: "fluctuation growth exponent near 0.387 at p=0.04, L=256",
        l: 256,
        p: 0.04,
        t: THint::Fixed(24),
        samples: 400,
        boundary: Boundary::Periodic,
        outputs: "fig5a_sampled_neg_log2_p.csv, fig5a_fit.json",
    },
    Preset {
        name: "fig5b",
        summary: "steady two-species -log2 M across cut sizes (open chain)",
        reference: "steady fluctuation exponent vs L_A near 0.266 at p=0.04",
        l: 512,
        p: 0.04,
        t: THint::PerL(4.0),
        samples: 400,
        boundary: Boundary::Open,
        outputs: "fig5b_m_steady.csv, fig5b_fit.json",
    },
    Preset {
        name: "fig6a",
        summary: "subsystem profile of the purified steady state",
        reference: "non-monotonic S_A(L_A) with S_A(L) = S_Q; I(A:R) >= 0",
        l: 32,
        p: 0.08,
        t: THint::PerL(2.0),
        samples: 2000,
        boundary: Boundary::Periodic,
        outputs: "fig6a_profile_s_a.csv, fig6a_profile_i_ar.csv, fig6a_summary.json",
    },
    Preset {
        name: "fig6b",
        summary: "contiguous code distance from window information, across sizes",
        reference: "distance exponent near 0.343 at p=0.04 (0.387 at p=0.08)",
        l: 384,
        p: 0.04,
        t: THint::PerL(3.0),
        samples: 96,
        boundary: Boundary::Periodic,
        outputs: "fig6b_distance.csv, fig6b_scans.json, fig6b_fit.json",
    },
    Preset {
        name: "fig8a",
        summary: "sampled subsystem-entropy survey with the factorized comparison",
        reference: "non-monotonic sampled S_A(L_A); matches -log2 P_Y + rank at large L_A",
        l: 32,
        p: 0.08,
        t: THint::PerL(3.0),
        samples: 120,
        boundary: Boundary::Periodic,
        outputs: "fig8a_s1.csv, fig8a_y_q.csv, fig8a_summary.json",
    },
    Preset {
        name: "fig8b",
        summary: "erasure distance of the evolved particle basis, across sizes",
        reference: "distance exponent near 0.327 at p=0.04",
        l: 384,
        p: 0.04,
        t: THint::PerL(3.0),
        samples: 96,
        boundary: Boundary::Periodic,
        outputs: "fig8b_distance.csv, fig8b_scans.json, fig8b_fit.json",
    },
    Preset {
        name: "fig9b",
        summary: "classical generator-matrix erasure distance, across sizes",
        reference: "distance exponent near 0.331 at p=0.04",
        l: 384,
        p: 0.04,
        t: THint::PerL(4.0),
        samples: 96,
        boundary: Boundary::Periodic,
        outputs: "fig9b_distance.csv, fig9b_scans.json, fig9b_fit.json",
    },
    Preset {
        name: "fig10b",
        summary: "two-phase protocol profile: measured phase then unitary phase",
        reference: "S_A = L_A plateau with zero variance up to the code length",
        l: 32,
        p: 0.08,
        t: THint::PerL(4.0),
        samples: 500,
        boundary: Boundary::Periodic,
        outputs: "fig10b_profile_s_a.csv, fig10b_profile_i_ar.csv, fig10b_profile_p2.csv, fig10b_summary.json",
    },
    Preset {
        name: "figB12",
        summary: "parity-symmetric family: half-cut growth and exact parity",
        reference: "fluctuation growth exponent near 0.324 at p=0; zero parity violations",
        l: 510,
        p: 0.0,
        t: THint::Fixed(128),
        samples: 2000,
        boundary: Boundary::Periodic,
        outputs: "figB12_entropy_growth.csv, figB12_fit.json, figB12_parity.json",
    },
    Preset {
        name: "figC13",
        summary: "endpoint walks in random environments: boundary counts N(t)",
        reference: "fluctuation growth exponent near 0.26 at L_A=1000",
        l: 1000,
        p: 0.0,
        t: THint::Fixed(1500),
        samples: 300,
        boundary: Boundary::Periodic,
        outputs: "figC13_rwre.csv, figC13_fit.json",
    },
    Preset {
        name: "figD14",
        summary: "purified steady-state profile fluctuations across cuts",
        reference: "stddev(S_A) vs L_A exponent near 0.318 at p=0.04",
        l: 128,
        p: 0.04,
        t: THint::PerL(2.0),
        samples: 800,
        boundary: Boundary::Periodic,
        outputs: "figD14_delta_s.csv, figD14_i_ab.csv, figD14_fit.json",
    },
    Preset {
        name: "oracle-check",
        summary: "exact small-size identities between the three engines",
        reference: "entropy and signed-sum identities exact; survival gap reported",
        l: 8,
        p: 0.2,
        t: THint::PerL(2.0),
        samples: 100,
        boundary: Boundary::Periodic,
        outputs: "oracle_check_report.json",
    },
];

fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

// ===== configuration =====

/// Overridable knobs; the config file and the flags both deserialize into
/// this shape (unknown keys are rejected).
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    preset: Option<String>,
    #[serde(rename = "L")]
    l: Option<usize>,
    p: Option<f64>,
    #[serde(rename = "T")]
    t: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    boundary: Option<Boundary>,
    threads: Option<usize>,
}

impl Overrides {
    /// Later layers win field by field.
    fn layered(self, over: Overrides) -> Overrides {
        Overrides {
            preset: over.preset.or(self.preset),
            l: over.l.or(self.l),
            p: over.p.or(self.p),
            t: over.t.or(self.t),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            boundary: over.boundary.or(self.boundary),
            threads: over.threads.or(self.threads),
        }
    }
}

/// Fully resolved run parameters (defaults < config file < flags).
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub preset: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub samples: usize,
    pub seed: u64,
    pub boundary: Boundary,
    pub threads: usize,
}

fn resolve(preset: &Preset, over: &Overrides) -> Resolved {
    let l = over.l.unwrap_or(preset.l);
    let t = over.t.unwrap_or(match preset.t {
        THint::Fixed(t) => t,
        THint::PerL(f) => (f * l as f64).ceil() as usize,
    });
    let threads = over
        .threads
        .or_else(|| {
            std::env::var("QA_VOLUME_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    Resolved {
        preset: preset.name.to_string(),
        l,
        p: over.p.unwrap_or(preset.p),
        t,
        samples: over.samples.unwrap_or(preset.samples),
        seed: over.seed.unwrap_or(1),
        boundary: over.boundary.unwrap_or(preset.boundary),
        threads,
    }
}

// ===== argument parsing =====

#[derive(Parser)]
#[command(
    name = "qa-volume",
    version,
    about = "Hybrid automaton-circuit ensembles: entanglement, particle duals, code distances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write CSV/JSON results.
    Run(RunArgs),
    /// List available presets.
    List,
    /// Show a preset's parameters, reference values, and outputs.
    Describe { preset: String },
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (see `list`); may also come from --config.
    #[arg(long, short = 'e')]
    preset: Option<String>,
    /// System size (sweeps scale their size grids from it).
    #[arg(long = "L")]
    l: Option<usize>,
    /// Measurement rate per site per step.
    #[arg(long)]
    p: Option<f64>,
    /// Horizon in steps (walk presets: in walk steps).
    #[arg(long = "T")]
    t: Option<usize>,
    /// Trajectories per ensemble (distance sweeps: at the smallest size).
    #[arg(long)]
    samples: Option<usize>,
    /// Ensemble seed; trajectory i uses independent streams 2i, 2i+1.
    #[arg(long)]
    seed: Option<u64>,
    /// periodic | open
    #[arg(long)]
    boundary: Option<String>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: QA_VOLUME_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

// ===== errors and outcomes =====

enum RunError {
    /// Bad preset name, bad config file, unwritable output: exit 2.
    Config(String),
}

impl RunError {
    fn config(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }
}

/// What a runner reports back besides its files.
#[derive(Default)]
struct Outcome {
    /// Undersampled or degenerate results somewhere: exit 3.
    flagged: bool,
    notes: Vec<String>,
}

// ===== entry point =====

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { preset } => match find_preset(&preset) {
            Some(p) => {
                print!("{}", describe(p));
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown preset `{preset}`; `list` shows the options");
                ExitCode::from(2)
            }
        },
        Command::Run(args) => match run(args) {
            Ok(outcome) => {
                for note in &outcome.notes {
                    println!("note: {note}");
                }
                if outcome.flagged {
                    eprintln!("result flagged (undersampled or degenerate); see notes");
                    ExitCode::from(3)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(RunError::Config(msg)) => {
                eprintln!("config error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

fn describe(p: &Preset) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} — {}", p.name, p.summary);
    let t = match p.t {
        THint::Fixed(t) => format!("{t}"),
        THint::PerL(f) => format!("{}·L", f),
    };
    let _ = writeln!(
        s,
        "  defaults: L={}, p={}, T={}, samples={}, boundary={}",
        p.l,
        p.p,
        t,
        p.samples,
        match p.boundary {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    );
    let _ = writeln!(s, "  reference: {}", p.reference);
    let _ = writeln!(s, "  outputs: {}", p.outputs);
    s
}

fn run(args: RunArgs) -> Result<Outcome, RunError> {
    let mut over = Overrides::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::config(format!("reading {}: {e}", path.display())))?;
        let from_file: Overrides = serde_json::from_str(&text)
            .map_err(|e| RunError::config(format!("parsing {}: {e}", path.display())))?;
        over = over.layered(from_file);
    }
    let boundary = match args.boundary.as_deref() {
        None => None,
        Some("periodic") => Some(Boundary::Periodic),
        Some("open") => Some(Boundary::Open),
        Some(other) => {
            return Err(RunError::config(format!(
                "boundary must be `periodic` or `open`, got `{other}`"
            )))
        }
    };
    over = over.layered(Overrides {
        preset: args.preset.clone(),
        l: args.l,
        p: args.p,
        t: args.t,
        samples: args.samples,
        seed: args.seed,
        boundary,
        threads: args.threads,
    });
    let name = over
        .preset
        .clone()
        .ok_or_else(|| RunError::config("no preset given (flag --preset or config file)"))?;
    let preset =
        find_preset(&name).ok_or_else(|| RunError::config(format!("unknown preset `{name}`")))?;
    let cfg = resolve(preset, &over);
    if cfg.samples == 0 {
        return Err(RunError::config("samples must be positive"));
    }
    std::fs::create_dir_all(&args.out)
        .map_err(|e| RunError::config(format!("creating {}: {e}", args.out.display())))?;

    let pool = experiments::make_pool(cfg.threads);
    let started = Instant::now();
    let mut sink = Sink::new(&args.out, &cfg.preset);
    let outcome = dispatch(&cfg, &pool, &mut sink)?;
    sink.manifest(&cfg, started.elapsed().as_secs_f64())?;
    Ok(outcome)
}

// ===== output sink =====

struct Sink<'a> {
    dir: &'a Path,
    preset: String,
    files: Vec<String>,
}

impl<'a> Sink<'a> {
    fn new(dir: &'a Path, preset: &str) -> Self {
        Sink {
            dir,
            preset: preset.replace('-', "_"),
            files: Vec::new(),
        }
    }

    fn write(&mut self, suffix: &str, bytes: &str) -> Result<(), RunError> {
        let name = format!("{}_{}", self.preset, suffix);
        let path = self.dir.join(&name);
        std::fs::write(&path, bytes)
            .map_err(|e| RunError::config(format!("writing {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        self.files.push(name);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(suffix, &text)
    }

    fn manifest(&mut self, cfg: &Resolved, wall_seconds: f64) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Manifest<'m> {
            config: &'m Resolved,
            version: &'static str,
            git: String,
            wall_seconds: f64,
            outputs: &'m [String],
        }
        let git = std::process::Command::new("git")
            .args(["describe", "--always", "--dirty"])
            .output()
            .ok()
            .filter(|o| o.status.success())
            .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
            .unwrap_or_else(|| "unknown".to_string());
        let files = self.files.clone();
        let m = Manifest {
            config: cfg,
            version: env!("CARGO_PKG_VERSION"),
            git,
            wall_seconds,
            outputs: &files,
        };
        self.write_json("manifest.json", &m)
    }
}

// ===== shared helpers =====

/// Fit of the per-point standard deviation against the axis, over the
/// central decade of the positive axis range by default.
fn fluctuation_fit(series: &EnsembleSeries, window: Option<(f64, f64)>) -> Result<FitResult, FitError> {
    let pts = series.stddev_points();
    let window = window.or_else(|| default_window(&pts));
    fit_power_law(&pts, window)
}

fn default_window(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let xs: Vec<f64> = pts.iter().map(|p| p.0).filter(|&x| x > 0.0).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    (lo.is_finite() && hi > 0.0).then(|| central_decade(lo, hi))
}

fn fit_note(label: &str, fit: &Result<FitResult, FitError>) -> String {
    match fit {
        Ok(f) => format!(
            "{label}: exponent {:.3} ± {:.3} over x ∈ [{}, {}] ({} points)",
            f.exponent, f.stderr, f.x_min, f.x_max, f.n_points
        ),
        Err(e) => format!("{label}: fit unavailable ({e})"),
    }
}

/// Size grids scale with the resolved L so `--L` shrinks whole sweeps.
fn size_grid(l: usize, fractions: &[f64]) -> Vec<usize> {
    let mut sizes: Vec<usize> = fractions
        .iter()
        .map(|f| (((f * l as f64).round() as usize) / 2 * 2).max(8))
        .collect();
    sizes.dedup();
    sizes
}

fn distance_csv(scans: &[DistanceScan]) -> String {
    let xs: Vec<f64> = scans.iter().map(|s| s.l as f64).collect();
    let points: Vec<Moments> = scans
        .iter()
        .map(|s| {
            let mut m = Moments::default();
            m.push(s.distance as f64);
            m
        })
        .collect();
    moments_csv(&xs, &points)
}

fn write_fit(
    sink: &mut Sink,
    suffix: &str,
    fit: &Result<FitResult, FitError>,
) -> Result<(), RunError> {
    match fit {
        Ok(f) => sink.write_json(suffix, f),
        Err(e) => sink.write_json(suffix, &serde_json::json!({ "error": e.to_string() })),
    }
}

// ===== preset runners =====

fn dispatch(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    match cfg.preset.as_str() {
        "fig3a" => run_fig3a(cfg, pool, sink),
        "fig3b" => run_fig3b(cfg, pool, sink),
        "fig4a" => run_fig4a(cfg, pool, sink),
        "fig4b" => run_fig4b(cfg, pool, sink),
        "fig5a" => run_fig5a(cfg, pool, sink),
        "fig5b" => run_fig5b(cfg, pool, sink),
        "fig6a" => run_profile(cfg, pool, sink, Family::Purify),
        "fig6b" => run_distance(cfg, pool, sink, DistanceKind::MutualInfo, Family::Purify),
        "fig8a" => run_fig8a(cfg, pool, sink),
        "fig8b" => run_distance(cfg, pool, sink, DistanceKind::ZError, Family::Purify),
        "fig9b" => run_distance(cfg, pool, sink, DistanceKind::Classical, Family::Entangle),
        "fig10b" => run_profile(cfg, pool, sink, Family::UmU),
        "figB12" => run_figb12(cfg, pool, sink),
        "figC13" => run_figc13(cfg, pool, sink),
        "figD14" => run_figd14(cfg, pool, sink),
        "oracle-check" => run_oracle_check(cfg, sink),
        other => Err(RunError::config(format!("unknown preset `{other}`"))),
    }
}

fn validated(spec: CircuitSpec) -> Result<CircuitSpec, RunError> {
    spec.validate()
        .map_err(|e| RunError::config(e.to_string()))?;
    Ok(spec)
}

fn run_fig3a(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let sizes = size_grid(cfg.l, &[0.125, 0.25, 0.5, 1.0]);
    for &l in &sizes {
        validated(CircuitSpec::new(Family::Entangle, l, cfg.p, 1, cfg.seed))?;
    }
    let t_factor = cfg.t as f64 / cfg.l as f64;
    let series = experiments::steady_half_entropy_by_size(
        Family::Entangle,
        &sizes,
        cfg.p,
        t_factor,
        cfg.samples,
        cfg.seed,
        pool,
    );
    sink.write("delta_s_by_size.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, Some((0.0, f64::INFINITY)));
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(S_{L/2}) vs L", &fit)],
    })
}

fn run_fig3b(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let spec = validated(CircuitSpec::new(
        Family::Entangle,
        cfg.l,
        cfg.p,
        cfg.t,
        cfg.seed,
    ))?
    .with_boundary(cfg.boundary);
    let grid = experiments::log_time_grid(cfg.t, 24);
    let series =
        experiments::entropy_growth_series(&spec, cfg.l / 2, &grid, cfg.samples, pool);
    sink.write("entropy_growth.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, None);
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(S) vs t", &fit)],
    })
}

fn run_fig4a(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    validated(CircuitSpec::new(Family::Entangle, cfg.l, cfg.p, cfg.t, cfg.seed))?;
    let series = experiments::k_growth_series(
        cfg.l,
        cfg.l / 2,
        cfg.p,
        cfg.t,
        cfg.samples,
        cfg.seed,
        pool,
    );
    sink.write("k_growth.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, None);
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(-log2 K) vs t", &fit)],
    })
}

fn run_fig4b(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let cuts = size_grid(cfg.l / 2, &[0.125, 0.25, 0.5, 1.0]);
    let t_cap = (cfg.t / (cfg.l / 2)).max(2);
    let series =
        experiments::k_steady_by_size(&cuts, cfg.p, t_cap, cfg.samples, cfg.seed, pool);
    sink.write("k_steady.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, Some((0.0, f64::INFINITY)));
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(-log2 K) vs L_A", &fit)],
    })
}

fn run_fig5a(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    const LANES: usize = 16384;
    validated(CircuitSpec::new(Family::Entangle, cfg.l, cfg.p, cfg.t, cfg.seed))?;
    let series = experiments::sampled_neg_log2_p_series(
        cfg.l,
        cfg.l / 2,
        cfg.p,
        cfg.t,
        LANES,
        cfg.samples,
        cfg.seed,
        pool,
    );
    sink.write("sampled_neg_log2_p.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, None);
    write_fit(sink, "fit.json", &fit)?;
    // count drops mean some realizations ran out of surviving lanes there
    let full = cfg.samples as u64;
    let undersampled = series
        .xs()
        .iter()
        .enumerate()
        .filter(|&(i, _)| series.point(i).count() < full)
        .count();
    let flagged = undersampled > 0;
    let mut notes = vec![fit_note("stddev(-log2 P) vs t", &fit)];
    if flagged {
        notes.push(format!(
            "{undersampled} of {} time points lost realizations to lane exhaustion",
            series.len()
        ));
    }
    Ok(Outcome { flagged, notes })
}

fn run_fig5b(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let cuts = size_grid(cfg.l / 2, &[0.125, 0.25, 0.5, 1.0]);
    let t_cap = (cfg.t / (cfg.l / 2)).max(2);
    let series =
        experiments::m_steady_by_size(&cuts, cfg.p, t_cap, cfg.samples, cfg.seed, pool);
    sink.write("m_steady.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, Some((0.0, f64::INFINITY)));
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(-log2 M) vs L_A", &fit)],
    })
}

fn run_profile(
    cfg: &Resolved,
    pool: &rayon::ThreadPool,
    sink: &mut Sink,
    family: Family,
) -> Result<Outcome, RunError> {
    let spec = match family {
        Family::UmU => CircuitSpec::um_u(cfg.l, cfg.p, cfg.t / 2, cfg.t - cfg.t / 2, cfg.seed),
        _ => CircuitSpec::new(family, cfg.l, cfg.p, cfg.t, cfg.seed),
    };
    let spec = validated(spec)?.with_boundary(cfg.boundary);
    let with_particles = family == Family::UmU;
    let stats = experiments::profile_stats(&spec, cfg.samples, with_particles, pool);
    sink.write("profile_s_a.csv", &stats.s_a.to_csv())?;
    sink.write("profile_i_ar.csv", &stats.i_ar.to_csv())?;
    if let Some(p2) = &stats.neg_log2_p2 {
        sink.write("profile_p2.csv", &p2.to_csv())?;
    }
    // largest prefix window whose mean reference information stays ≤ 1
    let la_star = (0..stats.i_ar.len())
        .take_while(|&i| stats.i_ar.point(i).mean() <= 1.0)
        .last()
        .unwrap_or(0);
    #[derive(Serialize)]
    struct Summary {
        s_q_mean: f64,
        s_q_stddev: f64,
        min_i_ar: i64,
        s_q_increases: usize,
        la_star: usize,
    }
    sink.write_json(
        "summary.json",
        &Summary {
            s_q_mean: stats.s_q.mean(),
            s_q_stddev: stats.s_q.stddev(),
            min_i_ar: stats.min_i_ar,
            s_q_increases: stats.s_q_increases,
            la_star,
        },
    )?;
    let flagged = stats.min_i_ar < 0 || stats.s_q_increases > 0;
    Ok(Outcome {
        flagged,
        notes: vec![format!(
            "S_Q = {:.3} ± {:.3}, largest window with mean I(A:R) ≤ 1: {la_star}",
            stats.s_q.mean(),
            stats.s_q.stddev()
        )],
    })
}

fn run_distance(
    cfg: &Resolved,
    pool: &rayon::ThreadPool,
    sink: &mut Sink,
    kind: DistanceKind,
    family: Family,
) -> Result<Outcome, RunError> {
    let sizes = size_grid(cfg.l, &[1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    let t_factor = (cfg.t / cfg.l).max(1);
    let scans = experiments::distance_scaling(
        kind,
        family,
        &sizes,
        cfg.p,
        t_factor,
        cfg.samples,
        cfg.seed,
        pool,
    )
    .map_err(|e| RunError::config(e.to_string()))?;
    sink.write("distance.csv", &distance_csv(&scans))?;
    sink.write_json("scans.json", &scans)?;
    let points = experiments::distance_points(&scans);
    let fit = crate::stats::extract_distance_exponent(&points);
    write_fit(sink, "fit.json", &fit)?;
    let degenerate = scans.iter().any(|s| s.degenerate);
    let mut notes = vec![fit_note("distance vs L", &fit)];
    if degenerate {
        notes.push("some scans were degenerate (nothing left to protect)".into());
    }
    Ok(Outcome {
        flagged: degenerate,
        notes,
    })
}

fn run_fig8a(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    const LANES: usize = 65536;
    validated(CircuitSpec::new(Family::Purify, cfg.l, cfg.p, cfg.t, cfg.seed))?;
    let cuts: Vec<usize> = (0..=cfg.l).collect();
    let stats = experiments::survey_stats(
        cfg.l,
        cfg.p,
        cfg.t,
        &cuts,
        LANES,
        cfg.samples,
        cfg.seed,
        pool,
    );
    sink.write("s1.csv", &stats.s1.to_csv())?;
    sink.write("y_q.csv", &stats.y_q.to_csv())?;
    #[derive(Serialize)]
    struct Summary {
        undersampled_s1: Vec<u64>,
        undersampled_y: Vec<u64>,
    }
    let flagged = stats.undersampled_s1.iter().any(|&c| c > 0)
        || stats.undersampled_y.iter().any(|&c| c > 0);
    sink.write_json(
        "summary.json",
        &Summary {
            undersampled_s1: stats.undersampled_s1,
            undersampled_y: stats.undersampled_y,
        },
    )?;
    let peak = (0..stats.s1.len()).max_by(|&a, &b| {
        stats
            .s1
            .point(a)
            .mean()
            .total_cmp(&stats.s1.point(b).mean())
    });
    Ok(Outcome {
        flagged,
        notes: vec![format!(
            "sampled S_A peaks at L_A = {}",
            peak.map_or(0, |i| stats.cuts[i])
        )],
    })
}

fn run_figb12(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let spec = validated(CircuitSpec::new(Family::Z2, cfg.l, cfg.p, cfg.t, cfg.seed))?;
    let grid = experiments::log_time_grid(cfg.t, 24);
    let series =
        experiments::entropy_growth_series(&spec, cfg.l / 2, &grid, cfg.samples, pool);
    sink.write("entropy_growth.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, None);
    write_fit(sink, "fit.json", &fit)?;
    // exact parity audit at a measured rate (the configured one if nonzero,
    // else the reported critical rate) on a smaller chain
    let parity_p = if cfg.p > 0.0 { cfg.p } else { 0.335 };
    let parity_l = 36.min(cfg.l);
    let parity_t = 2 * parity_l;
    let violations =
        experiments::z2_parity_violations(parity_l, parity_p, parity_t, 128, cfg.seed, pool);
    #[derive(Serialize)]
    struct Parity {
        l: usize,
        p: f64,
        t: usize,
        trajectories: usize,
        violations: usize,
    }
    sink.write_json(
        "parity.json",
        &Parity {
            l: parity_l,
            p: parity_p,
            t: parity_t,
            trajectories: 128,
            violations,
        },
    )?;
    Ok(Outcome {
        flagged: violations > 0,
        notes: vec![
            fit_note("stddev(S) vs t", &fit),
            format!("parity violations: {violations}"),
        ],
    })
}

fn run_figc13(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let series = experiments::rwre_series(cfg.l, cfg.t, cfg.samples, cfg.seed, pool);
    sink.write("rwre.csv", &series.to_csv())?;
    let fit = fluctuation_fit(&series, None);
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: false,
        notes: vec![fit_note("stddev(N) vs t", &fit)],
    })
}

fn run_figd14(cfg: &Resolved, pool: &rayon::ThreadPool, sink: &mut Sink) -> Result<Outcome, RunError> {
    let spec = validated(CircuitSpec::new(
        Family::Purify,
        cfg.l,
        cfg.p,
        cfg.t,
        cfg.seed,
    ))?;
    let stats = experiments::profile_stats(&spec, cfg.samples, false, pool);
    sink.write("delta_s.csv", &stats.s_a.to_csv())?;
    sink.write("i_ab.csv", &stats.i_ab.to_csv())?;
    let fit = fluctuation_fit(&stats.s_a, None);
    write_fit(sink, "fit.json", &fit)?;
    Ok(Outcome {
        flagged: stats.min_i_ar < 0,
        notes: vec![fit_note("stddev(S_A) vs L_A", &fit)],
    })
}

fn run_oracle_check(cfg: &Resolved, sink: &mut Sink) -> Result<Outcome, RunError> {
    let max_l = cfg.l.clamp(8, 16) / 2 * 2;
    let sizes = vec![max_l - 4, max_l - 2, max_l];
    let t_factor = (cfg.t / cfg.l).max(1);
    let report = experiments::oracle_check(&sizes, cfg.samples, cfg.p, t_factor, cfg.seed);
    sink.write_json("report.json", &report)?;
    let exact = report.entropy_mismatches == 0 && report.signed_identity_mismatches == 0;
    Ok(Outcome {
        flagged: !exact,
        notes: vec![format!(
            "{} mismatches over {} entropy checks; survival gap max {:.4} mean {:.4} (log2)",
            report.entropy_mismatches + report.signed_identity_mismatches,
            report.entropy_checks,
            report.max_survival_log2_gap,
            report.mean_survival_log2_gap
        )],
    })
}
