//! Command-line front end: one verb per estimation quantity, plus sweeps
//! and a numerical self-validation run.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lambda_metrology::analytic::cross_validate;
use lambda_metrology::estimation::{
    hss, performance_ratio, qfi_pure, qfim_pure, saturability_witness, variance_bounds,
    EstimationConfig,
};
use lambda_metrology::model::{evolve, LambdaParams, Level, CPT_TOL};
use lambda_metrology::sweep::{emit_csv, parse_config, presets, run_sweep, Quantity, SweepAxis};

#[derive(Parser)]
#[command(
    name = "lamet",
    about = "Quantum metrology of a three-level lambda atom driven by two resonant fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Physical parameters, shared by all subcommands. Flags mirror the sweep
/// configuration keys.
#[derive(Args, Clone)]
struct ParamArgs {
    /// Rabi frequency of the |a>-|b> drive.
    #[arg(long = "omega_R1", default_value_t = 1.0)]
    omega_r1: f64,
    /// Rabi frequency of the |a>-|c> drive.
    #[arg(long = "omega_R2", default_value_t = 1.0)]
    omega_r2: f64,
    /// Phase of the |a>-|b> drive.
    #[arg(long, default_value_t = 0.0)]
    phi1: f64,
    /// Phase of the |a>-|c> drive.
    #[arg(long, default_value_t = 0.0)]
    phi2: f64,
    /// Phase of the initial superposition.
    #[arg(long, default_value_t = 0.0)]
    psi: f64,
    /// Mixing angle of the initial superposition.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    theta: f64,
    /// Upper level energy.
    #[arg(long, default_value_t = 1.0)]
    omega_a: f64,
    /// Ground level energy.
    #[arg(long, default_value_t = 0.0)]
    omega_b: f64,
    /// Intermediate level energy.
    #[arg(long, default_value_t = 0.5)]
    omega_c: f64,
}

impl ParamArgs {
    fn params(&self) -> LambdaParams {
        LambdaParams {
            rabi1: self.omega_r1,
            rabi2: self.omega_r2,
            phi1: self.phi1,
            phi2: self.phi2,
            psi: self.psi,
            theta: self.theta,
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            omega_c: self.omega_c,
        }
    }
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Print the evolved state at time t.
    State {
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Quantum Fisher information for one level energy.
    Qfi {
        /// Parameter to estimate: wa, wb or wc.
        #[arg(long)]
        param: String,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Quantum Fisher information matrix over a parameter subset.
    Qfim {
        /// Subset such as wa+wb or wa+wb+wc.
        #[arg(long = "params")]
        subset: String,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Hilbert-Schmidt speed for one level energy.
    Hss {
        #[arg(long)]
        param: String,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Variance lower bounds for independent and simultaneous estimation.
    Bounds {
        #[arg(long = "params")]
        subset: String,
        #[arg(long)]
        t: f64,
        /// Number of measurement repetitions.
        #[arg(long = "M", default_value_t = 1)]
        repetitions: u32,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Performance ratio R of independent vs simultaneous estimation.
    Ratio {
        #[arg(long = "params")]
        subset: String,
        #[arg(long)]
        t: f64,
        #[arg(long = "M", default_value_t = 1)]
        repetitions: u32,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Saturability witness max |Tr(rho [L_i, L_j])| over parameter pairs.
    Witness {
        #[arg(long = "params")]
        subset: String,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a sweep from a preset or a configuration file and emit CSV.
    Sweep {
        /// Name of a shipped preset (fig2a ... fig10b).
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Path to a key = value configuration file.
        #[arg(long)]
        config: Option<String>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        output: Option<String>,
        /// List available presets and exit.
        #[arg(long)]
        list_presets: bool,
        // Overrides applied on top of the loaded configuration.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long = "M")]
        repetitions: Option<u32>,
        /// Comma-separated quantity tokens, e.g. qfi:wa,hss:wa.
        #[arg(long)]
        quantities: Option<String>,
        #[arg(long = "omega_R1")]
        omega_r1: Option<f64>,
        #[arg(long = "omega_R2")]
        omega_r2: Option<f64>,
        #[arg(long)]
        phi1: Option<f64>,
        #[arg(long)]
        phi2: Option<f64>,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        omega_a: Option<f64>,
        #[arg(long)]
        omega_b: Option<f64>,
        #[arg(long)]
        omega_c: Option<f64>,
    },
    /// Cross-validate the closed-form and numeric QFI routes; exits with
    /// status 2 on any disagreement.
    Validate {
        /// Grid points per scenario.
        #[arg(long, default_value_t = 120)]
        points: usize,
    },
}

fn parse_level(token: &str) -> Result<Level, String> {
    Level::parse(token).ok_or_else(|| format!("unknown parameter `{token}` (expected wa, wb or wc)"))
}

fn parse_subset(token: &str) -> Result<Vec<Level>, String> {
    let levels: Vec<Level> = token
        .split('+')
        .map(parse_level)
        .collect::<Result<_, _>>()?;
    if levels.is_empty() || levels.len() > 3 {
        return Err(format!("subset `{token}` must name 1 to 3 parameters"));
    }
    Ok(levels)
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::try_parse().map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            print!("{e}");
            (0, String::new())
        }
        _ => (1, e.to_string()),
    })?;
    let usage = |msg: String| (1u8, msg);
    let numeric = |msg: String| (1u8, msg);

    match cli.command {
        Command::State { t, params } => {
            let p = params.params();
            let state = evolve(&p, t).map_err(|e| numeric(e.to_string()))?;
            println!("t = {t}");
            println!("alpha = {}", p.alpha());
            println!("Omega = {}", p.omega());
            println!("level,re,im,population");
            for (label, amp) in ["a", "b", "c"].iter().zip(state.amplitudes.iter()) {
                println!("{label},{},{},{}", amp.re, amp.im, amp.norm_sqr());
            }
            println!("norm_sq = {}", state.norm_sq());
            println!("cpt = {}", p.is_cpt(CPT_TOL));
        }
        Command::Qfi { param, t, params } => {
            let level = parse_level(&param).map_err(usage)?;
            let f = qfi_pure(&params.params(), t, level).map_err(|e| numeric(e.to_string()))?;
            println!("{f}");
        }
        Command::Qfim { subset, t, params } => {
            let levels = parse_subset(&subset).map_err(usage)?;
            let f = qfim_pure(&params.params(), t, &levels).map_err(|e| numeric(e.to_string()))?;
            println!("parameters,{subset}");
            for i in 0..levels.len() {
                let row: Vec<String> =
                    (0..levels.len()).map(|j| format!("{}", f.entry(i, j))).collect();
                println!("{}", row.join(","));
            }
            println!("det = {}", f.determinant());
        }
        Command::Hss { param, t, params } => {
            let level = parse_level(&param).map_err(usage)?;
            let s = hss(&params.params(), t, level).map_err(|e| numeric(e.to_string()))?;
            println!("{s}");
        }
        Command::Bounds { subset, t, repetitions, params } => {
            let levels = parse_subset(&subset).map_err(usage)?;
            let f = qfim_pure(&params.params(), t, &levels).map_err(|e| numeric(e.to_string()))?;
            let cfg = EstimationConfig { repetitions };
            let b = variance_bounds(&f, &cfg).map_err(|e| numeric(e.to_string()))?;
            println!("delta_independent = {}", b.delta_independent);
            println!("delta_simultaneous = {}", b.delta_simultaneous);
            for (level, v) in levels.iter().zip(b.per_parameter_simultaneous.iter()) {
                println!("var_s[{level}] = {v}");
            }
        }
        Command::Ratio { subset, t, repetitions, params } => {
            let levels = parse_subset(&subset).map_err(usage)?;
            let f = qfim_pure(&params.params(), t, &levels).map_err(|e| numeric(e.to_string()))?;
            let cfg = EstimationConfig { repetitions };
            let r = performance_ratio(&f, &cfg).map_err(|e| numeric(e.to_string()))?;
            println!("{r}");
        }
        Command::Witness { subset, t, params } => {
            let levels = parse_subset(&subset).map_err(usage)?;
            let w = saturability_witness(&params.params(), t, &levels)
                .map_err(|e| numeric(e.to_string()))?;
            println!("{w}");
        }
        Command::Sweep {
            preset,
            config,
            output,
            list_presets,
            axis,
            start,
            stop,
            points,
            t,
            repetitions,
            quantities,
            omega_r1,
            omega_r2,
            phi1,
            phi2,
            psi,
            theta,
            omega_a,
            omega_b,
            omega_c,
        } => {
            if list_presets {
                for name in presets::names() {
                    println!("{name}");
                }
                return Ok(());
            }
            let text = match (&preset, &config) {
                (Some(name), None) => presets::get(name)
                    .ok_or_else(|| {
                        usage(format!(
                            "unknown preset `{name}`; available: {}",
                            presets::names().join(", ")
                        ))
                    })?
                    .to_string(),
                (None, Some(path)) => fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {path}: {e}")))?,
                _ => return Err(usage("exactly one of --preset or --config is required".into())),
            };
            let mut spec = parse_config(&text).map_err(|e| usage(e.to_string()))?;
            if let Some(token) = axis {
                spec.axis = SweepAxis::parse(&token)
                    .ok_or_else(|| usage(format!("unknown axis `{token}`")))?;
            }
            if let Some(v) = start {
                spec.start = v;
            }
            if let Some(v) = stop {
                spec.stop = v;
            }
            if let Some(v) = points {
                spec.points = v;
            }
            if let Some(v) = t {
                spec.time = v;
            }
            if let Some(v) = repetitions {
                spec.repetitions = v;
            }
            if let Some(tokens) = quantities {
                spec.quantities = tokens
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Quantity::parse)
                    .collect::<Result<_, _>>()
                    .map_err(usage)?;
            }
            if let Some(v) = omega_r1 {
                spec.fixed.rabi1 = v;
            }
            if let Some(v) = omega_r2 {
                spec.fixed.rabi2 = v;
            }
            if let Some(v) = phi1 {
                spec.fixed.phi1 = v;
            }
            if let Some(v) = phi2 {
                spec.fixed.phi2 = v;
            }
            if let Some(v) = psi {
                spec.fixed.psi = v;
            }
            if let Some(v) = theta {
                spec.fixed.theta = v;
            }
            if let Some(v) = omega_a {
                spec.fixed.omega_a = v;
            }
            if let Some(v) = omega_b {
                spec.fixed.omega_b = v;
            }
            if let Some(v) = omega_c {
                spec.fixed.omega_c = v;
            }

            let result = run_sweep(&spec).map_err(|e| numeric(e.to_string()))?;
            match output {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .map_err(|e| numeric(format!("cannot create {path}: {e}")))?;
                    let mut writer = std::io::BufWriter::new(file);
                    emit_csv(&result, &mut writer).map_err(|e| numeric(e.to_string()))?;
                    writer.flush().map_err(|e| numeric(e.to_string()))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    emit_csv(&result, stdout.lock()).map_err(|e| numeric(e.to_string()))?;
                }
            }
            eprintln!("{}", result.summary());
        }
        Command::Validate { points } => {
            let n = points.max(2);
            let grid: Vec<f64> = (0..n).map(|k| 12.0 * k as f64 / (n - 1) as f64).collect();
            let scenarios: Vec<(&str, LambdaParams)> = vec![
                (
                    "equal drives, alpha = pi/2",
                    LambdaParams { phi1: std::f64::consts::FRAC_PI_2, ..Default::default() },
                ),
                (
                    "equal drives, trapping",
                    LambdaParams { psi: std::f64::consts::PI, ..Default::default() },
                ),
                (
                    "mixed drives",
                    LambdaParams {
                        rabi1: 0.32,
                        rabi2: 1.0,
                        phi1: 1.0,
                        phi2: 1.0,
                        psi: 2.0 * std::f64::consts::PI,
                        ..Default::default()
                    },
                ),
                (
                    "generic tilted state",
                    LambdaParams {
                        rabi1: 0.8,
                        rabi2: 1.7,
                        phi1: 0.4,
                        phi2: -0.9,
                        psi: 0.3,
                        theta: 1.1,
                        ..Default::default()
                    },
                ),
            ];
            let mut ok = true;
            for (label, params) in scenarios {
                let report = cross_validate(&params, &grid).map_err(|e| numeric(e.to_string()))?;
                println!("[{label}]");
                println!("{report}");
                ok &= report.passed;
            }
            if !ok {
                return Err((2, "numerical validation failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((0, _)) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}
