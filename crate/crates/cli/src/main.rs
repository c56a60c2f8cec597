use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use lunar_wpt::chain::{extremes, mc_in_windows, run_timeseries, ExtremeCase};
use lunar_wpt::config::load_config;
use lunar_wpt::orbits::propagate;
use lunar_wpt::output::{
    sig9, write_histogram, write_run_artifacts, ArtifactOptions, ExtremesDocument, Manifest,
};
use lunar_wpt::rf::to_db;
use lunar_wpt::{Error, McConfig, McTarget, Scenario};

/// Environment variable naming the default output directory of `chain`.
const OUT_ENV: &str = "LUNAR_WPT_OUT";

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "lunar-wpt",
    version,
    about = "Laser and RF power beaming chain from orbit to the lunar surface"
)]
struct Cli {
    /// Scenario file (TOML). Omitted sections use the reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print both satellites' inertial state at one instant.
    Propagate {
        /// Seconds from scenario start.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// List visibility windows of each link and their intersection.
    Visibility,
    /// Evaluate the laser hop at one range and offset.
    Fso {
        #[arg(long)]
        z_km: f64,
        /// Radial offset of the beam centre from the array centre, m.
        #[arg(long, default_value_t = 0.0)]
        v_m: f64,
    },
    /// Evaluate one RF hop.
    Rf {
        #[arg(long)]
        d_km: f64,
        /// Transmitter off-boresight angle, degrees.
        #[arg(long, default_value_t = 0.0)]
        phi_deg: f64,
        /// Receiver off-boresight angle, degrees.
        #[arg(long, default_value_t = 0.0)]
        phi_r_deg: f64,
        /// Relay transmit power, W.
        #[arg(long)]
        pt_w: f64,
    },
    /// Run the full chain and write all artifacts.
    Chain(ChainArgs),
    /// Power distribution under laser pointing error at one instant.
    Montecarlo(McArgs),
    /// Print the extremes table.
    Report,
}

#[derive(Args, Debug)]
struct ChainArgs {
    /// Output directory. Defaults to $LUNAR_WPT_OUT, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Regenerate the run recorded in a manifest.json.
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
    /// Skip the Monte Carlo runs.
    #[arg(long)]
    no_monte_carlo: bool,
    /// Override the Monte Carlo sample count.
    #[arg(long)]
    n: Option<usize>,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct McArgs {
    /// zmin, zmax, dpmin, dpmax, gtmmax, gtmmin, or t=<seconds>.
    #[arg(long)]
    at: At,
    /// llo, lsp or malapert.
    #[arg(long)]
    target: McTarget,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    /// Write the histogram CSV here.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum At {
    Case(ExtremeCase),
    Time(f64),
}

impl std::str::FromStr for At {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(t) = s.strip_prefix("t=") {
            return t
                .parse()
                .map(At::Time)
                .map_err(|e| format!("bad time `{t}`: {e}"));
        }
        s.parse().map(At::Case).map_err(|e: Error| e.to_string())
    }
}

fn scenario(cli: &Cli) -> lunar_wpt::Result<Scenario> {
    match &cli.config {
        Some(path) => load_config(path),
        None => Ok(Scenario::default()),
    }
}

fn run(cli: &Cli) -> lunar_wpt::Result<()> {
    match &cli.command {
        Command::Propagate { t } => {
            let s = scenario(cli)?;
            for (name, el) in [("sps", &s.sps), ("llo", &s.llo)] {
                let st = propagate(el, &s.body, *t)?;
                let (r, v) = (st.position, st.velocity);
                println!(
                    "{name} t={} r_km=[{}, {}, {}] v_kms=[{}, {}, {}]",
                    sig9(*t),
                    sig9(r.x),
                    sig9(r.y),
                    sig9(r.z),
                    sig9(v.x),
                    sig9(v.y),
                    sig9(v.z)
                );
            }
        }
        Command::Visibility => {
            let s = scenario(cli)?;
            s.validate()?;
            let w = s.windows()?;
            for (name, list) in [
                ("fso", &w.fso),
                (s.primary().name.as_str(), &w.primary),
                (s.secondary().name.as_str(), &w.secondary),
                ("common", &w.common),
            ] {
                if list.is_empty() {
                    println!("{name}: none");
                }
                for win in list {
                    println!(
                        "{name}: {:.3} .. {:.3} s ({:.3} s)",
                        win.start,
                        win.end,
                        win.duration()
                    );
                }
            }
        }
        Command::Fso { z_km, v_m } => {
            let s = scenario(cli)?;
            let z = z_km * 1e3;
            if !(z >= 0.0 && z.is_finite()) || !(*v_m >= 0.0 && v_m.is_finite()) {
                return Err(Error::Contract(
                    "--z-km and --v-m must be finite and >= 0".into(),
                ));
            }
            let p_r = s.fso.captured_power_offset(z, *v_m)?;
            println!("beam radius      = {} m", sig9(s.fso.beam_radius(z)));
            println!("received power   = {} W", sig9(p_r));
            println!(
                "harvested power  = {} W",
                sig9(s.fso.harvested_optical(p_r))
            );
        }
        Command::Rf {
            d_km,
            phi_deg,
            phi_r_deg,
            pt_w,
        } => {
            let s = scenario(cli)?;
            if !(*pt_w >= 0.0 && pt_w.is_finite()) {
                return Err(Error::Contract("--pt-w must be finite and >= 0".into()));
            }
            let r = s.rf.sample(
                0.0,
                *pt_w,
                d_km * 1e3,
                phi_deg.to_radians(),
                phi_r_deg.to_radians(),
            )?;
            println!("transmit gain    = {} dB", sig9(to_db(r.g_t)));
            println!("receive gain     = {} dB", sig9(to_db(r.g_r)));
            println!("received power   = {} W", sig9(r.p_r));
            println!("harvested power  = {} W", sig9(r.p_h));
            if r.near_field {
                eprintln!("warning: range is inside the receive dish's far-field distance");
            }
        }
        Command::Chain(args) => chain(cli, args)?,
        Command::Montecarlo(args) => {
            let mut s = scenario(cli)?;
            s.monte_carlo.seed = args.seed;
            if let Some(n) = args.n {
                s.monte_carlo.n_samples = n;
            }
            s.validate()?;
            let ts = run_timeseries(&s)?;
            let t = match args.at {
                At::Time(t) => t,
                At::Case(case) => match extremes(&ts.samples) {
                    Some(r) => r.get(case).t,
                    None => {
                        return Err(Error::Contract(
                            "no common visibility window; no extreme instants".into(),
                        ))
                    }
                },
            };
            let cfg = McConfig::new(s.monte_carlo.n_samples, s.monte_carlo.seed);
            let run = mc_in_windows(&s, &ts.windows, t, &cfg, args.target)?;
            println!("t                = {} s", sig9(t));
            println!("target           = {}", args.target);
            println!("samples          = {}", run.stats.count);
            println!("aligned power    = {} W", sig9(run.aligned));
            println!("mean power       = {} W", sig9(run.stats.mean));
            println!("std dev          = {} W", sig9(run.stats.std_dev));
            println!("min              = {} W", sig9(run.stats.min));
            println!("max              = {} W", sig9(run.stats.max));
            if let Some(path) = &args.histogram {
                write_histogram(&run.stats, path)?;
            }
        }
        Command::Report => {
            let s = scenario(cli)?;
            let ts = run_timeseries(&s)?;
            print!(
                "{}",
                ExtremesDocument::new(&ts.windows, &ts.samples, ts.near_field_samples).table()
            );
        }
    }
    Ok(())
}

fn chain(cli: &Cli, args: &ChainArgs) -> lunar_wpt::Result<()> {
    let (mut s, mut monte_carlo) = match &args.from_manifest {
        Some(path) => {
            let m = Manifest::load(path)?;
            (m.scenario()?, m.monte_carlo)
        }
        None => (scenario(cli)?, true),
    };
    if args.no_monte_carlo {
        monte_carlo = false;
    }
    if let Some(n) = args.n {
        s.monte_carlo.n_samples = n;
    }
    if let Some(seed) = args.seed {
        s.monte_carlo.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let a = write_run_artifacts(&s, &out, ArtifactOptions { monte_carlo })?;
    print!("{}", a.extremes.table());
    for f in &a.manifest.files {
        println!("wrote {}", out.join(&f.name).display());
    }
    println!("wrote {}", out.join("manifest.json").display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else if matches!(e, Error::Contract(_)) {
        EXIT_USAGE
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
