use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use pdestream::harness::{
    metrics_csv, run_experiment, run_trial, truth_residual, write_results, DataSource, ExperimentConfig,
    OnlineIdentifier,
};
use pdestream::sims::{dataset_rms, manifest, simulator, truth_track, SimConfig};
use pdestream::tensor::{snapshot, Field};
use pdestream::weakform::{build_library, Lhs};
use pdestream::{Error, Result};

#[derive(Parser)]
#[command(name = "pdestream", version, about = "Streaming weak-form identification of PDE coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured simulator and write a snapshot directory (`--out -` streams to stdout).
    Simulate(Common),
    /// Stream snapshots through the online identifier once, without added noise.
    Identify {
        #[command(flatten)]
        common: Common,
        /// Score TPR/E2 against the built-in coefficients for the problem.
        #[arg(long)]
        truth: bool,
    },
    /// Full noise x trials sweep; writes per-trial and aggregate CSVs.
    Experiment(Common),
    /// Quick property checks on the configured problem.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Results directory.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    #[command(flatten)]
    keys: Keys,
}

// one optional flag per config key, `k_mem` becomes `--k-mem`
macro_rules! config_keys {
    ($($key:ident),* $(,)?) => {
        #[derive(Args)]
        #[command(next_help_heading = "Config keys")]
        struct Keys {
            $(
                #[arg(long, value_name = "VALUE")]
                $key: Option<String>,
            )*
        }

        impl Keys {
            fn lines(&self) -> String {
                let mut s = String::new();
                $(
                    if let Some(v) = &self.$key {
                        s += &format!("{} = {}\n", stringify!($key), v);
                    }
                )*
                s
            }
        }
    };
}

config_keys!(
    problem,
    k_mem,
    noise,
    noise_scale,
    trials,
    lambda0,
    delta_lambda,
    lambda_max,
    test_half_width,
    test_degree,
    query_stride,
    source,
    seed,
    step_mode,
    convolution,
    threads,
    shape,
    length,
    dt,
    steps,
    substeps,
    sim_seed,
    amplitude,
    max_mode,
    ic,
    wavespeed,
    cubic,
);

const MANIFEST: &str = "manifest.txt";
// manifest entries that are also config keys
const MANIFEST_KEYS: [&str; 4] = ["problem", "shape", "length", "dt"];

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(c) => load(&c).and_then(|cfg| simulate_cmd(&cfg)),
        Command::Identify { common, truth } => load(&common).and_then(|cfg| identify_cmd(&cfg, truth)),
        Command::Experiment(c) => load(&c).and_then(|cfg| experiment_cmd(&cfg)),
        Command::Verify(c) => load(&c).and_then(|cfg| verify_cmd(&cfg)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Unstable(_) => 2,
        Error::Diverged(_) | Error::SimulationDiverged { .. } | Error::NonFinite(_) => 3,
        _ => 1,
    }
}

/// Config file, then the data directory's manifest, then flags.
fn load(c: &Common) -> Result<ExperimentConfig> {
    let file = match &c.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let flags = c.keys.lines();
    let mut cfg = ExperimentConfig::parse(&format!("{file}\n{flags}"))?;
    if let DataSource::Directory(dir) = &cfg.source {
        if let Ok(text) = fs::read_to_string(dir.join(MANIFEST)) {
            let from_manifest: String = text
                .lines()
                .filter(|l| {
                    l.split_once('=')
                        .is_some_and(|(k, _)| MANIFEST_KEYS.contains(&k.trim()))
                })
                .map(|l| format!("{l}\n"))
                .collect();
            cfg = ExperimentConfig::parse(&format!("{file}\n{from_manifest}{flags}"))?;
        }
    }
    if let Some(out) = &c.out {
        cfg.out = PathBuf::from(out);
    }
    Ok(cfg)
}

fn simulate_cmd(cfg: &ExperimentConfig) -> Result<bool> {
    let mut sim = simulator(&cfg.sim)?;
    let start = Instant::now();
    if cfg.out == Path::new("-") {
        let mut w = BufWriter::new(io::stdout().lock());
        for _ in 0..cfg.sim.steps {
            w.write_all(&snapshot::encode(&sim.next_field()?))?;
        }
        w.flush()?;
    } else {
        fs::create_dir_all(&cfg.out)?;
        fs::write(cfg.out.join(MANIFEST), manifest(&cfg.sim))?;
        for k in 0..cfg.sim.steps {
            snapshot::write(&cfg.out, &sim.next_field()?)?;
            if (k + 1) % 500 == 0 {
                info!("{} of {} snapshots", k + 1, cfg.sim.steps);
            }
        }
        info!(
            "wrote {} snapshots to {} in {:.1}s",
            cfg.sim.steps,
            cfg.out.display(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(true)
}

/// Snapshots in arrival order from the configured source.
fn frames(cfg: &ExperimentConfig) -> Result<Box<dyn Iterator<Item = Result<Field>>>> {
    let dt = cfg.sim.dt;
    Ok(match &cfg.source {
        DataSource::Simulate => {
            let mut sim = simulator(&cfg.sim)?;
            Box::new((0..cfg.sim.steps).map(move |_| sim.next_field()))
        }
        DataSource::Directory(p) if p == Path::new("-") => {
            let mut r = BufReader::new(io::stdin());
            let mut step = 0u64;
            Box::new(std::iter::from_fn(move || {
                let f = snapshot::read_frame(&mut r, dt, step).transpose();
                step += 1;
                f
            }))
        }
        DataSource::Directory(dir) => {
            let files = snapshot::list(dir)?;
            if files.is_empty() {
                return Err(Error::Config(format!("no snapshots in {}", dir.display())));
            }
            Box::new(files.into_iter().map(move |(_, p)| snapshot::read(&p, dt)))
        }
    })
}

fn identify_cmd(cfg: &ExperimentConfig, truth: bool) -> Result<bool> {
    let settings = cfg.online_settings();
    let k = settings.k_mem;
    let track = if truth {
        let lib = build_library(cfg.problem.dim(), settings.lhs)?;
        Some(truth_track(cfg.problem, &lib)?)
    } else {
        None
    };
    let mut stream = frames(cfg)?;
    let mut initial = Vec::with_capacity(k);
    for f in stream.by_ref().take(k) {
        initial.push(f?);
    }
    let (mut id, first) = OnlineIdentifier::offline(&settings, &initial, track)?;
    drop(initial);
    let mut rows = vec![first];
    for f in stream {
        rows.push(id.step(&f?)?);
    }
    fs::create_dir_all(&cfg.out)?;
    let csv = cfg.out.join(format!("{}_k{}_identify.csv", cfg.problem, k));
    fs::write(&csv, metrics_csv(id.library(), &rows))?;
    fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    info!("{} rows written to {}", rows.len(), csv.display());

    let last = rows.last().expect("offline row");
    let lhs = match settings.lhs {
        Lhs::Dt => "d_t u",
        Lhs::Dtt => "d_tt u",
    };
    println!("{lhs} at t = {:.4} (lambda {:.3e}):", last.t, last.lambda);
    for (label, w) in id.library().labels().iter().zip(&last.weights) {
        if *w != 0.0 {
            println!("  {w:+.6e}  {label}");
        }
    }
    if truth {
        println!("tpr {:.3}  e2 {:.3e}", last.tpr, last.e2);
    }
    Ok(true)
}

fn experiment_cmd(cfg: &ExperimentConfig) -> Result<bool> {
    let start = Instant::now();
    let res = run_experiment(cfg)?;
    let files = write_results(cfg, &res, &cfg.out)?;
    for &s in &cfg.noise {
        let group: Vec<_> = res.trials.iter().filter(|t| t.sigma == s).collect();
        let held = group.iter().filter(|t| t.holds_identification()).count();
        let worst = group
            .iter()
            .filter_map(|t| t.max_e2_after_identification())
            .fold(f64::NAN, f64::max);
        println!(
            "noise {s}: {held}/{} trials hold identification, worst E2 after identification {worst:.3e}",
            group.len()
        );
    }
    for (s, t, msg) in &res.failures {
        warn!("noise {s} trial {t}: {msg}");
    }
    info!(
        "{} files in {} after {:.1}s",
        files.len(),
        cfg.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(true)
}

fn verify_cmd(cfg: &ExperimentConfig) -> Result<bool> {
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    let sizes = [(1, Lhs::Dt), (2, Lhs::Dtt), (3, Lhs::Dtt)]
        .map(|(d, lhs)| build_library(d, lhs).map(|l| l.len()));
    let sizes = [sizes[0].as_ref(), sizes[1].as_ref(), sizes[2].as_ref()].map(|s| s.copied().unwrap_or(0));
    report("library sizes", sizes == [21, 37, 53], format!("{sizes:?}"));

    let reparsed = ExperimentConfig::parse(&cfg.to_text())?;
    report("config round trip", reparsed == *cfg, "parse(to_text(cfg)) == cfg".into());

    // short clean run on the configured problem
    let mut short = cfg.clone();
    short.source = DataSource::Simulate;
    short.sim = SimConfig {
        steps: cfg.k_mem + 40,
        ..cfg.sim.clone()
    };
    let clean: Vec<Field> = frames(&short)?.collect::<Result<_>>()?;

    let f = &clean[clean.len() - 1];
    let back = snapshot::decode(&snapshot::encode(f), f.grid().dt(), f.step())?;
    let same = back.values() == f.values() && back.grid().shape() == f.grid().shape() && back.grid().dx() == f.grid().dx();
    report("snapshot round trip", same, format!("{:?} grid", f.grid().shape()));

    let r = truth_residual(&short, &clean)?;
    report(
        "planted coefficients fit the first window",
        r < 1e-3,
        format!("relative residual {r:.3e}"),
    );

    let rms = dataset_rms(&clean)?;
    let t = run_trial(&short, &clean, rms, 0.0, 0)?;
    let contiguous = t.rows.windows(2).all(|w| w[1].step == w[0].step + 1);
    report(
        "metrics rows contiguous",
        contiguous,
        format!("{} rows from step {}", t.rows.len(), t.rows[0].step),
    );
    report(
        "no least-squares solve after the offline phase",
        t.online_lstsq_calls == 0,
        format!("{} calls", t.online_lstsq_calls),
    );
    report(
        "feature storage within the memory budget",
        t.peak_feature_dp <= t.memory_budget_dp,
        format!("peak {} of {} doubles", t.peak_feature_dp, t.memory_budget_dp),
    );
    Ok(ok)
}
