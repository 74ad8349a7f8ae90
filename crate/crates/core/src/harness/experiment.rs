//! Noise sweeps over independent trials and result files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::{DataSource, ExperimentConfig, MetricsRow, OnlineIdentifier, OnlineSettings};
use crate::sims::{
    add_noise, dataset_rms, simulate, true_weights, truth_track, wavespeed, NoiseScale, Problem, RunningRms,
};
use crate::sparse::lstsq_calls;
use crate::tensor::{snapshot, Field};
use crate::weakform::{cost_estimates, FeatureLibrary, Lhs, DEFAULT_FFT_CONSTANT};

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub sigma: f64,
    pub trial: usize,
    pub rows: Vec<MetricsRow>,
    /// Least-squares solves made by the streaming loop (must be 0).
    pub online_lstsq_calls: usize,
    pub peak_feature_dp: usize,
    /// Working-memory budget `W` from the cost model.
    pub memory_budget_dp: usize,
    pub rejected_steps: usize,
}

impl TrialResult {
    /// First row index from which TPR stays at 1, if any.
    pub fn identified_from(&self) -> Option<usize> {
        let last_bad = self.rows.iter().rposition(|r| r.tpr != 1.0);
        match last_bad {
            None => Some(0),
            Some(i) if i + 1 < self.rows.len() => Some(i + 1),
            _ => None,
        }
    }

    pub fn holds_identification(&self) -> bool {
        self.identified_from().is_some()
    }

    /// Largest E₂ once identification is held.
    pub fn max_e2_after_identification(&self) -> Option<f64> {
        let i = self.identified_from()?;
        Some(self.rows[i..].iter().map(|r| r.e2).fold(0.0, f64::max))
    }
}

/// Per-step aggregates across the completed trials of one noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub step: u64,
    pub t: f64,
    pub mean_tpr: f64,
    pub mean_e2: f64,
    /// Learned wavespeed (W2D): mean, min, max of the per-trial Laplacian mean.
    pub wavespeed: Option<(f64, f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub trials: Vec<TrialResult>,
    pub failures: Vec<(f64, usize, String)>,
    pub aggregates: Vec<(f64, Vec<AggregateRow>)>,
    pub library: FeatureLibrary,
}

impl ExperimentConfig {
    pub fn online_settings(&self) -> OnlineSettings {
        OnlineSettings {
            k_mem: self.k_mem,
            lhs: if self.problem.lhs_order() == 1 { Lhs::Dt } else { Lhs::Dtt },
            half_widths: self.half_widths(),
            degrees: self.degrees(),
            query_stride: self.query_stride.clone(),
            policy: self.policy,
            step_mode: self.step_mode,
            convolution: self.convolution,
        }
    }
}

/// Clean snapshots from the configured source.
pub fn load_data(cfg: &ExperimentConfig) -> Result<Vec<Field>> {
    match &cfg.source {
        DataSource::Simulate => simulate(&cfg.sim),
        DataSource::Directory(dir) => {
            let files = snapshot::list(dir)?;
            if files.is_empty() {
                return Err(Error::Config(format!("no snapshots in {}", dir.display())));
            }
            files.iter().map(|(_, p)| snapshot::read(p, cfg.sim.dt)).collect()
        }
    }
}

/// Relative residual `‖Gw* − b‖/‖b‖` of the first window of `clean` at the
/// planted coefficients.
pub fn truth_residual(cfg: &ExperimentConfig, clean: &[Field]) -> Result<f64> {
    let settings = cfg.online_settings();
    let (id, _) = OnlineIdentifier::offline(&settings, clean, None)?;
    let sys = id.system()?;
    let star = true_weights(cfg.problem, id.library(), sys.step as f64 * cfg.sim.dt)?;
    Ok(sys.relative_residual(&star))
}

/// One offline phase plus the streaming loop over `clean` with fresh noise.
pub fn run_trial(cfg: &ExperimentConfig, clean: &[Field], rms: f64, sigma: f64, trial: usize) -> Result<TrialResult> {
    let settings = cfg.online_settings();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial as u64));
    let k = cfg.k_mem;
    if clean.len() <= k {
        return Err(Error::NotReady {
            have: clean.len(),
            need: k + 1,
        });
    }
    let mut running = RunningRms::default();
    let mut noisy = |f: &Field, rng: &mut ChaCha8Rng| {
        let scale = match cfg.noise_scale {
            NoiseScale::Dataset => rms,
            NoiseScale::Running => running.push(f),
        };
        add_noise(f, sigma, scale, rng)
    };
    let initial = clean[..k]
        .iter()
        .map(|f| noisy(f, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let lib = crate::weakform::build_library(cfg.problem.dim(), settings.lhs)?;
    let truth = truth_track(cfg.problem, &lib)?;
    let (mut id, first) = OnlineIdentifier::offline(&settings, &initial, Some(truth))?;
    drop(initial);
    let calls_before = lstsq_calls();
    let mut rows = Vec::with_capacity(clean.len() - k + 1);
    rows.push(first);
    for f in &clean[k..] {
        rows.push(id.step(&noisy(f, &mut rng)?)?);
    }
    let budget = cost_estimates(
        id.library(),
        id.spatial_kernels().grid(),
        id.query(),
        k,
        DEFAULT_FFT_CONSTANT,
    )
    .working_memory_dps;
    Ok(TrialResult {
        sigma,
        trial,
        rows,
        online_lstsq_calls: (lstsq_calls() - calls_before) as usize,
        peak_feature_dp: id.peak_feature_dp(),
        memory_budget_dp: budget as usize,
        rejected_steps: id.rejected_steps(),
    })
}

fn aggregate(problem: Problem, lib: &FeatureLibrary, trials: &[&TrialResult]) -> Vec<AggregateRow> {
    let Some(first) = trials.first() else {
        return Vec::new();
    };
    let laplacian = if problem == Problem::Wave2d {
        lib.column(0, 2, 1).zip(lib.column(1, 2, 1))
    } else {
        None
    };
    let n = trials.len() as f64;
    (0..first.rows.len())
        .map(|i| {
            let r0 = &first.rows[i];
            let mean_tpr = trials.iter().map(|t| t.rows[i].tpr).sum::<f64>() / n;
            let mean_e2 = trials.iter().map(|t| t.rows[i].e2).sum::<f64>() / n;
            let wavespeed = laplacian.map(|(a, b)| {
                let c: Vec<f64> = trials
                    .iter()
                    .map(|t| 0.5 * (t.rows[i].weights[a] + t.rows[i].weights[b]))
                    .collect();
                let mean = c.iter().sum::<f64>() / n;
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (wavespeed(r0.t), mean, lo, hi)
            });
            AggregateRow {
                step: r0.step,
                t: r0.t,
                mean_tpr,
                mean_e2,
                wavespeed,
            }
        })
        .collect()
}

/// Full sweep over `cfg.noise × cfg.trials`; trials run in parallel.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let clean = load_data(cfg)?;
    run_experiment_on(cfg, &clean)
}

/// As [`run_experiment`] with the clean data supplied.
pub fn run_experiment_on(cfg: &ExperimentConfig, clean: &[Field]) -> Result<ExperimentResult> {
    let rms = dataset_rms(clean)?;
    let jobs: Vec<(f64, usize)> = cfg
        .noise
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let run = || -> Vec<(f64, usize, Result<TrialResult>)> {
        jobs.par_iter()
            .map(|&(s, t)| (s, t, run_trial(cfg, clean, rms, s, t)))
            .collect()
    };
    let outcomes = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)
    } else {
        run()
    };
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (s, t, r) in outcomes {
        match r {
            Ok(tr) => trials.push(tr),
            Err(e) => {
                log::warn!("trial {t} at noise {s} failed: {e}");
                failures.push((s, t, e.to_string()));
            }
        }
    }
    if trials.is_empty() {
        let (_, _, msg) = failures.first().cloned().unwrap_or_default();
        return Err(Error::Diverged(format!("every trial failed; first error: {msg}")));
    }
    let lhs = cfg.online_settings().lhs;
    let library = crate::weakform::build_library(cfg.problem.dim(), lhs)?;
    let aggregates = cfg
        .noise
        .iter()
        .map(|&s| {
            let group: Vec<&TrialResult> = trials.iter().filter(|t| t.sigma == s).collect();
            (s, aggregate(cfg.problem, &library, &group))
        })
        .collect();
    Ok(ExperimentResult {
        trials,
        failures,
        aggregates,
        library,
    })
}

pub const METRICS_HEADER: [&str; 9] = [
    "step",
    "t",
    "lambda",
    "support_size",
    "tpr",
    "e2",
    "objective",
    "regret_cum",
    "wall_ms",
];

pub fn metrics_csv(lib: &FeatureLibrary, rows: &[MetricsRow]) -> String {
    let mut s = METRICS_HEADER.join(",");
    for l in lib.labels() {
        s.push(',');
        s.push_str(&l);
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{:.3}",
            r.step, r.t, r.lambda, r.support_size, r.tpr, r.e2, r.objective, r.regret_cum, r.wall_ms
        );
        for w in &r.weights {
            let _ = write!(s, ",{w}");
        }
        s.push('\n');
    }
    s
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let with_c = rows.first().is_some_and(|r| r.wavespeed.is_some());
    let mut s = String::from("step,t,mean_tpr,mean_e2");
    if with_c {
        s.push_str(",c_true,c_mean,c_min,c_max");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{},{},{},{}", r.step, r.t, r.mean_tpr, r.mean_e2);
        if let Some((c, m, lo, hi)) = r.wavespeed {
            let _ = write!(s, ",{c},{m},{lo},{hi}");
        }
        s.push('\n');
    }
    s
}

/// Writes per-trial and aggregate tables; returns the files written.
pub fn write_results(cfg: &ExperimentConfig, res: &ExperimentResult, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let tag = format!("{}_k{}", cfg.problem, cfg.k_mem);
    for t in &res.trials {
        let p = out.join(format!("{tag}_noise{}_trial{:03}.csv", t.sigma, t.trial));
        fs::write(&p, metrics_csv(&res.library, &t.rows))?;
        written.push(p);
    }
    for (s, rows) in &res.aggregates {
        let p = out.join(format!("{tag}_noise{s}_aggregate.csv"));
        fs::write(&p, aggregate_csv(rows))?;
        written.push(p);
    }
    let mut summary = String::from("noise,trial,status,identified_from_step,max_e2_after,online_lstsq_calls,peak_feature_dp,budget_dp\n");
    for t in &res.trials {
        let from = t.identified_from().map(|i| t.rows[i].step.to_string()).unwrap_or_default();
        let e = t.max_e2_after_identification().map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(
            summary,
            "{},{},ok,{from},{e},{},{},{}",
            t.sigma, t.trial, t.online_lstsq_calls, t.peak_feature_dp, t.memory_budget_dp
        );
    }
    for (s, t, msg) in &res.failures {
        let _ = writeln!(summary, "{s},{t},failed: {},,,,,", msg.replace(',', ";"));
    }
    let p = out.join(format!("{tag}_summary.csv"));
    fs::write(&p, summary)?;
    written.push(p);
    let p = out.join("config.txt");
    fs::write(&p, cfg.to_text())?;
    written.push(p);
    Ok(written)
}
