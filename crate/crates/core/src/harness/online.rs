//! Offline initialisation and the per-snapshot online update.

use std::time::Instant;

use nalgebra::DVector;

use crate::analysis::{e2, regret_step, tpr, RegretLedger, TruthTrack};
use crate::error::{Error, Result};
use crate::sparse::{
    initial_guess, objective, penalty, prox_grad_step, step_size, support_of, update_lambda, Lambda, ScaledSystem,
    StepMode, ThresholdPolicy, WeightState,
};
use crate::tensor::{Field, RingBuffer, Stamped};
use crate::weakform::{
    build_library, make_axis_test_function, make_temporal_test_function, ConvolutionMethod, FeatureLibrary, Lhs,
    LinearSystem, PsiSlice, QueryGrid, SpatialKernels, TemporalKernels,
};

/// Everything fixed before streaming starts.
#[derive(Clone, Debug)]
pub struct OnlineSettings {
    pub k_mem: usize,
    pub lhs: Lhs,
    pub half_widths: Vec<usize>,
    pub degrees: Vec<u32>,
    /// Empty picks the smallest admissible stride.
    pub query_stride: Vec<usize>,
    pub policy: ThresholdPolicy,
    pub step_mode: StepMode,
    pub convolution: ConvolutionMethod,
}

/// One row of the metrics table.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    /// Step index of the newest snapshot.
    pub step: u64,
    /// Query time (centre of the window).
    pub t: f64,
    pub lambda: f64,
    pub support_size: usize,
    pub tpr: f64,
    pub e2: f64,
    pub objective: f64,
    pub regret_cum: f64,
    pub wall_ms: f64,
    pub weights: Vec<f64>,
}

/// Streaming identifier: cached kernels, the slice buffer and the estimate.
pub struct OnlineIdentifier {
    spatial: SpatialKernels,
    temporal: TemporalKernels,
    buffer: RingBuffer<PsiSlice>,
    policy: ThresholdPolicy,
    step_mode: StepMode,
    state: WeightState,
    truth: Option<TruthTrack>,
    ledger: RegretLedger,
    dt: f64,
    peak_dp: usize,
    rejected: usize,
}

impl OnlineIdentifier {
    /// Builds kernels, featurises the first `k_mem` snapshots and solves the
    /// single least-squares problem.
    pub fn offline(settings: &OnlineSettings, initial: &[Field], truth: Option<TruthTrack>) -> Result<(Self, MetricsRow)> {
        let start = Instant::now();
        let k = settings.k_mem;
        if initial.len() < k {
            return Err(Error::NotReady {
                have: initial.len(),
                need: k,
            });
        }
        let grid = initial[0].grid().clone();
        let d = grid.dim();
        let library = build_library(d, settings.lhs)?;
        if let Some(t) = &truth {
            if t.len() != library.len() {
                return Err(Error::LibraryMismatch(format!(
                    "truth has {} coefficients, library {}",
                    t.len(),
                    library.len()
                )));
            }
        }
        let tfs = (0..d)
            .map(|a| {
                make_axis_test_function(settings.half_widths[a], settings.degrees[a], grid.dx(), 4)
            })
            .collect::<Result<Vec<_>>>()?;
        let query = if settings.query_stride.is_empty() {
            QueryGrid::auto(&grid, &settings.half_widths)?
        } else {
            let strides = if settings.query_stride.len() == 1 {
                vec![settings.query_stride[0]; d]
            } else {
                settings.query_stride.clone()
            };
            QueryGrid::new(&grid, &settings.half_widths, &strides)?
        };
        let spatial = SpatialKernels::new(&grid, &library, &tfs, &query, settings.convolution)?;
        let tf_t = make_temporal_test_function(k, grid.dt(), settings.lhs.order())?;
        let temporal = TemporalKernels::new(&tf_t, &library)?;
        let mut buffer = RingBuffer::new(k)?;
        for f in &initial[..k] {
            buffer.push(spatial.features(f)?)?;
        }
        let sys = temporal.assemble(&buffer)?;
        let w0 = initial_guess(&sys.g, &sys.b);
        if w0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged("initial least-squares solution is not finite".into()));
        }
        let lambda = settings.policy.lambda0;
        let residual = 0.5 * (&sys.g * &w0 - &sys.b).norm_squared();
        let state = WeightState::new(w0, lambda, residual, sys.step);
        let mut me = Self {
            spatial,
            temporal,
            buffer,
            policy: settings.policy,
            step_mode: settings.step_mode,
            state,
            truth,
            ledger: RegretLedger::new(),
            dt: grid.dt(),
            peak_dp: 0,
            rejected: 0,
        };
        me.track_memory(&sys);
        let scaled = ScaledSystem::new(sys.g.clone(), sys.b.clone());
        let lam = scaled.thresholds(lambda);
        let f = objective(&sys.g, &sys.b, &me.state.weights, Lambda::PerCoord(&lam));
        let row = me.row(&sys, f, start)?;
        Ok((me, row))
    }

    pub fn library(&self) -> &FeatureLibrary {
        self.spatial.library()
    }

    pub fn query(&self) -> &QueryGrid {
        self.spatial.query()
    }

    pub fn spatial_kernels(&self) -> &SpatialKernels {
        &self.spatial
    }

    pub fn temporal_kernels(&self) -> &TemporalKernels {
        &self.temporal
    }

    /// `(G, b)` for the current buffer.
    pub fn system(&self) -> Result<LinearSystem> {
        self.temporal.assemble(&self.buffer)
    }

    pub fn state(&self) -> &WeightState {
        &self.state
    }

    pub fn ledger(&self) -> &RegretLedger {
        &self.ledger
    }

    /// Largest number of doubles held by the slice buffer plus `(G, b)`.
    pub fn peak_feature_dp(&self) -> usize {
        self.peak_dp
    }

    /// Steps whose thresholding emptied the support.
    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn track_memory(&mut self, sys: &LinearSystem) {
        let dp: usize = self.buffer.iter().map(|s| s.len_dp()).sum::<usize>() + sys.len_dp();
        self.peak_dp = self.peak_dp.max(dp);
    }

    /// Featurise, assemble, one proximal gradient step, threshold update.
    ///
    /// On divergence the weights and threshold are left unchanged.
    pub fn step(&mut self, incoming: &Field) -> Result<MetricsRow> {
        let start = Instant::now();
        let psi = self.spatial.features(incoming)?;
        if !psi.is_finite() {
            return Err(Error::Diverged(format!("non-finite features at step {}", incoming.step())));
        }
        self.buffer.push(psi)?;
        let sys = self.temporal.assemble(&self.buffer)?;
        self.track_memory(&sys);
        let scaled = ScaledSystem::new(sys.g.clone(), sys.b.clone());
        let lam = scaled.thresholds(self.state.lambda);
        let lam_ref = Lambda::PerCoord(&lam);
        let w = &self.state.weights;

        if let Some(truth) = &self.truth {
            let star = truth.at(sys.step as f64 * self.dt);
            regret_step(&mut self.ledger, sys.step, &sys.g, &sys.b, w, &star, lam_ref);
        }

        let active: Vec<usize> = self
            .state
            .support
            .iter()
            .copied()
            .filter(|&k| !scaled.excluded()[k])
            .collect();
        let support: Vec<usize> = if active.is_empty() {
            (0..scaled.cols()).filter(|&k| !scaled.excluded()[k]).collect()
        } else {
            active
        };
        let alpha = match self.step_mode {
            StepMode::Estimate => step_size(&sys.g, &support, StepMode::Estimate)?,
            StepMode::Exact => step_size(&scaled.scaled_matrix(), &support, StepMode::Exact)?,
        };
        let candidate = prox_grad_step(w, &scaled, alpha, lam_ref)?;
        let s_new = support_of(&candidate);
        let f_new;
        if s_new.is_empty() {
            // nothing survived: keep the estimate and lower the threshold
            self.rejected += 1;
            self.state.lambda *= 1.0 - self.policy.delta;
            self.state.prev_residual = 0.5 * (&sys.g * w - &sys.b).norm_squared();
            f_new = objective(&sys.g, &sys.b, w, lam_ref);
        } else {
            let residual = 0.5 * (&sys.g * &candidate - &sys.b).norm_squared();
            f_new = residual + penalty(&candidate, lam_ref);
            let f_old = self.state.prev_residual + penalty(w, lam_ref);
            let lambda = update_lambda(
                &self.policy,
                self.state.lambda,
                f_new,
                f_old,
                &s_new,
                &self.state.support,
            );
            self.state = WeightState {
                weights: candidate,
                lambda,
                support: s_new,
                prev_residual: residual,
                step: sys.step,
            };
        }
        self.row(&sys, f_new, start)
    }

    fn row(&self, sys: &LinearSystem, objective: f64, start: Instant) -> Result<MetricsRow> {
        let t = sys.step as f64 * self.dt;
        let w = &self.state.weights;
        let (tp, err) = match &self.truth {
            Some(truth) => {
                let star = truth.at(t);
                (tpr(w, &star), e2(w, &star)?)
            }
            None => (f64::NAN, f64::NAN),
        };
        Ok(MetricsRow {
            step: self.buffer.newest().map_or(0, Stamped::step),
            t,
            lambda: self.state.lambda,
            support_size: self.state.support.len(),
            tpr: tp,
            e2: err,
            objective,
            regret_cum: self.ledger.total(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            weights: w.iter().copied().collect(),
        })
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.state.weights
    }
}
