//! Variational bounds: squashed-entanglement and entanglement-of-formation
//! upper bounds, the hashing lower bound, and the combined report.
//!
//! Both upper bounds optimise an isometry on the purifying system `C` of the
//! canonical purification. For the squashed bound the isometry is the
//! Stinespring dilation `V: C → E ⊗ F` of a channel `C → E` with
//! `d_F = rank(ρ)·d_E`; for entanglement of formation it is `U: C → C^m`
//! followed by a computational-basis measurement. Gradients are analytic and
//! checked against central differences in the tests.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::entropy::{entropy_of_spectrum, mutual_information, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::extensions::{bipartite_labels, dilate_purification, extend_via_channel, Ensemble};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMat, CVec};
use crate::rng;
use crate::scalar::{cr, log2, Real};
use crate::state::{DensityOperator, PureState};
use crate::stiefel::{multistart, DescentSettings, StiefelObjective, StopReason, TraceRow};

/// Stream offset separating ensemble restarts from channel restarts.
const EOF_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Dimension of the extension system `E`.
    pub d_env: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            d_env: 2,
            restarts: 8,
            max_iters: 400,
            step_init: 0.5,
            grad_tol: 1e-7,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_env == 0 || self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvariantViolation(
                "d_env, restarts and max_iters must be positive".into(),
            ));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "step_init must be positive, got {}",
                self.step_init
            )));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol <= 1e-2) {
            return Err(Error::InvariantViolation(format!(
                "grad_tol must lie in (0, 1e-2], got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }

    pub fn with_d_env(mut self, d_env: usize) -> Self {
        self.d_env = d_env;
        self
    }

    fn settings<T: Real>(&self) -> DescentSettings<T> {
        DescentSettings {
            max_iters: self.max_iters,
            step_init: T::lit(self.step_init),
            grad_tol: T::lit(self.grad_tol),
        }
    }
}

/// `d_env` values tried in exploratory mode: 1, 2, 4 and `rank²`.
pub fn default_schedule(rank: usize) -> Vec<usize> {
    let mut s = vec![1, 2, 4, rank * rank];
    s.sort_unstable();
    s.dedup();
    s
}

/// Positions of `set` or of its complement in `dims`, whichever spans the
/// smaller space. Both give the same nonzero spectrum on a pure state.
fn smaller_side(dims: &[usize], set: &[usize]) -> Vec<usize> {
    let d: usize = set.iter().map(|&p| dims[p]).product();
    let total: usize = dims.iter().product();
    if d * d <= total {
        set.to_vec()
    } else {
        linalg::complement(dims.len(), set)
    }
}

/// Entropy of a (possibly unnormalised) reduced matrix, and `log₂` of it on
/// its support.
fn entropy_and_log<T: Real>(m: &CMat<T>) -> (T, CMat<T>) {
    let e = linalg::eigh(m);
    let floor = T::eigen_floor();
    let n = m.nrows();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        let w = if e.values[k] > floor { log2(e.values[k]) } else { T::zero() };
        for r in 0..n {
            scaled[(r, k)] *= cr(w);
        }
    }
    (entropy_of_spectrum(&e.values), scaled * e.vectors.adjoint())
}

/// `½ I(A;B|E)` of `(1 ⊗ V)|Ψ⟩` as a function of the dilation `V`.
pub struct SquashedObjective<T: Real> {
    psi: CMat<T>,
    dims: [usize; 4],
}

impl<T: Real> SquashedObjective<T> {
    pub fn new(rho: &DensityOperator<T>, d_env: usize) -> Result<Self> {
        bipartite_labels(rho.layout())?;
        let dims = rho.layout().dims();
        let psi = rho.purification_matrix();
        let r = psi.ncols();
        Ok(Self {
            psi,
            dims: [dims[0], dims[1], d_env, r * d_env],
        })
    }

    pub fn rank(&self) -> usize {
        self.psi.ncols()
    }

    pub fn d_env(&self) -> usize {
        self.dims[2]
    }

    pub fn d_stinespring(&self) -> usize {
        self.dims[3]
    }

    /// Shape of the isometries this objective accepts.
    pub fn shape(&self) -> (usize, usize) {
        (self.dims[2] * self.dims[3], self.rank())
    }

    /// `V = [1; 0]`: `E` is left in `|0⟩` and `F` receives `C`, giving
    /// `½ I(A;B)`.
    pub fn trivial_point(&self) -> CMat<T> {
        let (rows, r) = self.shape();
        CMat::from_fn(rows, r, |i, j| if i == j { cr(T::one()) } else { cr(T::zero()) })
    }

    pub fn channel(&self, v: &CMat<T>) -> Result<QuantumChannel<T>> {
        QuantumChannel::new(self.rank(), self.dims[2], self.dims[3], v.clone())
    }

    // Marginals AE, BE, F (= ABE) and E with their signs in the CMI.
    const TERMS: [(&'static [usize], i8); 4] =
        [(&[0, 2], 1), (&[1, 2], 1), (&[3], -1), (&[2], -1)];

    fn evaluate(&self, v: &CMat<T>, with_gradient: bool) -> (T, Option<CMat<T>>) {
        let phi = dilate_purification(&self.psi, v);
        let dims = &self.dims;
        let mut value = T::zero();
        let mut chi = CVec::<T>::zeros(phi.len());
        for (set, sign) in Self::TERMS {
            let side = smaller_side(dims, set);
            let m = linalg::reduced_from_pure(&phi, dims, &side);
            let s = T::lit(sign as f64);
            if with_gradient {
                let (ent, log) = entropy_and_log(&m);
                value += s * ent;
                chi += linalg::apply_on(&log, &phi, dims, &side) * cr(s);
            } else {
                value += s * crate::entropy::matrix_entropy(&m);
            }
        }
        let half = T::lit(0.5);
        if !with_gradient {
            return (value * half, None);
        }
        // df = −Re⟨χ, dΦ⟩ with Φ = Ψ Vᵀ, so the gradient in V is −χᵀ conj(Ψ).
        let cols = dims[2] * dims[3];
        let chi_mat = CMat::from_fn(self.psi.nrows(), cols, |i, j| chi[i * cols + j]);
        let grad = chi_mat.transpose() * self.psi.conjugate() * cr(-T::one());
        (value * half, Some(grad))
    }
}

impl<T: Real> StiefelObjective<T> for SquashedObjective<T> {
    fn value(&self, v: &CMat<T>) -> T {
        self.evaluate(v, false).0
    }

    fn euclidean_gradient(&self, v: &CMat<T>) -> CMat<T> {
        self.evaluate(v, true).1.expect("gradient requested")
    }

    fn value_and_gradient(&self, v: &CMat<T>) -> (T, CMat<T>) {
        let (f, g) = self.evaluate(v, true);
        (f, g.expect("gradient requested"))
    }
}

#[derive(Debug, Clone)]
pub struct SquashedResult<T: Real> {
    /// Best `½ I(A;B|E)` found; an upper bound on squashed entanglement.
    pub value: T,
    /// Channel `C → E` achieving `value`.
    pub channel: QuantumChannel<T>,
    pub best_restart: usize,
    pub stop: StopReason,
    /// Per-restart stop reasons, indexed by restart.
    pub stops: Vec<StopReason>,
    pub trace: Vec<TraceRow>,
}

impl<T: Real> SquashedResult<T> {
    /// True when the best restart stopped on the gradient tolerance.
    pub fn converged(&self) -> bool {
        self.stop.converged()
    }
}

fn random_starts<T: Real>(
    first: CMat<T>,
    restarts: usize,
    seed: u64,
    stream_base: u64,
) -> Vec<CMat<T>> {
    let (rows, cols) = first.shape();
    let mut starts = vec![first];
    for k in 1..restarts {
        let mut g = rng::seeded(seed, stream_base + k as u64);
        starts.push(rng::random_isometry(&mut g, rows, cols));
    }
    starts
}

/// Upper bound on squashed entanglement by descent over channels `C → E`
/// with `d_E = cfg.d_env`. Restart 0 is the trivial channel, so the value
/// never exceeds `½ I(A;B)`; the remaining restarts start from seeded
/// Haar-random isometries.
pub fn squashed_upper_bound<T: Real>(
    rho: &DensityOperator<T>,
    cfg: &OptimizerConfig,
) -> Result<SquashedResult<T>> {
    cfg.validate()?;
    let obj = SquashedObjective::new(rho, cfg.d_env)?;
    let starts = random_starts(obj.trivial_point(), cfg.restarts, cfg.seed, 0);
    let res = multistart(&obj, starts, &cfg.settings())?;
    log::info!(
        "squashed d_env={} best={:e} restart={} stop={:?}",
        cfg.d_env,
        res.best.value,
        res.best.restart,
        res.best.stop
    );
    Ok(SquashedResult {
        value: res.best.value,
        channel: obj.channel(&res.best.point)?,
        best_restart: res.best.restart,
        stop: res.best.stop,
        stops: res.restarts.iter().map(|r| r.stop).collect(),
        trace: res.trace(),
    })
}

/// Best [`squashed_upper_bound`] over several extension dimensions; ties go
/// to the earlier entry of `schedule`.
pub fn squashed_scan<T: Real>(
    rho: &DensityOperator<T>,
    cfg: &OptimizerConfig,
    schedule: &[usize],
) -> Result<SquashedResult<T>> {
    let mut best: Option<SquashedResult<T>> = None;
    for &d in schedule {
        let r = squashed_upper_bound(rho, &cfg.with_d_env(d))?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Shape("empty d_env schedule".into()))
}

/// Average marginal entropy of the ensemble obtained by measuring `U|Ψ⟩`
/// on the purifying system in the computational basis.
pub struct EofObjective<T: Real> {
    psi: CMat<T>,
    dims: [usize; 2],
    size: usize,
    layout: SystemLayout,
}

impl<T: Real> EofObjective<T> {
    pub fn new(rho: &DensityOperator<T>, size: usize) -> Result<Self> {
        bipartite_labels(rho.layout())?;
        let psi = rho.purification_matrix();
        if size < psi.ncols() {
            return Err(Error::Shape(format!(
                "ensemble size {size} is below the rank {}",
                psi.ncols()
            )));
        }
        let dims = rho.layout().dims();
        Ok(Self {
            psi,
            dims: [dims[0], dims[1]],
            size,
            layout: rho.layout().clone(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.size, self.psi.ncols())
    }

    /// `U = [1; 0]`, the eigen-ensemble padded with empty members.
    pub fn eigen_point(&self) -> CMat<T> {
        let (m, r) = self.shape();
        CMat::from_fn(m, r, |i, j| if i == j { cr(T::one()) } else { cr(T::zero()) })
    }

    /// Unnormalised members `(1 ⊗ ⟨k|U)|Ψ⟩` as columns.
    fn members(&self, u: &CMat<T>) -> CMat<T> {
        &self.psi * u.transpose()
    }

    fn evaluate(&self, u: &CMat<T>, with_gradient: bool) -> (T, Option<CMat<T>>) {
        let w = self.members(u);
        let side = smaller_side(&self.dims, &[0]);
        let floor = T::eigen_floor();
        let mut value = T::zero();
        let mut g = CMat::zeros(w.nrows(), w.ncols());
        for k in 0..w.ncols() {
            let v = w.column(k).into_owned();
            let p = v.norm_squared();
            if p <= floor {
                continue;
            }
            let m = linalg::reduced_from_pure(&v, &self.dims, &side);
            if with_gradient {
                let (ent, log) = entropy_and_log(&m);
                value += ent + p * log2(p);
                let gk = v.clone() * cr(log2(p)) - linalg::apply_on(&log, &v, &self.dims, &side);
                g.set_column(k, &gk);
            } else {
                value += crate::entropy::matrix_entropy(&m) + p * log2(p);
            }
        }
        if !with_gradient {
            return (value, None);
        }
        let grad = (self.psi.adjoint() * g).transpose() * cr(T::lit(2.0));
        (value, Some(grad))
    }

    /// Ensemble defined by `u`, dropping members of negligible weight.
    pub fn ensemble(&self, u: &CMat<T>) -> Result<Ensemble<T>> {
        let w = self.members(u);
        let mut entries = Vec::new();
        for k in 0..w.ncols() {
            let v = w.column(k).into_owned();
            let p = v.norm_squared();
            if p > T::eigen_floor() {
                entries.push((p, PureState::normalized(self.layout.clone(), v)?));
            }
        }
        Ensemble::new(entries)
    }
}

impl<T: Real> StiefelObjective<T> for EofObjective<T> {
    fn value(&self, u: &CMat<T>) -> T {
        self.evaluate(u, false).0
    }

    fn euclidean_gradient(&self, u: &CMat<T>) -> CMat<T> {
        self.evaluate(u, true).1.expect("gradient requested")
    }

    fn value_and_gradient(&self, u: &CMat<T>) -> (T, CMat<T>) {
        let (f, g) = self.evaluate(u, true);
        (f, g.expect("gradient requested"))
    }
}

#[derive(Debug, Clone)]
pub struct EofResult<T: Real> {
    /// Average entanglement of `ensemble`; an upper bound on `E_F`.
    pub value: T,
    pub ensemble: Ensemble<T>,
    /// The `size × rank` isometry generating the ensemble.
    pub isometry: CMat<T>,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

/// Upper bound on entanglement of formation over ensembles of `size`
/// members. Restart 0 is the eigen-ensemble; `cfg.d_env` is not used.
pub fn eof_upper_bound<T: Real>(
    rho: &DensityOperator<T>,
    size: usize,
    cfg: &OptimizerConfig,
) -> Result<EofResult<T>> {
    cfg.validate()?;
    let obj = EofObjective::new(rho, size)?;
    let starts = random_starts(obj.eigen_point(), cfg.restarts, cfg.seed, EOF_STREAM);
    let res = multistart(&obj, starts, &cfg.settings())?;
    log::info!(
        "eof size={size} best={:e} restart={} stop={:?}",
        res.best.value,
        res.best.restart,
        res.best.stop
    );
    Ok(EofResult {
        value: res.best.value,
        ensemble: obj.ensemble(&res.best.point)?,
        isometry: res.best.point.clone(),
        stop: res.best.stop,
        trace: res.trace(),
    })
}

/// `½ (I(A;B) − S(AB))`, reported without clamping.
pub fn hashing_lower_bound<T: Real>(rho: &DensityOperator<T>) -> Result<T> {
    let (a, b) = bipartite_labels(rho.layout())?;
    let i = mutual_information(rho, &[a], &[b])?;
    Ok((i - von_neumann_entropy(rho)) * T::lit(0.5))
}

/// Which construction produced the reported squashed upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquashedSource {
    /// Channel found by descent.
    Optimizer,
    /// Measure-and-flag channel of the best formation ensemble.
    EofCertificate,
}

#[derive(Debug, Clone)]
pub struct BoundReport<T: Real> {
    /// `½(I(A;B) − S(AB))`, possibly negative.
    pub hashing_lower: T,
    /// `max(0, hashing_lower)`.
    pub hashing_clamped: T,
    /// Upper bound on squashed entanglement.
    pub squashed_upper: T,
    /// Channel `C → E` certifying `squashed_upper`.
    pub squashed_channel: QuantumChannel<T>,
    pub squashed_source: SquashedSource,
    /// Upper bound on entanglement of formation.
    pub eof_upper: T,
    pub eof_ensemble: Ensemble<T>,
    /// `½ I(A;B)`, the trivial-extension value.
    pub mutual_info_half: T,
    /// `‖Tr_E ρ^{ABE} − ρ^{AB}‖₁` for the certifying extension.
    pub marginal_trace_distance: T,
    pub squashed_stop: StopReason,
    pub eof_stop: StopReason,
    pub config: OptimizerConfig,
    pub ensemble_size: usize,
}

/// Hashing, squashed and formation bounds for `rho`, with the formation
/// ensemble of size `rank²`. The squashed value is the better of the channel
/// optimizer at `cfg.d_env` and the flag extension of the formation ensemble,
/// so `squashed_upper ≤ eof_upper` holds by construction.
pub fn bounds_report<T: Real>(rho: &DensityOperator<T>, cfg: &OptimizerConfig) -> Result<BoundReport<T>> {
    let r = rho.rank();
    bounds_report_with(rho, cfg, r * r)
}

pub fn bounds_report_with<T: Real>(
    rho: &DensityOperator<T>,
    cfg: &OptimizerConfig,
    ensemble_size: usize,
) -> Result<BoundReport<T>> {
    cfg.validate()?;
    let (a, b) = bipartite_labels(rho.layout())?;
    let env = fresh_label(rho.layout(), "E");
    let hashing = hashing_lower_bound(rho)?;
    let mi_half = mutual_information(rho, &[&a], &[&b])? * T::lit(0.5);
    let sq = squashed_upper_bound(rho, cfg)?;
    let eof = eof_upper_bound(rho, ensemble_size, cfg)?;

    let flag_channel = QuantumChannel::measure_and_flag(&eof.isometry)?;
    let flag_ext = extend_via_channel(rho, &flag_channel, &env)?;
    let flag_value = flag_ext.half_cmi();
    let opt_ext = extend_via_channel(rho, &sq.channel, &env)?;
    let opt_value = opt_ext.half_cmi();

    let (squashed_upper, squashed_channel, source, ext) = if opt_value <= flag_value {
        (opt_value, sq.channel.clone(), SquashedSource::Optimizer, opt_ext)
    } else {
        (flag_value, flag_channel, SquashedSource::EofCertificate, flag_ext)
    };
    let marginal_trace_distance = ext.parent().trace_distance(rho)?;
    Ok(BoundReport {
        hashing_lower: hashing,
        hashing_clamped: if hashing > T::zero() { hashing } else { T::zero() },
        squashed_upper,
        squashed_channel,
        squashed_source: source,
        eof_upper: eof.value,
        eof_ensemble: eof.ensemble,
        mutual_info_half: mi_half,
        marginal_trace_distance,
        squashed_stop: sq.stop,
        eof_stop: eof.stop,
        config: *cfg,
        ensemble_size,
    })
}

/// `base`, or `base` followed by primes, not already used in `layout`.
pub(crate) fn fresh_label(layout: &SystemLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('\'');
    }
    label
}
