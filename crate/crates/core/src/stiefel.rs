//! Riemannian descent on the complex Stiefel manifold `{V : V†V = 1}`.
//!
//! Gradients follow the real inner product `⟨X, Y⟩ = Re tr(X†Y)`, so an
//! objective's Euclidean gradient `G` satisfies `df = Re⟨G, dV⟩`. Steps are
//! retracted with the polar factor and accepted by Armijo backtracking.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::{c, cr, Real};

/// Smooth function of an isometry, defined on a neighbourhood of the manifold.
pub trait StiefelObjective<T: Real>: Sync {
    fn value(&self, v: &CMat<T>) -> T;

    /// Euclidean gradient; defaults to central differences with step `1e-5`.
    fn euclidean_gradient(&self, v: &CMat<T>) -> CMat<T> {
        finite_difference_gradient(self, v, T::lit(1e-5))
    }

    fn value_and_gradient(&self, v: &CMat<T>) -> (T, CMat<T>) {
        (self.value(v), self.euclidean_gradient(v))
    }
}

/// Central-difference Euclidean gradient, perturbing the real and imaginary
/// part of every entry.
pub fn finite_difference_gradient<T: Real, F: StiefelObjective<T> + ?Sized>(
    f: &F,
    v: &CMat<T>,
    h: T,
) -> CMat<T> {
    let two_h = h + h;
    let mut probe = v.clone();
    let mut g = CMat::zeros(v.nrows(), v.ncols());
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            let orig = probe[(i, j)];
            let mut partial = |delta| {
                probe[(i, j)] = orig + delta;
                let up = f.value(&probe);
                probe[(i, j)] = orig - delta;
                let down = f.value(&probe);
                probe[(i, j)] = orig;
                (up - down) / two_h
            };
            let re = partial(cr(h));
            let im = partial(c(T::zero(), h));
            g[(i, j)] = c(re, im);
        }
    }
    g
}

/// Project an ambient matrix onto the tangent space at `v`.
pub fn project_tangent<T: Real>(v: &CMat<T>, g: &CMat<T>) -> CMat<T> {
    let vg = v.adjoint() * g;
    g - v * linalg::hermitize(&vg)
}

/// Polar retraction `polar(v + ξ)`.
pub fn retract<T: Real>(v: &CMat<T>, xi: &CMat<T>) -> CMat<T> {
    linalg::polar_isometry(&(v + xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Riemannian gradient max-norm fell below the tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// Backtracking could not find a decrease.
    LineSearch,
}

impl StopReason {
    pub fn converged(self) -> bool {
        self == StopReason::Converged
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DescentSettings<T> {
    pub max_iters: usize,
    pub step_init: T,
    pub grad_tol: T,
}

/// One accepted iteration (`iter = 0` is the starting point, with step 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct RestartOutcome<T: Real> {
    pub restart: usize,
    pub value: T,
    pub point: CMat<T>,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;

/// Riemannian gradient descent from `start` (assumed to be an isometry).
pub fn descend<T: Real, F: StiefelObjective<T> + ?Sized>(
    f: &F,
    start: CMat<T>,
    settings: &DescentSettings<T>,
    restart: usize,
) -> RestartOutcome<T> {
    let armijo = T::lit(ARMIJO);
    let min_step = T::lit(MIN_STEP);
    let mut v = start;
    let (mut value, egrad) = f.value_and_gradient(&v);
    let mut grad = project_tangent(&v, &egrad);
    let mut trace = vec![TraceRow {
        restart,
        iter: 0,
        objective: value.as_f64(),
        grad_norm: linalg::max_abs(&grad).as_f64(),
        step: 0.0,
    }];
    let mut step = settings.step_init;
    let mut iterations = 0;
    let stop = loop {
        if linalg::max_abs(&grad) < settings.grad_tol {
            break StopReason::Converged;
        }
        if iterations >= settings.max_iters {
            break StopReason::MaxIterations;
        }
        let slope = grad.norm_squared();
        let mut t = step + step;
        let accepted = loop {
            let trial = retract(&v, &(&grad * cr(-t)));
            let tv = f.value(&trial);
            if tv <= value - armijo * t * slope {
                break Some(trial);
            }
            t *= T::lit(0.5);
            if t < min_step {
                break None;
            }
        };
        let Some(next) = accepted else {
            break StopReason::LineSearch;
        };
        iterations += 1;
        step = t;
        v = next;
        let (val, egrad) = f.value_and_gradient(&v);
        value = val;
        grad = project_tangent(&v, &egrad);
        trace.push(TraceRow {
            restart,
            iter: iterations,
            objective: value.as_f64(),
            grad_norm: linalg::max_abs(&grad).as_f64(),
            step: t.as_f64(),
        });
    };
    RestartOutcome {
        restart,
        value,
        point: v,
        iterations,
        stop,
        trace,
    }
}

#[derive(Debug, Clone)]
pub struct MultistartResult<T: Real> {
    /// Lowest final value; ties go to the lower restart index.
    pub best: RestartOutcome<T>,
    pub restarts: Vec<RestartOutcome<T>>,
}

impl<T: Real> MultistartResult<T> {
    /// All trace rows, ordered by restart and iteration.
    pub fn trace(&self) -> Vec<TraceRow> {
        self.restarts.iter().flat_map(|r| r.trace.iter().copied()).collect()
    }
}

/// Run [`descend`] from each start in parallel and keep the best.
pub fn multistart<T: Real, F: StiefelObjective<T> + ?Sized>(
    f: &F,
    starts: Vec<CMat<T>>,
    settings: &DescentSettings<T>,
) -> Result<MultistartResult<T>> {
    if starts.is_empty() {
        return Err(Error::Shape("multistart needs at least one start".into()));
    }
    let restarts: Vec<RestartOutcome<T>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, s)| descend(f, s, settings, k))
        .collect();
    let best = restarts
        .iter()
        .min_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.restart.cmp(&b.restart))
        })
        .cloned()
        .expect("non-empty");
    Ok(MultistartResult { best, restarts })
}

/// Write trace rows as CSV with header `restart,iter,objective,grad_norm,step`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
