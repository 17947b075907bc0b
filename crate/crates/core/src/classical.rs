//! Classical triples `P(x, y, z)`, intrinsic information, and states that are
//! classical on the conditioning system.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{conditional_entropy, conditional_fannes_bound};
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::CMat;
use crate::optimizer::{fresh_label, OptimizerConfig};
use crate::rng;
use crate::scalar::{cr, log2, Real};
use crate::state::DensityOperator;
use crate::stiefel::{StopReason, TraceRow};

fn prob_tol<T: Real>() -> T {
    T::eigen_floor()
}

/// Joint distribution over `X × Y × Z`, stored row-major with flat index
/// `(x·n_y + y)·n_z + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalJoint<T: Real> {
    shape: [usize; 3],
    p: Vec<T>,
}

impl<T: Real> ClassicalJoint<T> {
    pub fn new(shape: [usize; 3], p: Vec<T>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Shape(format!("alphabet sizes must be positive, got {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if p.len() != n {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} probabilities, got {}",
                p.len()
            )));
        }
        if let Some(i) = p.iter().position(|&x| !(x >= T::zero())) {
            return Err(Error::InvariantViolation(format!(
                "probability at index {i} is negative or NaN"
            )));
        }
        let total = p.iter().fold(T::zero(), |a, &x| a + x);
        if (total - T::one()).abs() > prob_tol() {
            return Err(Error::InvariantViolation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { shape, p })
    }

    /// Joint proportional to the unnormalised weights `f(x, y, z)`.
    pub fn from_fn(shape: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let [nx, ny, nz] = shape;
        let mut p = Vec::with_capacity(nx * ny * nz);
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    p.push(f(x, y, z));
                }
            }
        }
        let total = p.iter().fold(T::zero(), |a, &x| a + x);
        if !(total > T::zero()) {
            return Err(Error::InvariantViolation("weights have no positive mass".into()));
        }
        Self::new(shape, p.into_iter().map(|x| x / total).collect())
    }

    /// Uniform `X, Y` bits with `Z = X ⊕ Y`.
    pub fn xor() -> Self {
        Self::from_fn([2, 2, 2], |x, y, z| if z == x ^ y { T::one() } else { T::zero() })
            .expect("valid")
    }

    /// `X = Y` a uniform bit, `Z` constant.
    pub fn copy() -> Self {
        Self::from_fn([2, 2, 1], |x, y, _| if x == y { T::one() } else { T::zero() }).expect("valid")
    }

    /// Seeded Dirichlet(1) distribution over the given alphabets.
    pub fn random(shape: [usize; 3], seed: u64) -> Result<Self> {
        let mut g = rng::seeded(seed, 0);
        Self::from_fn(shape, |_, _, _| {
            let u: f64 = rng::uniform(&mut g);
            T::lit(-(1.0 - u).ln())
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn probs(&self) -> &[T] {
        &self.p
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> T {
        let [_, ny, nz] = self.shape;
        self.p[(x * ny + y) * nz + z]
    }

    /// Marginal over the axes flagged in `keep` (`[x, y, z]`), flattened
    /// row-major over the kept axes.
    fn marginal(&self, keep: [bool; 3]) -> Vec<T> {
        let [nx, ny, nz] = self.shape;
        let dim = |k: usize, n: usize| if keep[k] { n } else { 1 };
        let (mx, my, mz) = (dim(0, nx), dim(1, ny), dim(2, nz));
        let mut out = vec![T::zero(); mx * my * mz];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let (ix, iy, iz) = (
                        if keep[0] { x } else { 0 },
                        if keep[1] { y } else { 0 },
                        if keep[2] { z } else { 0 },
                    );
                    out[(ix * my + iy) * mz + iz] += self.get(x, y, z);
                }
            }
        }
        out
    }

    /// Permute the `Z` alphabet: new symbol `perm[z]` carries old symbol `z`.
    pub fn permute_z(&self, perm: &[usize]) -> Result<Self> {
        apply_z_channel(self, &StochasticChannel::permutation(perm)?)
    }
}

fn shannon<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |acc, &x| acc - x * log2(x))
}

/// `I(X;Y|Z) = H(XZ) + H(YZ) − H(XYZ) − H(Z)` in bits.
pub fn shannon_cmi<T: Real>(p: &ClassicalJoint<T>) -> T {
    shannon(&p.marginal([true, false, true])) + shannon(&p.marginal([false, true, true]))
        - shannon(&p.p)
        - shannon(&p.marginal([false, false, true]))
}

/// `I(X;Y)` in bits.
pub fn shannon_mi<T: Real>(p: &ClassicalJoint<T>) -> T {
    shannon(&p.marginal([true, false, false])) + shannon(&p.marginal([false, true, false]))
        - shannon(&p.marginal([true, true, false]))
}

/// Row-stochastic matrix `W(z̄|z)`: row `z` is a distribution over `z̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticChannel<T> {
    n_in: usize,
    n_out: usize,
    w: Vec<T>,
}

impl<T: Real> StochasticChannel<T> {
    pub fn new(n_in: usize, n_out: usize, w: Vec<T>) -> Result<Self> {
        if n_in == 0 || n_out == 0 || w.len() != n_in * n_out {
            return Err(Error::Shape(format!(
                "channel {n_in}x{n_out} needs {} entries, got {}",
                n_in * n_out,
                w.len()
            )));
        }
        for z in 0..n_in {
            let row = &w[z * n_out..(z + 1) * n_out];
            if row.iter().any(|&x| !(x >= T::zero())) {
                return Err(Error::InvariantViolation(format!("row {z} has a negative entry")));
            }
            let s = row.iter().fold(T::zero(), |a, &x| a + x);
            if (s - T::one()).abs() > prob_tol() {
                return Err(Error::InvariantViolation(format!("row {z} sums to {s}, not 1")));
            }
        }
        Ok(Self { n_in, n_out, w })
    }

    pub fn identity(n: usize) -> Self {
        let w = (0..n * n)
            .map(|i| if i / n == i % n { T::one() } else { T::zero() })
            .collect();
        Self { n_in: n, n_out: n, w }
    }

    /// Every input goes to output `0`.
    pub fn constant(n_in: usize, n_out: usize) -> Self {
        let w = (0..n_in * n_out)
            .map(|i| if i % n_out == 0 { T::one() } else { T::zero() })
            .collect();
        Self { n_in, n_out, w }
    }

    /// Deterministic relabelling `z ↦ perm[z]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Shape(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let w = (0..n * n)
            .map(|i| if perm[i / n] == i % n { T::one() } else { T::zero() })
            .collect();
        Ok(Self { n_in: n, n_out: n, w })
    }

    /// Row-wise softmax of `logits` (`n × n`, row-major).
    pub fn softmax(n_in: usize, n_out: usize, logits: &[T]) -> Self {
        let mut w = Vec::with_capacity(n_in * n_out);
        for z in 0..n_in {
            let row = &logits[z * n_out..(z + 1) * n_out];
            let m = row.iter().copied().fold(row[0], |a, b| if b > a { b } else { a });
            let e: Vec<T> = row.iter().map(|&x| (x - m).exp()).collect();
            let s = e.iter().fold(T::zero(), |a, &x| a + x);
            w.extend(e.into_iter().map(|x| x / s));
        }
        Self { n_in, n_out, w }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn entries(&self) -> &[T] {
        &self.w
    }

    pub fn get(&self, z: usize, zbar: usize) -> T {
        self.w[z * self.n_out + zbar]
    }

    pub fn row(&self, z: usize) -> &[T] {
        &self.w[z * self.n_out..(z + 1) * self.n_out]
    }
}

/// `P'(x,y,z̄) = Σ_z P(x,y,z) W(z̄|z)`.
pub fn apply_z_channel<T: Real>(p: &ClassicalJoint<T>, ch: &StochasticChannel<T>) -> Result<ClassicalJoint<T>> {
    let [nx, ny, nz] = p.shape;
    if ch.n_in != nz {
        return Err(Error::Shape(format!(
            "channel expects {} input symbols, Z has {nz}",
            ch.n_in
        )));
    }
    let m = ch.n_out;
    let mut out = vec![T::zero(); nx * ny * m];
    for xy in 0..nx * ny {
        for z in 0..nz {
            let pz = p.p[xy * nz + z];
            if pz == T::zero() {
                continue;
            }
            for zb in 0..m {
                out[xy * m + zb] += pz * ch.w[z * m + zb];
            }
        }
    }
    Ok(ClassicalJoint {
        shape: [nx, ny, m],
        p: out,
    })
}

/// `∂ I(X;Y|Z̄) / ∂ W(z̄|z)` for `Z̄ = W(Z)`.
fn cmi_channel_gradient<T: Real>(p: &ClassicalJoint<T>, ch: &StochasticChannel<T>) -> Vec<T> {
    let q = apply_z_channel(p, ch).expect("shapes checked by caller");
    let [nx, ny, nz] = p.shape;
    let m = ch.n_out;
    let qxz = q.marginal([true, false, true]);
    let qyz = q.marginal([false, true, true]);
    let qz = q.marginal([false, false, true]);
    let lg = |v: T| if v > T::zero() { log2(v) } else { T::zero() };
    let mut g = vec![T::zero(); nz * m];
    for x in 0..nx {
        for y in 0..ny {
            for zb in 0..m {
                let d = lg(q.get(x, y, zb)) + lg(qz[zb]) - lg(qxz[x * m + zb]) - lg(qyz[y * m + zb]);
                for z in 0..nz {
                    g[z * m + zb] += p.get(x, y, z) * d;
                }
            }
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct IntrinsicResult<T: Real> {
    /// Best `I(X;Y|Z̄)` found; an upper bound on the intrinsic information.
    pub value: T,
    /// Channel `Z → Z̄` achieving `value`.
    pub channel: StochasticChannel<T>,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

struct SoftmaxRun<T: Real> {
    restart: usize,
    value: T,
    channel: StochasticChannel<T>,
    stop: StopReason,
    trace: Vec<TraceRow>,
}

fn softmax_descent<T: Real>(
    p: &ClassicalJoint<T>,
    mut theta: Vec<T>,
    cfg: &OptimizerConfig,
    restart: usize,
) -> SoftmaxRun<T> {
    let n = p.shape[2];
    let eval = |th: &[T]| {
        let ch = StochasticChannel::softmax(n, n, th);
        let v = shannon_cmi(&apply_z_channel(p, &ch).expect("square channel"));
        (v, ch)
    };
    let grad_of = |ch: &StochasticChannel<T>| {
        let gw = cmi_channel_gradient(p, ch);
        let mut g = vec![T::zero(); n * n];
        for z in 0..n {
            let row = ch.row(z);
            let mean = (0..n).fold(T::zero(), |a, j| a + row[j] * gw[z * n + j]);
            for j in 0..n {
                g[z * n + j] = row[j] * (gw[z * n + j] - mean);
            }
        }
        g
    };
    let max_norm = |g: &[T]| g.iter().fold(T::zero(), |a, &x| if x.abs() > a { x.abs() } else { a });
    let (mut value, mut ch) = eval(&theta);
    let mut g = grad_of(&ch);
    let mut trace = vec![TraceRow {
        restart,
        iter: 0,
        objective: value.as_f64(),
        grad_norm: max_norm(&g).as_f64(),
        step: 0.0,
    }];
    let mut step = T::lit(cfg.step_init);
    let tol = T::lit(cfg.grad_tol);
    let armijo = T::lit(1e-4);
    let mut iter = 0;
    let stop = loop {
        if max_norm(&g) < tol {
            break StopReason::Converged;
        }
        if iter >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        let slope = g.iter().fold(T::zero(), |a, &x| a + x * x);
        let mut t = step + step;
        let accepted = loop {
            let trial: Vec<T> = theta.iter().zip(&g).map(|(&a, &b)| a - t * b).collect();
            let (tv, tch) = eval(&trial);
            if tv <= value - armijo * t * slope {
                break Some((trial, tv, tch));
            }
            t *= T::lit(0.5);
            if t < T::lit(1e-14) {
                break None;
            }
        };
        let Some((th, tv, tch)) = accepted else {
            break StopReason::LineSearch;
        };
        iter += 1;
        step = t;
        theta = th;
        value = tv;
        ch = tch;
        g = grad_of(&ch);
        trace.push(TraceRow {
            restart,
            iter,
            objective: value.as_f64(),
            grad_norm: max_norm(&g).as_f64(),
            step: t.as_f64(),
        });
    };
    SoftmaxRun {
        restart,
        value,
        channel: ch,
        stop,
        trace,
    }
}

/// Upper bound on `I(X;Y↓Z) = inf_W I(X;Y|Z̄)` over channels with `|Z̄| = |Z|`.
///
/// Restart 0 starts near the identity channel and restart 1 from uniform
/// logits; the exact identity and constant channels are always candidates,
/// so the value never exceeds `min(I(X;Y|Z), I(X;Y))`.
///
/// The `Z` symbols are first sorted by their columns `p(·,·,z)`, so the
/// result does not depend on how the `Z` alphabet is ordered.
pub fn intrinsic_information<T: Real>(p: &ClassicalJoint<T>, cfg: &OptimizerConfig) -> Result<IntrinsicResult<T>> {
    cfg.validate()?;
    let [nx, ny, n] = p.shape;
    let column = |z: usize| (0..nx * ny).map(move |xy| p.p[xy * n + z]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        column(a)
            .zip(column(b))
            .map(|(u, v)| u.partial_cmp(&v).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted = ClassicalJoint {
        shape: p.shape,
        p: (0..nx * ny * n).map(|i| p.p[(i / n) * n + order[i % n]]).collect(),
    };
    let mut res = intrinsic_sorted(&sorted, cfg)?;
    let mut w = vec![T::zero(); n * n];
    for (i, &z) in order.iter().enumerate() {
        w[z * n..(z + 1) * n].copy_from_slice(res.channel.row(i));
    }
    res.channel = StochasticChannel::new(n, n, w)?;
    Ok(res)
}

fn intrinsic_sorted<T: Real>(p: &ClassicalJoint<T>, cfg: &OptimizerConfig) -> Result<IntrinsicResult<T>> {
    let n = p.shape[2];
    let starts: Vec<Vec<T>> = (0..cfg.restarts)
        .map(|k| match k {
            0 => (0..n * n).map(|i| if i / n == i % n { T::lit(8.0) } else { T::zero() }).collect(),
            1 => vec![T::zero(); n * n],
            _ => {
                let mut g = rng::seeded(cfg.seed, k as u64);
                (0..n * n).map(|_| rng::gaussian::<T>(&mut g) * T::lit(2.0)).collect()
            }
        })
        .collect();
    let runs: Vec<SoftmaxRun<T>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, th)| softmax_descent(p, th, cfg, k))
        .collect();
    let trace: Vec<TraceRow> = runs.iter().flat_map(|r| r.trace.iter().copied()).collect();

    let mut candidates: Vec<(T, StochasticChannel<T>, StopReason)> = Vec::new();
    for ch in [StochasticChannel::identity(n), StochasticChannel::constant(n, n)] {
        candidates.push((shannon_cmi(&apply_z_channel(p, &ch)?), ch, StopReason::Converged));
    }
    let mut runs = runs;
    runs.sort_by_key(|r| r.restart);
    for r in runs {
        candidates.push((r.value, r.channel, r.stop));
    }
    let (value, channel, stop) = candidates
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(j))
        })
        .map(|(_, c)| c)
        .expect("candidates non-empty");
    Ok(IntrinsicResult {
        value,
        channel,
        stop,
        trace,
    })
}

/// `Σ_k p_k ρ_k^A ⊗ |k⟩⟨k|^B`, with `B` appended to the layout of the blocks.
pub fn classical_embed<T: Real>(weights: &[T], states: &[DensityOperator<T>]) -> Result<DensityOperator<T>> {
    if weights.is_empty() || weights.len() != states.len() {
        return Err(Error::Shape(format!(
            "{} weights for {} blocks",
            weights.len(),
            states.len()
        )));
    }
    let layout_a = states[0].layout().clone();
    if states.iter().any(|s| s.layout() != &layout_a) {
        return Err(Error::Shape("blocks must share a layout".into()));
    }
    if weights.iter().any(|&w| !(w >= T::zero())) {
        return Err(Error::InvariantViolation("weights must be nonnegative".into()));
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if (total - T::one()).abs() > T::state_tol() {
        return Err(Error::InvariantViolation(format!("weights sum to {total}, not 1")));
    }
    let k = weights.len();
    let b = fresh_label(&layout_a, "B");
    let layout = layout_a.with(&b, k)?;
    let d = layout_a.total_dim();
    let mut m = CMat::zeros(d * k, d * k);
    for (j, (w, s)) in weights.iter().zip(states).enumerate() {
        for r in 0..d {
            for c in 0..d {
                m[(r * k + j, c * k + j)] = s.matrix()[(r, c)] * cr(*w);
            }
        }
    }
    DensityOperator::new(layout, m)
}

/// Sum of `|ρ_{(a,k),(a',l)}|` over `k ≠ l` for a layout `[A, B]`.
pub fn off_block_mass<T: Real>(rho: &DensityOperator<T>) -> Result<T> {
    let dims = bipartite_dims(rho.layout())?;
    let (da, db) = (dims[0], dims[1]);
    let mut s = T::zero();
    let m = rho.matrix();
    for i in 0..da * db {
        for j in 0..da * db {
            if i % db != j % db {
                s += m[(i, j)].norm_sqr().sqrt();
            }
        }
    }
    Ok(s)
}

fn bipartite_dims(layout: &SystemLayout) -> Result<Vec<usize>> {
    if layout.len() != 2 {
        return Err(Error::Shape(format!("expected layout [A, B], got {layout}")));
    }
    Ok(layout.dims())
}

/// Blocks `(p_k, ρ_k)` of a state classical on `B` (zero-weight blocks have
/// `ρ_k = None`).
fn blocks<T: Real>(rho: &DensityOperator<T>) -> Vec<(T, Option<CMat<T>>)> {
    let dims = rho.layout().dims();
    let (da, db) = (dims[0], dims[1]);
    let m = rho.matrix();
    (0..db)
        .map(|k| {
            let blk = CMat::from_fn(da, da, |r, c| m[(r * db + k, c * db + k)]);
            let p = (0..da).fold(T::zero(), |a, r| a + blk[(r, r)].re);
            if p > T::eigen_floor() {
                (p, Some(blk / cr(p)))
            } else {
                (p, None)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFannesReport<T> {
    /// `‖ρ − σ‖₁`.
    pub epsilon: T,
    /// `|S(A|B)_ρ − S(A|B)_σ|`.
    pub lhs: T,
    /// `η(2ε) + 3ε log₂ d_A`.
    pub rhs: T,
    pub holds: bool,
    /// `Σ_k p_k ‖ρ_k − σ_k‖₁` over blocks with `p_k > 0`.
    pub weighted_block_distance: T,
    /// Whether `Σ_k p_k ε_k ≤ 2ε` (within `1e-9`).
    pub block_step_holds: bool,
}

/// Conditional Fannes inequality for two states classical on `B` in the
/// computational basis, together with the intermediate block estimate.
pub fn classical_cond_fannes_check<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<ClassicalFannesReport<T>> {
    if rho.layout() != sigma.layout() {
        return Err(Error::Shape("states must share a layout".into()));
    }
    let classicality_tol = T::lit(1e-10).max(T::state_tol() * T::lit(1e-2));
    for (name, s) in [("rho", rho), ("sigma", sigma)] {
        let off = off_block_mass(s)?;
        if off > classicality_tol {
            return Err(Error::InvariantViolation(format!(
                "{name} is not classical on B: off-block mass {off:e}"
            )));
        }
    }
    let labels = rho.layout().labels();
    let (a, b) = (labels[0], labels[1]);
    let d_a = rho.layout().dims()[0];
    let eps = rho.trace_distance(sigma)?;
    let lhs = (conditional_entropy(rho, &[a], &[b])? - conditional_entropy(sigma, &[a], &[b])?).abs();
    let rhs = conditional_fannes_bound(eps, d_a)?;

    let mut weighted = T::zero();
    for ((p, rk), (_, sk)) in blocks(rho).into_iter().zip(blocks(sigma)) {
        let Some(rk) = rk else { continue };
        let diff = match sk {
            Some(sk) => rk - sk,
            // An empty σ block is treated as the zero operator.
            None => rk,
        };
        let dist = crate::linalg::eigvalsh(&diff)
            .into_iter()
            .fold(T::zero(), |acc, x| acc + x.abs());
        weighted += p * dist;
    }
    let tol = T::identity_tol();
    Ok(ClassicalFannesReport {
        epsilon: eps,
        lhs,
        rhs,
        holds: lhs <= rhs + tol,
        weighted_block_distance: weighted,
        block_step_holds: weighted <= eps + eps + tol,
    })
}
