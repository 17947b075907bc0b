//! Von Neumann entropies, conditional quantities and Fannes-type bounds.
//!
//! Everything is in bits. Eigenvalues at or below [`Real::eigen_floor`]
//! contribute nothing to `−Σ λ log λ`.

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMat};
use crate::scalar::{log2, Real};
use crate::state::DensityOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport<T> {
    /// Entropy in bits.
    pub value: T,
    /// Eigenvalues at or below this were dropped.
    pub eigenvalue_floor: T,
}

/// `−Σ λ log₂ λ` over entries above the floor.
pub fn entropy_of_spectrum<T: Real>(spectrum: &[T]) -> T {
    let floor = T::eigen_floor();
    spectrum
        .iter()
        .filter(|&&x| x > floor)
        .fold(T::zero(), |acc, &x| acc - x * log2(x))
}

pub(crate) fn matrix_entropy<T: Real>(m: &CMat<T>) -> T {
    entropy_of_spectrum(&linalg::eigvalsh(m))
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityOperator<T>) -> T {
    entropy_of_spectrum(&rho.spectrum())
}

pub fn entropy_report<T: Real>(rho: &DensityOperator<T>) -> EntropyReport<T> {
    EntropyReport {
        value: von_neumann_entropy(rho),
        eigenvalue_floor: T::eigen_floor(),
    }
}

/// Entropy of the marginal on `labels`; the empty set has entropy zero.
pub fn marginal_entropy<T: Real, S: AsRef<str>>(rho: &DensityOperator<T>, labels: &[S]) -> Result<T> {
    if labels.is_empty() {
        return Ok(T::zero());
    }
    let pos = rho.layout().positions(labels)?;
    if pos.len() == rho.layout().len() {
        return Ok(von_neumann_entropy(rho));
    }
    let m = linalg::partial_trace(rho.matrix(), &rho.layout().dims(), &pos);
    Ok(matrix_entropy(&m))
}

fn disjoint<S: AsRef<str>>(sets: &[&[S]]) -> Result<Vec<String>> {
    let mut all: Vec<String> = Vec::new();
    for set in sets {
        for l in set.iter() {
            let l = l.as_ref().to_string();
            if all.contains(&l) {
                return Err(Error::LabelClash(l));
            }
            all.push(l);
        }
    }
    Ok(all)
}

fn union<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<String> {
    a.iter().chain(b.iter()).map(|s| s.as_ref().to_string()).collect()
}

/// `S(A|B) = S(AB) − S(B)`.
pub fn conditional_entropy<T: Real, S: AsRef<str>>(
    rho: &DensityOperator<T>,
    a: &[S],
    b: &[S],
) -> Result<T> {
    disjoint(&[a, b])?;
    Ok(marginal_entropy(rho, &union(a, b))? - marginal_entropy(rho, b)?)
}

/// `I(A;B) = S(A) + S(B) − S(AB)`.
pub fn mutual_information<T: Real, S: AsRef<str>>(
    rho: &DensityOperator<T>,
    a: &[S],
    b: &[S],
) -> Result<T> {
    disjoint(&[a, b])?;
    Ok(marginal_entropy(rho, a)? + marginal_entropy(rho, b)? - marginal_entropy(rho, &union(a, b))?)
}

/// `I(A;B|E) = S(AE) + S(BE) − S(ABE) − S(E)`; `e` may be empty.
pub fn conditional_mutual_information<T: Real, S: AsRef<str>>(
    rho: &DensityOperator<T>,
    a: &[S],
    b: &[S],
    e: &[S],
) -> Result<T> {
    let abe = disjoint(&[a, b, e])?;
    let ae = union(a, e);
    let be = union(b, e);
    Ok(marginal_entropy(rho, &ae)? + marginal_entropy(rho, &be)?
        - marginal_entropy(rho, &abe)?
        - marginal_entropy(rho, e)?)
}

/// `η(ε) = −ε log₂ ε` for `ε ≤ ¼`, and `½` otherwise.
pub fn eta<T: Real>(eps: T) -> Result<T> {
    if !(eps >= T::zero()) {
        return Err(Error::Domain(format!("eta requires ε ≥ 0, got {eps}")));
    }
    if eps == T::zero() {
        Ok(T::zero())
    } else if eps <= T::lit(0.25) {
        Ok(-eps * log2(eps))
    } else {
        Ok(T::lit(0.5))
    }
}

/// `η(ε) + ε log₂ d`.
pub fn fannes_bound<T: Real>(eps: T, d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(eta(eps)? + eps * log2(T::from_usize(d).unwrap()))
}

/// `η(2ε) + 3ε log₂ d_A`.
///
/// Proven when both states are classical on the conditioning system (see
/// [`crate::classical::classical_cond_fannes_check`]); for general bipartite
/// states it is only a candidate bound and [`conditional_fannes_check`] merely
/// reports whether it held.
pub fn conditional_fannes_bound<T: Real>(eps: T, d_a: usize) -> Result<T> {
    if d_a == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(eta(eps + eps)? + T::lit(3.0) * eps * log2(T::from_usize(d_a).unwrap()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FannesComparison<T> {
    /// Trace distance `‖ρ − σ‖₁`.
    pub epsilon: T,
    /// Observed entropy difference.
    pub lhs: T,
    /// Bound evaluated at `epsilon`.
    pub rhs: T,
    pub holds: bool,
}

/// `|S(ρ) − S(σ)|` against [`fannes_bound`].
pub fn fannes_check<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<FannesComparison<T>> {
    let eps = rho.trace_distance(sigma)?;
    let lhs = (von_neumann_entropy(rho) - von_neumann_entropy(sigma)).abs();
    let rhs = fannes_bound(eps, rho.dim())?;
    Ok(FannesComparison {
        epsilon: eps,
        lhs,
        rhs,
        holds: lhs <= rhs + T::identity_tol(),
    })
}

/// Empirical evaluation of the conditional bound on arbitrary states. The
/// result is reported, never asserted.
pub fn conditional_fannes_check<T: Real, S: AsRef<str>>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    a: &[S],
    b: &[S],
) -> Result<FannesComparison<T>> {
    let eps = rho.trace_distance(sigma)?;
    let lhs = (conditional_entropy(rho, a, b)? - conditional_entropy(sigma, a, b)?).abs();
    let d_a = rho.layout().dim_of_set(a)?;
    let rhs = conditional_fannes_bound(eps, d_a)?;
    Ok(FannesComparison {
        epsilon: eps,
        lhs,
        rhs,
        holds: lhs <= rhs + T::identity_tol(),
    })
}

/// Entropy of the uniform distribution over `d` outcomes.
pub fn max_entropy<T: Real>(layout: &SystemLayout) -> T {
    log2(T::from_usize(layout.total_dim()).unwrap())
}
