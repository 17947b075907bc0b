//! Dense complex linear algebra on row-major tensor-product spaces.
//!
//! Subsystem positions always refer to a `dims` slice in the same ordering as
//! the owning [`SystemLayout`](crate::SystemLayout).

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::scalar::{cr, Real, C};

pub type CMat<T> = DMatrix<C<T>>;
pub type CVec<T> = DVector<C<T>>;

/// Flat offsets of every multi-index over `positions` (row-major in the order
/// given), embedded in the full space described by `dims`.
pub fn offsets(dims: &[usize], positions: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &base in &out {
            for k in 0..dims[p] {
                next.push(base + k * strides[p]);
            }
        }
        out = next;
    }
    out
}

/// Positions in `0..n` not in `positions`, ascending.
pub fn complement(n: usize, positions: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !positions.contains(p)).collect()
}

/// Reduced matrix on `keep` (kept in the order given), tracing the rest.
pub fn partial_trace<T: Real>(m: &CMat<T>, dims: &[usize], keep: &[usize]) -> CMat<T> {
    let traced = complement(dims.len(), keep);
    let k_off = offsets(dims, keep);
    let t_off = offsets(dims, &traced);
    let dk = k_off.len();
    CMat::from_fn(dk, dk, |i, j| {
        let (ri, cj) = (k_off[i], k_off[j]);
        t_off
            .iter()
            .fold(C::new(T::zero(), T::zero()), |acc, &t| acc + m[(ri + t, cj + t)])
    })
}

/// Reduced state on `keep` of the pure state `v` (not necessarily normalised).
pub fn reduced_from_pure<T: Real>(v: &CVec<T>, dims: &[usize], keep: &[usize]) -> CMat<T> {
    let m = split_pure(v, dims, keep);
    &m * m.adjoint()
}

/// Reshape `v` into the `d_keep × d_rest` matrix of its bipartition.
pub fn split_pure<T: Real>(v: &CVec<T>, dims: &[usize], keep: &[usize]) -> CMat<T> {
    let rest = complement(dims.len(), keep);
    let k_off = offsets(dims, keep);
    let r_off = offsets(dims, &rest);
    CMat::from_fn(k_off.len(), r_off.len(), |i, j| v[k_off[i] + r_off[j]])
}

/// `(op ⊗ 1) v` with `op` acting on the subsystems at `positions`.
pub fn apply_on<T: Real>(op: &CMat<T>, v: &CVec<T>, dims: &[usize], positions: &[usize]) -> CVec<T> {
    let rest = complement(dims.len(), positions);
    let k_off = offsets(dims, positions);
    let r_off = offsets(dims, &rest);
    debug_assert_eq!(op.nrows(), k_off.len());
    let mut out = CVec::zeros(v.len());
    for &r in &r_off {
        for (i, &ki) in k_off.iter().enumerate() {
            let mut acc = C::new(T::zero(), T::zero());
            for (j, &kj) in k_off.iter().enumerate() {
                acc += op[(i, j)] * v[kj + r];
            }
            out[ki + r] = acc;
        }
    }
    out
}

/// `1_left ⊗ op ⊗ 1_right` for an operator (possibly rectangular) on position `pos`.
pub fn embed<T: Real>(op: &CMat<T>, dims: &[usize], pos: usize) -> CMat<T> {
    let left: usize = dims[..pos].iter().product();
    let right: usize = dims[pos + 1..].iter().product();
    let l = CMat::<T>::identity(left, left);
    let r = CMat::<T>::identity(right, right);
    l.kronecker(op).kronecker(&r)
}

/// Reorder tensor factors so that new factor `k` is old factor `order[k]`.
pub fn permute_matrix<T: Real>(m: &CMat<T>, dims: &[usize], order: &[usize]) -> CMat<T> {
    let map = offsets(dims, order);
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(map[i], map[j])])
}

pub fn permute_vector<T: Real>(v: &CVec<T>, dims: &[usize], order: &[usize]) -> CVec<T> {
    let map = offsets(dims, order);
    CVec::from_fn(v.len(), |i, _| v[map[i]])
}

pub fn hermitize<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

pub fn hermitian_deviation<T: Real>(m: &CMat<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let n = z.modulus();
        if n > acc {
            n
        } else {
            acc
        }
    })
}

pub fn trace<T: Real>(m: &CMat<T>) -> C<T> {
    (0..m.nrows()).fold(C::new(T::zero(), T::zero()), |acc, i| acc + m[(i, i)])
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh<T: Real> {
    /// Eigenvalues, descending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMat<T>,
}

/// Hermitian eigendecomposition (input is symmetrised first), eigenvalues sorted
/// descending.
pub fn eigh<T: Real>(m: &CMat<T>) -> Eigh<T> {
    let n = m.nrows();
    if n == 1 {
        return Eigh {
            values: vec![m[(0, 0)].re],
            vectors: CMat::identity(1, 1),
        };
    }
    let se = SymmetricEigen::new(hermitize(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| se.eigenvectors[(r, idx[k])]);
    Eigh { values, vectors }
}

/// Eigenvalues only, descending.
pub fn eigvalsh<T: Real>(m: &CMat<T>) -> Vec<T> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<T> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `f(M)` for Hermitian `M` via its spectrum.
pub fn hermitian_fn<T: Real>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let e = eigh(m);
    let n = m.nrows();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        let w = cr(f(e.values[k]));
        for r in 0..n {
            scaled[(r, k)] *= w;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Nearest isometry `Y (Y†Y)^{-1/2}` (polar factor) of a full-column-rank `Y`.
pub fn polar_isometry<T: Real>(y: &CMat<T>) -> CMat<T> {
    let gram = y.adjoint() * y;
    let inv_sqrt = hermitian_fn(&gram, |x| {
        let floor = T::eigen_floor();
        T::one() / if x > floor { x } else { floor }.sqrt()
    });
    y * inv_sqrt
}

/// `‖V†V − 1‖_max`.
pub fn isometry_defect<T: Real>(v: &CMat<T>) -> T {
    let g = v.adjoint() * v;
    let id = CMat::<T>::identity(g.nrows(), g.ncols());
    max_abs(&(g - id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cm(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMat<f64> {
        CMat::from_row_iterator(rows, cols, data.iter().map(|&(r, i)| C::new(r, i)))
    }

    #[test]
    fn offsets_row_major() {
        assert_eq!(offsets(&[2, 3], &[0]), vec![0, 3]);
        assert_eq!(offsets(&[2, 3], &[1]), vec![0, 1, 2]);
        assert_eq!(offsets(&[2, 3], &[1, 0]), vec![0, 3, 1, 4, 2, 5]);
    }

    #[test]
    fn partial_trace_of_kron_recovers_factor() {
        let a = cm(2, 2, &[(0.7, 0.0), (0.1, 0.2), (0.1, -0.2), (0.3, 0.0)]);
        let b = cm(3, 3, &[
            (0.5, 0.0), (0.0, 0.1), (0.0, 0.0),
            (0.0, -0.1), (0.25, 0.0), (0.05, 0.0),
            (0.0, 0.0), (0.05, 0.0), (0.25, 0.0),
        ]);
        let ab = a.kronecker(&b);
        let ra = partial_trace(&ab, &[2, 3], &[0]);
        let rb = partial_trace(&ab, &[2, 3], &[1]);
        assert_abs_diff_eq!(max_abs(&(ra - &a)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(max_abs(&(rb - &b)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn permute_swaps_kron_order() {
        let a = cm(2, 2, &[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let b = cm(3, 3, &(0..9).map(|k| (k as f64, 0.5)).collect::<Vec<_>>());
        let swapped = permute_matrix(&a.kronecker(&b), &[2, 3], &[1, 0]);
        assert_abs_diff_eq!(max_abs(&(swapped - b.kronecker(&a))), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_reconstructs_input() {
        let m = cm(3, 3, &[
            (2.0, 0.0), (0.3, 0.4), (0.0, -1.0),
            (0.3, -0.4), (1.0, 0.0), (0.2, 0.0),
            (0.0, 1.0), (0.2, 0.0), (-0.5, 0.0),
        ]);
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let d = CMat::from_diagonal(&DVector::from_iterator(3, e.values.iter().map(|&x| cr(x))));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(max_abs(&(back - m)) < 1e-9);
    }

    #[test]
    fn apply_on_matches_embedding() {
        let op = cm(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let v = CVec::from_iterator(6, (0..6).map(|k| C::new(k as f64, -(k as f64))));
        let direct = apply_on(&op, &v, &[3, 2], &[1]);
        let full = embed(&op, &[3, 2], 1) * &v;
        assert_abs_diff_eq!((direct - full).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn polar_returns_isometry() {
        let y = cm(3, 2, &[(1.0, 0.2), (0.0, 0.0), (0.5, 0.0), (1.0, -0.3), (0.1, 0.1), (0.0, 2.0)]);
        assert!(isometry_defect(&polar_isometry(&y)) < 1e-12);
    }
}
