//! Density operators and pure states over a [`SystemLayout`].

use std::cmp::Ordering;

use nalgebra::ComplexField;

use crate::channel::{Instrument, QuantumChannel};
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMat, CVec};
use crate::rng;
use crate::scalar::{cr, Real, C};

/// Hermitian, positive semidefinite, unit-trace matrix over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    layout: SystemLayout,
    matrix: CMat<T>,
}

/// Unit vector over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    layout: SystemLayout,
    vector: CVec<T>,
}

/// One outcome of an instrument: its probability and, when that probability
/// is nonzero, the normalised post-measurement state.
#[derive(Debug, Clone)]
pub struct InstrumentOutcome<T: Real> {
    pub probability: T,
    pub state: Option<DensityOperator<T>>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates Hermiticity, trace and positivity at [`Real::state_tol`].
    pub fn new(layout: SystemLayout, matrix: CMat<T>) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but layout {} has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                layout,
                d
            )));
        }
        let tol = T::state_tol();
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > tol {
            return Err(Error::InvariantViolation(format!(
                "not Hermitian (max deviation {dev:e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvariantViolation(format!(
                "trace is {}{:+}i, expected 1",
                tr.re, tr.im
            )));
        }
        let matrix = linalg::hermitize(&matrix);
        let min = linalg::eigvalsh(&matrix).last().copied().unwrap_or_else(T::zero);
        if min < -tol {
            return Err(Error::InvariantViolation(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { layout, matrix })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts(layout: SystemLayout, matrix: CMat<T>) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self {
            layout,
            matrix: linalg::hermitize(&matrix),
        }
    }

    /// Normalises a PSD matrix to unit trace, then validates.
    pub fn from_unnormalized(layout: SystemLayout, matrix: CMat<T>) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if tr <= T::zero() {
            return Err(Error::InvariantViolation("nonpositive trace".into()));
        }
        Self::new(layout, matrix * cr(T::one() / tr))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        let m = CMat::identity(d, d) * cr(T::one() / T::from_usize(d).unwrap());
        Self { layout, matrix: m }
    }

    /// `|index⟩⟨index|` in the computational basis.
    pub fn basis_projector(layout: SystemLayout, index: usize) -> Result<Self> {
        Ok(PureState::basis(layout, index)?.to_density())
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(layout: SystemLayout, probs: &[T]) -> Result<Self> {
        if probs.len() != layout.total_dim() {
            return Err(Error::Shape("diagonal length does not match layout".into()));
        }
        let d = probs.len();
        let m = CMat::from_fn(d, d, |i, j| if i == j { cr(probs[i]) } else { C::new(T::zero(), T::zero()) });
        Self::new(layout, m)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues (descending) with tiny negative values clipped to zero.
    pub fn spectrum(&self) -> Vec<T> {
        linalg::eigvalsh(&self.matrix)
            .into_iter()
            .map(|x| if x < T::zero() { T::zero() } else { x })
            .collect()
    }

    /// Number of eigenvalues above [`Real::eigen_floor`].
    pub fn rank(&self) -> usize {
        let floor = T::eigen_floor();
        self.spectrum().into_iter().filter(|&x| x > floor).count()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Reduced state on `keep`, in original relative order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Shape("partial trace must keep at least one subsystem".into()));
        }
        let pos = self.layout.positions(keep)?;
        let matrix = linalg::partial_trace(&self.matrix, &self.layout.dims(), &pos);
        Ok(Self {
            layout: self.layout.select(&pos),
            matrix,
        })
    }

    /// Trace out the listed subsystems, keeping everything else.
    pub fn trace_out<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let drop = self.layout.positions(labels)?;
        let keep: Vec<&str> = self
            .layout
            .labels()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, l)| l)
            .collect();
        self.partial_trace(&keep)
    }

    /// Reorder subsystems; `order` must list every label exactly once.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.layout.len() {
            return Err(Error::Shape("permutation must name every subsystem".into()));
        }
        let mut pos = Vec::with_capacity(order.len());
        for l in order {
            let p = self.layout.position(l.as_ref())?;
            if pos.contains(&p) {
                return Err(Error::LabelClash(l.as_ref().to_string()));
            }
            pos.push(p);
        }
        let matrix = linalg::permute_matrix(&self.matrix, &self.layout.dims(), &pos);
        Ok(Self {
            layout: self.layout.select(&pos),
            matrix,
        })
    }

    pub fn relabel(&self, label: &str, new_label: &str) -> Result<Self> {
        Ok(Self {
            layout: self.layout.relabel(label, new_label)?,
            matrix: self.matrix.clone(),
        })
    }

    /// Merge adjacent subsystems `labels` (which must be contiguous and in
    /// layout order) into one subsystem called `new_label`.
    pub fn merge<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<Self> {
        let pos: Vec<usize> = labels
            .iter()
            .map(|l| self.layout.position(l.as_ref()))
            .collect::<Result<_>>()?;
        if pos.is_empty() || pos.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::Shape("merged subsystems must be contiguous and ordered".into()));
        }
        let dim = pos.iter().map(|&p| self.layout.systems()[p].dim).product();
        let mut systems = self.layout.systems().to_vec();
        systems.splice(
            pos[0]..=pos[pos.len() - 1],
            [crate::layout::Subsystem {
                label: new_label.to_string(),
                dim,
            }],
        );
        Ok(Self {
            layout: SystemLayout::from_subsystems(systems)?,
            matrix: self.matrix.clone(),
        })
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, lambda: T, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::Shape("mixing states over different layouts".into()));
        }
        if lambda < T::zero() || lambda > T::one() {
            return Err(Error::Domain(format!("mixing weight {lambda} outside [0,1]")));
        }
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * cr(lambda) + &other.matrix * cr(T::one() - lambda),
        })
    }

    /// Canonical eigen-decomposition used for purifications and eigen-ensembles:
    /// eigenpairs with eigenvalue above the floor, sorted by descending
    /// eigenvalue, each vector phase-normalised so its first non-negligible
    /// component is real and positive. Ties are broken by the first differing
    /// component's real part (larger first).
    pub fn canonical_eigenpairs(&self) -> Vec<(T, CVec<T>)> {
        let e = linalg::eigh(&self.matrix);
        let floor = T::eigen_floor();
        let d = self.dim();
        let mut pairs: Vec<(T, CVec<T>)> = (0..d)
            .filter(|&k| e.values[k] > floor)
            .map(|k| (e.values[k], phase_normalize(e.vectors.column(k).into_owned())))
            .collect();
        pairs.sort_by(|(la, va), (lb, vb)| {
            if (*la - *lb).abs() > floor {
                return lb.partial_cmp(la).unwrap_or(Ordering::Equal);
            }
            for (x, y) in va.iter().zip(vb.iter()) {
                if (x.re - y.re).abs() > floor {
                    return y.re.partial_cmp(&x.re).unwrap_or(Ordering::Equal);
                }
            }
            Ordering::Equal
        });
        pairs
    }

    /// `d × r` matrix whose columns are `√λ_i |v_i⟩` for the canonical eigenpairs;
    /// read as a vector on `layout ⊗ C` it is the canonical purification.
    pub fn purification_matrix(&self) -> CMat<T> {
        let pairs = self.canonical_eigenpairs();
        let d = self.dim();
        CMat::from_fn(d, pairs.len(), |r, k| pairs[k].1[r] * cr(pairs[k].0.sqrt()))
    }

    /// Canonical purification onto a new subsystem of dimension `rank(ρ)`.
    pub fn purify(&self, new_label: &str) -> Result<PureState<T>> {
        let m = self.purification_matrix();
        let r = m.ncols();
        let layout = self.layout.with(new_label, r)?;
        let d = self.dim();
        let mut v = CVec::from_fn(d * r, |i, _| m[(i / r, i % r)]);
        let n = v.norm();
        v /= cr(n);
        Ok(PureState { layout, vector: v })
    }

    /// `‖ρ − σ‖₁`, the sum of absolute eigenvalues of the difference.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        self.same_layout(other)?;
        let diff = &self.matrix - &other.matrix;
        Ok(linalg::eigvalsh(&diff)
            .into_iter()
            .fold(T::zero(), |acc, x| acc + x.abs()))
    }

    /// Uhlmann (root) fidelity `Tr √(√ρ σ √ρ)`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        self.same_layout(other)?;
        let sqrt_rho = linalg::hermitian_fn(&self.matrix, clip_sqrt);
        let inner = &sqrt_rho * &other.matrix * &sqrt_rho;
        let f = linalg::eigvalsh(&inner)
            .into_iter()
            .fold(T::zero(), |acc, x| acc + clip_sqrt(x));
        Ok(if f > T::one() { T::one() } else { f })
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Shape(format!(
                "layout mismatch: {} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Apply `channel` to subsystem `target`, which is replaced by `new_label`
    /// of dimension `d_out`. Realised as Stinespring conjugation followed by a
    /// partial trace over the environment.
    pub fn apply_channel(
        &self,
        channel: &QuantumChannel<T>,
        target: &str,
        new_label: &str,
    ) -> Result<Self> {
        let p = self.layout.position(target)?;
        let dims = self.layout.dims();
        if dims[p] != channel.d_in() {
            return Err(Error::Shape(format!(
                "channel expects input dimension {} but {} has dimension {}",
                channel.d_in(),
                target,
                dims[p]
            )));
        }
        let layout = self.layout.replace(target, new_label, channel.d_out())?;
        let w = linalg::embed(channel.isometry(), &dims, p);
        let dilated = &w * &self.matrix * w.adjoint();
        let mut dd = dims.clone();
        dd[p] = channel.d_out();
        dd.insert(p + 1, channel.d_env());
        let keep: Vec<usize> = (0..dd.len()).filter(|&i| i != p + 1).collect();
        let matrix = linalg::partial_trace(&dilated, &dd, &keep);
        Ok(Self::from_parts(layout, matrix))
    }

    /// Apply an instrument to `target`; returns `(p_k, ρ_k)` per outcome.
    pub fn apply_instrument(
        &self,
        instrument: &Instrument<T>,
        target: &str,
    ) -> Result<Vec<InstrumentOutcome<T>>> {
        let unnormalized = self.instrument_branches(instrument, target)?;
        let floor = T::eigen_floor();
        Ok(unnormalized
            .into_iter()
            .map(|branch| {
                let p = linalg::trace(branch.matrix()).re;
                let p = if p < T::zero() { T::zero() } else { p };
                let state = if p > floor {
                    Some(Self::from_parts(
                        branch.layout.clone(),
                        branch.matrix * cr(T::one() / p),
                    ))
                } else {
                    None
                };
                InstrumentOutcome {
                    probability: p,
                    state,
                }
            })
            .collect())
    }

    /// Unnormalised `E_k(ρ)` for each instrument element (trace = `p_k`).
    pub fn instrument_branches(
        &self,
        instrument: &Instrument<T>,
        target: &str,
    ) -> Result<Vec<UnnormalizedBranch<T>>> {
        let p = self.layout.position(target)?;
        let dims = self.layout.dims();
        if dims[p] != instrument.d_in() {
            return Err(Error::Shape(format!(
                "instrument expects dimension {} but {} has dimension {}",
                instrument.d_in(),
                target,
                dims[p]
            )));
        }
        let layout = self.layout.replace(target, target, instrument.d_out())?;
        Ok(instrument
            .elements()
            .iter()
            .map(|kraus| {
                let d_out = layout.total_dim();
                let mut acc = CMat::zeros(d_out, d_out);
                for k in kraus {
                    let w = linalg::embed(k, &dims, p);
                    acc += &w * &self.matrix * w.adjoint();
                }
                UnnormalizedBranch {
                    layout: layout.clone(),
                    matrix: acc,
                }
            })
            .collect())
    }

    /// Deterministic random state of the given rank: partial trace of a
    /// Gaussian pure state on `layout ⊗ C^rank`.
    pub fn random(layout: SystemLayout, rank: usize, seed: u64) -> Result<Self> {
        let d = layout.total_dim();
        if rank == 0 || rank > d {
            return Err(Error::Shape(format!(
                "rank {rank} outside 1..={d} for layout {layout}"
            )));
        }
        let mut r = rng::seeded(seed, 0);
        let g = rng::gaussian_matrix::<T>(&mut r, d, rank);
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m).re;
        Ok(Self::from_parts(layout, m * cr(T::one() / tr)))
    }
}

/// `E_k(ρ)` before normalisation.
#[derive(Debug, Clone)]
pub struct UnnormalizedBranch<T: Real> {
    pub layout: SystemLayout,
    pub matrix: CMat<T>,
}

impl<T: Real> UnnormalizedBranch<T> {
    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }
}

fn clip_sqrt<T: Real>(x: T) -> T {
    if x > T::zero() {
        x.sqrt()
    } else {
        T::zero()
    }
}

fn phase_normalize<T: Real>(mut v: CVec<T>) -> CVec<T> {
    let floor = T::lit(1e-8);
    let max = v.iter().fold(T::zero(), |a, z| if z.modulus() > a { z.modulus() } else { a });
    if let Some(z) = v.iter().find(|z| z.modulus() > max * floor).copied() {
        let phase = z.conj() / cr(z.modulus());
        v *= phase;
    }
    v
}

impl<T: Real> PureState<T> {
    pub fn new(layout: SystemLayout, vector: CVec<T>) -> Result<Self> {
        if vector.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "vector has length {} but layout {} has dimension {}",
                vector.len(),
                layout,
                layout.total_dim()
            )));
        }
        let n = vector.norm();
        if (n - T::one()).abs() > T::state_tol() {
            return Err(Error::InvariantViolation(format!("norm is {n}, expected 1")));
        }
        Ok(Self { layout, vector })
    }

    /// Normalises `vector` before validating.
    pub fn normalized(layout: SystemLayout, vector: CVec<T>) -> Result<Self> {
        let n = vector.norm();
        if n <= T::zero() {
            return Err(Error::InvariantViolation("zero vector".into()));
        }
        Self::new(layout, vector / cr(n))
    }

    /// Builds from real amplitudes, normalising.
    pub fn from_real(layout: SystemLayout, amplitudes: &[f64]) -> Result<Self> {
        let v = CVec::from_iterator(amplitudes.len(), amplitudes.iter().map(|&a| cr(T::lit(a))));
        Self::normalized(layout, v)
    }

    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::Shape(format!("basis index {index} out of range {d}")));
        }
        let mut v = CVec::zeros(d);
        v[index] = cr(T::one());
        Ok(Self { layout, vector: v })
    }

    /// Gaussian (Haar) random pure state.
    pub fn random(layout: SystemLayout, seed: u64) -> Self {
        let mut r = rng::seeded(seed, 0);
        let g = rng::gaussian_matrix::<T>(&mut r, layout.total_dim(), 1);
        let v: CVec<T> = g.column(0).into_owned();
        let n = v.norm();
        Self {
            layout,
            vector: v / cr(n),
        }
    }

    /// Maximally entangled `Σ_i |ii⟩/√s` on two `dim`-dimensional systems.
    pub fn maximally_entangled(a: &str, b: &str, dim: usize) -> Result<Self> {
        let layout = SystemLayout::new([(a, dim), (b, dim)])?;
        let mut v = CVec::zeros(dim * dim);
        let amp = cr(T::one() / T::from_usize(dim).unwrap().sqrt());
        for i in 0..dim {
            v[i * dim + i] = amp;
        }
        Ok(Self { layout, vector: v })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn vector(&self) -> &CVec<T> {
        &self.vector
    }

    pub fn to_density(&self) -> DensityOperator<T> {
        let m = &self.vector * self.vector.adjoint();
        DensityOperator::from_parts(self.layout.clone(), m)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            vector: self.vector.kronecker(&other.vector),
        })
    }

    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator<T>> {
        let pos = self.layout.positions(keep)?;
        let m = linalg::reduced_from_pure(&self.vector, &self.layout.dims(), &pos);
        Ok(DensityOperator::from_parts(self.layout.select(&pos), m))
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &Self) -> Result<T> {
        if self.layout != other.layout {
            return Err(Error::Shape("layout mismatch".into()));
        }
        Ok(self.vector.dotc(&other.vector).modulus())
    }

    /// True when the state factorises across the first subsystem versus the
    /// rest (Schmidt rank one within `tol`).
    pub fn is_product(&self, tol: T) -> bool {
        if self.layout.len() < 2 {
            return true;
        }
        let first = self.layout.labels()[0].to_string();
        match self.reduced(&[first]) {
            Ok(r) => r.spectrum().first().is_some_and(|&top| top >= T::one() - tol),
            Err(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(label: &str) -> SystemLayout {
        SystemLayout::single(label, 2).unwrap()
    }

    fn bell() -> PureState<f64> {
        PureState::maximally_entangled("A", "B", 2).unwrap()
    }

    /// `(|jk⟩ − |kj⟩)/√2` on two qutrits, 0-indexed.
    fn singlet(j: usize, k: usize) -> CVec<f64> {
        let mut v = CVec::zeros(9);
        v[3 * j + k] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v[3 * k + j] = cr(-std::f64::consts::FRAC_1_SQRT_2);
        v
    }

    fn antisym() -> DensityOperator<f64> {
        let m = [singlet(1, 2), singlet(2, 0), singlet(0, 1)]
            .iter()
            .fold(CMat::zeros(9, 9), |acc, v| acc + v * v.adjoint() * cr(1.0 / 3.0));
        DensityOperator::new(SystemLayout::new([("A", 3), ("B", 3)]).unwrap(), m).unwrap()
    }

    fn close(a: &DensityOperator<f64>, b: &DensityOperator<f64>, tol: f64) -> bool {
        a.layout() == b.layout() && linalg::max_abs(&(a.matrix() - b.matrix())) <= tol
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let l = qubit("A");
        let not_unit = CMat::identity(2, 2);
        assert!(matches!(
            DensityOperator::<f64>::new(l.clone(), not_unit),
            Err(Error::InvariantViolation(_))
        ));
        let negative = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.5), cr(-0.5)]));
        assert!(matches!(
            DensityOperator::<f64>::new(l.clone(), negative),
            Err(Error::InvariantViolation(_))
        ));
        let mut non_herm = CMat::identity(2, 2) * cr(0.5);
        non_herm[(0, 1)] = cr(0.1);
        assert!(DensityOperator::<f64>::new(l.clone(), non_herm).is_err());
        assert!(matches!(
            DensityOperator::<f64>::new(l, CMat::identity(3, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clipped() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0 + 5e-11), cr(-5e-11)]));
        let rho = DensityOperator::<f64>::new(qubit("A"), m).unwrap();
        assert!(rho.spectrum().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn tensor_of_mixed_and_of_projectors() {
        let a = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        let b = DensityOperator::<f64>::maximally_mixed(qubit("B"));
        let ab = a.tensor(&b).unwrap();
        let expect = DensityOperator::maximally_mixed(SystemLayout::new([("A", 2), ("B", 2)]).unwrap());
        assert!(close(&ab, &expect, 1e-15));

        let p0 = DensityOperator::<f64>::basis_projector(qubit("A"), 0).unwrap();
        let p1 = DensityOperator::<f64>::basis_projector(qubit("B"), 1).unwrap();
        let p01 = DensityOperator::basis_projector(SystemLayout::new([("A", 2), ("B", 2)]).unwrap(), 1).unwrap();
        assert!(close(&p0.tensor(&p1).unwrap(), &p01, 0.0));
        assert!(matches!(p0.tensor(&p0), Err(Error::LabelClash(_))));
    }

    #[test]
    fn tensor_of_two_bells_is_rank_one() {
        let b1 = bell().to_density();
        let b2 = PureState::<f64>::maximally_entangled("A'", "B'", 2).unwrap().to_density();
        let t = b1.tensor(&b2).unwrap();
        assert_eq!(t.dim(), 16);
        let spec = t.spectrum();
        assert!((spec[0] - 1.0).abs() < 1e-12);
        assert!(spec[1..].iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn partial_traces() {
        let rho = bell().to_density();
        let a = rho.partial_trace(&["A"]).unwrap();
        assert!(close(&a, &DensityOperator::maximally_mixed(qubit("A")), 1e-15));
        assert!(matches!(rho.partial_trace(&["Q"]), Err(Error::UnknownSystem(_))));

        let sigma = DensityOperator::<f64>::random(qubit("E"), 2, 3).unwrap();
        let ext = rho.tensor(&sigma).unwrap();
        assert!(close(&ext.partial_trace(&["A", "B"]).unwrap(), &rho, 1e-14));

        let anti = antisym();
        let ra = anti.partial_trace(&["A"]).unwrap();
        assert!(close(&ra, &DensityOperator::maximally_mixed(SystemLayout::single("A", 3).unwrap()), 1e-14));
    }

    #[test]
    fn purification_of_mixed_pure_and_antisymmetric() {
        let mixed = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        let p = mixed.purify("C").unwrap();
        assert_eq!(p.layout().dim_of("C").unwrap(), 2);
        assert!(close(&p.reduced(&["A"]).unwrap(), &mixed, 1e-12));
        let bell_like = p.reduced(&["A", "C"]).unwrap();
        assert!((bell_like.spectrum()[0] - 1.0).abs() < 1e-12);

        let pure = bell().to_density();
        let pp = pure.purify("C").unwrap();
        assert_eq!(pp.layout().dim_of("C").unwrap(), 1);

        let anti = antisym();
        assert_eq!(anti.rank(), 3);
        let pa = anti.purify("C").unwrap();
        assert_eq!(pa.layout().dim_of("C").unwrap(), 3);
        assert!(close(&pa.reduced(&["A", "B"]).unwrap(), &anti, 1e-9));
    }

    #[test]
    fn trace_distance_and_fidelity_examples() {
        let p0 = DensityOperator::<f64>::basis_projector(qubit("A"), 0).unwrap();
        let p1 = DensityOperator::<f64>::basis_projector(qubit("A"), 1).unwrap();
        let mixed = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        assert!(p0.trace_distance(&p0).unwrap().abs() < 1e-15);
        assert!((p0.trace_distance(&p1).unwrap() - 2.0).abs() < 1e-14);
        assert!((mixed.trace_distance(&p0).unwrap() - 1.0).abs() < 1e-14);
        assert!((p0.fidelity(&p0).unwrap() - 1.0).abs() < 1e-12);
        assert!(p0.fidelity(&p1).unwrap().abs() < 1e-12);
        assert!((mixed.fidelity(&p0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let other = DensityOperator::<f64>::maximally_mixed(qubit("B"));
        assert!(matches!(mixed.trace_distance(&other), Err(Error::Shape(_))));
        assert!(matches!(mixed.fidelity(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        let l = SystemLayout::new([("A", 3)]).unwrap();
        let x = PureState::<f64>::random(l.clone(), 1);
        let y = PureState::<f64>::random(l, 2);
        let f = x.to_density().fidelity(&y.to_density()).unwrap();
        assert!((f - x.overlap(&y).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn random_state_rank_and_determinism() {
        let l = SystemLayout::new([("A", 2), ("B", 3)]).unwrap();
        let r1 = DensityOperator::<f64>::random(l.clone(), 1, 9).unwrap();
        assert_eq!(r1.rank(), 1);
        let a = DensityOperator::<f64>::random(l.clone(), 3, 42).unwrap();
        let b = DensityOperator::<f64>::random(l.clone(), 3, 42).unwrap();
        assert_eq!(a, b);
        let full = DensityOperator::<f64>::random(l.clone(), 6, 5).unwrap();
        assert!(*full.spectrum().last().unwrap() > 0.0);
        assert!(DensityOperator::new(l.clone(), full.matrix().clone()).is_ok());
        assert!(matches!(DensityOperator::<f64>::random(l, 7, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn permute_and_merge() {
        let a = DensityOperator::<f64>::random(qubit("A"), 2, 1).unwrap();
        let b = DensityOperator::<f64>::random(SystemLayout::single("B", 3).unwrap(), 3, 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        assert!(close(&ab.permute(&["B", "A"]).unwrap(), &ba, 1e-15));
        let merged = ab.merge(&["A", "B"], "AB").unwrap();
        assert_eq!(merged.layout().dims(), vec![6]);
        assert!(ab.merge(&["B", "A"], "X").is_err());
    }

    #[test]
    fn single_precision_states_validate() {
        let rho = DensityOperator::<f32>::random(SystemLayout::new([("A", 2), ("B", 2)]).unwrap(), 2, 4).unwrap();
        assert!(DensityOperator::new(rho.layout().clone(), rho.matrix().clone()).is_ok());
        let p = rho.purify("C").unwrap();
        let back = p.reduced(&["A", "B"]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - rho.matrix())) < 1e-5);
    }
}
