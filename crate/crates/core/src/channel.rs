//! Quantum channels in Stinespring form and unilocal instruments.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::{cr, Real, C};
use crate::state::DensityOperator;

/// CPTP map `B(C^d_in) → B(C^d_out)` given by an isometry
/// `V: C^d_in → C^d_out ⊗ C^d_env`, output index `o·d_env + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel<T: Real> {
    d_in: usize,
    d_out: usize,
    d_env: usize,
    isometry: CMat<T>,
}

impl<T: Real> QuantumChannel<T> {
    pub fn new(d_in: usize, d_out: usize, d_env: usize, isometry: CMat<T>) -> Result<Self> {
        if d_in == 0 || d_out == 0 || d_env == 0 {
            return Err(Error::Shape("channel dimensions must be positive".into()));
        }
        if isometry.nrows() != d_out * d_env || isometry.ncols() != d_in {
            return Err(Error::Shape(format!(
                "isometry is {}x{}, expected {}x{}",
                isometry.nrows(),
                isometry.ncols(),
                d_out * d_env,
                d_in
            )));
        }
        let defect = linalg::isometry_defect(&isometry);
        if defect > T::state_tol() {
            return Err(Error::InvariantViolation(format!(
                "V†V deviates from identity by {defect:e}"
            )));
        }
        Ok(Self {
            d_in,
            d_out,
            d_env,
            isometry,
        })
    }

    pub(crate) fn from_parts(d_in: usize, d_out: usize, d_env: usize, isometry: CMat<T>) -> Self {
        Self {
            d_in,
            d_out,
            d_env,
            isometry,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_parts(d, d, 1, CMat::identity(d, d))
    }

    /// Discards the input and outputs a one-dimensional system.
    pub fn full_trace(d_in: usize) -> Self {
        Self::from_parts(d_in, 1, d_in, CMat::identity(d_in, d_in))
    }

    /// `ρ ↦ Tr(ρ)·σ`.
    pub fn replace_with(d_in: usize, sigma: &DensityOperator<T>) -> Self {
        let pairs = sigma.canonical_eigenpairs();
        let d_out = sigma.dim();
        let r = pairs.len();
        let d_env = r * d_in;
        let mut v = CMat::zeros(d_out * d_env, d_in);
        for (j, (lambda, vec)) in pairs.iter().enumerate() {
            let amp = cr(lambda.sqrt());
            for cidx in 0..d_in {
                let e = j * d_in + cidx;
                for o in 0..d_out {
                    v[(o * d_env + e, cidx)] = vec[o] * amp;
                }
            }
        }
        // eigenvalues are renormalised over the retained support
        let gram = v.adjoint() * &v;
        let scale = T::one() / gram[(0, 0)].re.sqrt();
        Self::from_parts(d_in, d_out, d_env, v * cr(scale))
    }

    /// Completely dephasing channel in the orthonormal basis given by the
    /// columns of `basis`.
    pub fn dephasing(basis: &CMat<T>) -> Result<Self> {
        let d = basis.nrows();
        if basis.ncols() != d {
            return Err(Error::Shape("dephasing basis must be square".into()));
        }
        let kraus: Vec<CMat<T>> = (0..d)
            .map(|k| {
                let col = basis.column(k);
                col * col.adjoint()
            })
            .collect();
        Self::from_kraus(&kraus)
    }

    /// Stinespring isometry from Kraus operators `K_j` (each `d_out × d_in`).
    pub fn from_kraus(kraus: &[CMat<T>]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Shape("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::Shape("Kraus operators differ in shape".into()));
        }
        let d_env = kraus.len();
        let v = CMat::from_fn(d_out * d_env, d_in, |row, col| {
            kraus[row % d_env][(row / d_env, col)]
        });
        Self::new(d_in, d_out, d_env, v)
    }

    /// Measure in the rows of the isometry `u` (`m × d_in`) and write the
    /// outcome into an `m`-dimensional classical flag; the environment keeps
    /// a copy of the flag.
    pub fn measure_and_flag(u: &CMat<T>) -> Result<Self> {
        let (m, d_in) = u.shape();
        let v = CMat::from_fn(m * m, d_in, |row, col| {
            let (o, e) = (row / m, row % m);
            if o == e {
                u[(o, col)]
            } else {
                C::new(T::zero(), T::zero())
            }
        });
        Self::new(d_in, m, m, v)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_env(&self) -> usize {
        self.d_env
    }

    pub fn isometry(&self) -> &CMat<T> {
        &self.isometry
    }

    /// Kraus operators `K_e = (1 ⊗ ⟨e|) V`.
    pub fn kraus(&self) -> Vec<CMat<T>> {
        (0..self.d_env)
            .map(|e| {
                CMat::from_fn(self.d_out, self.d_in, |o, c| {
                    self.isometry[(o * self.d_env + e, c)]
                })
            })
            .collect()
    }

    /// Action on a bare `d_in × d_in` matrix.
    pub fn apply_matrix(&self, rho: &CMat<T>) -> CMat<T> {
        let dilated = &self.isometry * rho * self.isometry.adjoint();
        linalg::partial_trace(&dilated, &[self.d_out, self.d_env], &[0])
    }
}

/// Collection of CP maps `E_k(ρ) = Σ_j K_{kj} ρ K_{kj}†` whose sum is trace
/// preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument<T: Real> {
    d_in: usize,
    d_out: usize,
    elements: Vec<Vec<CMat<T>>>,
}

impl<T: Real> Instrument<T> {
    pub fn new(elements: Vec<Vec<CMat<T>>>) -> Result<Self> {
        let (d_out, d_in) = elements
            .iter()
            .flatten()
            .next()
            .map(|k| k.shape())
            .ok_or_else(|| Error::Shape("instrument has no Kraus operators".into()))?;
        if elements.iter().flatten().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::Shape("instrument Kraus operators differ in shape".into()));
        }
        let sum = elements
            .iter()
            .flatten()
            .fold(CMat::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
        let defect = linalg::max_abs(&(sum - CMat::identity(d_in, d_in)));
        if defect > T::state_tol() {
            return Err(Error::InvariantViolation(format!(
                "instrument is not trace preserving (defect {defect:e})"
            )));
        }
        Ok(Self {
            d_in,
            d_out,
            elements,
        })
    }

    /// Projective measurement in the columns of the unitary `basis`.
    pub fn projective(basis: &CMat<T>) -> Result<Self> {
        let d = basis.nrows();
        let elements = (0..basis.ncols())
            .map(|k| {
                let col = basis.column(k);
                vec![col * col.adjoint()]
            })
            .collect::<Vec<_>>();
        if basis.ncols() != d {
            return Err(Error::Shape("projective basis must be square".into()));
        }
        Self::new(elements)
    }

    pub fn computational(d: usize) -> Self {
        Self::projective(&CMat::identity(d, d)).expect("computational basis is complete")
    }

    pub fn unitary(u: CMat<T>) -> Result<Self> {
        Self::new(vec![vec![u]])
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn elements(&self) -> &[Vec<CMat<T>>] {
        &self.elements
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn max_kraus(&self) -> usize {
        self.elements.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Stinespring isometry `A → A ⊗ A' ⊗ A''` of the instrument, with the
    /// outcome `k` written into `A'` and the Kraus index into `A''`:
    /// `V = Σ_{k,j} K_{kj} ⊗ |k⟩ ⊗ |j⟩`.
    pub fn dilation(&self) -> CMat<T> {
        let n_out = self.outcomes();
        let n_kraus = self.max_kraus();
        let mut v = CMat::zeros(self.d_out * n_out * n_kraus, self.d_in);
        for (k, kraus) in self.elements.iter().enumerate() {
            for (j, op) in kraus.iter().enumerate() {
                for o in 0..self.d_out {
                    let row = (o * n_out + k) * n_kraus + j;
                    for c in 0..self.d_in {
                        v[(row, c)] = op[(o, c)];
                    }
                }
            }
        }
        v
    }

    /// Like [`Self::dilation`], but `A''` stores the pair `(k, j)` so that
    /// tracing it out leaves `A'` classical:
    /// `V = Σ_{k,j} K_{kj} ⊗ |k⟩ ⊗ |k, j⟩`.
    pub fn flagged_dilation(&self) -> CMat<T> {
        let n_out = self.outcomes();
        let n_kraus = self.max_kraus();
        let m = n_out * n_kraus;
        let mut v = CMat::zeros(self.d_out * n_out * m, self.d_in);
        for (k, kraus) in self.elements.iter().enumerate() {
            for (j, op) in kraus.iter().enumerate() {
                for o in 0..self.d_out {
                    let row = (o * n_out + k) * m + k * n_kraus + j;
                    for c in 0..self.d_in {
                        v[(row, c)] = op[(o, c)];
                    }
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::SystemLayout;
    use crate::state::PureState;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> CMat<f64> {
        CMat::from_row_iterator(rows, cols, data.iter().map(|&x| cr(x)))
    }

    #[test]
    fn rejects_non_isometries() {
        let v = mat(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!(matches!(
            QuantumChannel::new(2, 2, 1, v),
            Err(Error::InvariantViolation(_))
        ));
        assert!(matches!(
            QuantumChannel::<f64>::new(2, 2, 1, mat(3, 2, &[0.0; 6])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn identity_channel_is_a_no_op() {
        let rho = DensityOperator::<f64>::random(SystemLayout::new([("A", 2), ("C", 3)]).unwrap(), 4, 8).unwrap();
        let out = rho.apply_channel(&QuantumChannel::identity(3), "C", "C").unwrap();
        assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn replacement_channel_outputs_product() {
        let rho = DensityOperator::<f64>::random(SystemLayout::new([("A", 2), ("C", 2)]).unwrap(), 3, 11).unwrap();
        let sigma = DensityOperator::<f64>::random(SystemLayout::single("E", 3).unwrap(), 2, 12).unwrap();
        let ch = QuantumChannel::replace_with(2, &sigma);
        let out = rho.apply_channel(&ch, "C", "E").unwrap();
        let expect = rho.partial_trace(&["A"]).unwrap().tensor(&sigma).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - expect.matrix())) < 1e-12);
    }

    #[test]
    fn dephasing_bell_gives_classical_correlation() {
        let bell = PureState::<f64>::maximally_entangled("A", "C", 2).unwrap().to_density();
        let ch = QuantumChannel::dephasing(&CMat::identity(2, 2)).unwrap();
        let out = bell.apply_channel(&ch, "C", "C").unwrap();
        let expect = mat(4, 4, &[
            0.5, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.5,
        ]);
        assert!(linalg::max_abs(&(out.matrix() - expect)) < 1e-14);
        let a = out.partial_trace(&["A"]).unwrap();
        assert!(linalg::max_abs(&(a.matrix() - mat(2, 2, &[0.5, 0.0, 0.0, 0.5]))) < 1e-14);
    }

    #[test]
    fn kraus_round_trip() {
        let g = 0.3f64;
        let k0 = mat(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
        let k1 = mat(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]);
        let ch = QuantumChannel::from_kraus(&[k0.clone(), k1.clone()]).unwrap();
        let back = ch.kraus();
        assert!(linalg::max_abs(&(&back[0] - &k0)) < 1e-15);
        assert!(linalg::max_abs(&(&back[1] - &k1)) < 1e-15);
    }

    #[test]
    fn projective_instrument_on_bell() {
        let bell = PureState::<f64>::maximally_entangled("A", "B", 2).unwrap().to_density();
        let outs = bell.apply_instrument(&Instrument::computational(2), "A").unwrap();
        assert_eq!(outs.len(), 2);
        for (k, o) in outs.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-14);
            let st = o.state.as_ref().unwrap();
            let expect = DensityOperator::basis_projector(bell.layout().clone(), 3 * k).unwrap();
            assert!(linalg::max_abs(&(st.matrix() - expect.matrix())) < 1e-14);
        }
    }

    #[test]
    fn unitary_instrument_rotates() {
        let x = mat(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let rho = DensityOperator::<f64>::basis_projector(SystemLayout::single("A", 2).unwrap(), 0).unwrap();
        let outs = rho.apply_instrument(&Instrument::unitary(x).unwrap(), "A").unwrap();
        assert!((outs[0].probability - 1.0).abs() < 1e-15);
        let st = outs[0].state.as_ref().unwrap();
        assert!((st.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplitude_damping_split_probabilities() {
        // I/2 under {K0}, {K1}: p_1 = Tr K1 (I/2) K1† = γ/2, p_0 = 1 − γ/2
        let g = 0.36f64;
        let k0 = mat(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
        let k1 = mat(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]);
        let ins = Instrument::new(vec![vec![k0], vec![k1]]).unwrap();
        let rho = DensityOperator::<f64>::maximally_mixed(SystemLayout::single("A", 2).unwrap());
        let outs = rho.apply_instrument(&ins, "A").unwrap();
        assert!((outs[0].probability - (1.0 - g / 2.0)).abs() < 1e-14);
        assert!((outs[1].probability - g / 2.0).abs() < 1e-14);
        let s1 = outs[1].state.as_ref().unwrap();
        assert!((s1.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_trace_preserving_instrument_is_rejected() {
        let half = mat(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!(matches!(
            Instrument::new(vec![vec![half]]),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn dilation_is_isometric() {
        let g = 0.2f64;
        let k0 = mat(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
        let k1 = mat(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]);
        let ins = Instrument::new(vec![vec![k0, k1], vec![]]).unwrap();
        assert!(linalg::isometry_defect(&ins.dilation()) < 1e-14);
    }
}
