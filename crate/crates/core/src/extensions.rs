//! Extensions `ρ^{ABE}` of a bipartite state and the constructions that build
//! them: channels on the purifying system, flagged ensembles, convex mixing
//! and tensor products.

use crate::channel::QuantumChannel;
use crate::entropy;
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMat, CVec};
use crate::scalar::{cr, Real, C};
use crate::state::{DensityOperator, PureState};

/// A state together with the labels playing the roles `A`, `B` and `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension<T: Real> {
    state: DensityOperator<T>,
    a: Vec<String>,
    b: Vec<String>,
    e: Vec<String>,
}

fn owned<S: AsRef<str>>(v: &[S]) -> Vec<String> {
    v.iter().map(|s| s.as_ref().to_string()).collect()
}

impl<T: Real> Extension<T> {
    /// The three label groups must be disjoint and together cover the layout.
    pub fn new<S: AsRef<str>>(state: DensityOperator<T>, a: &[S], b: &[S], e: &[S]) -> Result<Self> {
        let (a, b, e) = (owned(a), owned(b), owned(e));
        if a.is_empty() || b.is_empty() {
            return Err(Error::Shape("extension needs nonempty A and B".into()));
        }
        let all: Vec<&String> = a.iter().chain(&b).chain(&e).collect();
        let pos = state.layout().positions(&all)?;
        if pos.len() != state.layout().len() {
            return Err(Error::Shape(format!(
                "labels do not cover layout {}",
                state.layout()
            )));
        }
        Ok(Self { state, a, b, e })
    }

    pub fn state(&self) -> &DensityOperator<T> {
        &self.state
    }

    pub fn a(&self) -> &[String] {
        &self.a
    }

    pub fn b(&self) -> &[String] {
        &self.b
    }

    pub fn e(&self) -> &[String] {
        &self.e
    }

    /// `I(A;B|E)` of the extension.
    pub fn cmi(&self) -> T {
        entropy::conditional_mutual_information(&self.state, &self.a, &self.b, &self.e)
            .expect("extension labels validated at construction")
    }

    pub fn half_cmi(&self) -> T {
        self.cmi() * T::lit(0.5)
    }

    /// The extended state `Tr_E ρ^{ABE}`.
    pub fn parent(&self) -> DensityOperator<T> {
        let keep: Vec<&String> = self.a.iter().chain(&self.b).collect();
        self.state
            .partial_trace(&keep)
            .expect("extension labels validated at construction")
    }

    /// Max-abs deviation between `Tr_E ρ^{ABE}` and `target`.
    pub fn marginal_deviation(&self, target: &DensityOperator<T>) -> Result<T> {
        let p = self.parent();
        if p.layout() != target.layout() {
            return Err(Error::Shape(format!(
                "extension marginal has layout {} but target has {}",
                p.layout(),
                target.layout()
            )));
        }
        Ok(linalg::max_abs(&(p.matrix() - target.matrix())))
    }

    /// Fails unless the extension reproduces `target` within 1e-9.
    pub fn validate_against(&self, target: &DensityOperator<T>) -> Result<()> {
        let dev = self.marginal_deviation(target)?;
        if dev > T::identity_tol() {
            return Err(Error::InvariantViolation(format!(
                "Tr_E of extension differs from parent by {dev:e}"
            )));
        }
        Ok(())
    }
}

/// Weighted pure-state decomposition `Σ p_k |Ψ_k⟩⟨Ψ_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Real> {
    entries: Vec<(T, PureState<T>)>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(entries: Vec<(T, PureState<T>)>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvariantViolation("empty ensemble".into()))?;
        let layout = first.1.layout().clone();
        let mut total = T::zero();
        for (p, s) in &entries {
            if !(*p > T::zero() && *p <= T::one() + T::state_tol()) {
                return Err(Error::InvariantViolation(format!("ensemble weight {p} outside (0,1]")));
            }
            if s.layout() != &layout {
                return Err(Error::InvariantViolation("ensemble members over different layouts".into()));
            }
            total += *p;
        }
        if (total - T::one()).abs() > T::state_tol() {
            return Err(Error::InvariantViolation(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Eigen-decomposition of `rho` as an ensemble (canonical ordering).
    pub fn eigen(rho: &DensityOperator<T>) -> Result<Self> {
        let pairs = rho.canonical_eigenpairs();
        let total = pairs.iter().fold(T::zero(), |a, (l, _)| a + *l);
        let entries = pairs
            .into_iter()
            .map(|(l, v)| Ok((l / total, PureState::normalized(rho.layout().clone(), v)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(T, PureState<T>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn layout(&self) -> &SystemLayout {
        self.entries[0].1.layout()
    }

    pub fn average(&self) -> DensityOperator<T> {
        let d = self.layout().total_dim();
        let m = self.entries.iter().fold(CMat::zeros(d, d), |acc, (p, s)| {
            acc + s.vector() * s.vector().adjoint() * cr(*p)
        });
        DensityOperator::from_parts(self.layout().clone(), m)
    }

    /// Fails unless the ensemble averages to `target` within 1e-9.
    pub fn validate_against(&self, target: &DensityOperator<T>) -> Result<()> {
        if self.layout() != target.layout() {
            return Err(Error::Shape("ensemble and target layouts differ".into()));
        }
        let dev = linalg::max_abs(&(self.average().matrix() - target.matrix()));
        if dev > T::identity_tol() {
            return Err(Error::InvariantViolation(format!(
                "ensemble average differs from target by {dev:e}"
            )));
        }
        Ok(())
    }

    /// `Σ_k p_k S(A)_{Ψ_k}` with `A` the first subsystem.
    pub fn average_entanglement(&self) -> T {
        let a = self.layout().labels()[0].to_string();
        self.entries.iter().fold(T::zero(), |acc, (p, s)| {
            let ra = s.reduced(&[a.as_str()]).expect("label from layout");
            acc + *p * entropy::von_neumann_entropy(&ra)
        })
    }
}

pub(crate) fn bipartite_labels(layout: &SystemLayout) -> Result<(String, String)> {
    if layout.len() != 2 {
        return Err(Error::Shape(format!(
            "expected a bipartite layout with two subsystems, got {layout}"
        )));
    }
    let l = layout.labels();
    Ok((l[0].to_string(), l[1].to_string()))
}

/// Pure state on `AB ⊗ E ⊗ F` obtained by applying the Stinespring isometry
/// `v: C → E⊗F` to the purification matrix `psi` (`d_AB × d_C`). Index order
/// is `(ab, e, f)`.
pub(crate) fn dilate_purification<T: Real>(psi: &CMat<T>, v: &CMat<T>) -> CVec<T> {
    let phi = psi * v.transpose();
    let (rows, cols) = phi.shape();
    CVec::from_fn(rows * cols, |i, _| phi[(i / cols, i % cols)])
}

/// `(id ⊗ Λ)|Ψ⟩⟨Ψ|` for the canonical purification `|Ψ⟩^{ABC}` of `rho`, with
/// `Λ: C → E` and `E` labelled `env_label`.
pub fn extend_via_channel<T: Real>(
    rho: &DensityOperator<T>,
    channel: &QuantumChannel<T>,
    env_label: &str,
) -> Result<Extension<T>> {
    let (a, b) = bipartite_labels(rho.layout())?;
    let psi = rho.purification_matrix();
    if channel.d_in() != psi.ncols() {
        return Err(Error::Shape(format!(
            "channel input dimension {} differs from purifying dimension {}",
            channel.d_in(),
            psi.ncols()
        )));
    }
    let layout = rho.layout().with(env_label, channel.d_out())?;
    let phi = dilate_purification(&psi, channel.isometry());
    let dims = [rho.dim(), channel.d_out(), channel.d_env()];
    let m = linalg::reduced_from_pure(&phi, &dims, &[0, 1]);
    let state = DensityOperator::from_parts(layout, m);
    Extension::new(state, &[a], &[b], &[env_label.to_string()])
}

/// `Σ_k p_k |Ψ_k⟩⟨Ψ_k| ⊗ |k⟩⟨k|^E` in the computational flag basis.
pub fn flag_extension<T: Real>(ensemble: &Ensemble<T>, flag_label: &str) -> Result<Extension<T>> {
    let (a, b) = bipartite_labels(ensemble.layout())?;
    let m = ensemble.len();
    let d = ensemble.layout().total_dim();
    let layout = ensemble.layout().with(flag_label, m)?;
    let mut mat = CMat::zeros(d * m, d * m);
    for (k, (p, s)) in ensemble.entries().iter().enumerate() {
        let v = s.vector();
        for i in 0..d {
            for j in 0..d {
                mat[(i * m + k, j * m + k)] = v[i] * v[j].conj() * cr(*p);
            }
        }
    }
    let state = DensityOperator::from_parts(layout, mat);
    Extension::new(state, &[a], &[b], &[flag_label.to_string()])
}

/// Flag extension of a separable decomposition into pure product states;
/// its conditional mutual information vanishes.
pub fn separable_flag_extension<T: Real>(
    decomposition: &[(T, PureState<T>)],
    flag_label: &str,
) -> Result<Extension<T>> {
    for (i, (_, s)) in decomposition.iter().enumerate() {
        if !s.is_product(T::identity_tol()) {
            return Err(Error::InvariantViolation(format!(
                "decomposition member {i} is not a product state"
            )));
        }
    }
    let ens = Ensemble::new(decomposition.to_vec())?;
    flag_extension(&ens, flag_label)
}

/// `λ ρ^{ABE} ⊗ |0⟩⟨0|^{E'} + (1−λ) σ^{ABE} ⊗ |1⟩⟨1|^{E'}`.
pub fn mix_extensions<T: Real>(
    first: &Extension<T>,
    second: &Extension<T>,
    lambda: T,
    new_flag: &str,
) -> Result<Extension<T>> {
    if first.state.layout() != second.state.layout()
        || first.a != second.a
        || first.b != second.b
        || first.e != second.e
    {
        return Err(Error::Shape("mixed extensions must share layout and roles".into()));
    }
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::Domain(format!("mixing weight {lambda} outside [0,1]")));
    }
    let flag = SystemLayout::single(new_flag, 2)?;
    let zero = DensityOperator::basis_projector(flag.clone(), 0)?;
    let one = DensityOperator::basis_projector(flag, 1)?;
    let left = first.state.tensor(&zero)?;
    let right = second.state.tensor(&one)?;
    let mixed = left.mix(lambda, &right)?;
    let mut e = first.e.clone();
    e.push(new_flag.to_string());
    Extension::new(mixed, &first.a, &first.b, &e)
}

/// `ρ^{ABE} ⊗ ρ^{A'B'E'}` as an extension of `AA'|BB'` conditioned on `EE'`.
pub fn product_extension<T: Real>(first: &Extension<T>, second: &Extension<T>) -> Result<Extension<T>> {
    let state = first.state.tensor(&second.state)?;
    let cat = |x: &[String], y: &[String]| -> Vec<String> { x.iter().chain(y).cloned().collect() };
    Extension::new(
        state,
        &cat(&first.a, &second.a),
        &cat(&first.b, &second.b),
        &cat(&first.e, &second.e),
    )
}

/// Trivial extension `ρ^{AB} ⊗ |0⟩⟨0|` with a one-dimensional `E`.
pub fn trivial_extension<T: Real>(rho: &DensityOperator<T>, env_label: &str) -> Result<Extension<T>> {
    let (a, b) = bipartite_labels(rho.layout())?;
    let one = DensityOperator::new(SystemLayout::single(env_label, 1)?, CMat::identity(1, 1))?;
    Extension::new(rho.tensor(&one)?, &[a], &[b], &[env_label.to_string()])
}

/// `|ψ⟩^A ⊗ |φ⟩^B` from two local amplitude vectors.
pub fn product_pure<T: Real>(
    a_label: &str,
    a: &[C<T>],
    b_label: &str,
    b: &[C<T>],
) -> Result<PureState<T>> {
    let pa = PureState::normalized(
        SystemLayout::single(a_label, a.len())?,
        CVec::from_column_slice(a),
    )?;
    let pb = PureState::normalized(
        SystemLayout::single(b_label, b.len())?,
        CVec::from_column_slice(b),
    )?;
    pa.tensor(&pb)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::entropy::{mutual_information, von_neumann_entropy};

    const TOL: f64 = 1e-9;

    fn ab(da: usize, db: usize) -> SystemLayout {
        SystemLayout::new([("A", da), ("B", db)]).unwrap()
    }

    fn bell() -> DensityOperator<f64> {
        PureState::maximally_entangled("A", "B", 2).unwrap().to_density()
    }

    fn basis2(k: usize) -> Vec<C<f64>> {
        let mut v = vec![cr(0.0); 2];
        v[k] = cr(1.0);
        v
    }

    fn plus() -> Vec<C<f64>> {
        vec![cr(1.0), cr(1.0)]
    }

    pub(crate) fn antisym() -> DensityOperator<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = |j: usize, k: usize| {
            let mut v = vec![0.0; 9];
            v[3 * j + k] = s;
            v[3 * k + j] = -s;
            PureState::from_real(ab(3, 3), &v).unwrap()
        };
        let ens = Ensemble::new(vec![
            (1.0 / 3.0, singlet(1, 2)),
            (1.0 / 3.0, singlet(2, 0)),
            (1.0 / 3.0, singlet(0, 1)),
        ])
        .unwrap();
        ens.average()
    }

    #[test]
    fn full_trace_channel_gives_mutual_information() {
        let rho = DensityOperator::<f64>::random(ab(2, 2), 3, 1).unwrap();
        let ext = extend_via_channel(&rho, &QuantumChannel::full_trace(3), "E").unwrap();
        ext.validate_against(&rho).unwrap();
        let mi = mutual_information(&rho, &["A"], &["B"]).unwrap();
        assert!((ext.cmi() - mi).abs() < TOL);
    }

    #[test]
    fn identity_channel_gives_purification_cmi() {
        let rho = DensityOperator::<f64>::random(ab(2, 2), 3, 2).unwrap();
        let ext = extend_via_channel(&rho, &QuantumChannel::identity(3), "E").unwrap();
        ext.validate_against(&rho).unwrap();
        let pure = rho.purify("E").unwrap().to_density();
        let direct = entropy::conditional_mutual_information(&pure, &["A"], &["B"], &["E"]).unwrap();
        assert!((ext.cmi() - direct).abs() < TOL);
    }

    #[test]
    fn eigenbasis_dephasing_matches_flag_of_eigen_ensemble() {
        // Bell-diagonal state: purifier C is indexed by the canonical eigenvectors,
        // so dephasing C in the computational basis flags the eigen-ensemble.
        let l = ab(2, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi_p = PureState::from_real(l.clone(), &[s, 0.0, 0.0, s]).unwrap();
        let psi_m = PureState::from_real(l.clone(), &[0.0, s, -s, 0.0]).unwrap();
        let ens = Ensemble::new(vec![(0.7, phi_p), (0.3, psi_m)]).unwrap();
        let rho = ens.average();
        let ch = QuantumChannel::dephasing(&CMat::identity(2, 2)).unwrap();
        let via_channel = extend_via_channel(&rho, &ch, "E").unwrap();
        let flagged = flag_extension(&Ensemble::eigen(&rho).unwrap(), "E").unwrap();
        assert!(linalg::max_abs(&(via_channel.state().matrix() - flagged.state().matrix())) < TOL);
        assert!((via_channel.half_cmi() - 1.0).abs() < TOL);
    }

    #[test]
    fn channel_dimension_must_match_purifier() {
        let rho = DensityOperator::<f64>::random(ab(2, 2), 3, 2).unwrap();
        assert!(matches!(
            extend_via_channel(&rho, &QuantumChannel::identity(2), "E"),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn flag_extension_examples() {
        let single = Ensemble::new(vec![(1.0_f64, PureState::maximally_entangled("A", "B", 2).unwrap())]).unwrap();
        let e = flag_extension(&single, "E").unwrap();
        assert!((e.cmi() - 2.0).abs() < TOL);
        assert!((e.half_cmi() - 1.0).abs() < TOL);

        let prod = Ensemble::new(vec![
            (0.5_f64, PureState::basis(ab(2, 2), 0).unwrap()),
            (0.5, PureState::basis(ab(2, 2), 3).unwrap()),
        ])
        .unwrap();
        assert!(flag_extension(&prod, "E").unwrap().cmi().abs() < TOL);

        let anti = antisym();
        let ext = flag_extension(&Ensemble::eigen(&anti).unwrap(), "E").unwrap();
        ext.validate_against(&anti).unwrap();
        assert!((ext.half_cmi() - 1.0).abs() < TOL);
    }

    #[test]
    fn inconsistent_ensembles_are_rejected() {
        let a = PureState::<f64>::basis(ab(2, 2), 0).unwrap();
        assert!(matches!(
            Ensemble::new(vec![(0.5, a.clone()), (0.4, a.clone())]),
            Err(Error::InvariantViolation(_))
        ));
        let other = PureState::<f64>::basis(ab(2, 3), 0).unwrap();
        assert!(matches!(
            Ensemble::new(vec![(0.5, a), (0.5, other)]),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn separable_flag_examples() {
        let p00 = product_pure("A", &basis2(0), "B", &basis2(0)).unwrap();
        let p11 = product_pure("A", &basis2(1), "B", &basis2(1)).unwrap();
        let p1p = product_pure("A", &basis2(1), "B", &plus()).unwrap();
        let pp1 = product_pure("A", &plus(), "B", &basis2(1)).unwrap();
        let one = separable_flag_extension(&[(1.0, p00.clone())], "E").unwrap();
        assert!(one.cmi().abs() < TOL);
        let two = separable_flag_extension(&[(0.5, p00.clone()), (0.5, p11)], "E").unwrap();
        assert!(two.cmi().abs() < TOL);
        let third = 1.0 / 3.0;
        let three = separable_flag_extension(&[(third, p00), (third, p1p), (third, pp1)], "E").unwrap();
        assert!(three.cmi().abs() < TOL);
        assert!(mutual_information(&three.parent(), &["A"], &["B"]).unwrap() > 1e-3);

        let bell_pure = PureState::maximally_entangled("A", "B", 2).unwrap();
        assert!(matches!(
            separable_flag_extension(&[(1.0, bell_pure)], "E"),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn mixing_examples() {
        let b = trivial_extension(&bell(), "E").unwrap();
        let p00 = product_pure("A", &basis2(0), "B", &basis2(0)).unwrap();
        let p11 = product_pure("A", &basis2(1), "B", &basis2(1)).unwrap();
        let sep = separable_flag_extension(&[(0.5, p00), (0.5, p11)], "E").unwrap();
        // pad the Bell extension's E to the separable one's E dimension
        let zero = DensityOperator::basis_projector(SystemLayout::single("E", 2).unwrap(), 0).unwrap();
        let b2 = Extension::new(bell().tensor(&zero).unwrap(), &["A"], &["B"], &["E"]).unwrap();
        assert!((b2.cmi() - 2.0).abs() < TOL);

        let all_first = mix_extensions(&b2, &sep, 1.0, "F").unwrap();
        assert!((all_first.cmi() - 2.0).abs() < TOL);
        let same = mix_extensions(&b2, &b2, 0.5, "F").unwrap();
        assert!((same.cmi() - 2.0).abs() < TOL);
        let third = mix_extensions(&b2, &sep, 1.0 / 3.0, "F").unwrap();
        assert!((third.cmi() - 2.0 / 3.0).abs() < TOL);
        assert!((third.cmi() - 0.6667).abs() < 1e-4);
        third
            .validate_against(&bell().mix(1.0 / 3.0, &sep.parent()).unwrap())
            .unwrap();

        assert!(matches!(mix_extensions(&b, &sep, 0.5, "F"), Err(Error::Shape(_))));
        assert!(matches!(mix_extensions(&b2, &sep, 1.5, "F"), Err(Error::Domain(_))));
    }

    #[test]
    fn product_examples() {
        let b1 = trivial_extension(&bell(), "E").unwrap();
        let b2 = trivial_extension(
            &PureState::maximally_entangled("A'", "B'", 2).unwrap().to_density(),
            "E'",
        )
        .unwrap();
        let prod = product_extension(&b1, &b2).unwrap();
        assert!((prod.cmi() - 4.0).abs() < TOL);
        assert!(matches!(product_extension(&b1, &b1), Err(Error::LabelClash(_))));

        let p = product_pure("A'", &basis2(0), "B'", &basis2(1)).unwrap();
        let zero_witness = separable_flag_extension(&[(1.0, p)], "E'").unwrap();
        let with_zero = product_extension(&b1, &zero_witness).unwrap();
        assert!((with_zero.cmi() - b1.cmi()).abs() < TOL);

        let anti = antisym();
        let t1 = trivial_extension(&anti, "E").unwrap();
        let anti2 = anti.relabel("A", "A'").unwrap().relabel("B", "B'").unwrap();
        let t2 = trivial_extension(&anti2, "E'").unwrap();
        let prod = product_extension(&t1, &t2).unwrap();
        assert!((prod.cmi() - 2.0 * 3f64.log2()).abs() < TOL);
    }

    #[test]
    fn pure_state_extensions_give_entanglement_entropy() {
        let psi = PureState::<f64>::random(ab(2, 3), 17);
        let rho = psi.to_density();
        let sa = von_neumann_entropy(&psi.reduced(&["A"]).unwrap());
        let r = rho.rank();
        assert_eq!(r, 1);
        for seed in 0..5 {
            let mut g = crate::rng::seeded(seed, 3);
            let v = crate::rng::random_isometry::<f64>(&mut g, 3 * 2, 1);
            let ch = QuantumChannel::new(1, 3, 2, v).unwrap();
            let ext = extend_via_channel(&rho, &ch, "E").unwrap();
            assert!((ext.half_cmi() - sa).abs() < TOL);
        }
    }
}
