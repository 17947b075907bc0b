//! Named example states with reference values.
//!
//! Parametric entries are addressed as `werner:P`, `random:SEED:DxD:RANK`
//! and `random3:SEED`; the plain names are fixed states.

use serde::Serialize;

use crate::classical::ClassicalJoint;
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::CMat;
use crate::scalar::cr;
use crate::state::{DensityOperator, PureState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownValue {
    pub quantity: String,
    pub value: f64,
    /// Where the value comes from, e.g. "analytic" or "reference, not computed".
    pub provenance: String,
}

fn known(quantity: &str, value: f64, provenance: &str) -> KnownValue {
    KnownValue {
        quantity: quantity.into(),
        value,
        provenance: provenance.into(),
    }
}

#[derive(Debug, Clone)]
pub enum CatalogState {
    Quantum(DensityOperator<f64>),
    Classical(ClassicalJoint<f64>),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub known: Vec<KnownValue>,
    pub state: CatalogState,
}

impl CatalogEntry {
    pub fn quantum(&self) -> Option<&DensityOperator<f64>> {
        match &self.state {
            CatalogState::Quantum(r) => Some(r),
            CatalogState::Classical(_) => None,
        }
    }

    pub fn classical(&self) -> Option<&ClassicalJoint<f64>> {
        match &self.state {
            CatalogState::Classical(p) => Some(p),
            CatalogState::Quantum(_) => None,
        }
    }

    pub fn known_value(&self, quantity: &str) -> Option<&KnownValue> {
        self.known.iter().find(|k| k.quantity == quantity)
    }

    /// File contents for `examples emit`.
    pub fn file_contents(&self) -> String {
        match &self.state {
            CatalogState::Quantum(r) => crate::io::write_state(r),
            CatalogState::Classical(p) => crate::io::write_joint(p),
        }
    }
}

/// Names shown by `examples list`, with parametric entries at a default
/// parameter.
pub const LISTED: [&str; 9] = [
    "bell",
    "ghz_marginal",
    "cc_mixed",
    "antisym_qutrit",
    "werner:0.75",
    "random:0:2x2:2",
    "xor",
    "copy",
    "random3:0",
];

fn ab(da: usize, db: usize) -> SystemLayout {
    SystemLayout::new([("A", da), ("B", db)]).expect("distinct labels")
}

pub fn bell() -> DensityOperator<f64> {
    PureState::maximally_entangled("A", "B", 2).expect("dimension 2").to_density()
}

/// `Tr_C |GHZ⟩⟨GHZ|` for the three-qubit GHZ state.
pub fn ghz_marginal() -> DensityOperator<f64> {
    let l = SystemLayout::new([("A", 2), ("B", 2), ("C", 2)]).expect("distinct labels");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_real(l, &[s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, s])
        .expect("normalised")
        .reduced(&["A", "B"])
        .expect("labels exist")
}

/// `½ |00⟩⟨00| + ½ |11⟩⟨11|`.
pub fn cc_mixed() -> DensityOperator<f64> {
    DensityOperator::diagonal(ab(2, 2), &[0.5, 0.0, 0.0, 0.5]).expect("valid")
}

/// Normalised projector onto the antisymmetric subspace of two qutrits.
pub fn antisym_qutrit() -> DensityOperator<f64> {
    let mut m = CMat::zeros(9, 9);
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut v = CMat::zeros(9, 1);
        v[(i * 3 + j, 0)] = cr(1.0);
        v[(j * 3 + i, 0)] = cr(-1.0);
        m += &v * v.adjoint() * cr(1.0 / 6.0);
    }
    DensityOperator::new(ab(3, 3), m).expect("valid")
}

/// `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) 1/4`.
pub fn werner(p: f64) -> Result<DensityOperator<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("Werner parameter {p} outside [0, 1]")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = PureState::from_real(ab(2, 2), &[0.0, s, -s, 0.0])?.to_density();
    singlet.mix(p, &DensityOperator::maximally_mixed(ab(2, 2)))
}

fn binary_entropy(x: f64) -> f64 {
    [x, 1.0 - x]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Entanglement of formation of the two-qubit Werner state from its
/// concurrence `max(0, (3p − 1)/2)`.
pub fn werner_eof(p: f64) -> f64 {
    let conc = ((3.0 * p - 1.0) / 2.0).max(0.0);
    binary_entropy(0.5 + 0.5 * (1.0 - conc * conc).max(0.0).sqrt())
}

fn parse_num<N: std::str::FromStr>(s: &str, what: &str, name: &str) -> Result<N> {
    s.parse()
        .map_err(|_| Error::UnknownExample(format!("{name}: cannot read {what} from {s:?}")))
}

/// Build a catalog entry by name.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let half_log3 = 0.5 * 3f64.log2();
    let parts: Vec<&str> = name.split(':').collect();
    let entry = |description: &str, known: Vec<KnownValue>, state| CatalogEntry {
        name: name.to_string(),
        description: description.to_string(),
        known,
        state,
    };
    Ok(match parts.as_slice() {
        ["bell"] => entry(
            "maximally entangled qubit pair",
            vec![
                known("squashed", 1.0, "analytic: equals S(A) for pure states"),
                known("eof", 1.0, "analytic"),
                known("hashing", 1.0, "analytic"),
                known("mutual_info_half", 1.0, "analytic"),
            ],
            CatalogState::Quantum(bell()),
        ),
        ["ghz_marginal"] => entry(
            "two-qubit marginal of the three-qubit GHZ state",
            vec![
                known("squashed", 0.0, "analytic: separable"),
                known("mutual_info_half", 0.5, "analytic"),
                known("hashing", 0.0, "analytic"),
            ],
            CatalogState::Quantum(ghz_marginal()),
        ),
        ["cc_mixed"] => entry(
            "classically correlated bits, 1/2 |00><00| + 1/2 |11><11|",
            vec![
                known("squashed", 0.0, "analytic: separable"),
                known("eof", 0.0, "analytic: separable"),
                known("mutual_info_half", 0.5, "analytic"),
                known("hashing", 0.0, "analytic"),
            ],
            CatalogState::Quantum(cc_mixed()),
        ),
        ["antisym_qutrit"] => entry(
            "normalised projector onto the antisymmetric subspace of two qutrits",
            vec![
                known("mutual_info_half", half_log3, "analytic: 1/2 log2 3"),
                known("squashed_upper", half_log3, "analytic: trivial extension"),
                known("eof", 1.0, "literature value"),
                known("hashing", 0.0, "analytic: I(A;B) = S(AB) = log2 3"),
                known("rains", (5.0f64 / 3.0).log2(), "reference, not computed"),
            ],
            CatalogState::Quantum(antisym_qutrit()),
        ),
        ["werner", p] => {
            let p: f64 = parse_num(p, "mixing parameter", name)?;
            let mut k = vec![known("eof", werner_eof(p), "analytic: concurrence formula")];
            if p <= 1.0 / 3.0 {
                k.push(known("squashed", 0.0, "analytic: separable for p <= 1/3"));
            }
            entry("two-qubit Werner state p |psi-><psi-| + (1-p) 1/4", k, CatalogState::Quantum(werner(p)?))
        }
        ["random", seed, dims, rank] => {
            let seed: u64 = parse_num(seed, "seed", name)?;
            let rank: usize = parse_num(rank, "rank", name)?;
            let (da, db) = dims
                .split_once('x')
                .ok_or_else(|| Error::UnknownExample(format!("{name}: dimensions must look like 2x3")))?;
            let layout = ab(parse_num(da, "dimension", name)?, parse_num(db, "dimension", name)?);
            entry(
                "seeded random bipartite state",
                vec![],
                CatalogState::Quantum(DensityOperator::random(layout, rank, seed)?),
            )
        }
        ["xor"] => entry(
            "independent uniform bits X, Y with Z = X xor Y",
            vec![
                known("intrinsic", 0.0, "analytic: I(X;Y) = 0"),
                known("cmi", 1.0, "analytic"),
            ],
            CatalogState::Classical(ClassicalJoint::xor()),
        ),
        ["copy"] => entry(
            "X = Y a uniform bit, Z constant",
            vec![known("intrinsic", 1.0, "analytic: no channel on Z changes I(X;Y)")],
            CatalogState::Classical(ClassicalJoint::copy()),
        ),
        ["random3", seed] => {
            let seed: u64 = parse_num(seed, "seed", name)?;
            entry(
                "seeded random joint on 3x3x3 alphabets",
                vec![],
                CatalogState::Classical(ClassicalJoint::random([3, 3, 3], seed)?),
            )
        }
        _ => return Err(Error::UnknownExample(name.to_string())),
    })
}

/// Every listed entry.
pub fn entries() -> Vec<CatalogEntry> {
    LISTED.iter().map(|n| lookup(n).expect("listed names resolve")).collect()
}

/// Out-of-scope quantities, stated so that no output implies they were computed.
pub const NOT_COMPUTED: [(&str, &str); 4] = [
    ("entanglement cost", "regularised limit of the entanglement of formation"),
    ("distillable entanglement", "optimisation over all distillation protocols"),
    (
        "conditional Fannes inequality for general states",
        "only evaluated empirically; proven and asserted only for states classical on B",
    ),
    (
        "attainment of the squashed infimum",
        "every reported squashed value is an upper bound at a finite extension dimension",
    ),
];
