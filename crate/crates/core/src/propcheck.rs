//! Executable identities and inequalities for conditional mutual information,
//! extensions and the bound chain.
//!
//! Every check returns a [`CheckResult`]; compound checks list their
//! intermediate steps in `steps`. Randomised suites draw case `i` from seed
//! `seed + i`, so a failing case can be replayed on its own.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Instrument, QuantumChannel};
use crate::classical::{
    apply_z_channel, classical_cond_fannes_check, classical_embed, intrinsic_information, shannon_cmi,
    shannon_mi, ClassicalJoint,
};
use crate::entropy::{
    conditional_mutual_information as cmi, fannes_bound, fannes_check, mutual_information,
    von_neumann_entropy,
};
use crate::error::{Error, Result};
use crate::extensions::{
    extend_via_channel, flag_extension, mix_extensions, product_extension, trivial_extension, Ensemble,
    Extension,
};
use crate::layout::{Subsystem, SystemLayout};
use crate::linalg;
use crate::optimizer::{bounds_report, fresh_label, OptimizerConfig};
use crate::rng::{self, SeededRng};
use crate::scalar::{cr, log2, Real};
use crate::state::{DensityOperator, PureState};

/// Tolerance for exact identities.
pub const EXACT: f64 = 1e-9;
/// Tolerance for inequalities that go through an optimizer.
pub const OPT: f64 = 1e-6;

fn exact_tol<T: Real>() -> f64 {
    EXACT.max(T::identity_tol().as_f64())
}

fn opt_tol<T: Real>() -> f64 {
    OPT.max(T::optimizer_tol().as_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Short description of the inputs (seed, dimensions, parameters).
    pub inputs: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs` for inequalities `lhs ≥ rhs`, `−|lhs − rhs|` for equalities.
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<CheckResult>,
}

impl CheckResult {
    /// `lhs ≥ rhs − tol`.
    pub fn at_least(name: &str, inputs: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            name: name.into(),
            inputs: inputs.into(),
            lhs,
            rhs,
            margin,
            tolerance: tol,
            passed: margin >= -tol,
            steps: Vec::new(),
        }
    }

    /// `lhs ≤ rhs + tol`.
    pub fn at_most(name: &str, inputs: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut r = Self::at_least(name, inputs, rhs, lhs, tol);
        r.lhs = lhs;
        r.rhs = rhs;
        r
    }

    /// `|lhs − rhs| ≤ tol`.
    pub fn equal(name: &str, inputs: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = -(lhs - rhs).abs();
        Self {
            name: name.into(),
            inputs: inputs.into(),
            lhs,
            rhs,
            margin,
            tolerance: tol,
            passed: margin >= -tol,
            steps: Vec::new(),
        }
    }

    /// Attach sub-steps; the result passes only if every step does.
    pub fn with_steps(mut self, steps: Vec<CheckResult>) -> Self {
        self.passed = self.passed && steps.iter().all(|s| s.passed);
        self.steps = steps;
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("check results serialise")
    }
}

/// `I(A;B|E) ≥ 0`.
pub fn check_ssa<T: Real, S: AsRef<str>>(rho: &DensityOperator<T>, a: &[S], b: &[S], e: &[S]) -> Result<CheckResult> {
    let v = cmi(rho, a, b, e)?.as_f64();
    Ok(CheckResult::at_least("ssa", &rho.layout().to_string(), v, 0.0, exact_tol::<T>()))
}

/// Strong subadditivity on a three-subsystem layout, in layout order.
pub fn check_ssa_tripartite<T: Real>(rho: &DensityOperator<T>) -> Result<CheckResult> {
    let l = rho.layout().labels();
    if l.len() != 3 {
        return Err(Error::Shape(format!("expected three subsystems, got {}", rho.layout())));
    }
    check_ssa(rho, &[l[0]], &[l[1]], &[l[2]])
}

/// `I(XY;Z|U) = I(X;Z|U) + I(Y;Z|UX)`.
pub fn check_chain_rule<T: Real, S: AsRef<str>>(
    rho: &DensityOperator<T>,
    x: &[S],
    y: &[S],
    z: &[S],
    u: &[S],
) -> Result<CheckResult> {
    let s = |v: &[S]| -> Vec<String> { v.iter().map(|l| l.as_ref().to_string()).collect() };
    let xy: Vec<String> = s(x).into_iter().chain(s(y)).collect();
    let ux: Vec<String> = s(u).into_iter().chain(s(x)).collect();
    let lhs = cmi(rho, &xy, &s(z), &s(u))?.as_f64();
    let rhs = (cmi(rho, &s(x), &s(z), &s(u))? + cmi(rho, &s(y), &s(z), &ux)?).as_f64();
    Ok(CheckResult::equal("chain_rule", &rho.layout().to_string(), lhs, rhs, exact_tol::<T>()))
}

/// Push a CP instrument on `A` through the extension and verify
///
/// 1. `I(A;B|E) = I(AA'A'';B|E)` (local isometry),
/// 2. `I(AA'A'';B|E) ≥ I(AA';B|E)` (discarding `A''`),
/// 3. `I(AA';B|E) = I(A';B|E) + I(A;B|EA')` (chain rule),
/// 4. `I(A';B|E) ≥ 0` (strong subadditivity),
/// 5. `I(A;B|EA') = Σ_k p_k I(A;B|E)_k` (classical flag `A'`),
///
/// so that `I(A;B|E) ≥ Σ_k p_k I(A;B|E)_k`; each outcome's extension must
/// also reproduce the post-measurement state `E_k(ρ^{AB})/p_k`.
pub fn check_monotonicity<T: Real>(ext: &Extension<T>, ins: &Instrument<T>) -> Result<CheckResult> {
    if ext.a().len() != 1 {
        return Err(Error::Shape("instrument must act on a single A subsystem".into()));
    }
    let tol = exact_tol::<T>();
    let state = ext.state();
    let (a, b, e) = (ext.a()[0].clone(), ext.b().to_vec(), ext.e().to_vec());
    let layout = state.layout();
    let pos = layout.position(&a)?;
    if layout.dims()[pos] != ins.d_in() {
        return Err(Error::Shape(format!(
            "instrument input dimension {} differs from {a}",
            ins.d_in()
        )));
    }

    // Dilated state on ... A A' A'' ... with the outcome in A'.
    let v = ins.flagged_dilation();
    let n_out = ins.outcomes();
    let n_reg = n_out * ins.max_kraus();
    let w = linalg::embed(&v, &layout.dims(), pos);
    let dilated = &w * state.matrix() * w.adjoint();
    let a1 = fresh_label(layout, &format!("{a}'"));
    let a2 = fresh_label(&layout.with(&a1, 1)?, &format!("{a}''"));
    let mut systems: Vec<Subsystem> = Vec::new();
    for s in layout.systems() {
        if s.label == a {
            systems.push(Subsystem {
                label: a.clone(),
                dim: ins.d_out(),
            });
            systems.push(Subsystem { label: a1.clone(), dim: n_out });
            systems.push(Subsystem { label: a2.clone(), dim: n_reg });
        } else {
            systems.push(s.clone());
        }
    }
    let big = DensityOperator::new(SystemLayout::from_subsystems(systems)?, dilated)?;

    let cat = |xs: &[&[String]]| -> Vec<String> { xs.iter().flat_map(|x| x.iter().cloned()).collect() };
    let va = vec![a.clone()];
    let vaa1 = vec![a.clone(), a1.clone()];
    let vaa1a2 = vec![a.clone(), a1.clone(), a2.clone()];
    let va1 = vec![a1.clone()];
    let ea1 = cat(&[&e, &va1]);

    let i0 = cmi(state, &va, &b, &e)?.as_f64();
    let i1 = cmi(&big, &vaa1a2, &b, &e)?.as_f64();
    let i2 = cmi(&big, &vaa1, &b, &e)?.as_f64();
    let i_flag = cmi(&big, &va1, &b, &e)?.as_f64();
    let i_cond = cmi(&big, &va, &b, &ea1)?.as_f64();

    let outcomes = state.apply_instrument(ins, &a)?;
    let parent = ext.parent();
    let parent_outcomes = parent.apply_instrument(ins, &a)?;
    let mut average = T::zero();
    let mut steps = vec![
        CheckResult::equal("monotone_isometry", "", i0, i1, tol),
        CheckResult::at_least("monotone_discard", "", i1, i2, tol),
        CheckResult::equal("monotone_chain_rule", "", i2, i_flag + i_cond, tol),
        CheckResult::at_least("monotone_ssa", "", i_flag, 0.0, tol),
    ];
    for (k, (out, par)) in outcomes.iter().zip(&parent_outcomes).enumerate() {
        let Some(rho_k) = &out.state else { continue };
        let ext_k = Extension::new(rho_k.clone(), &va, &b, &e)?;
        average += out.probability * ext_k.cmi();
        let dev = match &par.state {
            Some(p) => ext_k.marginal_deviation(p)?.as_f64(),
            None => f64::INFINITY,
        };
        steps.push(CheckResult::at_most(
            "monotone_outcome_extension",
            &format!("outcome={k}"),
            dev,
            0.0,
            tol,
        ));
    }
    let average = average.as_f64();
    steps.push(CheckResult::equal("monotone_flag_average", "", i_cond, average, tol));
    let inputs = format!("{} outcomes={n_out}", layout);
    Ok(CheckResult::at_least("monotonicity", &inputs, i0, average, tol).with_steps(steps))
}

/// `I(A;B|EE')_τ = λ I_1 + (1 − λ) I_2` for the flagged mixture `τ`.
pub fn check_convexity_identity<T: Real>(e1: &Extension<T>, e2: &Extension<T>, lambda: T) -> Result<CheckResult> {
    let flag = fresh_label(e1.state().layout(), "F");
    let mixed = mix_extensions(e1, e2, lambda, &flag)?;
    let lhs = mixed.cmi().as_f64();
    let rhs = (lambda * e1.cmi() + (T::one() - lambda) * e2.cmi()).as_f64();
    let inputs = format!("lambda={}", lambda.as_f64());
    Ok(CheckResult::equal("convexity_identity", &inputs, lhs, rhs, exact_tol::<T>()))
}

/// `I(AA';BB'|EE') = I(A;B|E) + I(A';B'|E')` on `e1 ⊗ e2`, with the cross
/// terms `I(A;B'|EE'B)` and `I(A';B|EE'AB')` vanishing.
pub fn check_additivity<T: Real>(e1: &Extension<T>, e2: &Extension<T>) -> Result<CheckResult> {
    let tol = exact_tol::<T>();
    let prod = product_extension(e1, e2)?;
    let lhs = prod.cmi().as_f64();
    let rhs = (e1.cmi() + e2.cmi()).as_f64();
    let s = prod.state();
    let cat = |xs: &[&[String]]| -> Vec<String> { xs.iter().flat_map(|x| x.iter().cloned()).collect() };
    let ee = cat(&[e1.e(), e2.e()]);
    let cross1 = cmi(s, e1.a(), e2.b(), &cat(&[&ee, e1.b()]))?.as_f64();
    let cross2 = cmi(s, e2.a(), e1.b(), &cat(&[&ee, e1.a(), e2.b()]))?.as_f64();
    let steps = vec![
        CheckResult::at_most("additivity_cross_term", "I(A;B'|EE'B)", cross1.abs(), 0.0, tol),
        CheckResult::at_most("additivity_cross_term", "I(A';B|EE'AB')", cross2.abs(), 0.0, tol),
    ];
    Ok(CheckResult::equal("additivity", &s.layout().to_string(), lhs, rhs, tol).with_steps(steps))
}

/// `I(AA';BB'|E) ≥ I(A;B|E) + I(A';B'|EA)` via the chain rule and two
/// monotonicity steps.
pub fn check_superadditivity<T: Real>(
    rho: &DensityOperator<T>,
    a: &str,
    a2: &str,
    b: &str,
    b2: &str,
    e: &str,
) -> Result<CheckResult> {
    let tol = exact_tol::<T>();
    let lhs = cmi(rho, &[a, a2], &[b, b2], &[e])?;
    let i_a_bb = cmi(rho, &[a], &[b, b2], &[e])?;
    let i_a2_bb = cmi(rho, &[a2], &[b, b2], &[e, a])?;
    let i_ab = cmi(rho, &[a], &[b], &[e])?;
    let i_a2b2 = cmi(rho, &[a2], &[b2], &[e, a])?;
    let f = |x: T| x.as_f64();
    let steps = vec![
        CheckResult::equal("superadditivity_chain_rule", "", f(lhs), f(i_a_bb + i_a2_bb), tol),
        CheckResult::at_least("superadditivity_drop_b2", "", f(i_a_bb), f(i_ab), tol),
        CheckResult::at_least("superadditivity_drop_b", "", f(i_a2_bb), f(i_a2b2), tol),
    ];
    Ok(
        CheckResult::at_least("superadditivity", &rho.layout().to_string(), f(lhs), f(i_ab + i_a2b2), tol)
            .with_steps(steps),
    )
}

/// `hashing ≤ squashed_upper ≤ eof_upper`, both at the optimizer tolerance.
pub fn check_bound_chain<T: Real>(rho: &DensityOperator<T>, cfg: &OptimizerConfig) -> Result<CheckResult> {
    let rep = bounds_report(rho, cfg)?;
    let tol = opt_tol::<T>();
    let (h, s, e) = (rep.hashing_lower.as_f64(), rep.squashed_upper.as_f64(), rep.eof_upper.as_f64());
    let steps = vec![
        CheckResult::at_most("bound_chain_hashing", "", h, s, tol),
        CheckResult::at_most("bound_chain_eof", "", s, e, tol),
        CheckResult::at_most("bound_chain_trivial", "", s, rep.mutual_info_half.as_f64(), tol),
    ];
    Ok(CheckResult::at_most("bound_chain", &rho.layout().to_string(), h, e, tol).with_steps(steps))
}

/// `f(δ)·log₂ s` from two Fannes estimates: `|S(A) − log s|, |S(B) − log s|`
/// are each at most `fannes(δ, s)` and `S(AB) ≤ fannes(δ, s²)`, which gives
/// `½ I(A;B|E) ≥ log s − fannes(δ, s) − (3/2)·fannes(δ, s²)`.
pub fn distillation_slack<T: Real>(delta: T, s: usize) -> Result<T> {
    Ok(fannes_bound(delta, s)? + T::lit(1.5) * fannes_bound(delta, s * s)?)
}

/// Maximally entangled state `Σ_{i<s} |ii⟩/√s` on the layout of `sigma`.
fn embedded_max_entangled<T: Real>(layout: &SystemLayout, s: usize) -> Result<DensityOperator<T>> {
    let dims = layout.dims();
    if s == 0 || dims[0] < s || dims[1] < s {
        return Err(Error::Shape(format!("Schmidt rank {s} does not fit {layout}")));
    }
    let amp = T::one() / T::from_usize(s).unwrap().sqrt();
    let mut v = linalg::CVec::zeros(layout.total_dim());
    for i in 0..s {
        v[i * dims[1] + i] = cr(amp);
    }
    Ok(PureState::new(layout.clone(), v)?.to_density())
}

/// Distillation estimate `½ I(A;B|E) ≥ log₂ s − f(δ) log₂ s` for the trivial
/// extension and `n_channels` seeded random extensions (`d_env ≤ 4`), plus
/// the intermediate bound `I(A;B|E) ≥ I(A;B) − 2 S(AB)`.
pub fn check_distillation_estimate<T: Real>(
    sigma: &DensityOperator<T>,
    s: usize,
    seed: u64,
    n_channels: usize,
) -> Result<CheckResult> {
    let tol = exact_tol::<T>();
    let layout = sigma.layout();
    if layout.len() != 2 {
        return Err(Error::Shape(format!("expected a bipartite layout, got {layout}")));
    }
    let target = embedded_max_entangled::<T>(layout, s)?;
    let labels = layout.labels();
    let (a, b) = (labels[0], labels[1]);
    let support_tol = T::lit(1e-10).max(T::state_tol());
    for (label, own) in [(a, a), (b, b)] {
        let m = sigma.partial_trace(&[own])?;
        let outside = (s..m.dim()).fold(T::zero(), |acc, i| acc + m.matrix()[(i, i)].re);
        if outside > support_tol {
            return Err(Error::InvariantViolation(format!(
                "marginal on {label} has weight {outside:e} outside the first {s} levels"
            )));
        }
    }
    let delta = sigma.trace_distance(&target)?;
    if delta > T::lit(0.5) {
        return Err(Error::InvariantViolation(format!(
            "trace distance {delta} to the maximally entangled state exceeds 1/2"
        )));
    }
    let log_s = log2(T::from_usize(s).unwrap());
    let bound = (log_s - distillation_slack(delta, s)?).as_f64();
    let mi = mutual_information(sigma, &[a], &[b])?;
    let lower = (mi - von_neumann_entropy(sigma) * T::lit(2.0)).as_f64();

    let env = fresh_label(layout, "E");
    let mut extensions = vec![trivial_extension(sigma, &env)?];
    let r = sigma.rank();
    for k in 0..n_channels {
        let d_env = 1 + k % 4;
        let d_stine = r * d_env;
        let mut g = rng::seeded(seed, k as u64);
        let v = rng::random_isometry::<T>(&mut g, d_env * d_stine, r);
        let ch = QuantumChannel::new(r, d_env, d_stine, v)?;
        extensions.push(extend_via_channel(sigma, &ch, &env)?);
    }
    let mut steps = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, ext) in extensions.iter().enumerate() {
        let c = ext.cmi().as_f64();
        worst = worst.min(0.5 * c);
        steps.push(CheckResult::at_least("distillation_mi_minus_entropy", &format!("extension={k}"), c, lower, tol));
        steps.push(CheckResult::at_least("distillation_half_cmi", &format!("extension={k}"), 0.5 * c, bound, tol));
    }
    let inputs = format!("s={s} delta={:.6e} extensions={}", delta.as_f64(), extensions.len());
    Ok(CheckResult::at_least("distillation_estimate", &inputs, worst, bound, tol).with_steps(steps))
}

/// `|S(ρ) − S(σ)| ≤ η(ε) + ε log₂ d`.
pub fn check_fannes<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<CheckResult> {
    let c = fannes_check(rho, sigma)?;
    let inputs = format!("eps={:.6e} d={}", c.epsilon.as_f64(), rho.dim());
    Ok(CheckResult::at_most("fannes", &inputs, c.lhs.as_f64(), c.rhs.as_f64(), exact_tol::<T>()))
}

/// The classical-on-`B` conditional Fannes inequality and its block step.
pub fn check_classical_fannes<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<CheckResult> {
    let r = classical_cond_fannes_check(rho, sigma)?;
    let tol = exact_tol::<T>();
    let eps = r.epsilon.as_f64();
    let inputs = format!("eps={eps:.6e} layout={}", rho.layout());
    let steps = vec![CheckResult::at_most(
        "classical_fannes_block_step",
        "",
        r.weighted_block_distance.as_f64(),
        2.0 * eps,
        tol,
    )];
    Ok(
        CheckResult::at_most("classical_cond_fannes", &inputs, r.lhs.as_f64(), r.rhs.as_f64(), tol)
            .with_steps(steps),
    )
}

/// Half of `CMI` of the flag extension equals the ensemble's average entanglement.
pub fn check_flag_identity<T: Real>(ens: &Ensemble<T>) -> Result<CheckResult> {
    let flag = fresh_label(ens.layout(), "E");
    let ext = flag_extension(ens, &flag)?;
    let lhs = ext.half_cmi().as_f64();
    let rhs = ens.average_entanglement().as_f64();
    Ok(CheckResult::equal("flag_identity", &format!("members={}", ens.len()), lhs, rhs, exact_tol::<T>()))
}

// ---------------------------------------------------------------------------
// Random inputs.

/// Random state of random rank on `layout`.
pub fn random_state<T: Real>(layout: SystemLayout, seed: u64) -> DensityOperator<T> {
    let d = layout.total_dim();
    let mut g = rng::seeded(seed, 1);
    let rank = 1 + (rng::uniform::<f64>(&mut g) * d as f64) as usize;
    DensityOperator::random(layout, rank.min(d), seed).expect("rank within range")
}

/// Random extension on `A ⊗ B ⊗ E` regarded as an extension of its own marginal.
pub fn random_extension<T: Real>(dims: [usize; 3], seed: u64) -> Extension<T> {
    let layout = SystemLayout::new([("A", dims[0]), ("B", dims[1]), ("E", dims[2])]).expect("distinct labels");
    Extension::new(random_state(layout, seed), &["A"], &["B"], &["E"]).expect("labels cover layout")
}

/// Random instrument on `d` levels with `outcomes` outcomes and `kraus`
/// Kraus operators per outcome, cut from a Haar-random isometry.
pub fn random_instrument<T: Real>(d: usize, outcomes: usize, kraus: usize, seed: u64) -> Instrument<T> {
    let mut g = rng::seeded(seed, 2);
    let n = outcomes * kraus;
    let v = rng::random_isometry::<T>(&mut g, d * n, d);
    let elements = (0..outcomes)
        .map(|k| {
            (0..kraus)
                .map(|j| v.rows((k * kraus + j) * d, d).into_owned())
                .collect()
        })
        .collect();
    Instrument::new(elements).expect("isometry blocks form an instrument")
}

/// Random ensemble of `m` pure states on `A ⊗ B`.
pub fn random_ensemble<T: Real>(da: usize, db: usize, m: usize, seed: u64) -> Ensemble<T> {
    let mut g = rng::seeded(seed, 3);
    let layout = SystemLayout::new([("A", da), ("B", db)]).expect("distinct labels");
    let w = random_weights::<T>(&mut g, m);
    let entries = w
        .into_iter()
        .enumerate()
        .map(|(k, p)| (p, PureState::random(layout.clone(), seed.wrapping_mul(31).wrapping_add(k as u64))))
        .collect();
    Ensemble::new(entries).expect("weights normalised")
}

/// Probability vector with entries bounded away from zero.
pub fn random_weights<T: Real>(g: &mut SeededRng, m: usize) -> Vec<T> {
    let raw: Vec<f64> = (0..m).map(|_| 0.1 + rng::uniform::<f64>(g)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| T::lit(x / total)).collect()
}

/// Random state classical on `B` with `blocks` blocks of dimension `d_a`.
pub fn random_classical_on_b<T: Real>(d_a: usize, blocks: usize, seed: u64) -> DensityOperator<T> {
    let mut g = rng::seeded(seed, 4);
    let w = random_weights::<T>(&mut g, blocks);
    let a = SystemLayout::single("A", d_a).expect("label");
    let states: Vec<DensityOperator<T>> = (0..blocks)
        .map(|k| random_state(a.clone(), seed.wrapping_mul(17).wrapping_add(k as u64)))
        .collect();
    classical_embed(&w, &states).expect("consistent blocks")
}

/// Random pair of classical-on-`B` states sharing dimensions; the second is
/// a perturbation of the first with a seeded mixing strength.
pub fn random_classical_pair<T: Real>(seed: u64) -> (DensityOperator<T>, DensityOperator<T>) {
    let mut g = rng::seeded(seed, 5);
    let d_a = 1 + (rng::uniform::<f64>(&mut g) * 4.0) as usize;
    let blocks = 1 + (rng::uniform::<f64>(&mut g) * 4.0) as usize;
    let rho = random_classical_on_b::<T>(d_a.min(4), blocks.min(4), seed);
    let other = random_classical_on_b::<T>(d_a.min(4), blocks.min(4), seed ^ 0x5eed_0000);
    let t: f64 = rng::uniform(&mut g);
    let lambda = T::lit(t * t * t);
    let sigma = rho.mix(T::one() - lambda, &other).expect("shared layout");
    (rho, sigma)
}

/// Random pair of states on `d` levels: `ρ` and a perturbation towards
/// another random state.
pub fn random_pair<T: Real>(d: usize, seed: u64) -> (DensityOperator<T>, DensityOperator<T>) {
    let layout = SystemLayout::single("A", d).expect("label");
    let rho = random_state::<T>(layout.clone(), seed);
    let other = random_state::<T>(layout, seed ^ 0xface_0000);
    let mut g = rng::seeded(seed, 6);
    let t: f64 = rng::uniform(&mut g);
    (rho.clone(), rho.mix(T::one() - T::lit(t * t * t), &other).expect("shared layout"))
}

// ---------------------------------------------------------------------------
// Suites.

pub const SUITES: [&str; 6] = ["entropy", "extensions", "monotone", "additivity", "classical", "all"];

/// First line of a suite's JSON-lines output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub suite: String,
    pub seed: u64,
    pub n: usize,
    /// Each randomised check uses seeds `seed..seed + n`.
    pub seeds: [u64; 2],
    pub checks: Vec<String>,
}

type CaseFn = fn(u64) -> Result<CheckResult>;

fn sweep(seed: u64, n: usize, f: CaseFn) -> Vec<CheckResult> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed + i;
            match f(s) {
                Ok(mut r) => {
                    r.inputs = format!("seed={s} {}", r.inputs);
                    r
                }
                Err(e) => CheckResult {
                    name: "error".into(),
                    inputs: format!("seed={s}: {e}"),
                    lhs: 0.0,
                    rhs: 0.0,
                    margin: 0.0,
                    tolerance: 0.0,
                    passed: false,
                    steps: Vec::new(),
                },
            }
        })
        .collect()
}

fn case_ssa(s: u64) -> Result<CheckResult> {
    let dims = [2 + (s % 2) as usize, 2, 2];
    let l = SystemLayout::new([("A", dims[0]), ("B", dims[1]), ("E", dims[2])])?;
    check_ssa_tripartite(&random_state::<f64>(l, s))
}

fn case_chain(s: u64) -> Result<CheckResult> {
    let l = SystemLayout::new([("X", 2), ("Y", 2), ("Z", 2), ("U", 2)])?;
    check_chain_rule(&random_state::<f64>(l, s), &["X"], &["Y"], &["Z"], &["U"])
}

fn case_fannes(s: u64) -> Result<CheckResult> {
    let (rho, sigma) = random_pair::<f64>(2 + (s % 4) as usize, s);
    check_fannes(&rho, &sigma)
}

fn case_convexity(s: u64) -> Result<CheckResult> {
    let e1 = random_extension::<f64>([2, 2, 2], s);
    let e2 = random_extension::<f64>([2, 2, 2], s ^ 0xc0de_0000);
    let mut g = rng::seeded(s, 7);
    check_convexity_identity(&e1, &e2, rng::uniform(&mut g))
}

fn case_flag(s: u64) -> Result<CheckResult> {
    check_flag_identity(&random_ensemble::<f64>(2, 2 + (s % 2) as usize, 1 + (s % 4) as usize, s))
}

fn case_bound_chain(s: u64) -> Result<CheckResult> {
    let l = SystemLayout::new([("A", 2), ("B", 2)])?;
    let cfg = OptimizerConfig {
        restarts: 4,
        max_iters: 300,
        seed: s,
        ..OptimizerConfig::default()
    };
    check_bound_chain(&random_state::<f64>(l, s), &cfg)
}

fn case_distillation(s: u64) -> Result<CheckResult> {
    let l = SystemLayout::new([("A", 2), ("B", 2)])?;
    let target = embedded_max_entangled::<f64>(&l, 2)?;
    let noise = DensityOperator::random(l, 4, s)?;
    let mut g = rng::seeded(s, 8);
    let p = 0.05 * rng::uniform::<f64>(&mut g);
    check_distillation_estimate(&target.mix(1.0 - p, &noise)?, 2, s, 6)
}

fn case_monotone(s: u64) -> Result<CheckResult> {
    let mut g = rng::seeded(s, 9);
    let kraus = 1 + (rng::uniform::<f64>(&mut g) * 2.0) as usize;
    let ext = random_extension::<f64>([2, 2, 2], s);
    check_monotonicity(&ext, &random_instrument(2, 2, kraus.min(2), s))
}

fn case_additivity(s: u64) -> Result<CheckResult> {
    let e1 = random_extension::<f64>([2, 2, 2], s);
    let l = SystemLayout::new([("A'", 2), ("B'", 2), ("E'", 1 + (s % 2) as usize)])?;
    let e2 = Extension::new(random_state::<f64>(l, s ^ 0xadd0_0000), &["A'"], &["B'"], &["E'"])?;
    check_additivity(&e1, &e2)
}

fn case_superadditivity(s: u64) -> Result<CheckResult> {
    let l = SystemLayout::new([("A", 2), ("A'", 2), ("B", 2), ("B'", 2), ("E", 2)])?;
    check_superadditivity(&random_state::<f64>(l, s), "A", "A'", "B", "B'", "E")
}

fn case_classical_fannes(s: u64) -> Result<CheckResult> {
    let (rho, sigma) = random_classical_pair::<f64>(s);
    check_classical_fannes(&rho, &sigma)
}

fn case_intrinsic(s: u64) -> Result<CheckResult> {
    let p = ClassicalJoint::<f64>::random([2, 2, 2 + (s % 2) as usize], s)?;
    let cfg = OptimizerConfig {
        restarts: 4,
        max_iters: 500,
        seed: s,
        ..OptimizerConfig::default()
    };
    let r = intrinsic_information(&p, &cfg)?;
    let again = shannon_cmi(&apply_z_channel(&p, &r.channel)?);
    let cap = shannon_cmi(&p).min(shannon_mi(&p));
    let steps = vec![CheckResult::equal("intrinsic_certificate", "", again, r.value, EXACT)];
    Ok(CheckResult::at_most("intrinsic_candidates", "", r.value, cap, EXACT).with_steps(steps))
}

fn suite_cases(suite: &str) -> Result<Vec<(&'static str, CaseFn, usize)>> {
    // (name, case, multiplier relative to n)
    let entropy: Vec<(&'static str, CaseFn, usize)> =
        vec![("ssa", case_ssa, 1), ("chain_rule", case_chain, 1), ("fannes", case_fannes, 1)];
    let extensions: Vec<(&'static str, CaseFn, usize)> = vec![
        ("convexity_identity", case_convexity, 1),
        ("flag_identity", case_flag, 1),
        ("bound_chain", case_bound_chain, 1),
        ("distillation_estimate", case_distillation, 1),
    ];
    let monotone: Vec<(&'static str, CaseFn, usize)> = vec![("monotonicity", case_monotone, 1)];
    let additivity: Vec<(&'static str, CaseFn, usize)> = vec![
        ("additivity", case_additivity, 1),
        ("superadditivity", case_superadditivity, 1),
    ];
    let classical: Vec<(&'static str, CaseFn, usize)> = vec![
        ("classical_cond_fannes", case_classical_fannes, 1),
        ("intrinsic_candidates", case_intrinsic, 1),
    ];
    Ok(match suite {
        "entropy" => entropy,
        "extensions" => extensions,
        "monotone" => monotone,
        "additivity" => additivity,
        "classical" => classical,
        "all" => [entropy, extensions, monotone, additivity, classical].concat(),
        other => {
            return Err(Error::Parse(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    })
}

/// Manifest and results of a named suite with `n` cases per check.
pub fn run_suite(suite: &str, seed: u64, n: usize) -> Result<(SuiteManifest, Vec<CheckResult>)> {
    let cases = suite_cases(suite)?;
    let manifest = SuiteManifest {
        suite: suite.to_string(),
        seed,
        n,
        seeds: [seed, seed + n as u64],
        checks: cases.iter().map(|(name, _, _)| name.to_string()).collect(),
    };
    let mut results = Vec::new();
    for (name, f, mult) in cases {
        let rs = sweep(seed, n * mult, f);
        for r in &rs {
            if !r.passed {
                log::error!("{name} failed: {}", r.to_json_line());
            }
        }
        results.extend(rs);
    }
    Ok((manifest, results))
}
