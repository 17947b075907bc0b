//! JSON file formats.
//!
//! State files are `{"layout":[{"label":"A","dim":2},...],"matrix":[[[re,im],...],...]}`
//! with the matrix row-major in layout order; joint distributions are
//! `{"shape":[nx,ny,nz],"p":[...]}`. Writers print every number with 17
//! significant digits, so reading a file and writing it again reproduces it
//! byte for byte.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::channel::QuantumChannel;
use crate::classical::{ClassicalJoint, IntrinsicResult, StochasticChannel};
use crate::error::{Error, Result};
use crate::extensions::Ensemble;
use crate::layout::{Subsystem, SystemLayout};
use crate::linalg::{CMat, CVec};
use crate::optimizer::BoundReport;
use crate::scalar::{c, Real};
use crate::state::DensityOperator;

fn num(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0" so that the sign of zero never changes the bytes.
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialise")
}

fn layout_json(layout: &SystemLayout) -> String {
    let items: Vec<String> = layout
        .systems()
        .iter()
        .map(|s| format!("{{\"label\": {}, \"dim\": {}}}", quote(&s.label), s.dim))
        .collect();
    format!("[{}]", items.join(", "))
}

/// Serialise a state in the state-file format.
pub fn write_state<T: Real>(rho: &DensityOperator<T>) -> String {
    let m = rho.matrix();
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    format!("[{}, {}]", num(z.re.as_f64()), num(z.im.as_f64()))
                })
                .collect();
            format!("    [{}]", cells.join(", "))
        })
        .collect();
    format!(
        "{{\n  \"layout\": {},\n  \"matrix\": [\n{}\n  ]\n}}\n",
        layout_json(rho.layout()),
        rows.join(",\n")
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    layout: Vec<Subsystem>,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Parse a state file. Malformed JSON is a [`Error::Parse`]; a matrix that
/// does not match the layout or is not a density operator is reported by
/// the corresponding shape or invariant error.
pub fn read_state<T: Real>(text: &str) -> Result<DensityOperator<T>> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let layout = SystemLayout::from_subsystems(file.layout)?;
    let d = layout.total_dim();
    if file.matrix.len() != d || file.matrix.iter().any(|r| r.len() != d) {
        return Err(Error::Shape(format!(
            "matrix must be {d}x{d} for layout {layout}"
        )));
    }
    let m = CMat::from_fn(d, d, |i, j| {
        let [re, im] = file.matrix[i][j];
        c(T::lit(re), T::lit(im))
    });
    DensityOperator::new(layout, m)
}

/// Serialise a joint distribution in the joint-file format.
pub fn write_joint<T: Real>(p: &ClassicalJoint<T>) -> String {
    let [nx, ny, nz] = p.shape();
    let probs: Vec<String> = p.probs().iter().map(|x| num(x.as_f64())).collect();
    format!(
        "{{\n  \"shape\": [{nx}, {ny}, {nz}],\n  \"p\": [{}]\n}}\n",
        probs.join(", ")
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    shape: [usize; 3],
    p: Vec<f64>,
}

pub fn read_joint<T: Real>(text: &str) -> Result<ClassicalJoint<T>> {
    let file: JointFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    ClassicalJoint::new(file.shape, file.p.into_iter().map(T::lit).collect())
}

fn complex_matrix_json<T: Real>(m: &CMat<T>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn complex_vector_json<T: Real>(v: &CVec<T>) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re.as_f64(), z.im.as_f64()])).collect())
}

pub fn channel_json<T: Real>(ch: &QuantumChannel<T>) -> Value {
    json!({
        "d_in": ch.d_in(),
        "d_out": ch.d_out(),
        "d_env": ch.d_env(),
        "isometry": complex_matrix_json(ch.isometry()),
    })
}

pub fn ensemble_json<T: Real>(ens: &Ensemble<T>) -> Value {
    Value::Array(
        ens.entries()
            .iter()
            .map(|(p, s)| json!({"weight": p.as_f64(), "state": complex_vector_json(s.vector())}))
            .collect(),
    )
}

pub fn stochastic_json<T: Real>(ch: &StochasticChannel<T>) -> Value {
    let rows: Vec<Vec<f64>> = (0..ch.n_in())
        .map(|z| ch.row(z).iter().map(|x| x.as_f64()).collect())
        .collect();
    json!({"n_in": ch.n_in(), "n_out": ch.n_out(), "rows": rows})
}

/// JSON object for a bound report. Upper bounds are labelled as such.
pub fn report_json<T: Real>(rep: &BoundReport<T>) -> Value {
    json!({
        "hashing_lower": rep.hashing_lower.as_f64(),
        "hashing_lower_clamped": rep.hashing_clamped.as_f64(),
        "squashed_upper": rep.squashed_upper.as_f64(),
        "eof_upper": rep.eof_upper.as_f64(),
        "mutual_info_half": rep.mutual_info_half.as_f64(),
        "marginal_trace_distance": rep.marginal_trace_distance.as_f64(),
        "labels": {
            "hashing_lower": "lower bound on squashed entanglement",
            "squashed_upper": "upper bound on squashed entanglement",
            "eof_upper": "upper bound on entanglement of formation",
            "mutual_info_half": "trivial-extension value",
        },
        "squashed_source": rep.squashed_source,
        "squashed_stop": rep.squashed_stop,
        "eof_stop": rep.eof_stop,
        "config": rep.config,
        "ensemble_size": rep.ensemble_size,
        "squashed_channel": channel_json(&rep.squashed_channel),
        "eof_ensemble": ensemble_json(&rep.eof_ensemble),
    })
}

pub fn intrinsic_json<T: Real>(res: &IntrinsicResult<T>) -> Value {
    json!({
        "intrinsic_upper": res.value.as_f64(),
        "label": "upper bound on intrinsic information",
        "stop": res.stop,
        "channel": stochastic_json(&res.channel),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;

    #[test]
    fn state_round_trip_is_byte_identical() {
        let rho = DensityOperator::<f64>::random(SystemLayout::new([("A", 2), ("B", 3)]).unwrap(), 3, 4).unwrap();
        let text = write_state(&rho);
        let back = read_state::<f64>(&text).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(write_state(&back), text);
    }

    #[test]
    fn writer_keeps_enough_digits() {
        let rho = PureState::<f64>::maximally_entangled("A", "B", 2).unwrap().to_density();
        let text = write_state(&rho);
        assert!(text.contains("4.9999999999999989e-1") || text.contains("5.0000000000000000e-1"));
        assert!(!text.contains("-0.0"));
    }

    #[test]
    fn malformed_and_invalid_states() {
        assert!(matches!(read_state::<f64>("{\"layout\": ["), Err(Error::Parse(_))));
        assert!(matches!(read_state::<f64>("{\"matrix\": []}"), Err(Error::Parse(_))));
        let bad_shape = r#"{"layout":[{"label":"A","dim":2}],"matrix":[[[1,0]]]}"#;
        assert!(matches!(read_state::<f64>(bad_shape), Err(Error::Shape(_))));
        let not_psd = r#"{"layout":[{"label":"A","dim":2}],"matrix":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#;
        assert!(matches!(read_state::<f64>(not_psd), Err(Error::InvariantViolation(_))));
        let clash = r#"{"layout":[{"label":"A","dim":1},{"label":"A","dim":1}],"matrix":[[[1,0]]]}"#;
        assert!(matches!(read_state::<f64>(clash), Err(Error::LabelClash(_))));
    }

    #[test]
    fn joint_round_trip() {
        let p = ClassicalJoint::<f64>::random([2, 3, 2], 5).unwrap();
        let text = write_joint(&p);
        let back = read_joint::<f64>(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(write_joint(&back), text);
        assert!(matches!(
            read_joint::<f64>(r#"{"shape":[1,1,2],"p":[0.6,0.6]}"#),
            Err(Error::InvariantViolation(_))
        ));
    }
}
