//! Small hand-built automata with known acceptance behaviour.

use std::collections::BTreeMap;

use crate::e1qfa::{E1qfa, E1qfaDef};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::mm1qfa::{Mm1qfa, Mm1qfaDef, DEFAULT_TOL_VALID};

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// `[[cos t, -sin t], [sin t, cos t]]`.
pub fn rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).expect("2x2")
}

/// Two states `q1` (non-halting, initial) and `q2` (accepting); every
/// symbol and `$` rotate by `theta`.
pub fn rot_def(theta: f64) -> Mm1qfaDef {
    rot_def_over(theta, &["a"])
}

fn rot_def_over(theta: f64, alphabet: &[&str]) -> Mm1qfaDef {
    let r = rotation(theta);
    let mut transitions: BTreeMap<String, ComplexMatrix> = alphabet
        .iter()
        .map(|s| (s.to_string(), r.clone()))
        .collect();
    transitions.insert("$".into(), r);
    Mm1qfaDef {
        states: names(&["q1", "q2"]),
        accepting: names(&["q2"]),
        rejecting: vec![],
        alphabet: names(alphabet),
        transitions,
        initial: ComplexVector::basis(2, 0),
    }
}

pub fn rot(theta: f64) -> Mm1qfa {
    Mm1qfa::new(rot_def(theta), DEFAULT_TOL_VALID).expect("valid")
}

pub fn rot_over(theta: f64, alphabet: &[&str]) -> Mm1qfa {
    Mm1qfa::new(rot_def_over(theta, alphabet), DEFAULT_TOL_VALID).expect("valid")
}

fn one_state(accepting: bool) -> Mm1qfaDef {
    let one = ComplexMatrix::identity(1);
    Mm1qfaDef {
        states: names(&["q1"]),
        accepting: if accepting { names(&["q1"]) } else { vec![] },
        rejecting: vec![],
        alphabet: names(&["a"]),
        transitions: [("a".to_string(), one.clone()), ("$".to_string(), one)].into(),
        initial: ComplexVector::basis(1, 0),
    }
}

/// One accepting state: accepts every word with probability 1.
pub fn all1() -> Mm1qfa {
    Mm1qfa::new(one_state(true), DEFAULT_TOL_VALID).expect("valid")
}

/// One non-halting state: accepts nothing.
pub fn none() -> Mm1qfa {
    Mm1qfa::new(one_state(false), DEFAULT_TOL_VALID).expect("valid")
}

/// Two states, `q2` accepting, all unitaries the identity.
pub fn identity_mm() -> Mm1qfa {
    let mut def = rot_def(0.0);
    for u in def.transitions.values_mut() {
        *u = ComplexMatrix::identity(2);
    }
    Mm1qfa::new(def, DEFAULT_TOL_VALID).expect("valid")
}

/// E-1QFA analogue of [`rot_def`] with `#` acting as the identity.
pub fn e_rot_def(theta: f64) -> E1qfaDef {
    let r = rotation(theta);
    E1qfaDef {
        states: names(&["q1", "q2"]),
        accepting: names(&["q2"]),
        rejecting: vec![],
        alphabet: names(&["a"]),
        superoperators: [
            ("#".to_string(), vec![ComplexMatrix::identity(2)]),
            ("a".to_string(), vec![r.clone()]),
            ("$".to_string(), vec![r]),
        ]
        .into(),
        initial_state: "q1".into(),
    }
}

pub fn e_rot(theta: f64) -> E1qfa {
    E1qfa::new(e_rot_def(theta), DEFAULT_TOL_VALID).expect("valid")
}

fn e_one_state(accepting: bool) -> E1qfa {
    let one = vec![ComplexMatrix::identity(1)];
    E1qfa::new(
        E1qfaDef {
            states: names(&["q1"]),
            accepting: if accepting { names(&["q1"]) } else { vec![] },
            rejecting: vec![],
            alphabet: names(&["a"]),
            superoperators: [
                ("#".to_string(), one.clone()),
                ("a".to_string(), one.clone()),
                ("$".to_string(), one),
            ]
            .into(),
            initial_state: "q1".into(),
        },
        DEFAULT_TOL_VALID,
    )
    .expect("valid")
}

/// Initial state accepting: every word accepted at the `#` measurement.
pub fn e_all1() -> E1qfa {
    e_one_state(true)
}

pub fn e_none() -> E1qfa {
    e_one_state(false)
}

/// Two states, `q2` accepting, every superoperator the identity channel.
pub fn e_identity() -> E1qfa {
    let mut def = e_rot_def(0.0);
    for k in def.superoperators.values_mut() {
        *k = vec![ComplexMatrix::identity(2)];
    }
    E1qfa::new(def, DEFAULT_TOL_VALID).expect("valid")
}
