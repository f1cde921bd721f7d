//! JSON automaton files.
//!
//! ```json
//! {
//!   "model": "mm1qfa",
//!   "alphabet": ["a"],
//!   "states": ["q1", "q2"],
//!   "accepting": ["q2"],
//!   "rejecting": [],
//!   "initial": [[1.0, 0.0], [0.0, 0.0]],
//!   "transitions": { "$": [[[1.0, 0.0], [0.0, 0.0]], ...], "a": ... }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows. An
//! `e1qfa` file has `initial_state` (a state name) and `superoperators`
//! (symbol, `#` or `$` to a list of Kraus matrices) instead of `initial` and
//! `transitions`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::e1qfa::{E1qfa, E1qfaDef};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::mm1qfa::{Mm1qfa, Mm1qfaDef};
use crate::model::{Alphabet, ValidationError, END_MARKER, LEFT_MARKER};

type Pair = [f64; 2];
type RawMatrix = Vec<Vec<Pair>>;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid automaton: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mm1qfa,
    E1qfa,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mm1qfa => "mm1qfa",
            ModelKind::E1qfa => "e1qfa",
        }
    }
}

/// On-disk layout. Field order here is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub model: ModelKind,
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BTreeMap<String, RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superoperators: Option<BTreeMap<String, Vec<RawMatrix>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Automaton {
    Mm(Mm1qfa),
    E(E1qfa),
}

impl Automaton {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Automaton::Mm(a) => a.alphabet(),
            Automaton::E(a) => a.alphabet(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Automaton::Mm(a) => a.size(),
            Automaton::E(a) => a.size(),
        }
    }

    pub fn model(&self) -> ModelKind {
        match self {
            Automaton::Mm(_) => ModelKind::Mm1qfa,
            Automaton::E(_) => ModelKind::E1qfa,
        }
    }
}

impl From<Mm1qfa> for Automaton {
    fn from(a: Mm1qfa) -> Self {
        Automaton::Mm(a)
    }
}

impl From<E1qfa> for Automaton {
    fn from(a: E1qfa) -> Self {
        Automaton::E(a)
    }
}

fn parse_err(msg: impl Into<String>) -> FormatError {
    FormatError::Parse(msg.into())
}

fn to_matrix(what: &str, raw: RawMatrix) -> Result<ComplexMatrix, FormatError> {
    let rows = raw
        .into_iter()
        .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(rows).map_err(|e| parse_err(format!("matrix for {what:?}: {e}")))
}

fn from_matrix(m: &ComplexMatrix) -> RawMatrix {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn require<T>(field: Option<T>, name: &str, model: &str) -> Result<T, FormatError> {
    field.ok_or_else(|| parse_err(format!("missing field `{name}` for model {model}")))
}

fn reject<T>(field: &Option<T>, name: &str, model: &str) -> Result<(), FormatError> {
    match field {
        Some(_) => Err(parse_err(format!(
            "field `{name}` does not apply to model {model}"
        ))),
        None => Ok(()),
    }
}

/// Parses and validates an automaton file.
pub fn parse_automaton(text: &str, tol_valid: f64) -> Result<Automaton, FormatError> {
    let file: AutomatonFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if let Some(s) = file
        .alphabet
        .iter()
        .find(|s| *s == END_MARKER || *s == LEFT_MARKER)
    {
        return Err(parse_err(format!("reserved symbol {s:?} in alphabet")));
    }
    match file.model {
        ModelKind::Mm1qfa => {
            reject(&file.initial_state, "initial_state", "mm1qfa")?;
            reject(&file.superoperators, "superoperators", "mm1qfa")?;
            let initial = require(file.initial, "initial", "mm1qfa")?;
            let initial = ComplexVector::new(
                initial
                    .into_iter()
                    .map(|[re, im]| C64::new(re, im))
                    .collect(),
            )
            .map_err(|e| parse_err(format!("initial vector: {e}")))?;
            let transitions = require(file.transitions, "transitions", "mm1qfa")?
                .into_iter()
                .map(|(sym, raw)| Ok((sym.clone(), to_matrix(&sym, raw)?)))
                .collect::<Result<_, FormatError>>()?;
            let def = Mm1qfaDef {
                states: file.states,
                accepting: file.accepting,
                rejecting: file.rejecting,
                alphabet: file.alphabet,
                transitions,
                initial,
            };
            Ok(Automaton::Mm(Mm1qfa::new(def, tol_valid)?))
        }
        ModelKind::E1qfa => {
            reject(&file.initial, "initial", "e1qfa")?;
            reject(&file.transitions, "transitions", "e1qfa")?;
            let initial_state = require(file.initial_state, "initial_state", "e1qfa")?;
            let superoperators = require(file.superoperators, "superoperators", "e1qfa")?
                .into_iter()
                .map(|(sym, list)| {
                    let kraus = list
                        .into_iter()
                        .map(|raw| to_matrix(&sym, raw))
                        .collect::<Result<_, _>>()?;
                    Ok((sym, kraus))
                })
                .collect::<Result<_, FormatError>>()?;
            let def = E1qfaDef {
                states: file.states,
                accepting: file.accepting,
                rejecting: file.rejecting,
                alphabet: file.alphabet,
                superoperators,
                initial_state,
            };
            Ok(Automaton::E(E1qfa::new(def, tol_valid)?))
        }
    }
}

pub fn to_file(a: &Automaton) -> AutomatonFile {
    match a {
        Automaton::Mm(a) => {
            let def = a.to_def();
            AutomatonFile {
                model: ModelKind::Mm1qfa,
                alphabet: def.alphabet,
                states: def.states,
                accepting: def.accepting,
                rejecting: def.rejecting,
                initial: Some(
                    def.initial
                        .as_slice()
                        .iter()
                        .map(|z| [z.re, z.im])
                        .collect(),
                ),
                transitions: Some(
                    def.transitions
                        .iter()
                        .map(|(s, m)| (s.clone(), from_matrix(m)))
                        .collect(),
                ),
                initial_state: None,
                superoperators: None,
            }
        }
        Automaton::E(a) => {
            let def = a.to_def();
            AutomatonFile {
                model: ModelKind::E1qfa,
                alphabet: def.alphabet,
                states: def.states,
                accepting: def.accepting,
                rejecting: def.rejecting,
                initial: None,
                transitions: None,
                initial_state: Some(def.initial_state),
                superoperators: Some(
                    def.superoperators
                        .iter()
                        .map(|(s, ks)| (s.clone(), ks.iter().map(from_matrix).collect()))
                        .collect(),
                ),
            }
        }
    }
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite float")
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn inline<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    format!("[{}]", items.iter().map(f).collect::<Vec<_>>().join(", "))
}

fn pair(p: &Pair) -> String {
    format!("[{}, {}]", number(p[0]), number(p[1]))
}

/// One row per line at `indent`.
fn matrix(m: &RawMatrix, indent: &str) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("{indent}  {}", inline(r, pair)))
        .collect();
    format!("[\n{}\n{indent}]", rows.join(",\n"))
}

fn object<T>(
    map: &BTreeMap<String, T>,
    indent: &str,
    value: impl Fn(&T, &str) -> String,
) -> String {
    let inner = format!("{indent}  ");
    let entries: Vec<String> = map
        .iter()
        .map(|(k, v)| format!("{inner}{}: {}", string(k), value(v, &inner)))
        .collect();
    format!("{{\n{}\n{indent}}}", entries.join(",\n"))
}

/// Canonical JSON text: fixed field order, shortest round-trip floats, one
/// matrix row per line, trailing newline.
pub fn serialize_automaton(a: &Automaton) -> String {
    let file = to_file(a);
    let names = |xs: &[String]| inline(xs, |s| string(s));
    let mut fields = vec![
        ("model", string(file.model.name())),
        ("alphabet", names(&file.alphabet)),
        ("states", names(&file.states)),
        ("accepting", names(&file.accepting)),
        ("rejecting", names(&file.rejecting)),
    ];
    if let Some(v) = &file.initial {
        fields.push(("initial", inline(v, pair)));
    }
    if let Some(t) = &file.transitions {
        fields.push(("transitions", object(t, "  ", matrix)));
    }
    if let Some(q) = &file.initial_state {
        fields.push(("initial_state", string(q)));
    }
    if let Some(s) = &file.superoperators {
        let kraus_list = |ks: &Vec<RawMatrix>, ind: &str| {
            let inner = format!("{ind}  ");
            let ms: Vec<String> = ks
                .iter()
                .map(|m| format!("{inner}{}", matrix(m, &inner)))
                .collect();
            format!("[\n{}\n{ind}]", ms.join(",\n"))
        };
        fields.push(("superoperators", object(s, "  ", kraus_list)));
    }
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("  {}: {v}", string(k)))
        .collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}
