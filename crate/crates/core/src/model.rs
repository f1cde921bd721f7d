//! Pieces shared by both automaton models: alphabets, words, the state
//! partition and its projectors, validation errors, and the forward-pass
//! interface used by the enumeration oracle.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Right end-marker.
pub const END_MARKER: &str = "$";
/// Left end-marker (E-1QFA only).
pub const LEFT_MARKER: &str = "#";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("matrix for symbol {0:?} is not unitary (defect {1:.3e})")]
    NonUnitary(String, f64),
    #[error("initial vector is not a unit vector (norm {0})")]
    InitialNotUnit(f64),
    #[error("state {0:?} is both accepting and rejecting")]
    OverlappingPartition(String),
    #[error("missing transition matrix for the end-marker \"$\"")]
    MissingEndmarkMatrix,
    #[error("missing superoperator for end-marker {0:?}")]
    MissingEndmarker(String),
    #[error("missing transition for symbol {0:?}")]
    MissingTransition(String),
    #[error("transition given for symbol {0:?} which is not in the alphabet")]
    UnexpectedSymbol(String),
    #[error("Kraus operators for symbol {0:?} are not complete (defect {1:.3e})")]
    IncompleteKraus(String, f64),
    #[error("superoperator for symbol {0:?} has no Kraus operators")]
    EmptyKraus(String),
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("reserved symbol {0:?} used in alphabet")]
    ReservedSymbol(String),
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("automaton has no states")]
    NoStates,
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("initial vector is not a basis state on a non-halting state")]
    NotEmbeddable,
}

impl ValidationError {
    pub(crate) fn shape(
        what: impl Into<String>,
        expected: impl fmt::Display,
        found: impl fmt::Display,
    ) -> Self {
        Self::ShapeMismatch {
            what: what.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("symbol index {0} is not in the alphabet")]
    UnknownSymbol(usize),
    #[error("unknown symbol {0:?}")]
    UnknownSymbolName(String),
    #[error("word must be non-empty")]
    EmptyWord,
}

/// Ordered input alphabet; `#` and `$` are never members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self, ValidationError> {
        if symbols.is_empty() {
            return Err(ValidationError::EmptyAlphabet);
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if s == END_MARKER || s == LEFT_MARKER {
                return Err(ValidationError::ReservedSymbol(s.clone()));
            }
            if !seen.insert(s.as_str()) {
                return Err(ValidationError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// `a`, `b`, `c`, ... (or `s0`, `s1`, ... past 26 symbols).
    pub fn letters(k: usize) -> Self {
        let symbols = (0..k)
            .map(|i| {
                if k <= 26 {
                    char::from(b'a' + i as u8).to_string()
                } else {
                    format!("s{i}")
                }
            })
            .collect();
        Self::new(symbols).expect("generated alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, sym: usize) -> &str {
        &self.symbols[sym]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    /// Parses a word written on the command line: concatenated characters
    /// when every symbol is a single character, otherwise comma-separated.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        if text.is_empty() {
            return Ok(Word::empty());
        }
        let single_chars = self.symbols.iter().all(|s| s.chars().count() == 1);
        let tokens: Vec<String> = if single_chars && !text.contains(',') {
            text.chars().map(String::from).collect()
        } else {
            text.split(',').map(|t| t.trim().to_string()).collect()
        };
        tokens
            .into_iter()
            .map(|t| self.index_of(&t).ok_or(WordError::UnknownSymbolName(t)))
            .collect::<Result<Vec<_>, _>>()
            .map(Word::from)
    }

    pub fn render(&self, word: &Word) -> String {
        let single_chars = self.symbols.iter().all(|s| s.chars().count() == 1);
        let names = word.symbols().iter().map(|&s| self.name(s));
        if single_chars {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(",")
        }
    }

    pub fn check(&self, word: &Word) -> Result<(), WordError> {
        match word.symbols().iter().find(|&&s| s >= self.len()) {
            Some(&s) => Err(WordError::UnknownSymbol(s)),
            None => Ok(()),
        }
    }
}

/// A word over an alphabet, stored as symbol indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `y` followed by `self`.
    pub fn prepend(&self, y: usize) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(y);
        v.extend_from_slice(&self.0);
        Self(v)
    }

    pub fn append(&self, y: usize) -> Self {
        let mut v = self.0.clone();
        v.push(y);
        Self(v)
    }

    /// The word with its last symbol removed (`None` for the empty word).
    pub fn without_last(&self) -> Option<Self> {
        self.0.split_last().map(|(_, rest)| Self(rest.to_vec()))
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Length-then-lexicographic order on symbol indices.
    pub fn shortlex_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Accept / go / reject split of the state set, with its three diagonal
/// projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    accepting: BTreeSet<usize>,
    rejecting: BTreeSet<usize>,
    accept: ComplexMatrix,
    go: ComplexMatrix,
    reject: ComplexMatrix,
}

impl Partition {
    /// Resolves state names against `states`; indices follow `states` order.
    pub fn from_names(
        states: &[String],
        accepting: &[String],
        rejecting: &[String],
    ) -> Result<Self, ValidationError> {
        if states.is_empty() {
            return Err(ValidationError::NoStates);
        }
        let mut seen = HashSet::new();
        for s in states {
            if !seen.insert(s.as_str()) {
                return Err(ValidationError::DuplicateState(s.clone()));
            }
        }
        let lookup = |names: &[String]| -> Result<BTreeSet<usize>, ValidationError> {
            names
                .iter()
                .map(|n| {
                    states
                        .iter()
                        .position(|s| s == n)
                        .ok_or_else(|| ValidationError::UnknownState(n.clone()))
                })
                .collect()
        };
        let acc = lookup(accepting)?;
        let rej = lookup(rejecting)?;
        if let Some(&q) = acc.intersection(&rej).next() {
            return Err(ValidationError::OverlappingPartition(states[q].clone()));
        }
        Ok(Self::from_indices(states.len(), acc, rej))
    }

    pub(crate) fn from_indices(
        n: usize,
        accepting: BTreeSet<usize>,
        rejecting: BTreeSet<usize>,
    ) -> Self {
        debug_assert!(accepting.is_disjoint(&rejecting));
        let mask = |set: &BTreeSet<usize>| -> Vec<f64> {
            (0..n)
                .map(|i| f64::from(u8::from(set.contains(&i))))
                .collect()
        };
        let go_diag: Vec<f64> = (0..n)
            .map(|i| f64::from(u8::from(!accepting.contains(&i) && !rejecting.contains(&i))))
            .collect();
        Self {
            accept: ComplexMatrix::diagonal(&mask(&accepting)),
            go: ComplexMatrix::diagonal(&go_diag),
            reject: ComplexMatrix::diagonal(&mask(&rejecting)),
            accepting,
            rejecting,
        }
    }

    pub fn size(&self) -> usize {
        self.accept.rows()
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn rejecting(&self) -> &BTreeSet<usize> {
        &self.rejecting
    }

    pub fn is_halting(&self, q: usize) -> bool {
        self.accepting.contains(&q) || self.rejecting.contains(&q)
    }

    /// Projector onto the accepting states.
    pub fn accept(&self) -> &ComplexMatrix {
        &self.accept
    }

    /// Projector onto the non-halting states.
    pub fn go(&self) -> &ComplexMatrix {
        &self.go
    }

    /// Projector onto the rejecting states.
    pub fn reject(&self) -> &ComplexMatrix {
        &self.reject
    }

    /// Partition of the diagonal sum, second automaton's states shifted by
    /// `self.size()`.
    pub fn diag_sum(&self, other: &Self) -> Self {
        let off = self.size();
        let shift = |a: &BTreeSet<usize>, b: &BTreeSet<usize>| -> BTreeSet<usize> {
            a.iter().copied().chain(b.iter().map(|q| q + off)).collect()
        };
        Self::from_indices(
            off + other.size(),
            shift(&self.accepting, &other.accepting),
            shift(&self.rejecting, &other.rejecting),
        )
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_indices(
            self.size(),
            self.accepting.iter().map(|&q| perm[q]).collect(),
            self.rejecting.iter().map(|&q| perm[q]).collect(),
        )
    }
}

/// Forward-pass view of an automaton's word function: a configuration
/// after the prefix read so far, plus the acceptance mass already
/// collected. `accept_prob` of a word is the collected mass after the last
/// symbol plus `finish` of the final configuration.
pub trait WordFunction: Sync {
    type Config: Clone + Send + Sync;

    fn alphabet(&self) -> &Alphabet;

    fn num_states(&self) -> usize;

    /// Configuration before the first input symbol, with the mass accepted
    /// so far (non-zero only when a left end-marker is read).
    fn start(&self) -> (Self::Config, f64);

    /// Reads `sym`; returns the projected configuration and the mass
    /// accepted at this step.
    fn step(&self, config: &Self::Config, sym: usize) -> (Self::Config, f64);

    /// Mass accepted when the right end-marker is read.
    fn finish(&self, config: &Self::Config) -> f64;

    fn word_prob(&self, word: &Word) -> Result<f64, WordError> {
        self.alphabet().check(word)?;
        let (mut config, mut acc) = self.start();
        for &s in word.symbols() {
            let (next, p) = self.step(&config, s);
            config = next;
            acc += p;
        }
        Ok(acc + self.finish(&config))
    }
}
