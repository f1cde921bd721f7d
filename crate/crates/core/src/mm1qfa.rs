//! Measure-many one-way quantum finite automata.
//!
//! After every input symbol (and the end-marker `$`) the automaton applies
//! that symbol's unitary and measures the accept / go / reject observable.
//! Acceptance mass is collected at each measurement; only the "go"
//! component continues.

use std::collections::BTreeMap;

use crate::linalg::{diag_sum, ComplexMatrix, ComplexVector};
use crate::model::{
    Alphabet, Partition, ValidationError, Word, WordError, WordFunction, END_MARKER,
};

pub const DEFAULT_TOL_VALID: f64 = 1e-8;

/// Unvalidated description of an MM-1QFA, keyed by state and symbol names.
#[derive(Debug, Clone, PartialEq)]
pub struct Mm1qfaDef {
    pub states: Vec<String>,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    pub alphabet: Vec<String>,
    /// One matrix per alphabet symbol plus `"$"`.
    pub transitions: BTreeMap<String, ComplexMatrix>,
    pub initial: ComplexVector,
}

/// Checks every structural invariant of `def`, reporting the first violation.
pub fn validate_mm(def: &Mm1qfaDef, tol_valid: f64) -> Result<(), ValidationError> {
    Mm1qfa::new(def.clone(), tol_valid).map(|_| ())
}

/// A validated MM-1QFA. Immutable; all evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Mm1qfa {
    states: Vec<String>,
    alphabet: Alphabet,
    partition: Partition,
    unitaries: Vec<ComplexMatrix>,
    endmark: ComplexMatrix,
    initial: ComplexVector,
}

impl Mm1qfa {
    pub fn new(mut def: Mm1qfaDef, tol_valid: f64) -> Result<Self, ValidationError> {
        let alphabet = Alphabet::new(def.alphabet.clone())?;
        let partition = Partition::from_names(&def.states, &def.accepting, &def.rejecting)?;
        let m = def.states.len();

        if let Some(extra) = def
            .transitions
            .keys()
            .find(|k| k.as_str() != END_MARKER && alphabet.index_of(k).is_none())
        {
            return Err(ValidationError::UnexpectedSymbol(extra.clone()));
        }
        for (sym, u) in &def.transitions {
            if u.shape() != (m, m) {
                return Err(ValidationError::shape(
                    format!("transition {sym:?}"),
                    format!("{m}x{m}"),
                    format!("{}x{}", u.rows(), u.cols()),
                ));
            }
        }
        if def.initial.dim() != m {
            return Err(ValidationError::shape(
                "initial vector",
                m,
                def.initial.dim(),
            ));
        }
        let endmark = def
            .transitions
            .remove(END_MARKER)
            .ok_or(ValidationError::MissingEndmarkMatrix)?;
        let mut unitaries = Vec::with_capacity(alphabet.len());
        for sym in alphabet.symbols() {
            let u = def
                .transitions
                .remove(sym)
                .ok_or_else(|| ValidationError::MissingTransition(sym.clone()))?;
            unitaries.push(u);
        }
        for (sym, u) in alphabet
            .symbols()
            .iter()
            .map(String::as_str)
            .zip(&unitaries)
            .chain(std::iter::once((END_MARKER, &endmark)))
        {
            let defect = u.unitarity_defect().unwrap_or(f64::INFINITY);
            if defect > tol_valid {
                return Err(ValidationError::NonUnitary(sym.to_string(), defect));
            }
        }
        let norm = def.initial.norm();
        if (norm - 1.0).abs() > tol_valid {
            return Err(ValidationError::InitialNotUnit(norm));
        }
        Ok(Self {
            states: def.states,
            alphabet,
            partition,
            unitaries,
            endmark,
            initial: def.initial,
        })
    }

    pub fn to_def(&self) -> Mm1qfaDef {
        let names = |set: &std::collections::BTreeSet<usize>| {
            set.iter().map(|&q| self.states[q].clone()).collect()
        };
        let mut transitions: BTreeMap<String, ComplexMatrix> = self
            .alphabet
            .symbols()
            .iter()
            .cloned()
            .zip(self.unitaries.iter().cloned())
            .collect();
        transitions.insert(END_MARKER.to_string(), self.endmark.clone());
        Mm1qfaDef {
            states: self.states.clone(),
            accepting: names(self.partition.accepting()),
            rejecting: names(self.partition.rejecting()),
            alphabet: self.alphabet.symbols().to_vec(),
            transitions,
            initial: self.initial.clone(),
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn initial(&self) -> &ComplexVector {
        &self.initial
    }

    pub fn unitary(&self, sym: usize) -> &ComplexMatrix {
        &self.unitaries[sym]
    }

    pub fn endmark_unitary(&self) -> &ComplexMatrix {
        &self.endmark
    }

    /// Acceptance probability of `word` followed by `$`.
    pub fn accept_prob(&self, word: &Word) -> Result<f64, WordError> {
        self.word_prob(word)
    }

    /// Acceptance mass collected after each measurement: entry `k` is the
    /// total after reading the first `k+1` symbols of `word$`. The last
    /// entry equals `accept_prob(word)`.
    pub fn halting_profile(&self, word: &Word) -> Result<Vec<f64>, WordError> {
        self.alphabet.check(word)?;
        let (mut v, mut acc) = self.start();
        let mut out = Vec::with_capacity(word.len() + 1);
        for &s in word.symbols() {
            let (next, p) = self.step(&v, s);
            v = next;
            acc += p;
            out.push(acc);
        }
        out.push(acc + self.finish(&v));
        Ok(out)
    }

    /// Increment of the acceptance probability contributed by the last
    /// symbol of `word`; for the empty word, the acceptance probability.
    pub fn noncumulative(&self, word: &Word) -> Result<f64, WordError> {
        let p = self.accept_prob(word)?;
        match word.without_last() {
            Some(prefix) => Ok(p - self.accept_prob(&prefix)?),
            None => Ok(p),
        }
    }

    /// `P(g) U(sym)`.
    pub fn go_operator(&self, sym: usize) -> ComplexMatrix {
        self.partition.go() * &self.unitaries[sym]
    }

    /// `U($)† P(a) U($)`: the matrix whose bilinear form at the initial
    /// vector gives the acceptance probability of the empty word.
    pub fn eta_epsilon(&self) -> ComplexMatrix {
        self.endmark.congruence(self.partition.accept())
    }

    /// `U(x)† P(a) U(x) + A(x)† η(ε) A(x) − η(ε)` with `A(x) = P(g) U(x)`.
    pub fn delta(&self, sym: usize) -> Result<ComplexMatrix, WordError> {
        if sym >= self.alphabet.len() {
            return Err(WordError::UnknownSymbol(sym));
        }
        let eta_eps = self.eta_epsilon();
        let direct = self.unitaries[sym].congruence(self.partition.accept());
        let deferred = self.go_operator(sym).congruence(&eta_eps);
        Ok(&(&direct + &deferred) - &eta_eps)
    }

    /// The Hermitian matrix `η(word)` with `<π|η(word)|π> = noncumulative(word)`.
    ///
    /// Built from `δ(last symbol)` by conjugating with `A(y)` for each earlier
    /// symbol `y`, innermost (closest to the end) first.
    pub fn eta(&self, word: &Word) -> Result<ComplexMatrix, WordError> {
        self.alphabet.check(word)?;
        let Some((&last, rest)) = word.symbols().split_last() else {
            return Ok(self.eta_epsilon());
        };
        let mut eta = self.delta(last)?;
        for &y in rest.iter().rev() {
            eta = self.go_operator(y).congruence(&eta);
        }
        Ok(eta)
    }

    /// Diagonal sum with `other` over the same alphabet, started from `init`.
    /// State names are prefixed `1:` and `2:`.
    pub fn diag_sum(&self, other: &Self, init: ComplexVector) -> Result<Self, ValidationError> {
        if self.alphabet != other.alphabet {
            return Err(ValidationError::AlphabetMismatch);
        }
        let n = self.size() + other.size();
        if init.dim() != n {
            return Err(ValidationError::shape("initial vector", n, init.dim()));
        }
        let norm = init.norm();
        if (norm - 1.0).abs() > DEFAULT_TOL_VALID {
            return Err(ValidationError::InitialNotUnit(norm));
        }
        let sum = |a: &ComplexMatrix, b: &ComplexMatrix| diag_sum(a, b).expect("square blocks");
        let states = self
            .states
            .iter()
            .map(|q| format!("1:{q}"))
            .chain(other.states.iter().map(|q| format!("2:{q}")))
            .collect();
        Ok(Self {
            states,
            alphabet: self.alphabet.clone(),
            partition: self.partition.diag_sum(&other.partition),
            unitaries: self
                .unitaries
                .iter()
                .zip(&other.unitaries)
                .map(|(a, b)| sum(a, b))
                .collect(),
            endmark: sum(&self.endmark, &other.endmark),
            initial: init,
        })
    }

    /// The same automaton with state `i` renamed to position `perm[i]` and
    /// every matrix and vector conjugated accordingly.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.size(), "permutation size mismatch");
        let mut states = vec![String::new(); self.size()];
        for (i, q) in self.states.iter().enumerate() {
            states[perm[i]] = q.clone();
        }
        Self {
            states,
            alphabet: self.alphabet.clone(),
            partition: self.partition.permuted(perm),
            unitaries: self.unitaries.iter().map(|u| u.permuted(perm)).collect(),
            endmark: self.endmark.permuted(perm),
            initial: self.initial.permuted(perm),
        }
    }

    /// Replaces the unitary of `sym` (`None` for `$`) by `f(U)`.
    pub fn map_unitary(
        &self,
        sym: Option<usize>,
        f: impl FnOnce(&ComplexMatrix) -> ComplexMatrix,
    ) -> Self {
        let mut out = self.clone();
        match sym {
            Some(s) => out.unitaries[s] = f(&self.unitaries[s]),
            None => out.endmark = f(&self.endmark),
        }
        out
    }
}

impl WordFunction for Mm1qfa {
    type Config = ComplexVector;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn num_states(&self) -> usize {
        self.size()
    }

    fn start(&self) -> (ComplexVector, f64) {
        (self.initial.clone(), 0.0)
    }

    fn step(&self, v: &ComplexVector, sym: usize) -> (ComplexVector, f64) {
        let moved = self.unitaries[sym].mul_vec(v);
        let accepted = self.partition.accept().mul_vec(&moved).norm_sqr();
        (self.partition.go().mul_vec(&moved), accepted)
    }

    fn finish(&self, v: &ComplexVector) -> f64 {
        self.partition
            .accept()
            .mul_vec(&self.endmark.mul_vec(v))
            .norm_sqr()
    }
}
