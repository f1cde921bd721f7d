//! Equivalence of two automata over the same alphabet.
//!
//! Two automata are equivalent when every word has the same acceptance
//! probability, which holds iff every per-word increment (the difference
//! between a word's probability and that of the word minus its last
//! symbol) agrees. On the diagonal sum of the two automata each increment is
//! a bilinear form of one Hermitian matrix evaluated at the two embedded
//! initial states, and that matrix family is closed under a prepend-a-symbol
//! congruence. A breadth-first span closure therefore finds at most
//! `n1² + n2²` generating words; comparing the two bilinear forms on those
//! generators decides equivalence.
//!
//! [`enumerate_equiv`] is the brute-force check over every word up to the
//! length bound `n1² + n2² − 1`, used as an independent oracle.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::e1qfa::{E1qfa, Superoperator};
use crate::linalg::{ComplexMatrix, ComplexVector, LinalgError, SpanBasis};
use crate::mm1qfa::Mm1qfa;
use crate::model::{ValidationError, Word, WordError, WordFunction};

/// Enumeration fallback used by the deciders when an increment mismatch
/// cannot be turned into a probability gap above `eq` directly.
const FALLBACK_WORD_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unitarity / Kraus-completeness / unit-norm checks.
    pub valid: f64,
    /// Two probabilities (or increments) are equal when they differ by at most this.
    pub eq: f64,
    /// Relative residual below which a matrix counts as inside a span.
    pub span: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            valid: 1e-8,
            eq: 1e-9,
            span: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("closure basis grew to {size} members, past the bound {bound}; numerical rank inflation, try a larger span tolerance")]
    BoundExceeded { size: usize, bound: usize },
    #[error("no increment mismatch at the given word")]
    NoMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Equivalent,
    NotEquivalent {
        word: Word,
        p1: f64,
        p2: f64,
    },
    /// No difference on any word up to length `t`, which is below the bound
    /// that would make this a proof of equivalence.
    BoundedEquivalent {
        t: usize,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent => write!(f, "Equivalent"),
            Verdict::NotEquivalent { p1, p2, .. } => write!(f, "NotEquivalent ({p1} vs {p2})"),
            Verdict::BoundedEquivalent { t } => {
                write!(f, "BoundedEquivalent (all words up to length {t})")
            }
        }
    }
}

/// Verdict of a closure-based decision plus the basis it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub basis_size: usize,
    pub basis_words: Vec<Word>,
}

/// `n1² + n2²`.
pub fn dimension_bound(n1: usize, n2: usize) -> usize {
    n1 * n1 + n2 * n2
}

/// Length bound `n1² + n2² − 1` past which no new counterexample can appear.
pub fn length_bound(n1: usize, n2: usize) -> usize {
    dimension_bound(n1, n2) - 1
}

/// Number of words of length at most `max_len` over `k` symbols (saturating).
pub fn word_count(k: usize, max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(level);
        level = level.saturating_mul(k as u128);
    }
    total
}

/// The η family of an MM-1QFA diagonal sum.
#[derive(Debug, Clone)]
pub struct EtaSystem {
    n1: usize,
    n2: usize,
    go: Vec<ComplexMatrix>,
    deltas: Vec<ComplexMatrix>,
    eta_epsilon: ComplexMatrix,
    phi: ComplexVector,
    psi: ComplexVector,
}

impl EtaSystem {
    pub fn new(a1: &Mm1qfa, a2: &Mm1qfa) -> Result<Self, EquivError> {
        if a1.alphabet() != a2.alphabet() {
            return Err(EquivError::AlphabetMismatch);
        }
        let (n1, n2) = (a1.size(), a2.size());
        let phi = a1.initial().concat(&ComplexVector::zeros(n2));
        let psi = ComplexVector::zeros(n1).concat(a2.initial());
        let sum = a1.diag_sum(a2, phi.clone())?;
        let k = sum.alphabet().len();
        Ok(Self {
            n1,
            n2,
            go: (0..k).map(|s| sum.go_operator(s)).collect(),
            deltas: (0..k).map(|s| sum.delta(s)).collect::<Result<_, _>>()?,
            eta_epsilon: sum.eta_epsilon(),
            phi,
            psi,
        })
    }

    pub fn go_operator(&self, sym: usize) -> &ComplexMatrix {
        &self.go[sym]
    }

    pub fn delta(&self, sym: usize) -> &ComplexMatrix {
        &self.deltas[sym]
    }

    pub fn eta_epsilon(&self) -> &ComplexMatrix {
        &self.eta_epsilon
    }

    /// `η(yω)` from `η(ω)`.
    pub fn extend(&self, sym: usize, eta: &ComplexMatrix) -> ComplexMatrix {
        self.go[sym].congruence(eta)
    }

    /// `(<φ|M|φ>, <ψ|M|ψ>)`.
    pub fn forms(&self, m: &ComplexMatrix) -> (f64, f64) {
        (m.bilinear(&self.phi).re, m.bilinear(&self.psi).re)
    }

    pub fn embedded_initials(&self) -> (&ComplexVector, &ComplexVector) {
        (&self.phi, &self.psi)
    }

    pub fn bound(&self) -> usize {
        dimension_bound(self.n1, self.n2)
    }

    fn order(&self) -> usize {
        self.n1 + self.n2
    }
}

/// The ϑ / θ family of an E-1QFA diagonal sum.
#[derive(Debug, Clone)]
pub struct ThetaSystem {
    n1: usize,
    n2: usize,
    go: Vec<Superoperator>,
    left_go: Superoperator,
    xis: Vec<ComplexMatrix>,
    theta_epsilon: ComplexMatrix,
    phi: ComplexVector,
    psi: ComplexVector,
}

impl ThetaSystem {
    pub fn new(a1: &E1qfa, a2: &E1qfa) -> Result<Self, EquivError> {
        if a1.alphabet() != a2.alphabet() {
            return Err(EquivError::AlphabetMismatch);
        }
        let (n1, n2) = (a1.size(), a2.size());
        let sum = a1.diag_sum(a2)?;
        let k = sum.alphabet().len();
        let go_proj = sum.partition().go();
        Ok(Self {
            n1,
            n2,
            go: (0..k)
                .map(|s| sum.superoperator(s).projected(go_proj))
                .collect(),
            left_go: sum.left_superoperator().projected(go_proj),
            xis: (0..k).map(|s| sum.xi(s)).collect::<Result<_, _>>()?,
            theta_epsilon: sum.theta_epsilon(),
            phi: ComplexVector::basis(n1 + n2, a1.initial_state()),
            psi: ComplexVector::basis(n1 + n2, n1 + a2.initial_state()),
        })
    }

    pub fn xi(&self, sym: usize) -> &ComplexMatrix {
        &self.xis[sym]
    }

    pub fn theta_epsilon(&self) -> &ComplexMatrix {
        &self.theta_epsilon
    }

    /// `ϑ(yω)` from `ϑ(ω)`.
    pub fn extend(&self, sym: usize, vartheta: &ComplexMatrix) -> ComplexMatrix {
        self.go[sym].pull_back(vartheta)
    }

    /// `θ(ω)` from `ϑ(ω)`.
    pub fn theta(&self, vartheta: &ComplexMatrix) -> ComplexMatrix {
        self.left_go.pull_back(vartheta)
    }

    pub fn forms(&self, m: &ComplexMatrix) -> (f64, f64) {
        (m.bilinear(&self.phi).re, m.bilinear(&self.psi).re)
    }

    pub fn bound(&self) -> usize {
        dimension_bound(self.n1, self.n2)
    }

    fn order(&self) -> usize {
        self.n1 + self.n2
    }
}

/// A generator admitted to the closure basis: the word and its (raw,
/// un-orthogonalized) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMember {
    pub word: Word,
    pub matrix: ComplexMatrix,
}

/// Orthonormal span of the non-empty-word family, with each admitted
/// generator in discovery (breadth-first) order. The empty-word matrix is
/// kept alongside for comparison only; it is never extended.
#[derive(Debug, Clone)]
pub struct ClosureBasis {
    span: SpanBasis<Word>,
    members: Vec<ClosureMember>,
    epsilon: ComplexMatrix,
}

impl ClosureBasis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ClosureMember] {
        &self.members
    }

    pub fn words(&self) -> Vec<Word> {
        self.members.iter().map(|m| m.word.clone()).collect()
    }

    pub fn epsilon(&self) -> &ComplexMatrix {
        &self.epsilon
    }

    pub fn span(&self) -> &SpanBasis<Word> {
        &self.span
    }
}

/// Breadth-first closure: insert each seed, then repeatedly extend the
/// oldest admitted generator by every symbol (prepending it to the word).
/// Extensions already in the span are dropped.
fn close<F>(
    order: usize,
    k: usize,
    seeds: Vec<ComplexMatrix>,
    epsilon: ComplexMatrix,
    bound: usize,
    tol_span: f64,
    extend: F,
) -> Result<ClosureBasis, EquivError>
where
    F: Fn(usize, &ComplexMatrix) -> ComplexMatrix,
{
    let mut basis = ClosureBasis {
        span: SpanBasis::new(order, order),
        members: Vec::new(),
        epsilon,
    };
    let mut frontier = VecDeque::new();
    let admit = |basis: &mut ClosureBasis,
                 frontier: &mut VecDeque<(Word, ComplexMatrix)>,
                 word: Word,
                 matrix: ComplexMatrix|
     -> Result<(), EquivError> {
        if !basis.span.insert(&matrix, word.clone(), tol_span)? {
            basis.members.push(ClosureMember {
                word: word.clone(),
                matrix: matrix.clone(),
            });
            if basis.members.len() > bound {
                return Err(EquivError::BoundExceeded {
                    size: basis.members.len(),
                    bound,
                });
            }
            frontier.push_back((word, matrix));
        }
        Ok(())
    };
    for (sym, seed) in seeds.into_iter().enumerate() {
        admit(&mut basis, &mut frontier, Word::from(vec![sym]), seed)?;
    }
    while let Some((word, matrix)) = frontier.pop_front() {
        for y in 0..k {
            admit(
                &mut basis,
                &mut frontier,
                word.prepend(y),
                extend(y, &matrix),
            )?;
        }
    }
    Ok(basis)
}

pub fn closure_mm(system: &EtaSystem, tol_span: f64) -> Result<ClosureBasis, EquivError> {
    close(
        system.order(),
        system.go.len(),
        system.deltas.clone(),
        system.eta_epsilon.clone(),
        system.bound(),
        tol_span,
        |y, m| system.extend(y, m),
    )
}

pub fn closure_e(system: &ThetaSystem, tol_span: f64) -> Result<ClosureBasis, EquivError> {
    close(
        system.order(),
        system.go.len(),
        system.xis.clone(),
        system.theta_epsilon.clone(),
        system.bound(),
        tol_span,
        |y, m| system.extend(y, m),
    )
}

/// Words at which the two increments differ, in comparison order: the empty
/// word first, then basis generators in discovery order. `member_matrix`
/// maps a generator to the matrix whose forms are compared.
fn increment_mismatches(
    basis: &ClosureBasis,
    tol_eq: f64,
    forms: impl Fn(&ComplexMatrix) -> (f64, f64),
    member_matrix: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> Vec<Word> {
    let mut out = Vec::new();
    let (f1, f2) = forms(&basis.epsilon);
    if (f1 - f2).abs() > tol_eq {
        out.push(Word::empty());
    }
    for m in &basis.members {
        let (f1, f2) = forms(&member_matrix(&m.matrix));
        if (f1 - f2).abs() > tol_eq {
            out.push(m.word.clone());
        }
    }
    out
}

/// Turns increment mismatches into a probability-space counterexample.
fn verdict_from_mismatches<A: WordFunction>(
    a1: &A,
    a2: &A,
    mismatches: &[Word],
    tol_eq: f64,
) -> Result<Verdict, EquivError> {
    let mut weak = None;
    for word in mismatches {
        match extract_counterexample(a1, a2, word, tol_eq) {
            Ok(cx) if cx.gap() > tol_eq => return Ok(cx.into()),
            Ok(cx) => {
                weak.get_or_insert(cx);
            }
            // rounding can put a bilinear-form gap just above tol_eq while the
            // direct difference lands just below it
            Err(EquivError::NoMismatch) => {}
            Err(e) => return Err(e),
        }
    }
    let Some(weak) = weak else {
        return Ok(Verdict::Equivalent);
    };
    let bound = length_bound(a1.num_states(), a2.num_states());
    if word_count(a1.alphabet().len(), bound) <= FALLBACK_WORD_LIMIT {
        if let v @ Verdict::NotEquivalent { .. } = enumerate_equiv(a1, a2, Some(bound), tol_eq, 1)?
        {
            return Ok(v);
        }
    }
    Ok(weak.into())
}

/// Decides equivalence of two MM-1QFAs by span closure of the η family.
pub fn decide_mm(a1: &Mm1qfa, a2: &Mm1qfa, tol: &Tolerances) -> Result<Decision, EquivError> {
    let system = EtaSystem::new(a1, a2)?;
    let basis = closure_mm(&system, tol.span)?;
    let mismatches =
        increment_mismatches(&basis, tol.eq, |m| system.forms(m), ComplexMatrix::clone);
    Ok(Decision {
        verdict: verdict_from_mismatches(a1, a2, &mismatches, tol.eq)?,
        basis_size: basis.len(),
        basis_words: basis.words(),
    })
}

/// Decides equivalence of two E-1QFAs by span closure of the ϑ family,
/// comparing the θ forms derived from each generator.
pub fn decide_e(a1: &E1qfa, a2: &E1qfa, tol: &Tolerances) -> Result<Decision, EquivError> {
    let system = ThetaSystem::new(a1, a2)?;
    let basis = closure_e(&system, tol.span)?;
    let mismatches = increment_mismatches(&basis, tol.eq, |m| system.forms(m), |v| system.theta(v));
    Ok(Decision {
        verdict: verdict_from_mismatches(a1, a2, &mismatches, tol.eq)?,
        basis_size: basis.len(),
        basis_words: basis.words(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub word: Word,
    pub p1: f64,
    pub p2: f64,
}

impl Counterexample {
    pub fn gap(&self) -> f64 {
        (self.p1 - self.p2).abs()
    }
}

impl From<Counterexample> for Verdict {
    fn from(cx: Counterexample) -> Self {
        Verdict::NotEquivalent {
            word: cx.word,
            p1: cx.p1,
            p2: cx.p2,
        }
    }
}

/// Given a word where the two increments differ by more than `tol_eq`,
/// returns the shorter of (word minus last symbol, word) whose acceptance
/// probabilities differ by more than `tol_eq`; failing that, the shorter
/// one differing by more than `tol_eq / 2`, which always exists.
pub fn extract_counterexample<A: WordFunction>(
    a1: &A,
    a2: &A,
    word: &Word,
    tol_eq: f64,
) -> Result<Counterexample, EquivError> {
    if a1.alphabet() != a2.alphabet() {
        return Err(EquivError::AlphabetMismatch);
    }
    let probe = |w: &Word| -> Result<Counterexample, EquivError> {
        Ok(Counterexample {
            word: w.clone(),
            p1: a1.word_prob(w)?,
            p2: a2.word_prob(w)?,
        })
    };
    let full = probe(word)?;
    let Some(prefix) = word.without_last() else {
        return if full.gap() > tol_eq {
            Ok(full)
        } else {
            Err(EquivError::NoMismatch)
        };
    };
    let prev = probe(&prefix)?;
    let increment_gap = ((full.p1 - prev.p1) - (full.p2 - prev.p2)).abs();
    if increment_gap <= tol_eq {
        return Err(EquivError::NoMismatch);
    }
    let candidates = [prev, full];
    for threshold in [tol_eq, tol_eq / 2.0] {
        if let Some(cx) = candidates.iter().find(|c| c.gap() > threshold) {
            return Ok(cx.clone());
        }
    }
    Err(EquivError::NoMismatch)
}

/// One pending word in the enumeration: its symbols plus both automata's
/// configurations and collected acceptance mass.
struct Node<C> {
    word: Vec<usize>,
    c1: C,
    acc1: f64,
    c2: C,
    acc2: f64,
}

/// First mismatching word (shortest, then lexicographically smallest)
/// among words `first · rest` with `|rest| < max_len`.
fn search_subtree<A: WordFunction>(
    a1: &A,
    a2: &A,
    first: usize,
    max_len: usize,
    tol_eq: f64,
) -> Option<Counterexample> {
    let (c1, acc1) = a1.start();
    let (c2, acc2) = a2.start();
    let (c1, s1) = a1.step(&c1, first);
    let (c2, s2) = a2.step(&c2, first);
    let mut level = vec![Node {
        word: vec![first],
        c1,
        acc1: acc1 + s1,
        c2,
        acc2: acc2 + s2,
    }];
    let k = a1.alphabet().len();
    for len in 1..=max_len {
        for node in &level {
            let p1 = node.acc1 + a1.finish(&node.c1);
            let p2 = node.acc2 + a2.finish(&node.c2);
            if (p1 - p2).abs() > tol_eq {
                return Some(Counterexample {
                    word: Word::from(node.word.clone()),
                    p1,
                    p2,
                });
            }
        }
        if len == max_len {
            break;
        }
        level = level
            .iter()
            .flat_map(|node| {
                (0..k).map(move |y| {
                    let (c1, s1) = a1.step(&node.c1, y);
                    let (c2, s2) = a2.step(&node.c2, y);
                    let mut word = node.word.clone();
                    word.push(y);
                    Node {
                        word,
                        c1,
                        acc1: node.acc1 + s1,
                        c2,
                        acc2: node.acc2 + s2,
                    }
                })
            })
            .collect();
    }
    None
}

/// Compares acceptance probabilities on every word of length at most
/// `max_len` (default `n1² + n2² − 1`). Returns the shortlex-first word whose
/// probabilities differ by more than `tol_eq`; otherwise `Equivalent` when
/// the full bound was covered, `BoundedEquivalent` when not.
///
/// With `jobs > 1` the word space is split by first symbol across a thread
/// pool of that size.
pub fn enumerate_equiv<A: WordFunction>(
    a1: &A,
    a2: &A,
    max_len: Option<usize>,
    tol_eq: f64,
    jobs: usize,
) -> Result<Verdict, EquivError> {
    if a1.alphabet() != a2.alphabet() {
        return Err(EquivError::AlphabetMismatch);
    }
    let bound = length_bound(a1.num_states(), a2.num_states());
    let max_len = max_len.unwrap_or(bound);
    let p1 = a1.word_prob(&Word::empty())?;
    let p2 = a2.word_prob(&Word::empty())?;
    if (p1 - p2).abs() > tol_eq {
        return Ok(Verdict::NotEquivalent {
            word: Word::empty(),
            p1,
            p2,
        });
    }
    if max_len > 0 {
        let k = a1.alphabet().len();
        let found: Vec<Counterexample> = if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("thread pool");
            pool.install(|| {
                (0..k)
                    .into_par_iter()
                    .filter_map(|s| search_subtree(a1, a2, s, max_len, tol_eq))
                    .collect()
            })
        } else {
            (0..k)
                .filter_map(|s| search_subtree(a1, a2, s, max_len, tol_eq))
                .collect()
        };
        if let Some(cx) = found
            .into_iter()
            .min_by(|a, b| a.word.shortlex_cmp(&b.word))
        {
            return Ok(cx.into());
        }
    }
    if max_len >= bound {
        Ok(Verdict::Equivalent)
    } else {
        Ok(Verdict::BoundedEquivalent { t: max_len })
    }
}
