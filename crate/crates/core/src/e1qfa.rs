//! Enhanced one-way quantum finite automata.
//!
//! Each symbol, and the end-markers `#` and `$`, acts by a trace-preserving
//! completely positive map given as a Kraus list. The automaton starts in a
//! basis state, reads `#`, the input, then `$`, measuring accept / go /
//! reject after each step.

use std::collections::{BTreeMap, BTreeSet};

use crate::linalg::{diag_sum, ComplexMatrix, ComplexVector, C64};
use crate::mm1qfa::Mm1qfa;
use crate::model::{
    Alphabet, Partition, ValidationError, Word, WordError, WordFunction, END_MARKER, LEFT_MARKER,
};

/// A quantum operation `ρ ↦ Σ M_i ρ M_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    kraus: Vec<ComplexMatrix>,
}

impl Superoperator {
    /// Checks non-emptiness, shapes and completeness `Σ M_i†M_i = I`.
    pub fn new(kraus: Vec<ComplexMatrix>, tol_valid: f64) -> Result<Self, ValidationError> {
        Self::labeled("", kraus, tol_valid)
    }

    pub(crate) fn labeled(
        symbol: &str,
        kraus: Vec<ComplexMatrix>,
        tol_valid: f64,
    ) -> Result<Self, ValidationError> {
        let Some(first) = kraus.first() else {
            return Err(ValidationError::EmptyKraus(symbol.to_string()));
        };
        let m = first.rows();
        for k in &kraus {
            if k.shape() != (m, m) {
                return Err(ValidationError::shape(
                    format!("Kraus operator for {symbol:?}"),
                    format!("{m}x{m}"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
        }
        let op = Self { kraus };
        let defect = op.completeness_defect();
        if defect > tol_valid {
            return Err(ValidationError::IncompleteKraus(symbol.to_string(), defect));
        }
        Ok(op)
    }

    /// Single-Kraus channel `{u}`.
    pub fn unitary(u: ComplexMatrix) -> Self {
        Self { kraus: vec![u] }
    }

    pub fn identity(m: usize) -> Self {
        Self::unitary(ComplexMatrix::identity(m))
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn order(&self) -> usize {
        self.kraus[0].rows()
    }

    /// `||Σ M_i†M_i − I||_F`.
    pub fn completeness_defect(&self) -> f64 {
        let m = self.order();
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(m, m), |acc, k| {
                &acc + &(&k.conj_transpose() * k)
            });
        (&sum - &ComplexMatrix::identity(m)).frobenius_norm()
    }

    fn check_order(&self, what: &str, n: usize) -> Result<(), ValidationError> {
        if n != self.order() {
            return Err(ValidationError::shape(what, self.order(), n));
        }
        Ok(())
    }

    /// Schrödinger picture on an arbitrary (possibly sub-normalized) operator.
    pub(crate) fn evolve(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .map(|k| &(k * rho) * &k.conj_transpose())
            .reduce(|a, b| &a + &b)
            .expect("non-empty Kraus list")
    }

    /// Heisenberg picture: `Σ M_i† X M_i`.
    pub(crate) fn pull_back(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .map(|k| k.congruence(x))
            .reduce(|a, b| &a + &b)
            .expect("non-empty Kraus list")
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ValidationError> {
        self.check_order("density matrix", rho.0.rows())?;
        Ok(DensityMatrix(self.evolve(&rho.0)))
    }

    /// `Σ (P M_i) ρ (P M_i)†`. `rho` may be sub-normalized.
    pub fn apply_projected(
        &self,
        projector: &ComplexMatrix,
        rho: &ComplexMatrix,
    ) -> Result<ComplexMatrix, ValidationError> {
        self.check_order("projector", projector.rows())?;
        self.check_order("operand", rho.rows())?;
        if !projector.is_square() || !rho.is_square() {
            return Err(ValidationError::shape(
                "operand",
                "square matrix",
                "rectangular matrix",
            ));
        }
        Ok(self.projected(projector).evolve(rho))
    }

    /// The (incomplete) operation with Kraus list `{P M_i}`.
    pub(crate) fn projected(&self, projector: &ComplexMatrix) -> Superoperator {
        Superoperator {
            kraus: self.kraus.iter().map(|k| projector * k).collect(),
        }
    }

    /// Pairs `E_i ⊕ Z_i`, padding the shorter list with zero matrices.
    pub fn diag_sum(&self, other: &Self) -> Self {
        let (m, n) = (self.order(), other.order());
        let len = self.kraus.len().max(other.kraus.len());
        let kraus = (0..len)
            .map(|i| {
                let e = self
                    .kraus
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| ComplexMatrix::zeros(m, m));
                let z = other
                    .kraus
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| ComplexMatrix::zeros(n, n));
                diag_sum(&e, &z).expect("square Kraus operators")
            })
            .collect();
        Self { kraus }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            kraus: self.kraus.iter().map(|k| k.permuted(perm)).collect(),
        }
    }
}

/// Hermitian, unit-trace operator. Positive semidefiniteness is checked
/// fully only by [`DensityMatrix::check_psd`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, tol_valid: f64) -> Result<Self, ValidationError> {
        if !m.is_square() {
            return Err(ValidationError::shape(
                "density matrix",
                "square matrix",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        if !m.is_hermitian(tol_valid) {
            return Err(ValidationError::shape(
                "density matrix",
                "Hermitian",
                "non-Hermitian",
            ));
        }
        let tr = m.trace().expect("square");
        if (tr - C64::new(1.0, 0.0)).norm() > tol_valid {
            return Err(ValidationError::shape("density matrix", "trace 1", tr.re));
        }
        if (0..m.rows()).any(|i| m.get(i, i).re < -tol_valid) {
            return Err(ValidationError::shape(
                "density matrix",
                "non-negative diagonal",
                "negative entry",
            ));
        }
        Ok(Self(m))
    }

    /// `|q><q|` in dimension `dim`.
    pub fn pure_basis(dim: usize, q: usize) -> Self {
        let v = ComplexVector::basis(dim, q);
        Self(ComplexMatrix::outer(&v, &v))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn check_psd(&self, tol_valid: f64) -> bool {
        self.0.is_positive_semidefinite(tol_valid)
    }
}

/// Unvalidated E-1QFA description keyed by names.
#[derive(Debug, Clone, PartialEq)]
pub struct E1qfaDef {
    pub states: Vec<String>,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    pub alphabet: Vec<String>,
    /// One Kraus list per alphabet symbol plus `"#"` and `"$"`.
    pub superoperators: BTreeMap<String, Vec<ComplexMatrix>>,
    pub initial_state: String,
}

pub fn validate_e(def: &E1qfaDef, tol_valid: f64) -> Result<(), ValidationError> {
    E1qfa::new(def.clone(), tol_valid).map(|_| ())
}

/// A validated E-1QFA.
#[derive(Debug, Clone, PartialEq)]
pub struct E1qfa {
    states: Vec<String>,
    alphabet: Alphabet,
    partition: Partition,
    superops: Vec<Superoperator>,
    left: Superoperator,
    right: Superoperator,
    initial: usize,
}

impl E1qfa {
    pub fn new(mut def: E1qfaDef, tol_valid: f64) -> Result<Self, ValidationError> {
        let alphabet = Alphabet::new(def.alphabet.clone())?;
        let partition = Partition::from_names(&def.states, &def.accepting, &def.rejecting)?;
        let m = def.states.len();
        let initial = def
            .states
            .iter()
            .position(|s| *s == def.initial_state)
            .ok_or_else(|| ValidationError::UnknownState(def.initial_state.clone()))?;

        if let Some(extra) = def.superoperators.keys().find(|k| {
            k.as_str() != END_MARKER && k.as_str() != LEFT_MARKER && alphabet.index_of(k).is_none()
        }) {
            return Err(ValidationError::UnexpectedSymbol(extra.clone()));
        }
        for (sym, kraus) in &def.superoperators {
            if let Some(k) = kraus.iter().find(|k| k.shape() != (m, m)) {
                return Err(ValidationError::shape(
                    format!("Kraus operator for {sym:?}"),
                    format!("{m}x{m}"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
        }
        let mut take =
            |sym: &str, missing: ValidationError| -> Result<Superoperator, ValidationError> {
                let kraus = def.superoperators.remove(sym).ok_or(missing)?;
                Superoperator::labeled(sym, kraus, tol_valid)
            };
        let left = take(
            LEFT_MARKER,
            ValidationError::MissingEndmarker(LEFT_MARKER.into()),
        )?;
        let right = take(
            END_MARKER,
            ValidationError::MissingEndmarker(END_MARKER.into()),
        )?;
        let superops = alphabet
            .symbols()
            .iter()
            .map(|s| take(s, ValidationError::MissingTransition(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            states: def.states,
            alphabet,
            partition,
            superops,
            left,
            right,
            initial,
        })
    }

    pub fn to_def(&self) -> E1qfaDef {
        let names = |set: &BTreeSet<usize>| set.iter().map(|&q| self.states[q].clone()).collect();
        let mut superoperators: BTreeMap<String, Vec<ComplexMatrix>> = self
            .alphabet
            .symbols()
            .iter()
            .cloned()
            .zip(self.superops.iter().map(|s| s.kraus.clone()))
            .collect();
        superoperators.insert(LEFT_MARKER.into(), self.left.kraus.clone());
        superoperators.insert(END_MARKER.into(), self.right.kraus.clone());
        E1qfaDef {
            states: self.states.clone(),
            accepting: names(self.partition.accepting()),
            rejecting: names(self.partition.rejecting()),
            alphabet: self.alphabet.symbols().to_vec(),
            superoperators,
            initial_state: self.states[self.initial].clone(),
        }
    }

    /// Embeds an MM-1QFA whose initial vector is a basis state on a
    /// non-halting state: `#` acts as the identity and every symbol as its
    /// unitary.
    pub fn from_mm(mm: &Mm1qfa) -> Result<Self, ValidationError> {
        let init = mm.initial();
        let q0 = (0..init.dim())
            .find(|&i| (init[i].norm() - 1.0).abs() < 1e-12)
            .ok_or(ValidationError::NotEmbeddable)?;
        if mm.partition().is_halting(q0) {
            return Err(ValidationError::NotEmbeddable);
        }
        let superops = (0..mm.alphabet().len())
            .map(|s| Superoperator::unitary(mm.unitary(s).clone()))
            .collect();
        Ok(Self {
            states: mm.states().to_vec(),
            alphabet: mm.alphabet().clone(),
            partition: mm.partition().clone(),
            superops,
            left: Superoperator::identity(mm.size()),
            right: Superoperator::unitary(mm.endmark_unitary().clone()),
            initial: q0,
        })
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

    pub fn initial_state(&self) -> usize {
        self.initial
    }

    pub fn superoperator(&self, sym: usize) -> &Superoperator {
        &self.superops[sym]
    }

    pub fn left_superoperator(&self) -> &Superoperator {
        &self.left
    }

    pub fn right_superoperator(&self) -> &Superoperator {
        &self.right
    }

    pub fn initial_density(&self) -> DensityMatrix {
        DensityMatrix::pure_basis(self.size(), self.initial)
    }

    pub fn accept_prob(&self, word: &Word) -> Result<f64, WordError> {
        self.word_prob(word)
    }

    /// Acceptance mass after each measurement of `#word$`; the first entry
    /// follows `#`, the last equals `accept_prob(word)`.
    pub fn halting_profile(&self, word: &Word) -> Result<Vec<f64>, WordError> {
        self.alphabet.check(word)?;
        let (mut rho, mut acc) = self.start();
        let mut out = vec![acc];
        for &s in word.symbols() {
            let (next, p) = self.step(&rho, s);
            rho = next;
            acc += p;
            out.push(acc);
        }
        out.push(acc + self.finish(&rho));
        Ok(out)
    }

    /// Difference of consecutive acceptance probabilities.
    pub fn noncumulative(&self, word: &Word) -> Result<f64, WordError> {
        let p = self.accept_prob(word)?;
        match word.without_last() {
            Some(prefix) => Ok(p - self.accept_prob(&prefix)?),
            None => Ok(p),
        }
    }

    /// Same value as [`E1qfa::noncumulative`], computed from the state `ρ'`
    /// reached just before the last symbol: the mass accepted at the last
    /// symbol plus what `$` would accept afterwards, minus what `$` would
    /// have accepted in its place.
    pub fn noncumulative_reduced(&self, word: &Word) -> Result<f64, WordError> {
        self.alphabet.check(word)?;
        let Some((&last, rest)) = word.symbols().split_last() else {
            return self.accept_prob(word);
        };
        let (mut rho, _) = self.start();
        for &s in rest {
            rho = self.step(&rho, s).0;
        }
        let op = &self.superops[last];
        let accept = self.partition.accept();
        let here = op
            .projected(accept)
            .evolve(&rho)
            .trace()
            .expect("square")
            .re;
        let then_end = self
            .right
            .projected(accept)
            .evolve(&op.projected(self.partition.go()).evolve(&rho))
            .trace()
            .expect("square")
            .re;
        let end_now = self
            .right
            .projected(accept)
            .evolve(&rho)
            .trace()
            .expect("square")
            .re;
        Ok(here + then_end - end_now)
    }

    /// `Σ_i B_i† X B_i` with `B_i = P_g M_i` over the Kraus list of `sym`.
    pub fn go_pull_back(&self, sym: usize, x: &ComplexMatrix) -> ComplexMatrix {
        self.superops[sym]
            .projected(self.partition.go())
            .pull_back(x)
    }

    fn left_go_pull_back(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.left.projected(self.partition.go()).pull_back(x)
    }

    /// `Σ_i A_i† A_i` with `A_i = P_a M_i`.
    fn accept_effect(&self, op: &Superoperator) -> ComplexMatrix {
        op.projected(self.partition.accept())
            .pull_back(&ComplexMatrix::identity(self.size()))
    }

    /// `Σ A_x†A_x + Σ B_x†(Σ A_$†A_$)B_x − Σ A_$†A_$`.
    pub fn xi(&self, sym: usize) -> Result<ComplexMatrix, WordError> {
        if sym >= self.alphabet.len() {
            return Err(WordError::UnknownSymbol(sym));
        }
        let end = self.accept_effect(&self.right);
        let direct = self.accept_effect(&self.superops[sym]);
        let deferred = self.go_pull_back(sym, &end);
        Ok(&(&direct + &deferred) - &end)
    }

    /// `ϑ(x_1…x_n)`: `ξ(x_n)` pulled back through the go-projected Kraus
    /// lists of `x_{n-1}`, …, `x_1`.
    pub fn vartheta(&self, word: &Word) -> Result<ComplexMatrix, WordError> {
        self.alphabet.check(word)?;
        let (&last, rest) = word.symbols().split_last().ok_or(WordError::EmptyWord)?;
        let mut m = self.xi(last)?;
        for &y in rest.iter().rev() {
            m = self.go_pull_back(y, &m);
        }
        Ok(m)
    }

    /// Matrix with `<q0|θ(word)|q0> = noncumulative(word)`.
    pub fn theta(&self, word: &Word) -> Result<ComplexMatrix, WordError> {
        if word.is_empty() {
            return Ok(self.theta_epsilon());
        }
        Ok(self.theta_from_vartheta(&self.vartheta(word)?))
    }

    /// `Σ_{i#} B_{i#}† ϑ B_{i#}`.
    pub fn theta_from_vartheta(&self, vartheta: &ComplexMatrix) -> ComplexMatrix {
        self.left_go_pull_back(vartheta)
    }

    /// `Σ A_#†A_# + Σ B_#†(Σ A_$†A_$)B_#`: the empty-word member of the θ
    /// family, so that `<q0|θ(ε)|q0>` is the acceptance probability of `ε`.
    pub fn theta_epsilon(&self) -> ComplexMatrix {
        let end = self.accept_effect(&self.right);
        &self.accept_effect(&self.left) + &self.left_go_pull_back(&end)
    }

    /// Diagonal sum with `other`; Kraus lists are paired index-wise with
    /// zero padding. The sum starts in the first automaton's initial state.
    pub fn diag_sum(&self, other: &Self) -> Result<Self, ValidationError> {
        if self.alphabet != other.alphabet {
            return Err(ValidationError::AlphabetMismatch);
        }
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
            superops: self
                .superops
                .iter()
                .zip(&other.superops)
                .map(|(a, b)| a.diag_sum(b))
                .collect(),
            left: self.left.diag_sum(&other.left),
            right: self.right.diag_sum(&other.right),
            initial: self.initial,
        })
    }

    pub fn with_initial_state(&self, q: usize) -> Self {
        assert!(q < self.size(), "initial state out of range");
        Self {
            initial: q,
            ..self.clone()
        }
    }

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
            superops: self.superops.iter().map(|s| s.permuted(perm)).collect(),
            left: self.left.permuted(perm),
            right: self.right.permuted(perm),
            initial: perm[self.initial],
        }
    }

    /// Replaces the Kraus list of `sym` (`None` for `$`) by `f(list)`.
    pub fn map_kraus(
        &self,
        sym: Option<usize>,
        f: impl FnOnce(&[ComplexMatrix]) -> Vec<ComplexMatrix>,
    ) -> Self {
        let mut out = self.clone();
        let slot = match sym {
            Some(s) => &mut out.superops[s],
            None => &mut out.right,
        };
        *slot = Superoperator {
            kraus: f(&slot.kraus),
        };
        out
    }
}

impl WordFunction for E1qfa {
    type Config = ComplexMatrix;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn num_states(&self) -> usize {
        self.size()
    }

    fn start(&self) -> (ComplexMatrix, f64) {
        let rho = self.initial_density().0;
        let moved = self.left.evolve(&rho);
        (
            self.partition.go().congruence(&moved),
            self.partition
                .accept()
                .congruence(&moved)
                .trace()
                .expect("square")
                .re,
        )
    }

    fn step(&self, rho: &ComplexMatrix, sym: usize) -> (ComplexMatrix, f64) {
        let moved = self.superops[sym].evolve(rho);
        // projectors are Hermitian, so congruence is P ρ P
        (
            self.partition.go().congruence(&moved),
            self.partition
                .accept()
                .congruence(&moved)
                .trace()
                .expect("square")
                .re,
        )
    }

    fn finish(&self, rho: &ComplexMatrix) -> f64 {
        let moved = self.right.evolve(rho);
        self.partition
            .accept()
            .congruence(&moved)
            .trace()
            .expect("square")
            .re
    }
}
