//! Seeded random automata for test corpora.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::e1qfa::{E1qfa, E1qfaDef};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::mm1qfa::{Mm1qfa, Mm1qfaDef, DEFAULT_TOL_VALID};
use crate::model::{Alphabet, END_MARKER, LEFT_MARKER};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix (`rows ≥ cols`) with orthonormal columns, from
/// modified Gram–Schmidt on a Gaussian matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols && cols >= 1, "need rows >= cols >= 1");
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<C64> = (0..rows).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &columns {
                let c: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // a Gaussian draw lands in the span with probability zero; redraw if it nearly does
        if norm > 1e-6 {
            columns.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m.set(i, j, *z);
        }
    }
    m
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(n, n, rng)
}

/// `r` Kraus operators of order `m`: row blocks of a random `(r·m) × m`
/// isometry, so the completeness sum is exactly `V†V = I`.
pub fn random_kraus<R: Rng + ?Sized>(m: usize, r: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let v = random_isometry(r * m, m, rng);
    (0..r).map(|i| v.block(i * m, 0, m, m)).collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    let col = random_isometry(n, 1, rng);
    ComplexVector::new((0..n).map(|i| col.get(i, 0)).collect()).expect("finite")
}

fn state_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("q{i}")).collect()
}

/// Each state independently accepting, rejecting or non-halting with
/// probability 1/3.
fn random_partition<R: Rng + ?Sized>(states: &[String], rng: &mut R) -> (Vec<String>, Vec<String>) {
    let mut acc = Vec::new();
    let mut rej = Vec::new();
    for s in states {
        match rng.random_range(0..3) {
            0 => acc.push(s.clone()),
            1 => rej.push(s.clone()),
            _ => {}
        }
    }
    (acc, rej)
}

pub fn random_mm_with<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Mm1qfa {
    assert!(n >= 1 && k >= 1, "need n >= 1 and k >= 1");
    let states = state_names(n);
    let alphabet = Alphabet::letters(k).symbols().to_vec();
    let (accepting, rejecting) = random_partition(&states, rng);
    let mut transitions = BTreeMap::new();
    for sym in alphabet.iter().map(String::as_str).chain([END_MARKER]) {
        transitions.insert(sym.to_string(), random_unitary(n, rng));
    }
    let initial = random_unit_vector(n, rng);
    let def = Mm1qfaDef {
        states,
        accepting,
        rejecting,
        alphabet,
        transitions,
        initial,
    };
    Mm1qfa::new(def, DEFAULT_TOL_VALID).expect("random automaton is valid by construction")
}

/// MM-1QFA with `n` states over `k` letters; identical for identical seeds.
pub fn random_mm(n: usize, k: usize, seed: u64) -> Mm1qfa {
    random_mm_with(n, k, &mut rng_from_seed(seed))
}

/// E-1QFA whose superoperators (including `#` and `$`) each have between 1
/// and `max_kraus` Kraus operators, with a uniformly chosen initial state.
pub fn random_e_with<R: Rng + ?Sized>(n: usize, k: usize, max_kraus: usize, rng: &mut R) -> E1qfa {
    assert!(
        n >= 1 && k >= 1 && max_kraus >= 1,
        "need n, k, max_kraus >= 1"
    );
    let states = state_names(n);
    let alphabet = Alphabet::letters(k).symbols().to_vec();
    let (accepting, rejecting) = random_partition(&states, rng);
    let mut superoperators = BTreeMap::new();
    for sym in [LEFT_MARKER]
        .into_iter()
        .chain(alphabet.iter().map(String::as_str))
        .chain([END_MARKER])
    {
        let r = rng.random_range(1..=max_kraus);
        superoperators.insert(sym.to_string(), random_kraus(n, r, rng));
    }
    let initial_state = states[rng.random_range(0..n)].clone();
    let def = E1qfaDef {
        states,
        accepting,
        rejecting,
        alphabet,
        superoperators,
        initial_state,
    };
    E1qfa::new(def, DEFAULT_TOL_VALID).expect("random automaton is valid by construction")
}

pub fn random_e(n: usize, k: usize, max_kraus: usize, seed: u64) -> E1qfa {
    random_e_with(n, k, max_kraus, &mut rng_from_seed(seed))
}
