//! Seeded automaton pairs for agreement tests.

use qfa_equiv::cli::random::{random_e_with, random_mm_with, random_unitary, rng_from_seed};
use qfa_equiv::{ComplexMatrix, E1qfa, Mm1qfa, Word, C64};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_word<R: Rng>(rng: &mut R, k: usize, max_len: usize) -> Word {
    let len = rng.random_range(0..=max_len);
    Word::from((0..len).map(|_| rng.random_range(0..k)).collect::<Vec<_>>())
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Real rotation by `angle` in the `(i, j)` coordinate plane.
pub fn givens(n: usize, i: usize, j: usize, angle: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(n);
    let (s, c) = angle.sin_cos();
    g.set(i, i, C64::new(c, 0.0));
    g.set(j, j, C64::new(c, 0.0));
    g.set(i, j, C64::new(-s, 0.0));
    g.set(j, i, C64::new(s, 0.0));
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Permuted,
    Perturbed,
    Remixed,
    Random,
}

pub struct Pair<A> {
    pub kind: PairKind,
    pub a1: A,
    pub a2: A,
}

fn rng(seed: u64) -> ChaCha8Rng {
    rng_from_seed(seed)
}

/// 50 permuted, 50 perturbed by 0.01 rad, 100 independent pairs; at most
/// 3 states, two letters.
pub fn mm_pairs(seed: u64) -> Vec<Pair<Mm1qfa>> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for _ in 0..50 {
        let n = rng.random_range(1..=3);
        let a = random_mm_with(n, 2, &mut rng);
        let perm = random_permutation(&mut rng, n);
        out.push(Pair {
            kind: PairKind::Permuted,
            a2: a.permuted(&perm),
            a1: a,
        });
    }
    for _ in 0..50 {
        let n = rng.random_range(2..=3);
        // constant-probability automata (no accepting or no non-halting state) hide any perturbation
        let a = loop {
            let a = random_mm_with(n, 2, &mut rng);
            let p = a.partition();
            if !p.accepting().is_empty() && (0..n).any(|q| !p.is_halting(q)) {
                break a;
            }
        };
        let sym = rng.random_range(0..2);
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let g = givens(n, i, j, 0.01);
        out.push(Pair {
            kind: PairKind::Perturbed,
            a2: a.map_unitary(Some(sym), |u| u * &g),
            a1: a,
        });
    }
    for _ in 0..100 {
        let n1 = rng.random_range(1..=3);
        let n2 = rng.random_range(1..=3);
        out.push(Pair {
            kind: PairKind::Random,
            a1: random_mm_with(n1, 2, &mut rng),
            a2: random_mm_with(n2, 2, &mut rng),
        });
    }
    out
}

/// `{Σ_j W_ij M_j}` for a unitary `W`: the same channel.
pub fn remix(kraus: &[ComplexMatrix], w: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let n = kraus[0].rows();
    (0..kraus.len())
        .map(|i| {
            kraus
                .iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(n, n), |acc, (j, m)| {
                    &acc + &m.scale(w.get(i, j))
                })
        })
        .collect()
}

/// 34 permuted, 33 Kraus-remixed, 33 independent pairs; at most 2 states,
/// two letters, Kraus lists of size 1 or 2.
pub fn e_pairs(seed: u64) -> Vec<Pair<E1qfa>> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for _ in 0..34 {
        let n = rng.random_range(1..=2);
        let a = random_e_with(n, 2, 2, &mut rng);
        let perm = random_permutation(&mut rng, n);
        out.push(Pair {
            kind: PairKind::Permuted,
            a2: a.permuted(&perm),
            a1: a,
        });
    }
    for _ in 0..33 {
        let n = rng.random_range(1..=2);
        let a = random_e_with(n, 2, 2, &mut rng);
        let mut b = a.clone();
        for sym in [Some(0), Some(1), None] {
            let r = match sym {
                Some(s) => a.superoperator(s).kraus().len(),
                None => a.right_superoperator().kraus().len(),
            };
            let w = random_unitary(r, &mut rng);
            b = b.map_kraus(sym, |ks| remix(ks, &w));
        }
        out.push(Pair {
            kind: PairKind::Remixed,
            a1: a,
            a2: b,
        });
    }
    for _ in 0..33 {
        let n1 = rng.random_range(1..=2);
        let n2 = rng.random_range(1..=2);
        out.push(Pair {
            kind: PairKind::Random,
            a1: random_e_with(n1, 2, 2, &mut rng),
            a2: random_e_with(n2, 2, 2, &mut rng),
        });
    }
    out
}
