//! Straight-line reference evaluation on nalgebra matrices, sharing no
//! arithmetic with the library.
//!
//! MM: the acceptance sum over `k` of `||P_a U(x_k) (P_g U(x_{k-1}) ⋯ P_g U(x_1)) π||²`,
//! rebuilding every prefix product from scratch, plus the `$` term.
//!
//! E: every Kraus index tuple traced as a pure (unnormalized) vector from `|q0>`;
//! a channel's contribution is the sum over tuples of squared norms.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use qfa_equiv::{ComplexMatrix, E1qfa, Mm1qfa, C64};

pub type Mat = DMatrix<C64>;
pub type Vect = DVector<C64>;

pub fn to_na(m: &ComplexMatrix) -> Mat {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn projector(n: usize, states: impl Fn(usize) -> bool) -> Mat {
    Mat::from_fn(n, n, |i, j| {
        if i == j && states(i) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn projectors(n: usize, acc: &BTreeSet<usize>, rej: &BTreeSet<usize>) -> (Mat, Mat) {
    (
        projector(n, |i| acc.contains(&i)),
        projector(n, |i| !acc.contains(&i) && !rej.contains(&i)),
    )
}

pub fn mm_accept_prob(a: &Mm1qfa, word: &[usize]) -> f64 {
    let n = a.size();
    let (pa, pg) = projectors(n, a.partition().accepting(), a.partition().rejecting());
    let pi = Vect::from_column_slice(a.initial().as_slice());
    let mut seq: Vec<Mat> = word.iter().map(|&s| to_na(a.unitary(s))).collect();
    seq.push(to_na(a.endmark_unitary()));
    let mut total = 0.0;
    for k in 0..seq.len() {
        let mut prefix = Mat::identity(n, n);
        for u in &seq[..k] {
            prefix = &pg * u * prefix;
        }
        total += (&pa * &seq[k] * prefix * &pi).norm_squared();
    }
    total
}

pub fn e_accept_prob(a: &E1qfa, word: &[usize]) -> f64 {
    let n = a.size();
    let (pa, pg) = projectors(n, a.partition().accepting(), a.partition().rejecting());
    let mut q0 = Vect::zeros(n);
    q0[a.initial_state()] = C64::new(1.0, 0.0);
    let mut seq: Vec<Vec<Mat>> = vec![a.left_superoperator().kraus().iter().map(to_na).collect()];
    seq.extend(
        word.iter()
            .map(|&s| a.superoperator(s).kraus().iter().map(to_na).collect()),
    );
    seq.push(a.right_superoperator().kraus().iter().map(to_na).collect());

    let mut total = 0.0;
    for k in 0..seq.len() {
        // odometer over Kraus indices for steps 0..=k
        let mut idx = vec![0usize; k + 1];
        loop {
            let mut v = q0.clone();
            for (j, &i) in idx.iter().enumerate() {
                let m = &seq[j][i];
                v = if j == k { &pa * m * v } else { &pg * m * v };
            }
            total += v.norm_squared();
            let mut pos = 0;
            while pos <= k {
                idx[pos] += 1;
                if idx[pos] < seq[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos > k {
                break;
            }
        }
    }
    total
}

/// Increment `P(ω) − P(ω⁻)` (or `P(ε)`) from any probability function.
pub fn increment(p: impl Fn(&[usize]) -> f64, word: &[usize]) -> f64 {
    match word.split_last() {
        Some((_, prefix)) => p(word) - p(prefix),
        None => p(word),
    }
}
