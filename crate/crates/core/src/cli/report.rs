//! Human-readable output of `qfa run`.

use std::fmt;

use crate::model::{Word, WordError, WordFunction, END_MARKER, LEFT_MARKER};

use super::format::Automaton;

/// Acceptance mass collected up to and including one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct HaltingStep {
    pub symbol: String,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixProbability {
    pub prefix: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub word: String,
    pub probability: f64,
    /// One entry per measurement while reading the word and its end-markers;
    /// nondecreasing, last entry equal to `probability`.
    pub steps: Vec<HaltingStep>,
    /// Acceptance probability of every prefix, shortest first.
    pub prefixes: Vec<PrefixProbability>,
}

fn prefix_table<A: WordFunction>(a: &A, word: &Word) -> Result<Vec<PrefixProbability>, WordError> {
    (0..=word.len())
        .map(|n| {
            let prefix = Word::from(word.symbols()[..n].to_vec());
            Ok(PrefixProbability {
                prefix: a.alphabet().render(&prefix),
                probability: a.word_prob(&prefix)?,
            })
        })
        .collect()
}

impl RunReport {
    pub fn new(a: &Automaton, word: &Word) -> Result<Self, WordError> {
        let alphabet = a.alphabet();
        let mut symbols: Vec<String> = word
            .symbols()
            .iter()
            .map(|&s| alphabet.name(s).to_string())
            .collect();
        symbols.push(END_MARKER.to_string());
        let (profile, prefixes) = match a {
            Automaton::Mm(m) => (m.halting_profile(word)?, prefix_table(m, word)?),
            Automaton::E(e) => {
                symbols.insert(0, LEFT_MARKER.to_string());
                (e.halting_profile(word)?, prefix_table(e, word)?)
            }
        };
        let probability = *profile.last().expect("at least the end-marker step");
        Ok(Self {
            word: alphabet.render(word),
            probability,
            steps: symbols
                .into_iter()
                .zip(profile)
                .map(|(symbol, cumulative)| HaltingStep { symbol, cumulative })
                .collect(),
            prefixes,
        })
    }
}

/// Twelve decimals with trailing zeros dropped (keeping one): `0.875`, `1.0`.
pub fn fmt_prob(x: f64) -> String {
    let s = format!("{x:.12}");
    let trimmed = s.trim_end_matches('0');
    let mut out = if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    };
    if out == "-0.0" {
        out = "0.0".to_string();
    }
    out
}

fn shown(word: &str) -> String {
    if word.is_empty() {
        "ε".to_string()
    } else {
        word.to_string()
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "word: {}", shown(&self.word))?;
        writeln!(f, "probability: {}", fmt_prob(self.probability))?;
        writeln!(f)?;
        writeln!(f, "{:<8} accepted so far", "read")?;
        for s in &self.steps {
            writeln!(f, "{:<8} {}", s.symbol, fmt_prob(s.cumulative))?;
        }
        writeln!(f)?;
        writeln!(f, "{:<16} probability", "prefix")?;
        for p in &self.prefixes {
            writeln!(f, "{:<16} {}", shown(&p.prefix), fmt_prob(p.probability))?;
        }
        Ok(())
    }
}
