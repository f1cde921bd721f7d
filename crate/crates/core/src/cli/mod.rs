//! The `qfa` command-line tool.
//!
//! Exit codes: 0 success / equivalent, 1 not equivalent, 2 invalid input,
//! 3 unreadable or unparsable file.

pub mod format;
pub mod random;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::e1qfa::E1qfa;
use crate::equivalence::{
    decide_e, decide_mm, enumerate_equiv, length_bound, EquivError, Tolerances, Verdict,
};
use crate::mm1qfa::DEFAULT_TOL_VALID;
use crate::model::Alphabet;

use format::{parse_automaton, serialize_automaton, Automaton, FormatError};
use report::{fmt_prob, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_EQUIVALENT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Above this many words of the longest length the enumerate method needs `--force`.
pub const ENUMERATION_WARN_LIMIT: u128 = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "qfa",
    version,
    about = "Measure-many and enhanced one-way quantum finite automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closure,
    Enumerate,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Closure => "closure",
            Method::Enumerate => "enumerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Mm1qfa,
    E1qfa,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an automaton file for well-formedness.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL_VALID)]
        tol_valid: f64,
    },
    /// Acceptance probability of one word, with per-step and per-prefix tables.
    Run {
        file: PathBuf,
        /// Concatenated symbols, or comma-separated for multi-character symbols; "" is the empty word.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value_t = DEFAULT_TOL_VALID)]
        tol_valid: f64,
    },
    /// Decide whether two automata accept every word with the same probability.
    Equiv {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Closure)]
        method: Method,
        /// Longest word checked by the enumerate method (default n1²+n2²−1).
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol_eq: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_span: f64,
        #[arg(long, default_value_t = DEFAULT_TOL_VALID)]
        tol_valid: f64,
        /// Print a JSON verdict object.
        #[arg(long)]
        json: bool,
        /// Run the enumerate method even when the word count is huge.
        #[arg(long)]
        force: bool,
        /// Worker threads for the enumerate method.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Write a seeded random automaton.
    Random {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        states: u16,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        alphabet: u16,
        #[arg(long)]
        seed: u64,
        /// Largest Kraus list per symbol (e1qfa only).
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u16).range(1..))]
        kraus: u16,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: exit code plus message for standard error.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let outcome = match cli.command {
        Command::Validate { file, tol_valid } => validate(&file, tol_valid),
        Command::Run {
            file,
            word,
            tol_valid,
        } => run_word(&file, &word, tol_valid),
        Command::Equiv {
            file1,
            file2,
            method,
            max_len,
            tol_eq,
            tol_span,
            tol_valid,
            json,
            force,
            jobs,
        } => {
            let tol = Tolerances {
                valid: tol_valid,
                eq: tol_eq,
                span: tol_span,
            };
            let opts = EquivOptions {
                method,
                max_len,
                json,
                force,
                jobs: jobs as usize,
            };
            equiv(&file1, &file2, &tol, &opts)
        }
        Command::Random {
            model,
            states,
            alphabet,
            seed,
            kraus,
            out,
        } => random_cmd(
            model,
            states as usize,
            alphabet as usize,
            seed,
            kraus as usize,
            out.as_deref(),
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path, tol_valid: f64) -> Result<Automaton, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    parse_automaton(&text, tol_valid).map_err(|e| match e {
        FormatError::Parse(_) => Failure::io(format!("{}: {e}", path.display())),
        FormatError::Validation(_) => Failure::invalid(format!("{}: {e}", path.display())),
    })
}

fn validate(file: &Path, tol_valid: f64) -> Outcome {
    let a = load(file, tol_valid)?;
    println!(
        "ok: {} with {} states over {} symbols",
        a.model().name(),
        a.size(),
        a.alphabet().len()
    );
    Ok(EXIT_OK)
}

fn run_word(file: &Path, word: &str, tol_valid: f64) -> Outcome {
    let a = load(file, tol_valid)?;
    let w = a
        .alphabet()
        .parse_word(word)
        .map_err(|e| Failure::invalid(format!("word {word:?}: {e}")))?;
    let report = RunReport::new(&a, &w).map_err(|e| Failure::invalid(e.to_string()))?;
    print!("{report}");
    Ok(EXIT_OK)
}

struct EquivOptions {
    method: Method,
    max_len: Option<usize>,
    json: bool,
    force: bool,
    jobs: usize,
}

#[derive(Debug, Serialize)]
struct JsonVerdict {
    equivalent: bool,
    counterexample: Option<String>,
    p1: Option<f64>,
    p2: Option<f64>,
    basis_size: Option<usize>,
    method: &'static str,
    verdict: &'static str,
    checked_up_to: Option<usize>,
}

/// The two automata as a same-model pair; an MM-1QFA paired with an E-1QFA
/// is embedded into the E model.
enum Pair {
    Mm(crate::Mm1qfa, crate::Mm1qfa),
    E(E1qfa, E1qfa),
}

fn embed(a: Automaton) -> Result<E1qfa, Failure> {
    match a {
        Automaton::E(e) => Ok(e),
        Automaton::Mm(m) => E1qfa::from_mm(&m)
            .map_err(|e| Failure::invalid(format!("cannot compare an mm1qfa with an e1qfa: {e}"))),
    }
}

fn pair(a1: Automaton, a2: Automaton) -> Result<Pair, Failure> {
    match (a1, a2) {
        (Automaton::Mm(m1), Automaton::Mm(m2)) => Ok(Pair::Mm(m1, m2)),
        (a1, a2) => Ok(Pair::E(embed(a1)?, embed(a2)?)),
    }
}

fn equiv_failure(e: EquivError) -> Failure {
    Failure::invalid(e.to_string())
}

fn equiv(file1: &Path, file2: &Path, tol: &Tolerances, opts: &EquivOptions) -> Outcome {
    let a1 = load(file1, tol.valid)?;
    let a2 = load(file2, tol.valid)?;
    if a1.alphabet() != a2.alphabet() {
        return Err(Failure::invalid(format!(
            "alphabets differ: {:?} vs {:?}",
            a1.alphabet().symbols(),
            a2.alphabet().symbols()
        )));
    }
    let alphabet: Alphabet = a1.alphabet().clone();
    let bound = length_bound(a1.size(), a2.size());
    let pair = pair(a1, a2)?;
    let (verdict, basis_size) = match opts.method {
        Method::Closure => {
            if opts.max_len.is_some() {
                eprintln!("warning: --max-len only applies to --method enumerate; ignored");
            }
            let d = match &pair {
                Pair::Mm(m1, m2) => decide_mm(m1, m2, tol),
                Pair::E(e1, e2) => decide_e(e1, e2, tol),
            }
            .map_err(equiv_failure)?;
            (d.verdict, Some(d.basis_size))
        }
        Method::Enumerate => {
            let max_len = opts.max_len.unwrap_or(bound);
            let longest =
                (alphabet.len() as u128).saturating_pow(max_len.min(u32::MAX as usize) as u32);
            if longest > ENUMERATION_WARN_LIMIT {
                eprintln!(
                    "warning: enumeration up to length {max_len} visits more than {longest} words"
                );
                if !opts.force {
                    return Err(Failure::invalid("refusing to enumerate without --force"));
                }
            }
            let v = match &pair {
                Pair::Mm(m1, m2) => enumerate_equiv(m1, m2, Some(max_len), tol.eq, opts.jobs),
                Pair::E(e1, e2) => enumerate_equiv(e1, e2, Some(max_len), tol.eq, opts.jobs),
            }
            .map_err(equiv_failure)?;
            (v, None)
        }
    };
    let out = if opts.json {
        let mut j = JsonVerdict {
            equivalent: verdict.is_equivalent(),
            counterexample: None,
            p1: None,
            p2: None,
            basis_size,
            method: opts.method.name(),
            verdict: "",
            checked_up_to: None,
        };
        match &verdict {
            Verdict::Equivalent => j.verdict = "Equivalent",
            Verdict::NotEquivalent { word, p1, p2 } => {
                j.verdict = "NotEquivalent";
                j.counterexample = Some(alphabet.render(word));
                j.p1 = Some(*p1);
                j.p2 = Some(*p2);
            }
            Verdict::BoundedEquivalent { t } => {
                j.verdict = "BoundedEquivalent";
                j.checked_up_to = Some(*t);
            }
        }
        serde_json::to_string_pretty(&j).expect("plain data serializes") + "\n"
    } else {
        match &verdict {
            Verdict::Equivalent => "Equivalent\n".to_string(),
            Verdict::NotEquivalent { word, p1, p2 } => {
                let shown = if word.is_empty() {
                    "\"\" (empty word)".to_string()
                } else {
                    format!("\"{}\"", alphabet.render(word))
                };
                format!(
                    "NotEquivalent\ncounterexample: {shown}\np1: {}\np2: {}\n",
                    fmt_prob(*p1),
                    fmt_prob(*p2)
                )
            }
            Verdict::BoundedEquivalent { t } => {
                format!("BoundedEquivalent: no difference on words up to length {t}\n")
            }
        }
    };
    print!("{out}");
    let _ = std::io::stdout().flush();
    Ok(match verdict {
        Verdict::NotEquivalent { .. } => EXIT_NOT_EQUIVALENT,
        Verdict::Equivalent | Verdict::BoundedEquivalent { .. } => EXIT_OK,
    })
}

fn random_cmd(
    model: ModelArg,
    n: usize,
    k: usize,
    seed: u64,
    kraus: usize,
    out: Option<&Path>,
) -> Outcome {
    let a: Automaton = match model {
        ModelArg::Mm1qfa => random::random_mm(n, k, seed).into(),
        ModelArg::E1qfa => random::random_e(n, k, kraus, seed).into(),
    };
    let text = serialize_automaton(&a);
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
