//! Measure-many (MM-1QFA) and enhanced (E-1QFA) one-way quantum finite
//! automata: acceptance probabilities, the matrix families whose bilinear
//! forms reproduce per-word probability increments, and an equivalence
//! decision procedure based on span closure of those families.

pub mod catalog;
pub mod cli;
pub mod e1qfa;
pub mod equivalence;
pub mod linalg;
pub mod mm1qfa;
pub mod model;

pub use e1qfa::{DensityMatrix, E1qfa, E1qfaDef, Superoperator};
pub use equivalence::{Decision, Tolerances, Verdict};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use mm1qfa::{Mm1qfa, Mm1qfaDef};
pub use model::{Alphabet, ValidationError, Word, WordError, WordFunction};
