//! Kissing configurations as Gram-matrix completion.

pub mod corrector;
pub mod cosines;
pub mod error;
pub mod exact;
pub mod factor;
pub mod filler;
pub mod fingerprint;
pub mod game;
pub mod gram;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod reassemble;
pub mod refconfigs;
pub mod scalar;
pub mod simulate;
pub mod tolerance;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{ArithMode, Rational, Scalar};
pub use gram::GramState;
pub use tolerance::Tolerances;

pub type FloatGram = GramState<f64>;
pub type RationalGram = GramState<Rational>;
