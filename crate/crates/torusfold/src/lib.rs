//! Frequency folding for trigonometric polynomials on the torus.
//!
//! A polynomial `f(x) = sum a_lambda e^{2 pi i <lambda, x>}` on the
//! `n`-torus is folded to the single-variable polynomial
//! `Tf(z) = sum a_lambda e^{2 pi i <lambda, tau> z}`, i.e. `f` composed
//! with the line `z -> tau z`. When the integer sequence `tau` grows fast
//! enough relative to a frequency box, the fold is injective on the box and
//! the L1 norm changes by at most an explicit factor.
//!
//! The crate provides:
//!
//! - [`spectrum`]: boxes, folding sequences, the growth condition,
//!   collision scans and sequence construction.
//! - [`trigpoly`]: sparse trigonometric polynomials, the folding operator
//!   and its intermediate chain, step approximations, a text format.
//! - [`norms`]: certified L1 norms on product grids with explicit error
//!   intervals, plus a Monte Carlo cross-check.
//! - [`verify`]: the three auxiliary estimates and the end-to-end
//!   telescoping chain, measured rather than assumed.
//! - [`sampling`]: seeded random polynomial draws for experiments.
//!
//! ```
//! use num_complex::Complex64;
//! use torusfold::spectrum::{BoxSpec, FoldingSeq, MultiIndex};
//! use torusfold::trigpoly::{CollisionPolicy, TrigPoly};
//! use torusfold::norms::l1_certified;
//!
//! let mut f = TrigPoly::zero(2);
//! f.add_term(&MultiIndex::new(vec![1, 0]).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
//! f.add_term(&MultiIndex::new(vec![0, 1]).unwrap(), Complex64::new(0.0, 0.5)).unwrap();
//!
//! let taus = FoldingSeq::new(vec![1, 5]).unwrap();
//! let g = f.apply_t(&taus, CollisionPolicy::Strict).unwrap();
//! assert_eq!(g.dim(), 1);
//! assert_eq!(g.num_terms(), 2);
//!
//! let norm = l1_certified(&g, 1e-3).unwrap();
//! assert!(norm.lower() <= norm.value && norm.value <= norm.upper());
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod norms;
pub mod report;
pub mod sampling;
pub mod spectrum;
pub mod trigpoly;
pub mod verify;

pub use error::{Error, Result};
pub use norms::{l1_certified, l1_monte_carlo, GridPolicy, NormEstimate};
pub use spectrum::{BoxSpec, FoldingSeq, MultiIndex};
pub use trigpoly::{CollisionPolicy, TrigPoly};
pub use verify::{theorem_chain, ChainReport, VerifyConfig};

#[cfg(doctest)]
mod book_doctests {
    #![doc = include_str!("../../../book/src/folding.md")]
    #![doc = include_str!("../../../book/src/admissibility.md")]
    #![doc = include_str!("../../../book/src/certified-norms.md")]
    #![doc = include_str!("../../../book/src/chain.md")]
}
