//! Inhomogeneous multinomial measures whose Olsen functions `b` and `B` are
//! analytic and touch only at `q = 0` and `q = 1`.
//!
//! The crate is organized bottom-up:
//!
//! - [`space`]: words, epoch schedules, the counter `N_n`, and the ultrametric
//!   on (mixed) symbolic spaces.
//! - [`measure`]: the product measure `μ` driven by an epoch schedule, its
//!   finite-depth tilted companions `ν_n`, and seeded word sampling.
//! - [`dirichlet`]: generalized Dirichlet polynomials `Σ a_j e^{p_j x}` and a
//!   zero counter that reports orders.
//! - [`olsen`]: closed-form `τ_n`, `B`, `b`, Legendre transforms, tilted
//!   parameters, entropies and the level-set spectrum.
//! - [`tangency`]: the Newton solver producing two probability vectors whose
//!   free-energy curves are tangent at `q ∈ {0, 1}`, plus certification.
//! - [`gray`]: generalized Gray codes, `c`-adic intervals, the pushforward of
//!   `μ` onto `[0, 1]`, and a doubling statistic.
//! - [`cli`]: the `olsen` command-line front end.
//!
//! ```
//! use multinomial_olsen::tangency::{BaseQuadruple, build_measure_pair, certify_tangency};
//!
//! let base = BaseQuadruple::preset("paper-110").unwrap();
//! let (a, b) = build_measure_pair(1e-3, 1e-3, &base).unwrap();
//! let cert = certify_tangency(&a, &b).unwrap();
//! assert!(cert.residuals.iter().all(|r| r.abs() < 1e-10));
//! ```

#![forbid(unsafe_code)]

pub mod cli;
pub mod dirichlet;
pub mod error;
pub mod gray;
pub mod measure;
pub mod numeric;
pub mod olsen;
pub mod space;
pub mod tangency;

pub use error::{Error, Result};
