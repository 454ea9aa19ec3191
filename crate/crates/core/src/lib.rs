//! Pricing library for a subdiffusive fractional short-rate model.
//!
//! Firm value and short rate are driven by correlated fractional Brownian
//! motions evaluated on the clock of an inverse α-stable subordinator. The
//! crate provides:
//!
//! * [`processes`]: seeded simulation of the subordinator, its inverse, fBm
//!   and the composed asset/rate trajectories,
//! * [`bond`]: closed-form zero-coupon bond prices and their classical limits,
//! * [`warrant`]: closed-form equity-warrant prices with dilution,
//! * [`pde`]: a finite-difference solver for the transformed warrant PDE and
//!   residual checks for the pricing PDEs,
//! * [`mc`]: Monte Carlo oracles for the classical limit,
//! * [`validation`]: the cross-oracle suite used by the `validate` command.

pub mod bond;
pub mod error;
pub mod mc;
pub mod numerics;
pub mod params;
pub mod pde;
pub mod processes;
pub mod validation;
pub mod warrant;

pub use error::{Error, Result};
pub use params::{ModelParams, WarrantTerms};
