//! Numerical laboratory for weighted Bergman spaces with the exponentially
//! decaying weight `exp(1/rho)` on Reinhardt domains.

pub mod blowup;
pub mod cache;
pub mod cli;
pub mod config;
pub mod domains;
pub mod error;
pub mod kernel;
pub mod moments;
pub mod numerics;
pub mod quadrature;
pub mod report;
pub mod sobolev;

pub use domains::{DomainKind, DomainSpec, WeightSpec};
pub use error::{Error, Result};
pub use kernel::{MonomialFunction, TruncatedKernel};
pub use moments::{AuxDiscTable, AuxMode, Moment, MomentMethod, MomentSource, MomentTable};
pub use numerics::{LogValue, MultiIndex};
pub use quadrature::{Integral, QuadratureSpec};
pub use report::{Cell, ExperimentReport};
