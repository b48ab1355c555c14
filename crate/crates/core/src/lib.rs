//! Tamagawa ratios of y^2 = x^3 + Ax^2 + Bx and its 2-isogenous partner.
//!
//! The exponent t(A, B) = dim Sel_phi - dim Sel_phihat is computed twice:
//! from local image sizes ([`local::tamagawa_exponent`]) and from the
//! Selmer groups themselves ([`descent::descend`]). [`stats`] compares the
//! prime counts behind t across the family E(X) with an independent-prime
//! model.

pub mod arith;
pub mod descent;
pub mod error;
pub mod family;
mod fp;
pub mod local;
pub mod stats;

pub use arith::FactoredInteger;
pub use descent::{Descent, LocalImage, Orientation, SelmerSet, Side, TorsorQuartic};
pub use error::{Error, Result};
pub use family::{CurvePair, FamilyWindow};
pub use local::{Kodaira, LocalFactorLedger, Place, ReductionType};
pub use stats::{JointHistogram, MomentReport, PrimeModel};
