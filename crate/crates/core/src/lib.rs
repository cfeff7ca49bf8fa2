//! Diamond norms, channel deficiency and base-section norms for
//! finite-dimensional quantum channels between block algebras.

pub mod cones;
pub mod conic;
pub mod deficiency;
pub mod error;
pub mod hmap;
pub mod json;
pub mod matops;
pub mod norms;
pub mod ovs;
pub mod random;

pub use cones::{Bounds, Family, MembershipVerdict, Verdict};
pub use deficiency::{DecisionSpace, DeficiencyOptions, DeficiencyReport, Direction};
pub use error::{Error, Result};
pub use hmap::{Experiment, HermitianMap};
pub use matops::{BlockAlgebra, CMat, HermitianOperator, Povm, Side, State, C64};
pub use norms::{NormOptions, NormResult};
pub use ovs::{BaseSection, PolyCone};
pub use random::Rng;
