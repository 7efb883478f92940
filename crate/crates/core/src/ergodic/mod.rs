//! Cesàro averages of commuting Dunford–Schwartz families along sector nets,
//! and Besicovitch-weighted averages of one-parameter flows.

mod besicovitch;
mod net;
mod oracle;

pub use besicovitch::{
    besicovitch_average, besicovitch_reference, check_besicovitch, BesicovitchCheck, BesicovitchFunction,
    QuadratureResult, Residual, Semigroup, TrigPolynomial,
};
pub use net::{box_average, net_average_trace, sector_check, AverageMode, AverageTrace, CommutingFamily, SectorNet};
pub use oracle::cesaro_limit_oracle;
