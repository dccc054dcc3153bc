//! Capacity bounds for the two-relay diamond network: noiseless bit-pipes of
//! capacities C1 and C2 feed two relays whose outputs meet at a sink through
//! a multiple-access channel. The crate computes the cut-set bound, an
//! auxiliary-channel upper bound, an achievable (lower) bound, and closed
//! forms for the Gaussian and binary adder MACs, including the regimes where
//! the bounds meet.
//!
//! Conventions: all information quantities are in bits (base-2 logarithms,
//! with 0 log 0 = 0).

pub mod bounds;
pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod measures;
pub mod network;
pub mod optim;

pub use bounds::{
    cutset_bound, cutset_constraints, constraint5, equiv_constraint5, fm_split_oracle,
    theorem1_upper, theorem2_lower, theorem2_terms, AuxCard, BoundReport, RateSplit, SearchMeta,
};
pub use closed_forms::{
    adder_alpha, adder_constraints, adder_match_report, adder_upper, corollary1_constraints,
    gaussian_aux_noise, gaussian_lower, gaussian_lower_mixture, gaussian_lower_terms,
    gaussian_upper, rho_threshold, theorem3_report, GaussianLowerWitness, Theorem3Report,
};
pub use error::{Error, Result};
pub use measures::{JointDist, Kernel, ProbVector};
pub use network::{
    binary_adder_mac, load_mac, DiamondConfig, DiscreteMac, GaussianMacParams,
};
pub use optim::SearchOpts;
