//! Convergence and rate analysis on finite grids.

pub mod corpus;
pub mod generalized;
pub mod grid;
pub mod korovkin;
pub mod lipschitz;
pub mod modulus;
pub mod rate;
pub mod schedule;

pub use corpus::{CorpusFunction, CORPUS, KOROVKIN_SET};
pub use generalized::{
    generalized_bound_check, generalized_rate_components, rate_components, ComponentRow,
    RateComponents,
};
pub use grid::Grid2D;
pub use korovkin::{
    convergence_table, error_surface, korovkin_suite, operator_surface, sup_error, ConvergenceTable,
};
pub use lipschitz::{
    class_membership, distance_to_set, lipschitz_bound_check, lipschitz_bound_report,
    IntervalUnion, LipschitzParams, LipschitzReport,
};
pub use modulus::{modulus_bivariate, ModulusTable};
pub use rate::{delta_n, delta_n_printed, rate_bound_check, RateReport, BOUND_TOLERANCE};
pub use schedule::{default_schedule, ParamSchedule};
