//! Invariant densities of constant-slope piecewise-affine maps, computed by
//! independent methods that can be checked against each other.

pub mod closed_form;
pub mod dk10;
pub mod refine;
pub mod renyi_parry;
pub mod solve;
pub mod step;
pub mod transfer;

pub use closed_form::closed_form_density;
pub use dk10::{dk10_density, dk10_density_with, Dk10Config, Dk10Mode, Dk10Result};
pub use refine::{refine, FundamentalInterval, Refinement};
pub use renyi_parry::renyi_parry_density;
pub use solve::{solve_density_exact, solve_density_exact_with};
pub use step::PiecewiseConstantFn;
pub use transfer::{is_fixed_point, is_invariant_density, transfer_apply};
