//! Truncated potentials, log branches and the fits run on them.

mod fit;
mod oddrank;
mod poly;
mod potential;

pub use fit::{
    fit_series, theta_fit, theta_fit_with, theta_t_independence, two_cusp_relation_check,
    two_cusp_relation_check_with, FitOptions, SampleFit, ThetaFit,
};
pub use oddrank::{check_staircase, odd_matrix_rank, OddRank};
pub use poly::{monomials_of_degree, Coeff, Monomial, Series};
pub use potential::{
    branch_from_potential, mixed_partial_check, mixed_partials_on_branch, sgi_check,
    sgi_on_branch, wgi_check, CoeffMode, LinearForm, LogBranch, PotentialSeries,
    DEFAULT_TRUNCATION,
};
