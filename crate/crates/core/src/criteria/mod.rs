//! Decision procedures: the algebraic necessary condition, the Lamé
//! conditions in two dimensions, the N-dimensional sufficient condition and
//! the perturbation budget.

mod algebraic;
mod lame;

pub use algebraic::{algebraic_margin, algebraic_value, AlgebraicMargin, AlgebraicProbe, AlgebraicSearch};
pub use lame::{
    lame2d_rhs, lame2d_verdict, lame_nd_sufficient, lame_nd_threshold, perturbation_budget, perturbation_constant,
    power_flip,
    PerturbationBudget, Verdict, VerdictOptions, VerdictStatus,
};
