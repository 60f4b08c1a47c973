//! Functional dissipativity toolkit for second-order elliptic systems, with a
//! focus on the two-dimensional Lamé operator.

pub mod criteria;
pub mod error;
pub mod fem;
pub mod forms;
pub mod identities;
pub mod lambda;
pub mod operator;
pub mod optimize;
pub mod orlicz;
pub mod phi;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod young;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhiSpec64 = phi::PhiSpec<f64>;
pub type LambdaProfile64 = lambda::LambdaProfile<f64>;
pub type YoungPair64 = young::YoungPair<f64>;
pub type CoefficientField64 = operator::CoefficientField<f64>;
pub type GeneralSystem64 = operator::GeneralSystem<f64>;
pub type Verdict64 = criteria::Verdict<f64>;
pub type TestField64 = forms::TestField<f64>;
pub type FemProblem64 = fem::FemProblem<f64>;
pub type FemSolution64 = fem::FemSolution<f64>;
pub type YoungFunction64 = orlicz::YoungFunction<f64>;
pub type Samples64 = orlicz::Samples<f64>;
