//! Growth invariants of sequence triples and of functions, computed in log scale.

pub mod expr;
pub mod function;
pub mod growth;
pub mod limits;
pub mod value;

pub use expr::{Expr, Generator};
pub use function::{
    classify_sum_function, function_profile, FunctionHorizon, FunctionProfile, SumBranch, SumClassification, Tri,
};
pub use growth::{check_hypotheses, growth_profile, GrowthProfile, HypothesisReport, Overrides, SequenceTriple, Verdict};
pub use limits::{ExtReal, LimitEstimate, LimitRules};
pub use value::Val;
