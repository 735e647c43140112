//! Market generators: the small counterexamples, the lower-bound
//! construction, constraint encoders for applications, and random markets.

mod applications;
mod examples;
mod lower_bound;
mod random;

pub use applications::{
    budget, gen_budget, gen_overlapping_types, gen_refugee, gen_typed_quotas, overlapping_types, refugee,
    type_quotas,
};
pub use examples::{example1_constraints, gen_example1, gen_example2, Example1Rendering, EXAMPLE1_DEFAULT_EPS};
pub use lower_bound::{gen_lower_bound_market, gen_thm62, gen_thm63_market, thm62_spec, LowerBoundSpec, Thm63Instance};
pub use random::{gen_random, ConstraintClass, RandomParams, UtilityClass, RANDOM_MAX_DOCTORS};
