//! Exact model counting for pseudo-Boolean formulas via algebraic decision
//! diagrams.
//!
//! The pipeline: parse an OPB formula, simplify it by unit inference and
//! assumption probing, compile each constraint into a 0/1-leaf ADD
//! (bottom-up, top-down, or a per-constraint dynamic choice), then multiply
//! the constraint ADDs cluster by cluster, projecting variables out as soon
//! as no later cluster mentions them. All arithmetic is exact: integer
//! counts for unweighted counting, rationals once literal weights are
//! involved.
//!
//! Entry points: [`opb::parse_opb`] to read a formula,
//! [`count::count_formula`] to count it, and [`oracle`] for the independent
//! verification counters.

pub mod add;
pub mod compile;
pub mod count;
pub mod formula;
pub mod generate;
pub mod opb;
pub mod oracle;
pub mod preprocess;
pub mod weights;

pub use add::{AddHandle, AddManager, AddOp, CarrierValue};
pub use compile::{CompileMode, CompileStats, ResolvedMode};
pub use count::{count_formula, ClusterStrategy, CountConfig, CountResult, CountStats};
pub use formula::{Assignment, Comparator, Literal, PbConstraint, PbFormula, Term, Var};
pub use weights::WeightFunction;
