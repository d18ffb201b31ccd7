//! Learning mixed-integer linear programs from contextual examples.
//!
//! A hypothesis is a MILP `max c^T x s.t. A x <= b` over a finite integer
//! box. Training data are triples `(context, point, label)` where the label
//! says whether the point is optimal once the context rows `S x <= t` are
//! added. The learner ([`search::missle_search`]) walks the parameter space
//! with gradient-defined moves on a case-wise surrogate loss while selecting
//! among them by the true 0-1 loss.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod hull;
pub mod io;
pub mod loss;
pub mod model;
pub mod search;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{contextual_metrics, evaluate, region_metrics, EvalReport};
pub use loss::{classify, surrogate_gradient, surrogate_loss, zero_one_loss, Gradient, LossBreakdown};
pub use model::{apply_context, normalize_model, validate_model, Context, ContextualExample, Dataset, MilpModel};
pub use search::{learn, SearchConfig, SearchTrace, Strategy};
pub use solver::{enumerate_optimum, is_feasible, solve_lp, solve_milp, SolveOutcome, SolveStatus};
pub use synth::{generate_dataset, GenConfig};
