//! Exact arithmetic for one-dimensional piecewise-affine functions, the
//! networks that compute them, and the counting arguments that separate them.
//!
//! Everything here runs over arbitrary-precision rationals: evaluation,
//! addition, composition, thresholding, and network compilation are all
//! exact, so statements like "this network's function has 1026 pieces" or
//! "this classifier errs on at least a third of the points" are checked as
//! identities, not approximations.
//!
//! Module map:
//! - [`rational`]: the scalar layer (parsing, helpers, decimal rendering);
//! - [`pwl`]: canonical piecewise-affine functions and their algebra;
//! - [`network`]: feedforward and iterated networks, exact compilation, and
//!   the mirror-map family;
//! - [`alternating`]: alternating-label datasets, classification error, and
//!   the piece-count lower bounds;
//! - [`verify`]: randomized self-check suites with frozen seeds and an
//!   independent grid oracle.

pub mod alternating;
pub mod network;
pub mod pwl;
pub mod rational;
pub mod verify;

pub use alternating::{
    ap_image_check, classification_error, n_ap, network_lower_bound, sawtooth_lower_bound,
    strict_paper_n_ap, BoundReport, DatasetError, LabeledDataset,
};
pub use network::{
    mirror_closed_form, mirror_closed_form_pwl, mirror_decompose, mirror_map, mirror_network,
    Activation, MirrorDecomposition, NetworkError, NetworkSpec, Neuron, RecurrentSpec,
};
pub use pwl::{AffinePiece, PwlError, PwlFunction, ThresholdClassifier};
pub use rational::{parse_rational, to_decimal, Rational, RationalParseError};
pub use verify::{
    grid_oracle, random_network, random_sawtooth, run_suite, run_suite_named, GeneratorConfig,
    GridReport, Suite, SuiteReport, VerifyError,
};
