//! Randomized self-verification: seeded generators, an independent
//! grid-sampling oracle, and one named suite per counting result.
//!
//! The suites are falsification harnesses. Each one draws random instances
//! (sawtooth functions, networks, datasets), evaluates a single inequality or
//! identity with exact arithmetic, and reports every violation with a
//! replayable counterexample. A correct implementation produces zero failures
//! at any case count; a single failure is a bug either in the implementation
//! or in the result being checked.
//!
//! Determinism contract: case `i` of a run with seed `s` draws from
//! `ChaCha8Rng` seeded with `s` on stream `i`, so results are independent of
//! execution order and reproducible from `(suite, cases, seed)` alone.

mod suites;

use crate::network::{Activation, NetworkSpec, Neuron};
use crate::pwl::{AffinePiece, PwlFunction};
use crate::rational::Rational;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("grid oracle needs lo < hi and at least 3 samples")]
    DegenerateGrid,
}

/// Tunable knobs for the random instance generators.
///
/// Random rationals are dyadic with denominator exponent at most
/// `denom_exponent`, drawn from a mix of coarse and fine grids so that
/// coincident breakpoints, zero slopes, and exactly duplicated pieces occur
/// with useful frequency. The counting lemmas must survive all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Piece budget for [`random_sawtooth`]; results may have fewer pieces
    /// after canonicalization, never more.
    pub max_pieces: usize,
    pub breakpoint_lo: Rational,
    pub breakpoint_hi: Rational,
    /// Bound on |slope| and |intercept| of generated pieces and weights.
    pub magnitude: u32,
    /// Largest dyadic denominator exponent for generated rationals.
    pub denom_exponent: u32,
    /// Width bound for [`random_network`].
    pub width: usize,
    /// Exact depth for [`random_network`].
    pub depth: usize,
    /// Restrict [`random_sawtooth`] to continuous functions.
    pub continuous_only: bool,
    pub activation: Activation,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            max_pieces: 8,
            breakpoint_lo: crate::rational::rat(-2, 1),
            breakpoint_hi: crate::rational::rat(2, 1),
            magnitude: 8,
            denom_exponent: 10,
            width: 2,
            depth: 2,
            continuous_only: false,
            activation: Activation::Relu,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let invalid = |m: &str| Err(VerifyError::InvalidConfig(m.into()));
        if self.max_pieces == 0 {
            return invalid("max_pieces must be at least 1");
        }
        if self.breakpoint_lo >= self.breakpoint_hi {
            return invalid("breakpoint range is empty");
        }
        if self.magnitude == 0 {
            return invalid("magnitude must be at least 1");
        }
        if self.denom_exponent > 30 {
            return invalid("denom_exponent above 30 is unsupported");
        }
        if self.width == 0 || self.depth == 0 {
            return invalid("width and depth must be at least 1");
        }
        Ok(())
    }
}

/// A dyadic rational in `[-magnitude, magnitude]` with denominator exponent
/// drawn uniformly from `0..=denom_exponent` (coarse grids collide often,
/// which is intentional).
fn dyadic_in_magnitude(rng: &mut impl Rng, magnitude: u32, denom_exponent: u32) -> Rational {
    let e = rng.gen_range(0..=denom_exponent);
    let span = i64::from(magnitude) << e;
    Rational::new(BigInt::from(rng.gen_range(-span..=span)), BigInt::from(1i64 << e))
}

/// A dyadic point in `[lo, hi]`.
fn dyadic_in_range(
    rng: &mut impl Rng,
    lo: &Rational,
    hi: &Rational,
    denom_exponent: u32,
) -> Rational {
    let e = rng.gen_range(0..=denom_exponent);
    let cells = 1i64 << e;
    let u = Rational::new(BigInt::from(rng.gen_range(0..=cells)), BigInt::from(cells));
    lo + (hi - lo) * u
}

/// A rational in `[0, 1]` with arbitrary denominator up to `max_denom`.
fn rational_in_unit(rng: &mut impl Rng, max_denom: u64) -> Rational {
    let denom = rng.gen_range(1..=max_denom);
    let numer = rng.gen_range(0..=denom);
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Draws a canonical sawtooth with `piece_count <= cfg.max_pieces` from an
/// external RNG (used by the suites, one stream per case).
pub fn random_sawtooth_with(cfg: &GeneratorConfig, rng: &mut impl Rng) -> PwlFunction {
    let budget = rng.gen_range(1..=cfg.max_pieces);
    let mut breakpoints: Vec<Rational> = (0..budget - 1)
        .map(|_| dyadic_in_range(rng, &cfg.breakpoint_lo, &cfg.breakpoint_hi, cfg.denom_exponent))
        .collect();
    breakpoints.sort();
    breakpoints.dedup();

    let mut pieces: Vec<AffinePiece> = Vec::with_capacity(breakpoints.len() + 1);
    if cfg.continuous_only {
        let mut slope = dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent);
        let mut intercept = dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent);
        pieces.push(AffinePiece::new(slope.clone(), intercept.clone()));
        for b in &breakpoints {
            // Match values at b so the new piece continues the old one.
            let next_slope = if rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent)
            };
            intercept = (&slope - &next_slope) * b + intercept;
            slope = next_slope;
            pieces.push(AffinePiece::new(slope.clone(), intercept.clone()));
        }
    } else {
        for i in 0..=breakpoints.len() {
            if i > 0 && rng.gen_bool(0.15) {
                // Exact duplicate of the previous piece: must merge away.
                pieces.push(pieces[i - 1].clone());
                continue;
            }
            let slope = if rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent)
            };
            pieces.push(AffinePiece::new(
                slope,
                dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent),
            ));
        }
    }
    PwlFunction::new(breakpoints, pieces).expect("generated parts are ordered")
}

/// Deterministic draw seeded from `cfg.seed`.
pub fn random_sawtooth(cfg: &GeneratorConfig) -> Result<PwlFunction, VerifyError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(random_sawtooth_with(cfg, &mut rng))
}

/// Draws a network with per-layer widths in `1..=cfg.width` (final layer 1),
/// exact depth `cfg.depth`, and weights/biases bounded by `cfg.magnitude`.
/// Zero weights occur deliberately.
pub fn random_network_with(cfg: &GeneratorConfig, rng: &mut impl Rng) -> NetworkSpec {
    let mut layers = Vec::with_capacity(cfg.depth);
    let mut fan_in = 1;
    for li in 0..cfg.depth {
        let width = if li + 1 == cfg.depth {
            1
        } else {
            rng.gen_range(1..=cfg.width)
        };
        let mut layer = Vec::with_capacity(width);
        for _ in 0..width {
            let bias = dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent);
            let weights = (0..fan_in)
                .map(|_| {
                    if rng.gen_bool(0.125) {
                        Rational::zero()
                    } else {
                        dyadic_in_magnitude(rng, cfg.magnitude, cfg.denom_exponent)
                    }
                })
                .collect();
            layer.push(Neuron::new(bias, weights));
        }
        layers.push(layer);
        fan_in = width;
    }
    let mut spec = NetworkSpec::new(layers, cfg.activation.clone());
    spec.output_activation = rng.gen_bool(0.75);
    spec
}

/// Deterministic draw seeded from `cfg.seed`.
pub fn random_network(cfg: &GeneratorConfig) -> Result<NetworkSpec, VerifyError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(random_network_with(cfg, &mut rng))
}

/// What [`grid_oracle`] detected: maximal affine runs on the sample grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridReport {
    pub segments: usize,
    pub slopes: Vec<Rational>,
}

/// Samples `f` at `samples` uniformly spaced points on `[lo, hi]` and counts
/// maximal runs of consistent affine behavior.
///
/// All arithmetic is exact, so consecutive sample gaps lying on a common
/// affine piece have literally equal difference quotients (equivalently, zero
/// second differences). A run must span at least two gaps (three collinear
/// points) to count as a segment; single-gap runs are artifacts of gaps that
/// straddle a breakpoint and are discarded. Consequences: the detected
/// segment count never exceeds the true canonical piece count, and equals the
/// number of pieces meeting `[lo, hi]` whenever the grid spacing is finer
/// than half the minimum piece width.
pub fn grid_oracle(
    f: impl Fn(&Rational) -> Rational,
    lo: &Rational,
    hi: &Rational,
    samples: usize,
) -> Result<GridReport, VerifyError> {
    if lo >= hi || samples < 3 {
        return Err(VerifyError::DegenerateGrid);
    }
    let count = BigInt::from(samples as u64 - 1);
    let step = (hi - lo) / Rational::from_integer(count);
    let values: Vec<Rational> = (0..samples)
        .map(|i| f(&(lo + &step * Rational::from_integer(BigInt::from(i as u64)))))
        .collect();
    let gap_slopes: Vec<Rational> = values
        .windows(2)
        .map(|w| (&w[1] - &w[0]) / &step)
        .collect();

    let mut slopes = Vec::new();
    let mut run_start = 0;
    for i in 1..=gap_slopes.len() {
        if i < gap_slopes.len() && gap_slopes[i] == gap_slopes[run_start] {
            continue;
        }
        if i - run_start >= 2 {
            slopes.push(gap_slopes[run_start].clone());
        }
        run_start = i;
    }
    Ok(GridReport {
        segments: slopes.len(),
        slopes,
    })
}

/// The named verification suites, one per counting result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// `(f + g)` has at most `pieces(f) + pieces(g)` pieces; sums are exact.
    AddBound,
    /// `f o g` has at most `pieces(f) * pieces(g)` pieces; values are exact
    /// for continuous outer functions.
    ComposeBound,
    /// Compiled networks respect the `(t m)^l` piece bound and agree with
    /// the numeric forward pass.
    NetworkBound,
    /// Threshold classifiers of t-sawtooths have at most 2t regions and
    /// 2t - 1 label changes, and classify exactly.
    CrossingBound,
    /// Classification error on the n-ap is at least `(n - 4t)/(3n)`.
    LowerBound,
    /// The direct closed form of the k-th mirror iterate equals the
    /// compiled/composed form, structurally and pointwise.
    FmkClosedForm,
    /// Pre- and post-composition mirroring identities.
    Mirroring,
    /// `f_m^k(x) = f_m^k(1 - x)` on `[0, 1]`.
    Symmetry,
    /// The mirror image of the `2^k`-ap is the `2^{k-1}`-ap with the stated
    /// duplication pattern.
    ApImage,
    /// Sampled networks never beat the theorem's error lower bound.
    TheoremGap,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::AddBound,
        Suite::ComposeBound,
        Suite::NetworkBound,
        Suite::CrossingBound,
        Suite::LowerBound,
        Suite::FmkClosedForm,
        Suite::Mirroring,
        Suite::Symmetry,
        Suite::ApImage,
        Suite::TheoremGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AddBound => "add_bound",
            Suite::ComposeBound => "compose_bound",
            Suite::NetworkBound => "network_bound",
            Suite::CrossingBound => "crossing_bound",
            Suite::LowerBound => "lower_bound",
            Suite::FmkClosedForm => "fmk_closed_form",
            Suite::Mirroring => "mirroring",
            Suite::Symmetry => "symmetry",
            Suite::ApImage => "ap_image",
            Suite::TheoremGap => "theorem_gap",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// A case count that exercises the suite meaningfully in about a second.
    /// Suites whose cases enumerate `k` values default to one full cycle.
    pub fn default_cases(self) -> u64 {
        match self {
            Suite::FmkClosedForm => 12,
            Suite::Symmetry => 10,
            Suite::ApImage => 11,
            Suite::TheoremGap | Suite::NetworkBound => 100,
            _ => 200,
        }
    }
}

/// Outcome of one suite run; serializes as the JSON report consumed by CI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub failures: u64,
    /// Descriptions of the first few failing cases (capped); each names its
    /// case index, so `seed` + index replays it exactly.
    pub counterexamples: Vec<String>,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const COUNTEREXAMPLE_CAP: usize = 10;

/// Runs `cases` independent cases of the named suite. Case `i` draws from
/// stream `i` of a ChaCha8 generator seeded with `seed`.
pub fn run_suite(suite: Suite, cases: u64, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut failures = 0;
    let mut counterexamples = Vec::new();
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(case);
        if let Err(description) = suites::run_case(suite, case, &mut rng) {
            failures += 1;
            if counterexamples.len() < COUNTEREXAMPLE_CAP {
                counterexamples.push(format!("case {case}: {description}"));
            }
        }
    }
    SuiteReport {
        suite: suite.name().to_owned(),
        cases,
        failures,
        counterexamples,
        seed,
        wall_time_ms: started.elapsed().as_millis() as u64,
    }
}

/// Name-keyed front end for [`run_suite`].
pub fn run_suite_named(name: &str, cases: u64, seed: u64) -> Result<SuiteReport, VerifyError> {
    let suite = Suite::from_name(name).ok_or_else(|| VerifyError::UnknownSuite(name.into()))?;
    Ok(run_suite(suite, cases, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{mirror_closed_form_pwl, mirror_map};
    use crate::rational::{int, rat};

    #[test]
    fn config_validation() {
        assert!(GeneratorConfig::default().validate().is_ok());
        let mut cfg = GeneratorConfig::default();
        cfg.max_pieces = 0;
        assert!(matches!(cfg.validate(), Err(VerifyError::InvalidConfig(_))));
        let mut cfg = GeneratorConfig::default();
        cfg.breakpoint_hi = cfg.breakpoint_lo.clone();
        assert!(matches!(cfg.validate(), Err(VerifyError::InvalidConfig(_))));
        let mut cfg = GeneratorConfig::default();
        cfg.depth = 0;
        assert!(matches!(cfg.validate(), Err(VerifyError::InvalidConfig(_))));
    }

    #[test]
    fn sawtooth_generator_is_deterministic_and_bounded() {
        let cfg = GeneratorConfig {
            seed: 42,
            ..GeneratorConfig::default()
        };
        assert_eq!(random_sawtooth(&cfg).unwrap(), random_sawtooth(&cfg).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let f = random_sawtooth_with(&cfg, &mut rng);
            assert!(f.piece_count() <= cfg.max_pieces);
        }
    }

    #[test]
    fn single_piece_budget_gives_affine() {
        let cfg = GeneratorConfig {
            max_pieces: 1,
            ..GeneratorConfig::default()
        };
        assert_eq!(random_sawtooth(&cfg).unwrap().piece_count(), 1);
    }

    #[test]
    fn continuous_generator_draws_continuous_functions() {
        let cfg = GeneratorConfig {
            continuous_only: true,
            ..GeneratorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            assert!(random_sawtooth_with(&cfg, &mut rng).is_continuous());
        }
    }

    #[test]
    fn network_generator_contract() {
        let cfg = GeneratorConfig {
            seed: 5,
            width: 3,
            depth: 3,
            ..GeneratorConfig::default()
        };
        assert_eq!(random_network(&cfg).unwrap(), random_network(&cfg).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let spec = random_network_with(&cfg, &mut rng);
            spec.validate().unwrap();
            assert_eq!(spec.depth(), 3);
            assert!(spec.width() <= 3);
        }
    }

    #[test]
    fn oracle_on_mirror_family() {
        let f = mirror_map();
        let report = grid_oracle(|x| f.eval(x), &int(-1), &int(2), 3 * 1024 + 1).unwrap();
        assert_eq!(report.segments, 4);
        assert_eq!(report.slopes, vec![int(0), int(2), int(-2), int(0)]);
        let f2 = mirror_closed_form_pwl(2);
        let report = grid_oracle(|x| f2.eval(x), &int(-1), &int(2), 3 * 1024 + 1).unwrap();
        assert_eq!(report.segments, 6);
        assert_eq!(
            report.slopes,
            vec![int(0), int(4), int(-4), int(4), int(-4), int(0)]
        );
    }

    #[test]
    fn oracle_on_constant_and_stump() {
        let report = grid_oracle(|_| int(3), &int(0), &int(1), 64).unwrap();
        assert_eq!(report.segments, 1);
        assert_eq!(report.slopes, vec![int(0)]);
        // A jump: the straddling gap forms a length-1 run, which is dropped.
        let s = PwlFunction::stump(rat(1, 3));
        let report = grid_oracle(|x| s.eval(x), &int(0), &int(1), 257).unwrap();
        assert_eq!(report.segments, 2);
        assert_eq!(report.slopes, vec![int(0), int(0)]);
    }

    #[test]
    fn oracle_never_exceeds_true_piece_count() {
        let cfg = GeneratorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let f = random_sawtooth_with(&cfg, &mut rng);
            let report = grid_oracle(|x| f.eval(x), &rat(-3, 1), &rat(3, 1), 601).unwrap();
            assert!(
                report.segments <= f.piece_count(),
                "{} > {}",
                report.segments,
                f.piece_count()
            );
        }
    }

    #[test]
    fn oracle_rejects_degenerate_input() {
        assert_eq!(
            grid_oracle(|x| x.clone(), &int(1), &int(1), 10).unwrap_err(),
            VerifyError::DegenerateGrid
        );
        assert_eq!(
            grid_oracle(|x| x.clone(), &int(0), &int(1), 2).unwrap_err(),
            VerifyError::DegenerateGrid
        );
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(Suite::from_name(suite.name()), Some(suite));
        }
        assert_eq!(Suite::from_name("nope"), None);
        assert!(matches!(
            run_suite_named("nope", 1, 0),
            Err(VerifyError::UnknownSuite(_))
        ));
    }

    #[test]
    fn add_bound_spec_example() {
        let report = run_suite(Suite::AddBound, 1000, 7);
        assert_eq!(report.cases, 1000);
        assert_eq!(report.failures, 0, "{:?}", report.counterexamples);
    }

    #[test]
    fn all_suites_pass_smoke_runs() {
        for suite in Suite::ALL {
            let cases = suite.default_cases().min(25);
            let report = run_suite(suite, cases, 2026);
            assert_eq!(
                report.failures, 0,
                "suite {}: {:?}",
                report.suite, report.counterexamples
            );
            assert_eq!(report.cases, cases);
        }
    }

    #[test]
    fn suite_runs_are_reproducible() {
        let a = run_suite(Suite::ComposeBound, 40, 11);
        let b = run_suite(Suite::ComposeBound, 40, 11);
        assert_eq!((a.failures, &a.counterexamples), (b.failures, &b.counterexamples));
    }

    #[test]
    fn report_serialization() {
        let report = run_suite(Suite::ApImage, 3, 1);
        let json = serde_json::to_string(&report).unwrap();
        let back: SuiteReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(json.contains("\"suite\":\"ap_image\""));
        assert!(back.passed());
    }
}
