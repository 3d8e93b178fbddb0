//! Canonical piecewise-affine functions on the real line.
//!
//! A [`PwlFunction`] partitions ℝ into `t` consecutive intervals and is
//! affine on each; `t` is its piece count and such a function is called
//! *t-sawtooth*. Pieces are left-closed/right-open: piece `i` is active on
//! `[b[i-1], b[i])` with `b[0] = -inf` and `b[t] = +inf`, so the value at a
//! breakpoint belongs to the piece on its right. Continuity is not required;
//! decision stumps are ordinary 2-piece functions here.
//!
//! The representation is canonical: breakpoints are strictly increasing and
//! no two adjacent pieces carry the identical affine map. All operations
//! return canonical results, so structural equality coincides with pointwise
//! equality (up to the right-open convention at jump points, see
//! [`PwlFunction::compose`]).

use crate::rational::{cmp_rationals, one_half, parse_rational, rat, Rational, RationalParseError};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwlError {
    #[error("a piecewise function needs at least one piece")]
    Empty,
    #[error("breakpoints must be strictly increasing")]
    UnorderedBreakpoints,
    #[error("{pieces} pieces do not fit {breakpoints} breakpoints (want breakpoints + 1)")]
    PieceCountMismatch { breakpoints: usize, pieces: usize },
    #[error(transparent)]
    BadRational(#[from] RationalParseError),
}

/// One affine map `x -> slope * x + intercept`, valid on its assigned interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        AffinePiece { slope, intercept }
    }

    pub fn constant(value: Rational) -> Self {
        AffinePiece::new(Rational::zero(), value)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    /// `self(inner_slope * x + inner_intercept)` as an affine map.
    fn after_affine(&self, inner_slope: &Rational, inner_intercept: &Rational) -> AffinePiece {
        AffinePiece::new(
            &self.slope * inner_slope,
            &self.slope * inner_intercept + &self.intercept,
        )
    }
}

/// A canonical piecewise-affine function ℝ → ℝ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    /// Strictly increasing; length `piece_count() - 1`.
    breakpoints: Vec<Rational>,
    /// One per interval; adjacent pieces are never identical.
    pieces: Vec<AffinePiece>,
}

impl PwlFunction {
    /// Builds a function from raw parts, validating interval structure and
    /// merging adjacent identical pieces into canonical form.
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<AffinePiece>) -> Result<Self, PwlError> {
        if pieces.is_empty() {
            return Err(PwlError::Empty);
        }
        if pieces.len() != breakpoints.len() + 1 {
            return Err(PwlError::PieceCountMismatch {
                breakpoints: breakpoints.len(),
                pieces: pieces.len(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PwlError::UnorderedBreakpoints);
        }
        Ok(Self::canonical(breakpoints, pieces))
    }

    /// Canonicalizes parts already known to be ordered.
    fn canonical(breakpoints: Vec<Rational>, pieces: Vec<AffinePiece>) -> Self {
        debug_assert_eq!(pieces.len(), breakpoints.len() + 1);
        let mut out_pieces: Vec<AffinePiece> = Vec::with_capacity(pieces.len());
        let mut out_breakpoints: Vec<Rational> = Vec::with_capacity(breakpoints.len());
        let mut iter = pieces.into_iter();
        out_pieces.push(iter.next().expect("at least one piece"));
        for (b, p) in breakpoints.into_iter().zip(iter) {
            if *out_pieces.last().unwrap() == p {
                continue; // identical affine maps merge across the boundary
            }
            out_breakpoints.push(b);
            out_pieces.push(p);
        }
        PwlFunction {
            breakpoints: out_breakpoints,
            pieces: out_pieces,
        }
    }

    /// The constant function `x -> value`.
    pub fn constant(value: Rational) -> Self {
        PwlFunction {
            breakpoints: Vec::new(),
            pieces: vec![AffinePiece::constant(value)],
        }
    }

    /// The identity `x -> x`.
    pub fn identity() -> Self {
        PwlFunction {
            breakpoints: Vec::new(),
            pieces: vec![AffinePiece::new(Rational::from_integer(1.into()), Rational::zero())],
        }
    }

    /// `max(0, x)`; the canonical 2-sawtooth activation.
    pub fn relu() -> Self {
        PwlFunction {
            breakpoints: vec![Rational::zero()],
            pieces: vec![
                AffinePiece::constant(Rational::zero()),
                AffinePiece::new(Rational::from_integer(1.into()), Rational::zero()),
            ],
        }
    }

    /// The decision stump `1[x >= threshold]`, a discontinuous 2-sawtooth.
    pub fn stump(threshold: Rational) -> Self {
        PwlFunction {
            breakpoints: vec![threshold],
            pieces: vec![
                AffinePiece::constant(Rational::zero()),
                AffinePiece::constant(Rational::from_integer(1.into())),
            ],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// Number of pieces `t` of the canonical form.
    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Index of the piece active at `x` (breakpoints belong to the right piece).
    fn piece_index(&self, x: &Rational) -> usize {
        self.breakpoints
            .partition_point(|b| cmp_rationals(b, x) != Ordering::Greater)
    }

    /// Evaluates by binary search over the breakpoints.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// True when adjacent pieces agree at every breakpoint (no jumps).
    pub fn is_continuous(&self) -> bool {
        self.breakpoints
            .iter()
            .enumerate()
            .all(|(i, b)| self.pieces[i].eval(b) == self.pieces[i + 1].eval(b))
    }

    /// Width of the narrowest bounded piece, or `None` for functions with at
    /// most two pieces (every piece unbounded).
    pub fn min_piece_width(&self) -> Option<Rational> {
        self.breakpoints
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
    }

    /// Largest |slope| over all pieces (the exact Lipschitz constant for
    /// continuous functions).
    pub fn max_abs_slope(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.slope.abs())
            .max()
            .expect("at least one piece")
    }

    /// Pointwise sum. The result has at most
    /// `self.piece_count() + other.piece_count()` pieces: the two breakpoint
    /// sequences are merged in a single sorted sweep.
    pub fn add(&self, other: &PwlFunction) -> PwlFunction {
        let mut breakpoints =
            Vec::with_capacity(self.breakpoints.len() + other.breakpoints.len());
        let mut pieces = Vec::with_capacity(self.pieces.len() + other.pieces.len());
        let sum = |a: &AffinePiece, b: &AffinePiece| {
            AffinePiece::new(&a.slope + &b.slope, &a.intercept + &b.intercept)
        };
        let (mut i, mut j) = (0usize, 0usize);
        pieces.push(sum(&self.pieces[0], &other.pieces[0]));
        loop {
            let next = match (self.breakpoints.get(i), other.breakpoints.get(j)) {
                (Some(a), Some(b)) if a < b => {
                    i += 1;
                    a.clone()
                }
                (Some(a), Some(b)) if a > b => {
                    j += 1;
                    b.clone()
                }
                (Some(a), Some(_)) => {
                    i += 1;
                    j += 1;
                    a.clone()
                }
                (Some(a), None) => {
                    i += 1;
                    a.clone()
                }
                (None, Some(b)) => {
                    j += 1;
                    b.clone()
                }
                (None, None) => break,
            };
            breakpoints.push(next);
            pieces.push(sum(&self.pieces[i], &other.pieces[j]));
        }
        Self::canonical(breakpoints, pieces)
    }

    /// Pointwise `scale * f + shift`. Piece count is preserved unless
    /// `scale = 0`, which collapses everything to one constant piece.
    pub fn scale_shift(&self, scale: &Rational, shift: &Rational) -> PwlFunction {
        let pieces = self
            .pieces
            .iter()
            .map(|p| AffinePiece::new(scale * &p.slope, scale * &p.intercept + shift))
            .collect();
        Self::canonical(self.breakpoints.clone(), pieces)
    }

    /// Pointwise negation-free shorthand used by tests: `-1 * f`.
    pub fn negate(&self) -> PwlFunction {
        self.scale_shift(&rat(-1, 1), &Rational::zero())
    }

    /// Composition `self(inner(x))` with at most
    /// `self.piece_count() * inner.piece_count()` pieces.
    ///
    /// Each inner piece with nonzero slope is split at the preimages of the
    /// outer breakpoints; zero-slope inner pieces map into a single outer
    /// piece. On every resulting subinterval the composed map is the outer
    /// piece that covers the *interior* of the image, which makes the result
    /// exact everywhere except one case: if the outer function jumps at a
    /// value that a strictly decreasing inner piece attains exactly at a
    /// subinterval boundary, the right-open canonical form takes the
    /// right-limit value at that isolated point. Continuous outer functions
    /// compose exactly everywhere.
    pub fn compose(&self, inner: &PwlFunction) -> PwlFunction {
        let outer = self;
        let mut breakpoints: Vec<Rational> = Vec::new();
        let mut pieces: Vec<AffinePiece> = Vec::new();
        let emit = |start: Option<Rational>,
                    piece: AffinePiece,
                    breakpoints: &mut Vec<Rational>,
                    pieces: &mut Vec<AffinePiece>| {
            match start {
                None => debug_assert!(pieces.is_empty()),
                Some(b) => breakpoints.push(b),
            }
            pieces.push(piece);
        };

        for (idx, inner_piece) in inner.pieces.iter().enumerate() {
            let lo = if idx == 0 {
                None
            } else {
                Some(&inner.breakpoints[idx - 1])
            };
            let hi = inner.breakpoints.get(idx);

            if inner_piece.slope.is_zero() {
                let value = &inner_piece.intercept;
                let outer_piece = &outer.pieces[outer.piece_index(value)];
                emit(
                    lo.cloned(),
                    AffinePiece::constant(outer_piece.eval(value)),
                    &mut breakpoints,
                    &mut pieces,
                );
                continue;
            }

            // Outer breakpoints whose preimage falls strictly inside (lo, hi).
            // For slope > 0 those are B in (y(lo), y(hi)); for slope < 0,
            // B in (y(hi), y(lo)). The image sweeps monotonically across the
            // piece, so the outer pieces met are exactly start..=end in
            // order, and no per-subinterval search is needed.
            let image = |x: Option<&Rational>| x.map(|v| inner_piece.eval(v));
            let (y_min, y_max) = if inner_piece.slope.is_positive() {
                (image(lo), image(hi))
            } else {
                (image(hi), image(lo))
            };
            let start = match &y_min {
                Some(y) => outer.breakpoints.partition_point(|b| b <= y),
                None => 0,
            };
            let end = match &y_max {
                Some(y) => outer.breakpoints.partition_point(|b| b < y),
                None => outer.breakpoints.len(),
            };
            let preimage = |b: &Rational| (b - &inner_piece.intercept) / &inner_piece.slope;

            let mut boundary = lo.cloned();
            if inner_piece.slope.is_positive() {
                for j in start..=end {
                    if j > start {
                        boundary = Some(preimage(&outer.breakpoints[j - 1]));
                    }
                    emit(
                        boundary.take(),
                        outer.pieces[j].after_affine(&inner_piece.slope, &inner_piece.intercept),
                        &mut breakpoints,
                        &mut pieces,
                    );
                }
            } else {
                for j in (start..=end).rev() {
                    if j < end {
                        boundary = Some(preimage(&outer.breakpoints[j]));
                    }
                    emit(
                        boundary.take(),
                        outer.pieces[j].after_affine(&inner_piece.slope, &inner_piece.intercept),
                        &mut breakpoints,
                        &mut pieces,
                    );
                }
            }
        }
        Self::canonical(breakpoints, pieces)
    }

    /// The exact classifier `x -> 1[f(x) >= 1/2]`.
    pub fn threshold_classifier(&self) -> ThresholdClassifier {
        let half = one_half();
        // Transition candidates: every breakpoint, plus the interior point
        // where a sloped piece crosses 1/2. Collected in ascending order.
        let mut candidates: Vec<Rational> = Vec::new();
        for (idx, piece) in self.pieces.iter().enumerate() {
            let lo = if idx == 0 {
                None
            } else {
                Some(&self.breakpoints[idx - 1])
            };
            let hi = self.breakpoints.get(idx);
            if let Some(b) = lo {
                candidates.push(b.clone());
            }
            if !piece.slope.is_zero() {
                let crossing = (&half - &piece.intercept) / &piece.slope;
                let above_lo = lo.map_or(true, |l| &crossing > l);
                let below_hi = hi.map_or(true, |h| &crossing < h);
                if above_lo && below_hi {
                    candidates.push(crossing);
                }
            }
        }

        // Label on (-inf, first candidate): the limit of the first piece.
        let first = &self.pieces[0];
        let initial = if first.slope.is_positive() {
            false
        } else if first.slope.is_negative() {
            true
        } else {
            first.intercept >= half
        };

        let mut boundaries = Vec::new();
        let mut point_labels = Vec::new();
        let mut open_labels = vec![initial];
        for candidate in candidates {
            let piece = &self.pieces[self.piece_index(&candidate)];
            let value = piece.eval(&candidate);
            let at_point = value >= half;
            // Label just to the right of the candidate, by the sign of the
            // slope of the piece that owns [candidate, ..).
            let after = if piece.slope.is_negative() {
                value > half
            } else {
                at_point
            };
            let current = *open_labels.last().unwrap();
            if at_point == current && after == current {
                continue;
            }
            boundaries.push(candidate);
            point_labels.push(at_point);
            open_labels.push(after);
        }
        ThresholdClassifier {
            boundaries,
            open_labels,
            point_labels,
        }
    }
}

/// A piecewise-constant 0/1 classifier, exact at every point.
///
/// Between consecutive boundaries the label is constant
/// (`open_labels[i]` on the open interval `(boundaries[i-1], boundaries[i])`),
/// and each boundary point carries its own label (`point_labels[i]`). The
/// per-point labels are what make thresholding exact: where the source
/// function touches 1/2 from below at a single point, that point is labeled 1
/// even though both neighboring intervals are labeled 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdClassifier {
    boundaries: Vec<Rational>,
    /// Length `boundaries.len() + 1`.
    open_labels: Vec<bool>,
    /// Length `boundaries.len()`.
    point_labels: Vec<bool>,
}

impl ThresholdClassifier {
    pub fn boundaries(&self) -> &[Rational] {
        &self.boundaries
    }

    /// The exact label at `x`.
    pub fn classify(&self, x: &Rational) -> bool {
        let idx = self
            .boundaries
            .partition_point(|b| cmp_rationals(b, x) == Ordering::Less);
        if idx < self.boundaries.len() && &self.boundaries[idx] == x {
            self.point_labels[idx]
        } else {
            self.open_labels[idx]
        }
    }

    /// Number of maximal intervals on which the label is constant.
    pub fn region_count(&self) -> usize {
        self.label_changes() + 1
    }

    /// Number of label changes walking left to right; for a t-sawtooth
    /// source this is the number of crossings of 1/2 and is at most 2t - 1.
    pub fn label_changes(&self) -> usize {
        let mut changes = 0;
        let mut current = self.open_labels[0];
        for i in 0..self.boundaries.len() {
            for label in [self.point_labels[i], self.open_labels[i + 1]] {
                if label != current {
                    changes += 1;
                    current = label;
                }
            }
        }
        changes
    }
}

// --- serialization -----------------------------------------------------------
//
// Wire form: {"breakpoints": ["p/q", ...],
//             "pieces": [{"slope": "p/q", "intercept": "p/q"}, ...]}
// with rationals as lowest-terms strings (integers may omit "/q").

#[derive(Serialize, Deserialize)]
struct PieceDto {
    slope: String,
    intercept: String,
}

#[derive(Serialize, Deserialize)]
struct PwlFunctionDto {
    breakpoints: Vec<String>,
    pieces: Vec<PieceDto>,
}

impl Serialize for PwlFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PwlFunctionDto {
            breakpoints: self.breakpoints.iter().map(|b| b.to_string()).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceDto {
                    slope: p.slope.to_string(),
                    intercept: p.intercept.to_string(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PwlFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let dto = PwlFunctionDto::deserialize(deserializer)?;
        let breakpoints = dto
            .breakpoints
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let pieces = dto
            .pieces
            .iter()
            .map(|p| {
                Ok(AffinePiece::new(
                    parse_rational(&p.slope)?,
                    parse_rational(&p.intercept)?,
                ))
            })
            .collect::<Result<Vec<_>, RationalParseError>>()
            .map_err(D::Error::custom)?;
        PwlFunction::new(breakpoints, pieces).map_err(D::Error::custom)
    }
}
