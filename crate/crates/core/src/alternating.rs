//! Alternating-point datasets and the piece-count lower bounds they induce.
//!
//! The n-alternating-point dataset ("n-ap") places `n` uniformly spaced
//! points `x_i = i/n` on `[0, 1)` with labels alternating 0, 1, 0, 1, ...
//! A t-sawtooth classifier crosses the 1/2 threshold at most `2t - 1` times,
//! so against an n-ap it must err on at least `(n - 4t)/(3n)` of the points;
//! compiled networks inherit the bound with `t` replaced by `(t m)^l`. Both
//! bounds are computed here exactly and clamped at zero.

use crate::pwl::PwlFunction;
use crate::rational::{dyadic, one_half, rational_string, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Largest `n` accepted by [`strict_paper_n_ap`]; its coordinates carry
/// denominator `2^n`, which stops being useful long before this.
pub const STRICT_MAX_POINTS: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("a dataset needs at least one point")]
    Empty,
    #[error("x values must be strictly increasing (violated at point {index})")]
    Unordered { index: usize },
    #[error("expected CSV header \"x,y\"")]
    Header,
    #[error("CSV line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("strict paper coordinates are limited to n <= {STRICT_MAX_POINTS}, got {n}")]
    StrictTooLarge { n: u64 },
}

/// A nonempty sequence of labeled points, strictly increasing in x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    points: Vec<(Rational, bool)>,
}

impl LabeledDataset {
    pub fn new(points: Vec<(Rational, bool)>) -> Result<Self, DatasetError> {
        if points.is_empty() {
            return Err(DatasetError::Empty);
        }
        for (index, pair) in points.windows(2).enumerate() {
            if pair[0].0 >= pair[1].0 {
                return Err(DatasetError::Unordered { index: index + 1 });
            }
        }
        Ok(LabeledDataset { points })
    }

    pub fn points(&self) -> &[(Rational, bool)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    /// Renders the `x,y` CSV form: one header line, one row per point,
    /// x in lowest terms and y as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            writeln!(out, "{},{}", x, u8::from(*y)).expect("string writes are infallible");
        }
        out
    }

    /// Parses the CSV form produced by [`LabeledDataset::to_csv`]. CRLF line
    /// endings and a trailing newline are tolerated; anything else is not.
    pub fn from_csv(text: &str) -> Result<Self, DatasetError> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        if lines.next().map(str::trim) != Some("x,y") {
            return Err(DatasetError::Header);
        }
        let mut points = Vec::new();
        for (offset, line) in lines.enumerate() {
            let lineno = offset + 2;
            if line.trim().is_empty() {
                continue;
            }
            let row = |message: String| DatasetError::Row {
                line: lineno,
                message,
            };
            let (x_text, y_text) = line
                .split_once(',')
                .ok_or_else(|| row("expected two comma-separated fields".into()))?;
            let x = crate::rational::parse_rational(x_text)
                .map_err(|e| row(format!("bad x value: {e}")))?;
            let y = match y_text.trim() {
                "0" => false,
                "1" => true,
                other => return Err(row(format!("label must be 0 or 1, got {other:?}"))),
            };
            points.push((x, y));
        }
        LabeledDataset::new(points)
    }
}

/// The n-ap: points `x_i = i/n` for `i = 0, ..., n-1` labeled `i mod 2`.
///
/// For `n = 2^k` the grid is `i 2^{-k}`, where the k-th mirror iterate hits
/// every even-index point at 0 and every odd-index point at 1.
pub fn n_ap(n: u64) -> Result<LabeledDataset, DatasetError> {
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    let denom = BigInt::from(n);
    let points = (0..n)
        .map(|i| (Rational::new(BigInt::from(i), denom.clone()), i % 2 == 1))
        .collect();
    LabeledDataset::new(points)
}

/// The literal grid `x_i = i 2^{-n}` for `i = 1, ..., n`, first label 1.
///
/// This is an escape hatch for comparison only: the packed-left grid does not
/// reach across `[0, 1)` and nothing downstream depends on it. Rejected for
/// `n` above [`STRICT_MAX_POINTS`] because the coordinates carry denominator
/// `2^n`.
pub fn strict_paper_n_ap(n: u64) -> Result<LabeledDataset, DatasetError> {
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    if n > STRICT_MAX_POINTS {
        return Err(DatasetError::StrictTooLarge { n });
    }
    let points = (1..=n)
        .map(|i| (dyadic(i as i64, n as u32), i % 2 == 1))
        .collect();
    LabeledDataset::new(points)
}

/// Exact fraction of points where the thresholded function disagrees with
/// the label: `|{i : 1[f(x_i) >= 1/2] != y_i}| / n`.
pub fn classification_error(f: &PwlFunction, data: &LabeledDataset) -> Rational {
    let half = one_half();
    let errors = data
        .points()
        .iter()
        .filter(|(x, y)| (f.eval(x) >= half) != *y)
        .count();
    Rational::new(BigInt::from(errors), BigInt::from(data.len()))
}

fn clamped_bound(n: u64, pieces: &BigInt) -> Rational {
    let numer: BigInt = BigInt::from(n) - pieces * 4;
    if numer.is_negative() {
        Rational::zero()
    } else {
        Rational::new(numer, BigInt::from(3 * n))
    }
}

/// `max(0, (n - 4t)/(3n))`: the least classification error any t-sawtooth
/// function can achieve on the n-ap.
pub fn sawtooth_lower_bound(n: u64, t: u64) -> Rational {
    clamped_bound(n, &BigInt::from(t))
}

/// Everything needed to audit one network bound evaluation: the inputs, the
/// sawtooth budget `(t m)^l` they imply, and the resulting error bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    pub t: u64,
    pub m: u64,
    pub l: u32,
    /// `log2 n` when `n` is a power of two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(with = "bigint_string")]
    pub sawtooth_pieces: BigInt,
    #[serde(with = "rational_string")]
    pub bound: Rational,
}

/// The network form of the bound: a depth-`l`, width-`m` net with a
/// t-sawtooth activation computes at most a `(t m)^l`-sawtooth function, so
/// its n-ap error is at least `sawtooth_lower_bound(n, (t m)^l)`.
pub fn network_lower_bound(n: u64, t: u64, m: u64, l: u32) -> BoundReport {
    let sawtooth_pieces = (BigInt::from(t) * m).pow(l);
    let bound = clamped_bound(n, &sawtooth_pieces);
    BoundReport {
        n,
        t,
        m,
        l,
        k: n.is_power_of_two().then(|| n.trailing_zeros()),
        sawtooth_pieces,
        bound,
    }
}

/// Checks the image identity behind the induction on k: pushing the
/// `2^k`-ap's x-values through the mirror map yields the `2^{k-1}`-ap as a
/// multiset, every point duplicated except x = 0, plus one extra point at
/// x = 1. Labels ride along unchanged. Requires `k >= 2`.
pub fn ap_image_check(k: u32) -> bool {
    assert!(k >= 2, "the duplication statement needs n/2 >= 2");
    let n = 1u64 << k;
    let f = crate::network::mirror_map();
    let mut actual: Vec<(Rational, bool)> = n_ap(n)
        .expect("n >= 4")
        .points()
        .iter()
        .map(|(x, y)| (f.eval(x), *y))
        .collect();
    actual.sort();

    let mut expected: Vec<(Rational, bool)> = Vec::with_capacity(actual.len());
    for (x, y) in n_ap(n / 2).expect("n/2 >= 2").points() {
        expected.push((x.clone(), *y));
        if !x.is_zero() {
            expected.push((x.clone(), *y));
        }
    }
    expected.push((Rational::from_integer(1.into()), (n / 2) % 2 == 1));
    expected.sort();

    actual == expected
}

/// Serde adapter for arbitrary-size integers as decimal strings.
mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigInt, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{mirror_closed_form_pwl, mirror_map};
    use crate::rational::{int, rat};

    #[test]
    fn n_ap_small_cases() {
        let four = n_ap(4).unwrap();
        assert_eq!(
            four.points(),
            &[
                (int(0), false),
                (rat(1, 4), true),
                (rat(1, 2), false),
                (rat(3, 4), true),
            ]
        );
        let one = n_ap(1).unwrap();
        assert_eq!(one.points(), &[(int(0), false)]);
        let three = n_ap(3).unwrap();
        assert_eq!(
            three.points(),
            &[(int(0), false), (rat(1, 3), true), (rat(2, 3), false)]
        );
        assert_eq!(n_ap(0).unwrap_err(), DatasetError::Empty);
    }

    #[test]
    fn n_ap_zero_label_count() {
        for n in [1u64, 2, 3, 4, 7, 16, 255] {
            let zeros = n_ap(n)
                .unwrap()
                .points()
                .iter()
                .filter(|(_, y)| !*y)
                .count() as u64;
            assert_eq!(zeros, n.div_ceil(2), "n = {n}");
        }
    }

    #[test]
    fn strict_paper_grid() {
        let three = strict_paper_n_ap(3).unwrap();
        assert_eq!(
            three.points(),
            &[(rat(1, 8), true), (rat(1, 4), false), (rat(3, 8), true)]
        );
        assert_eq!(strict_paper_n_ap(0).unwrap_err(), DatasetError::Empty);
        assert_eq!(
            strict_paper_n_ap(5000).unwrap_err(),
            DatasetError::StrictTooLarge { n: 5000 }
        );
    }

    #[test]
    fn dataset_rejects_unordered_points() {
        let err = LabeledDataset::new(vec![(int(1), false), (int(0), true)]);
        assert_eq!(err.unwrap_err(), DatasetError::Unordered { index: 1 });
        let err = LabeledDataset::new(vec![(int(0), false), (int(0), true)]);
        assert_eq!(err.unwrap_err(), DatasetError::Unordered { index: 1 });
    }

    #[test]
    fn error_of_constant_zero_is_one_half() {
        let zero = PwlFunction::constant(int(0));
        for k in [1u32, 3, 5] {
            let data = n_ap(1 << k).unwrap();
            assert_eq!(classification_error(&zero, &data), rat(1, 2), "k = {k}");
        }
    }

    #[test]
    fn mirror_iterates_fit_their_ap_exactly() {
        for k in 1..=6u32 {
            let f = mirror_closed_form_pwl(k);
            let data = n_ap(1 << k).unwrap();
            assert_eq!(classification_error(&f, &data), int(0), "k = {k}");
        }
    }

    #[test]
    fn identity_errs_on_half_of_the_four_ap() {
        let err = classification_error(&PwlFunction::identity(), &n_ap(4).unwrap());
        assert_eq!(err, rat(1, 2));
    }

    #[test]
    fn sawtooth_bound_values() {
        assert_eq!(sawtooth_lower_bound(256, 16), rat(1, 4));
        assert_eq!(sawtooth_lower_bound(100, 25), int(0));
        assert_eq!(sawtooth_lower_bound(100, 26), int(0));
        assert_eq!(sawtooth_lower_bound(12, 1), rat(2, 9));
        // n = 2^k, t = (2m)^l with m = 2^{(k-3)/l - 1}: exactly 1/6.
        // k = 9, l = 2 gives m = 4 and t = 64.
        assert_eq!(sawtooth_lower_bound(512, 64), rat(1, 6));
    }

    #[test]
    fn network_bound_values() {
        let report = network_lower_bound(256, 2, 2, 2);
        assert_eq!(report.bound, rat(1, 4));
        assert_eq!(report.sawtooth_pieces, BigInt::from(16));
        assert_eq!(report.k, Some(8));
        let report = network_lower_bound(1024, 2, 5, 2);
        assert_eq!(report.bound, rat(13, 64));
        assert!(report.bound >= rat(1, 6));
        let report = network_lower_bound(100, 2, 3, 4);
        assert_eq!(report.bound, int(0));
        assert_eq!(report.k, None);
    }

    #[test]
    fn bound_stays_in_unit_third() {
        for n in [1u64, 2, 17, 256, 4096] {
            for t in [1u64, 2, 7, 64, 10_000] {
                let b = sawtooth_lower_bound(n, t);
                assert!(b >= int(0) && b <= rat(1, 3), "n = {n}, t = {t}");
            }
        }
    }

    #[test]
    fn bound_report_serialization() {
        let report = network_lower_bound(256, 2, 2, 2);
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"n":256,"t":2,"m":2,"l":2,"k":8,"sawtooth_pieces":"16","bound":"1/4"}"#
        );
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let no_k = network_lower_bound(100, 2, 3, 4);
        let json = serde_json::to_string(&no_k).unwrap();
        assert!(!json.contains("\"k\""));
        assert_eq!(serde_json::from_str::<BoundReport>(&json).unwrap(), no_k);
    }

    #[test]
    fn ap_image_enumerated_at_k2() {
        let f = mirror_map();
        let images: Vec<(Rational, bool)> = n_ap(4)
            .unwrap()
            .points()
            .iter()
            .map(|(x, y)| (f.eval(x), *y))
            .collect();
        assert_eq!(
            images,
            vec![
                (int(0), false),
                (rat(1, 2), true),
                (int(1), false),
                (rat(1, 2), true),
            ]
        );
        assert!(ap_image_check(2));
    }

    #[test]
    fn ap_image_holds_for_small_k() {
        for k in 2..=8 {
            assert!(ap_image_check(k), "k = {k}");
        }
    }

    #[test]
    #[should_panic(expected = "duplication statement")]
    fn ap_image_rejects_k1() {
        ap_image_check(1);
    }

    #[test]
    fn csv_round_trip() {
        let data = n_ap(5).unwrap();
        let csv = data.to_csv();
        assert!(csv.starts_with("x,y\n0,0\n1/5,1\n"));
        assert_eq!(LabeledDataset::from_csv(&csv).unwrap(), data);
        let crlf = csv.replace('\n', "\r\n");
        assert_eq!(LabeledDataset::from_csv(&crlf).unwrap(), data);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert_eq!(
            LabeledDataset::from_csv("a,b\n0,0\n").unwrap_err(),
            DatasetError::Header
        );
        assert_eq!(
            LabeledDataset::from_csv("x,y\n").unwrap_err(),
            DatasetError::Empty
        );
        assert!(matches!(
            LabeledDataset::from_csv("x,y\n1/0,0\n"),
            Err(DatasetError::Row { line: 2, .. })
        ));
        assert!(matches!(
            LabeledDataset::from_csv("x,y\n0,2\n"),
            Err(DatasetError::Row { line: 2, .. })
        ));
        assert!(matches!(
            LabeledDataset::from_csv("x,y\n0;0\n"),
            Err(DatasetError::Row { line: 2, .. })
        ));
        assert_eq!(
            LabeledDataset::from_csv("x,y\n1/2,0\n1/4,1\n").unwrap_err(),
            DatasetError::Unordered { index: 1 }
        );
    }
}
