//! Property tests for the algebraic contracts: canonical form, pointwise
//! correctness of every operation, the counting bounds, and serialization
//! stability, over adversarial random instances (coincident breakpoints,
//! zero slopes, jumps).

use num_bigint::BigInt;
use proptest::collection::vec;
use proptest::prelude::*;
use sawtooth_core::network::{Activation, NetworkSpec, Neuron};
use sawtooth_core::pwl::{AffinePiece, PwlFunction};
use sawtooth_core::rational::{int, one_half, parse_rational, rat, Rational};
use sawtooth_core::{
    classification_error, grid_oracle, n_ap, network_lower_bound, sawtooth_lower_bound,
};

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=64).prop_map(|(n, d)| rat(n, d))
}

fn arb_slope() -> impl Strategy<Value = Rational> {
    prop_oneof![3 => arb_rational(), 1 => Just(int(0))]
}

fn arb_piece() -> impl Strategy<Value = AffinePiece> {
    (arb_slope(), arb_rational()).prop_map(|(s, i)| AffinePiece::new(s, i))
}

fn arb_pwl() -> impl Strategy<Value = PwlFunction> {
    vec(arb_rational(), 0..6).prop_flat_map(|mut bps| {
        bps.sort();
        bps.dedup();
        let n = bps.len() + 1;
        (Just(bps), vec(arb_piece(), n)).prop_map(|(bps, pieces)| {
            PwlFunction::new(bps, pieces).expect("sorted deduped parts")
        })
    })
}

/// Continuous functions: successive pieces forced to agree at breakpoints.
fn arb_continuous_pwl() -> impl Strategy<Value = PwlFunction> {
    vec(arb_rational(), 0..6).prop_flat_map(|mut bps| {
        bps.sort();
        bps.dedup();
        let n = bps.len() + 1;
        (Just(bps), vec(arb_slope(), n), arb_rational()).prop_map(
            |(bps, slopes, first_intercept)| {
                let mut pieces = vec![AffinePiece::new(slopes[0].clone(), first_intercept)];
                for (i, b) in bps.iter().enumerate() {
                    let prev = &pieces[i];
                    let intercept =
                        (&prev.slope - &slopes[i + 1]) * b + prev.intercept.clone();
                    pieces.push(AffinePiece::new(slopes[i + 1].clone(), intercept));
                }
                PwlFunction::new(bps, pieces).expect("sorted deduped parts")
            },
        )
    })
}

fn arb_network() -> impl Strategy<Value = NetworkSpec> {
    fn layer(fan_in: usize, width: usize) -> impl Strategy<Value = Vec<Neuron>> {
        vec((arb_rational(), vec(arb_slope(), fan_in)), width..=width)
            .prop_map(|ns| ns.into_iter().map(|(b, w)| Neuron::new(b, w)).collect())
    }
    (1usize..=3, 1usize..=3).prop_flat_map(|(hidden_layers, width)| {
        let mut layers = Vec::new();
        let mut fan_in = 1;
        for _ in 0..hidden_layers {
            layers.push(layer(fan_in, width).boxed());
            fan_in = width;
        }
        layers.push(layer(fan_in, 1).boxed());
        (layers, any::<bool>()).prop_map(|(layers, output_activation)| {
            let mut spec = NetworkSpec::new(layers, Activation::Relu);
            spec.output_activation = output_activation;
            spec
        })
    })
}

fn assert_canonical(f: &PwlFunction) {
    assert_eq!(f.pieces().len(), f.breakpoints().len() + 1);
    assert!(f.breakpoints().windows(2).all(|w| w[0] < w[1]));
    assert!(f.pieces().windows(2).all(|w| w[0] != w[1]));
}

/// Reference evaluation by linear scan, independent of the binary search.
fn eval_by_scan(f: &PwlFunction, x: &Rational) -> Rational {
    let mut idx = 0;
    for b in f.breakpoints() {
        if b <= x {
            idx += 1;
        }
    }
    f.pieces()[idx].eval(x)
}

proptest! {
    #[test]
    fn construction_yields_canonical_form(f in arb_pwl()) {
        assert_canonical(&f);
    }

    #[test]
    fn eval_matches_linear_scan(f in arb_pwl(), xs in vec(arb_rational(), 1..8)) {
        let mut points = xs;
        points.extend(f.breakpoints().iter().cloned());
        for x in &points {
            prop_assert_eq!(f.eval(x), eval_by_scan(&f, x));
        }
    }

    #[test]
    fn add_is_pointwise_sum_within_piece_budget(
        f in arb_pwl(),
        g in arb_pwl(),
        xs in vec(arb_rational(), 1..8),
    ) {
        let h = f.add(&g);
        assert_canonical(&h);
        prop_assert!(h.piece_count() <= f.piece_count() + g.piece_count());
        let mut points = xs;
        points.extend(f.breakpoints().iter().cloned());
        points.extend(g.breakpoints().iter().cloned());
        for b in h.breakpoints() {
            points.push(b - rat(1, 1 << 20));
            points.push(b + rat(1, 1 << 20));
        }
        for x in &points {
            prop_assert_eq!(h.eval(x), f.eval(x) + g.eval(x));
        }
    }

    #[test]
    fn add_commutes(f in arb_pwl(), g in arb_pwl()) {
        prop_assert_eq!(f.add(&g), g.add(&f));
    }

    #[test]
    fn scale_shift_is_pointwise(
        f in arb_pwl(),
        a in arb_slope(),
        c in arb_rational(),
        xs in vec(arb_rational(), 1..6),
    ) {
        let h = f.scale_shift(&a, &c);
        assert_canonical(&h);
        prop_assert!(h.piece_count() <= f.piece_count());
        for x in &xs {
            prop_assert_eq!(h.eval(x), &a * f.eval(x) + &c);
        }
    }

    #[test]
    fn compose_respects_product_bound(f in arb_pwl(), g in arb_pwl()) {
        let h = f.compose(&g);
        assert_canonical(&h);
        prop_assert!(h.piece_count() <= f.piece_count() * g.piece_count());
    }

    #[test]
    fn compose_is_pointwise_for_continuous_outer(
        f in arb_continuous_pwl(),
        g in arb_pwl(),
        xs in vec(arb_rational(), 1..8),
    ) {
        let h = f.compose(&g);
        let mut points = xs;
        points.extend(g.breakpoints().iter().cloned());
        points.extend(h.breakpoints().iter().cloned());
        for x in &points {
            prop_assert_eq!(h.eval(x), f.eval(&g.eval(x)));
        }
    }

    #[test]
    fn compose_with_identity_is_identity(f in arb_pwl()) {
        let id = PwlFunction::identity();
        prop_assert_eq!(id.compose(&f), f.clone());
        prop_assert_eq!(f.compose(&id), f);
    }

    #[test]
    fn threshold_classifier_is_exact_and_bounded(
        f in arb_pwl(),
        xs in vec(arb_rational(), 1..8),
    ) {
        let t = f.piece_count();
        let c = f.threshold_classifier();
        prop_assert!(c.region_count() <= 2 * t);
        prop_assert!(c.label_changes() <= 2 * t - 1);
        let half = one_half();
        let mut points = xs;
        points.extend(f.breakpoints().iter().cloned());
        for b in c.boundaries() {
            points.push(b.clone());
            points.push(b - rat(1, 1 << 20));
            points.push(b + rat(1, 1 << 20));
        }
        for x in &points {
            prop_assert_eq!(c.classify(x), f.eval(x) >= half);
        }
    }

    #[test]
    fn serialization_round_trips_byte_identically(f in arb_pwl()) {
        let json = serde_json::to_string(&f).unwrap();
        let back: PwlFunction = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn rational_text_round_trips(x in arb_rational()) {
        prop_assert_eq!(parse_rational(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn grid_oracle_never_overcounts(f in arb_pwl()) {
        let report = grid_oracle(|x| f.eval(x), &rat(-1100, 1), &rat(1100, 1), 201).unwrap();
        prop_assert!(report.segments <= f.piece_count());
    }

    #[test]
    fn network_compile_agrees_with_forward_pass(
        spec in arb_network(),
        xs in vec(arb_rational(), 1..6),
    ) {
        let compiled = spec.compile().unwrap();
        assert_canonical(&compiled);
        prop_assert!(BigInt::from(compiled.piece_count()) <= spec.piece_bound());
        for x in &xs {
            prop_assert_eq!(compiled.eval(x), spec.forward_eval(x));
        }
    }

    #[test]
    fn classification_error_dominates_sawtooth_bound(
        f in arb_pwl(),
        n in 1u64..200,
    ) {
        let data = n_ap(n).unwrap();
        let err = classification_error(&f, &data);
        prop_assert!(err >= int(0) && err <= int(1));
        let scaled = Rational::from_integer(BigInt::from(n)) * &err;
        prop_assert!(scaled.is_integer());
        prop_assert!(err >= sawtooth_lower_bound(n, f.piece_count() as u64));
    }

    #[test]
    fn n_ap_shape(n in 1u64..300) {
        let data = n_ap(n).unwrap();
        prop_assert_eq!(data.len() as u64, n);
        prop_assert!(data.points().windows(2).all(|w| w[0].0 < w[1].0));
        let zeros = data.points().iter().filter(|(_, y)| !*y).count() as u64;
        prop_assert_eq!(zeros, n.div_ceil(2));
        for (i, (x, y)) in data.points().iter().enumerate() {
            prop_assert_eq!(x.clone(), Rational::new(BigInt::from(i), BigInt::from(n)));
            prop_assert_eq!(*y, i % 2 == 1);
        }
    }

    #[test]
    fn lower_bounds_stay_in_unit_third(n in 1u64..5000, t in 1u64..5000) {
        let b = sawtooth_lower_bound(n, t);
        prop_assert!(b >= int(0) && b <= rat(1, 3));
    }

    #[test]
    fn network_bound_report_is_consistent(
        n in 1u64..4096,
        t in 1u64..6,
        m in 1u64..6,
        l in 1u32..4,
    ) {
        let report = network_lower_bound(n, t, m, l);
        prop_assert!(report.bound >= int(0) && report.bound <= rat(1, 3));
        prop_assert_eq!(&report.sawtooth_pieces, &BigInt::from(t * m).pow(l));
        prop_assert_eq!(report.k.is_some(), n.is_power_of_two());
        let json = serde_json::to_string(&report).unwrap();
        prop_assert_eq!(serde_json::from_str::<sawtooth_core::BoundReport>(&json).unwrap(), report);
    }
}
