//! Property suites over randomized channels: metric axioms, route
//! agreement between channel-level and measure-level computations, and
//! serialization stability.

use proptest::prelude::*;

use blackwell_kit::files::{parse_channel, parse_measure, write_channel, write_measure};
use blackwell_kit::{
    bhattacharyya, channel_distance, compose, equivalent, map_error, measures_equal,
    minus_convolve, mutual_information, plus_convolve, polar_minus, polar_plus, BinaryOp,
    BlackwellMeasure, Channel, Distribution,
};

fn simplex_row(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1.0, len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn channel(inputs: usize, outputs: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(simplex_row(outputs), inputs)
        .prop_map(|rows| Channel::from_rows(&rows).expect("rows are stochastic"))
}

fn prior(len: usize) -> impl Strategy<Value = Distribution> {
    simplex_row(len).prop_map(|w| Distribution::new(w).expect("simplex point"))
}

proptest! {
    #[test]
    fn distance_satisfies_the_metric_axioms(
        a in channel(3, 4),
        b in channel(3, 4),
        c in channel(3, 4),
    ) {
        let dab = channel_distance(&a, &b).unwrap();
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(dab, channel_distance(&b, &a).unwrap());
        prop_assert_eq!(channel_distance(&a, &a).unwrap(), 0.0);
        let dac = channel_distance(&a, &c).unwrap();
        let dbc = channel_distance(&b, &c).unwrap();
        prop_assert!(dac <= dab + dbc + 1e-12);
    }

    #[test]
    fn composition_is_associative(
        a in channel(4, 3),
        b in channel(3, 4),
        c in channel(2, 3),
    ) {
        let left = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        let right = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        prop_assert!(channel_distance(&left, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn bhattacharyya_brackets_map_error(w in channel(3, 4)) {
        let z = bhattacharyya(&w);
        let pe = map_error(&Distribution::uniform(3), &w).unwrap();
        prop_assert!(0.25 * z * z <= pe + 1e-12);
        prop_assert!(pe <= 2.0 * z + 1e-12);
    }

    #[test]
    fn blackwell_measure_is_balanced_and_invertible(w in channel(3, 5)) {
        let m = BlackwellMeasure::from_channel(&w);
        prop_assert!(m.balance_deviation() <= 1e-10);
        let rebuilt = m.to_channel().unwrap();
        prop_assert!(equivalent(&w, &rebuilt).unwrap());
    }

    #[test]
    fn parameters_agree_between_routes(w in channel(3, 4), p in prior(3)) {
        let m = BlackwellMeasure::from_channel(&w);
        prop_assert!(
            (mutual_information(&p, &w).unwrap() - m.mutual_information(&p).unwrap()).abs()
                <= 1e-9
        );
        prop_assert!((map_error(&p, &w).unwrap() - m.map_error(&p).unwrap()).abs() <= 1e-9);
        prop_assert!((bhattacharyya(&w) - m.bhattacharyya().unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn polar_transforms_conserve_symmetric_information(w in channel(2, 4)) {
        let op = BinaryOp::xor();
        let uniform = Distribution::uniform(2);
        let i = mutual_information(&uniform, &w).unwrap();
        let minus = polar_minus(&w, &op).unwrap();
        let plus = polar_plus(&w, &op).unwrap();
        let i_minus = mutual_information(&uniform, &minus).unwrap();
        let i_plus = mutual_information(&uniform, &plus).unwrap();
        prop_assert!((i_minus + i_plus - 2.0 * i).abs() <= 1e-9);
        prop_assert!(i_plus >= i - 1e-12);
        prop_assert!(i >= i_minus - 1e-12);

        // Measure-level images match the channel-level transforms.
        let m = BlackwellMeasure::from_channel(&w);
        prop_assert!(measures_equal(
            &minus_convolve(&m, &m, &op).unwrap(),
            &BlackwellMeasure::from_channel(&minus),
        )
        .unwrap());
        prop_assert!(measures_equal(
            &plus_convolve(&m, &m, &op).unwrap(),
            &BlackwellMeasure::from_channel(&plus),
        )
        .unwrap());
    }

    #[test]
    fn canonical_writes_are_fixed_points(w in channel(3, 4)) {
        let text = write_channel(&w);
        let reparsed = parse_channel(&text).unwrap();
        prop_assert_eq!(&text, &write_channel(&reparsed));

        let m = BlackwellMeasure::from_channel(&w);
        let text = write_measure(&m);
        let reparsed = parse_measure(&text).unwrap();
        prop_assert_eq!(&text, &write_measure(&reparsed));
    }

    #[test]
    fn splitting_outputs_preserves_the_class(w in channel(2, 3), idx in 0usize..3) {
        // Duplicate output idx with half weight on each copy.
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|x| {
                let mut r = Vec::new();
                for y in 0..3 {
                    if y == idx {
                        r.push(0.5 * w.prob(x, y));
                        r.push(0.5 * w.prob(x, y));
                    } else {
                        r.push(w.prob(x, y));
                    }
                }
                r
            })
            .collect();
        let split = Channel::from_rows(&rows).unwrap();
        prop_assert!(equivalent(&w, &split).unwrap());
        prop_assert_eq!(
            BlackwellMeasure::from_channel(&w).rank(),
            BlackwellMeasure::from_channel(&split).rank()
        );
    }
}
