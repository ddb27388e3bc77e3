use epik_core::laurent::{newton_root_traced, LaurentSeries, PrecisionPolicy};
use epik_core::padic::{PadicScalar, Prime, Valuation};
use proptest::prelude::*;

const P: u32 = 7;
const W: usize = 6;

fn setup() -> (Prime, PrecisionPolicy) {
    (Prime::new(P).unwrap(), PrecisionPolicy::new(W, 24).unwrap())
}

/// `(t_order, integer coefficients)` with a nonzero leading coefficient.
fn integer_series() -> impl Strategy<Value = (i64, Vec<i64>)> {
    (
        -3i64..4,
        (-(1i64 << 20)..(1i64 << 20)).prop_filter("nonzero", |c| *c != 0),
        prop::collection::vec(-(1i64 << 20)..(1i64 << 20), W - 1),
    )
        .prop_map(|(k, lead, mut rest)| {
            rest.insert(0, lead);
            (k, rest)
        })
}

fn build((k, coeffs): &(i64, Vec<i64>)) -> LaurentSeries {
    let (p, pol) = setup();
    LaurentSeries::from_integers(&p, pol, *k, coeffs)
}

/// Schoolbook product of the integer coefficient lists, first `W` terms.
fn product_oracle(a: &(i64, Vec<i64>), b: &(i64, Vec<i64>)) -> LaurentSeries {
    let mut out = vec![0i64; W];
    for (i, x) in a.1.iter().enumerate() {
        for (j, y) in b.1.iter().enumerate() {
            if i + j < W {
                out[i + j] += x * y;
            }
        }
    }
    build(&(a.0 + b.0, out))
}

fn first_minimal_index(f: &LaurentSeries) -> usize {
    let g = f.gauss_valuation();
    f.coefficients().iter().position(|c| c.valuation() == g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn ring_laws(a in integer_series(), b in integer_series(), c in integer_series()) {
        let (x, y, z) = (build(&a), build(&b), build(&c));
        prop_assert!((&x + &y).agrees_with(&(&y + &x)));
        prop_assert!((&x * &y).agrees_with(&(&y * &x)));
        prop_assert!((&(&x + &y) + &z).agrees_with(&(&x + &(&y + &z))));
        prop_assert!((&(&x * &y) * &z).agrees_with(&(&x * &(&y * &z))));
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn product_matches_schoolbook(a in integer_series(), b in integer_series()) {
        prop_assert!((&build(&a) * &build(&b)).agrees_with(&product_oracle(&a, &b)));
    }

    #[test]
    fn inverse_laws(a in integer_series()) {
        let (p, pol) = setup();
        let x = build(&a);
        let inv = x.inv().unwrap();
        prop_assert_eq!(inv.t_order(), Some(-a.0));
        prop_assert!((&x * &inv).agrees_with(&LaurentSeries::one(&p, pol)));
        prop_assert!(inv.inv().unwrap().agrees_with(&x));
    }

    #[test]
    fn gauss_valuation_is_multiplicative(a in integer_series(), b in integer_series(), sa in 0i64..3, sb in 0i64..3) {
        let x = build(&a).shift_valuation(sa);
        let y = build(&b).shift_valuation(sb);
        let product = &x * &y;
        let expected = x.gauss_valuation() + y.gauss_valuation();
        if first_minimal_index(&x) + first_minimal_index(&y) < W {
            prop_assert_eq!(product.gauss_valuation(), expected);
        } else {
            prop_assert!(product.gauss_valuation() >= expected);
        }
    }
}

#[test]
fn alternating_inverse() {
    let (p, pol) = setup();
    let f = LaurentSeries::from_integers(&p, pol, 0, &[1, 7]);
    let expect: Vec<i64> = (0..W as u32).map(|n| (-7i64).pow(n)).collect();
    assert!(f.inv().unwrap().agrees_with(&LaurentSeries::from_integers(&p, pol, 0, &expect)));
}

#[test]
fn newton_corrections_double() {
    let p = Prime::new(251).unwrap();
    let pol = PrecisionPolicy::new(8, 64).unwrap();
    let b = LaurentSeries::from_integers(&p, pol, 0, &[1, 251]);
    let zero = LaurentSeries::zero(&p, pol);
    let one = LaurentSeries::one(&p, pol);
    let trace = newton_root_traced(&[b.clone(), zero.clone(), zero, one], 250).unwrap();
    let sizes: Vec<i64> = trace.corrections.iter().filter_map(|v| v.finite()).collect();
    assert!(sizes.len() >= 3, "{sizes:?}");
    for pair in sizes.windows(2) {
        assert!(pair[1] >= 2 * pair[0], "{sizes:?}");
    }
    assert!(trace.root.pow(3).agrees_with(&-&b));
}

#[test]
fn newton_second_coefficient_is_binomial() {
    let p = Prime::new(251).unwrap();
    let pol = PrecisionPolicy::new(4, 32).unwrap();
    let b = LaurentSeries::from_integers(&p, pol, 0, &[1, 251]);
    let zero = LaurentSeries::zero(&p, pol);
    let one = LaurentSeries::one(&p, pol);
    let root = newton_root_traced(&[b, zero.clone(), zero, one], 250).unwrap().root;
    // -(1 + pt)^(1/3) = -1 - (p/3) t + (p^2/9) t^2 - (5 p^3/81) t^3 + ...
    let expected = [(-1, 1), (-251, 3), (251 * 251, 9), (-5 * 251 * 251 * 251, 81)];
    for (c, (n, d)) in root.coefficients().iter().zip(expected) {
        assert!(c.agrees_with(&PadicScalar::from_rational(&p, n, d, 32).unwrap()));
    }
    assert_eq!(root.gauss_valuation(), Valuation::Finite(0));
}
