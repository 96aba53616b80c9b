use multinomial_olsen::dirichlet::{count_zeros, DirichletPolynomial};
use multinomial_olsen::gray::{gray, gray_alt, gray_alt_inverse, gray_inverse};
use multinomial_olsen::measure::{MeasureSpec, ProbabilityVector};
use multinomial_olsen::olsen::{legendre, tau_n, tilde_params, Conjugate, ThetaFunction};
use multinomial_olsen::space::{
    enumerate_index, word_from_index, Alphabet, EpochSchedule, MixedSpaceSpec, Word,
};
use proptest::prelude::*;

fn probs(len: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(move |w| {
        let s: f64 = w.iter().sum();
        let mut v: Vec<f64> = w.iter().map(|x| x / s).collect();
        let head: f64 = v[..len - 1].iter().sum();
        v[len - 1] = 1.0 - head;
        ProbabilityVector::new(v).unwrap()
    })
}

fn word(c: u8, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..c, 0..=max_len).prop_map(Word::from_digits)
}

/// Digits reduced into the alphabet in force at each position.
fn mixed_word(space: &MixedSpaceSpec, raw: &[u8]) -> Word {
    let digits = raw
        .iter()
        .enumerate()
        .map(|(i, d)| d % space.alphabet_at(i as u64 + 1).size() as u8)
        .collect();
    Word::from_digits(digits)
}

proptest! {
    #[test]
    fn distance_is_an_ultrametric(
        x in prop::collection::vec(0u8..6, 12),
        y in prop::collection::vec(0u8..6, 12),
        z in prop::collection::vec(0u8..6, 12),
        cut_xy in 0usize..12,
        cut_yz in 0usize..12,
    ) {
        let space = MixedSpaceSpec::new(
            Alphabet::new(2).unwrap(),
            Alphabet::new(3).unwrap(),
            EpochSchedule::Factorial,
        );
        // share prefixes so that short distances actually occur
        let mut y = y;
        y[..cut_xy].copy_from_slice(&x[..cut_xy]);
        let mut z = z;
        z[..cut_yz].copy_from_slice(&y[..cut_yz]);
        let (x, y, z) = (mixed_word(&space, &x), mixed_word(&space, &y), mixed_word(&space, &z));
        let (dxy, dyz, dxz) = (space.distance(&x, &y), space.distance(&y, &z), space.distance(&x, &z));
        prop_assert!(dxz <= dxy.max(dyz) * (1.0 + 1e-15));
        prop_assert_eq!(dxy, space.distance(&y, &x));
    }

    #[test]
    fn enumeration_round_trip(c in 2usize..=7, w in word(7, 15)) {
        let al = Alphabet::new(c).unwrap();
        let w = Word::from_digits(w.digits().iter().map(|d| d % c as u8).collect());
        let i = enumerate_index(&w, al).unwrap();
        prop_assert_eq!(word_from_index(i, w.len(), al).unwrap(), w);
    }

    #[test]
    fn gray_codes_are_invertible_isometries(
        c in 2usize..=6,
        x in word(6, 20),
        y in word(6, 20),
    ) {
        let al = Alphabet::new(c).unwrap();
        let red = |w: &Word| Word::from_digits(w.digits().iter().map(|d| d % c as u8).collect());
        let (x, y) = (red(&x), red(&y));
        prop_assert_eq!(gray_inverse(&gray(&x, al), al), x.clone());
        prop_assert_eq!(gray_alt_inverse(&gray_alt(&x, al), al), x.clone());
        let common = x.common_prefix_len(&y);
        prop_assert_eq!(gray(&x, al).common_prefix_len(&gray(&y, al)), common);
        prop_assert_eq!(gray_alt(&x, al).common_prefix_len(&gray_alt(&y, al)), common);
    }

    #[test]
    fn tilted_vector_is_normalized(p in probs(4), q in -30.0f64..30.0) {
        let t = tilde_params(&p, q);
        prop_assert!((t.entries().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.entries().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn legendre_inverts_the_derivative(p in probs(4), q in -15.0f64..15.0) {
        let th = ThetaFunction::natural(p);
        prop_assume!(th.theta_second(q) > 1e-6);
        let alpha = -th.theta_prime(q);
        match legendre(&th, alpha).unwrap() {
            Conjugate::Value { value, q: q_star } => {
                let expect = th.theta(q) - q * th.theta_prime(q);
                prop_assert!((value - expect).abs() < 1e-9, "{} vs {}", value, expect);
                prop_assert!((th.theta_prime(q_star) + alpha).abs() < 1e-12);
            }
            Conjugate::Undefined => prop_assert!(false, "undefined inside the range"),
        }
    }

    #[test]
    fn theta_is_convex_and_decreasing(p in probs(3), q in -10.0f64..10.0) {
        let th = ThetaFunction::natural(p);
        prop_assert!(th.theta_prime(q) < 0.0);
        prop_assert!(th.theta_second(q) >= 0.0);
    }

    #[test]
    fn finite_depth_exponent_fixed_points(a in probs(3), b in probs(2), n in 1u64..10_000) {
        let spec = MeasureSpec::with_factorial_schedule(a, b).unwrap();
        prop_assert!(tau_n(&spec, 1.0, n).abs() < 1e-12);
        prop_assert!((tau_n(&spec, 0.0, n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_count_ignores_overall_sign(
        exps in prop::collection::vec(-3.0f64..0.0, 2..=8),
    ) {
        let half = exps.len() / 2;
        let f = DirichletPolynomial::new(
            exps.iter().enumerate().map(|(i, e)| (if i < half { 1.0 } else { -1.0 }, *e)),
        );
        prop_assume!(!f.is_empty());
        let r = count_zeros(&f, -50.0, 50.0).unwrap();
        let rn = count_zeros(&f.neg(), -50.0, 50.0).unwrap();
        prop_assert_eq!(r.zeros, rn.zeros);
    }

    #[test]
    fn probability_vector_json_round_trip(p in probs(5)) {
        let s = serde_json::to_string(&p).unwrap();
        let back: ProbabilityVector = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, p);
    }
}
