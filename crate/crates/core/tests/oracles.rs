//! Library results against independent computations.

use multinomial_olsen::gray::{CodeKind, PushforwardMeasure};
use multinomial_olsen::measure::{MeasureSpec, ProbabilityVector, WordSampler};
use multinomial_olsen::numeric::linspace;
use multinomial_olsen::olsen::{tau_n, OlsenPair, ThetaFunction};
use multinomial_olsen::space::{words_of_level, Alphabet, EpochSchedule, MixedSpaceSpec, Word};
use multinomial_olsen::tangency::{
    build_measure_pair, certify_tangency, jacobian_full, jacobian_uv, phi, psi, solve_uv,
    solve_uv_traced, BaseQuadruple, PerturbationState, TangencyError,
};

fn pv(v: &[f64]) -> ProbabilityVector {
    ProbabilityVector::new(v.to_vec()).unwrap()
}

fn mixed_spec() -> MeasureSpec {
    let space = MixedSpaceSpec::new(
        Alphabet::new(2).unwrap(),
        Alphabet::new(3).unwrap(),
        EpochSchedule::Factorial,
    );
    MeasureSpec::new(space, pv(&[0.3, 0.7]), pv(&[0.2, 0.5, 0.3])).unwrap()
}

/// All words of length `n` over the alphabets in force at each position.
fn mixed_words(spec: &MeasureSpec, n: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for j in 1..=n as u64 {
        let c = spec.space().alphabet_at(j).size() as u8;
        out = out
            .iter()
            .flat_map(|w| (0..c).map(move |d| w.child(d)))
            .collect();
    }
    out
}

fn brute_mass(spec: &MeasureSpec, w: &Word) -> f64 {
    w.digits()
        .iter()
        .enumerate()
        .map(|(i, &d)| spec.probs_at(i as u64 + 1).entries()[d as usize])
        .product()
}

#[test]
fn partition_sum_by_enumeration() {
    let spec = mixed_spec();
    for n in 1..=7 {
        let words = mixed_words(&spec, n);
        for q in [-2.0, -0.5, 0.0, 0.7, 1.0, 3.0] {
            let brute: f64 = words.iter().map(|w| brute_mass(&spec, w).powf(q)).sum();
            let lib = spec.log_partition_sum(q, n as u64);
            assert!((lib - brute.ln()).abs() < 1e-12, "n={n} q={q}");
            // the finite-depth exponent from its defining quotient
            let n1 = (1..=n as u64)
                .filter(|&j| spec.space().schedule.is_first_alphabet(j))
                .count();
            let scale = n1 as f64 * 2f64.ln() + (n - n1) as f64 * 3f64.ln();
            assert!((tau_n(&spec, q, n as u64) - brute.ln() / scale).abs() < 1e-12);
        }
    }
}

#[test]
fn level_masses_sum_to_one() {
    let spec = mixed_spec();
    for n in 1..=7 {
        let s: f64 = mixed_words(&spec, n)
            .iter()
            .map(|w| brute_mass(&spec, w))
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
        for w in mixed_words(&spec, n) {
            let lm = spec.log_cylinder_mass(&w).unwrap();
            assert!((lm.exp() - brute_mass(&spec, &w)).abs() < 1e-15);
        }
    }
}

#[test]
fn trajectory_matches_pointwise_exponent() {
    let spec = mixed_spec();
    let x = WordSampler::new(&spec, 3).sample(130);
    let traj = spec.exponent_trajectory(&x).unwrap();
    for n in [1, 2, 5, 6, 24, 119, 130] {
        let e = spec.running_exponent(&x, n).unwrap();
        assert!((traj[n - 1] - e).abs() < 1e-12);
    }
}

#[test]
fn sampler_digit_frequencies() {
    let spec =
        MeasureSpec::with_factorial_schedule(pv(&[0.1, 0.2, 0.3, 0.4]), pv(&[0.4, 0.3, 0.2, 0.1]))
            .unwrap();
    // positions 6..=23 use the first vector
    let mut counts = [0usize; 4];
    let mut sampler = WordSampler::new(&spec, 99);
    let draws = 4000;
    for _ in 0..draws {
        let w = sampler.sample(23);
        for &d in &w.digits()[5..23] {
            counts[d as usize] += 1;
        }
    }
    let total = (draws * 18) as f64;
    for (c, p) in counts.iter().zip([0.1, 0.2, 0.3, 0.4]) {
        let f = *c as f64 / total;
        let sd = (p * (1.0 - p) / total).sqrt();
        assert!((f - p).abs() < 5.0 * sd, "frequency {f} vs {p}");
    }
}

#[test]
fn same_seed_same_words() {
    let spec = mixed_spec();
    let a: Vec<Word> = {
        let mut s = WordSampler::new(&spec, 5);
        (0..5).map(|_| s.sample(50)).collect()
    };
    let b: Vec<Word> = {
        let mut s = WordSampler::new(&spec, 5);
        (0..5).map(|_| s.sample(50)).collect()
    };
    assert_eq!(a, b);
}

#[test]
fn pushforward_shares_partition_sums() {
    let spec = MeasureSpec::with_factorial_schedule(
        pv(&[0.1, 0.2, 0.3, 0.4]),
        pv(&[0.35, 0.15, 0.3, 0.2]),
    )
    .unwrap();
    for code in [CodeKind::Standard, CodeKind::Alternative] {
        let pf = PushforwardMeasure::new(spec.clone(), code).unwrap();
        for n in 1..=6 {
            let lm = pf.level_log_masses(n).unwrap();
            for q in [-3.0, -1.0, 0.5, 2.0] {
                let s: f64 = lm.iter().map(|l| (q * l).exp()).sum();
                assert!((s.ln() - spec.log_partition_sum(q, n as u64)).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn pushforward_masses_sum_to_one_to_level_ten() {
    let (a, b) =
        build_measure_pair(1e-3, 1e-3, &BaseQuadruple::preset("paper-110").unwrap()).unwrap();
    let pf = PushforwardMeasure::new(
        MeasureSpec::with_factorial_schedule(a, b).unwrap(),
        CodeKind::Standard,
    )
    .unwrap();
    for n in [1, 4, 7, 10] {
        let s: f64 = pf
            .level_log_masses(n)
            .unwrap()
            .iter()
            .map(|l| l.exp())
            .sum();
        assert!((s - 1.0).abs() < 1e-10, "level {n}: {s}");
    }
}

#[test]
fn level_words_are_index_ordered() {
    let al = Alphabet::new(3).unwrap();
    let words: Vec<Word> = words_of_level(3, al).collect();
    assert_eq!(words.len(), 27);
    assert_eq!(words[5], Word::parse("012").unwrap());
}

/// Chord iteration with the origin Jacobian held fixed, plus damping. Slow
/// but independent of the Newton code path.
fn chord_solve(t: f64, w: f64, base: &BaseQuadruple) -> (f64, f64) {
    let j0 = jacobian_uv(&PerturbationState::ORIGIN, base).unwrap();
    let det = j0[0][0] * j0[1][1] - j0[0][1] * j0[1][0];
    let (mut u, mut v) = (0.0, 0.0);
    for _ in 0..10_000 {
        let s = PerturbationState::new(t, u, v, w);
        let (f, g) = (phi(&s, base).unwrap(), psi(&s, base).unwrap());
        if f.abs().max(g.abs()) < 1e-15 {
            break;
        }
        let du = (j0[1][1] * f - j0[0][1] * g) / det;
        let dv = (-j0[1][0] * f + j0[0][0] * g) / det;
        u -= 0.5 * du;
        v -= 0.5 * dv;
    }
    (u, v)
}

#[test]
fn newton_agrees_with_chord_iteration() {
    for name in ["paper-110", "paper-9"] {
        let base = BaseQuadruple::preset(name).unwrap();
        for (t, w) in [(1e-3, 1e-3), (-4e-3, 2e-3), (0.0, 1e-3), (0.01, -0.01)] {
            let (u, v) = solve_uv(t, w, &base).unwrap();
            let (uc, vc) = chord_solve(t, w, &base);
            assert!(
                (u - uc).abs() < 1e-12 && (v - vc).abs() < 1e-12,
                "{name} ({t},{w})"
            );
            let s = PerturbationState::new(t, u, v, w);
            assert!(phi(&s, &base).unwrap().abs() < 1e-13);
            assert!(psi(&s, &base).unwrap().abs() < 1e-13);
        }
    }
}

#[test]
fn newton_converges_quadratically() {
    for name in ["paper-110", "paper-9"] {
        let base = BaseQuadruple::preset(name).unwrap();
        for t in [-0.01, 0.004, 0.01] {
            for w in [-0.01, 0.006, 0.01] {
                let trace = solve_uv_traced(t, w, &base).unwrap();
                let r = &trace.residuals;
                assert!(r.len() <= 7, "{name} ({t},{w}): {r:?}");
                let live: Vec<f64> = r.iter().copied().take_while(|x| *x > 1e-13).collect();
                let ratios: Vec<f64> = live.windows(2).map(|p| p[1] / p[0]).collect();
                for k in 1..ratios.len() {
                    assert!(ratios[k] < ratios[k - 1], "{name} ({t},{w}): {r:?}");
                }
                for p in live.windows(2) {
                    assert!(p[1] <= 100.0 * p[0] * p[0], "{name} ({t},{w}): {r:?}");
                }
            }
        }
    }
}

#[test]
fn solved_pairs_match_slopes_at_zero_and_one() {
    let base = BaseQuadruple::preset("paper-110").unwrap();
    let (a, b) = build_measure_pair(-2e-3, 3e-3, &base).unwrap();
    let (ta, tb) = (
        ThetaFunction::natural(a.clone()),
        ThetaFunction::natural(b.clone()),
    );
    for q in [0.0, 1.0] {
        assert!((ta.theta(q) - tb.theta(q)).abs() < 1e-11);
        assert!((ta.theta_prime(q) - tb.theta_prime(q)).abs() < 1e-11);
    }
    // φ and ψ are slope differences up to fixed factors
    let (u, v) = solve_uv(-2e-3, 3e-3, &base).unwrap();
    let probe = PerturbationState::new(-2e-3, u + 1e-3, v, 3e-3);
    let x = pv(&probe.first_group(&base));
    let y = pv(&probe.second_group(&base));
    let (tx, ty) = (ThetaFunction::natural(x), ThetaFunction::natural(y));
    let ln4 = 4f64.ln();
    let f = phi(&probe, &base).unwrap();
    let g = psi(&probe, &base).unwrap();
    assert!((f - ln4 * (tx.theta_prime(1.0) - ty.theta_prime(1.0))).abs() < 1e-13);
    assert!((g - 4.0 * ln4 * (tx.theta_prime(0.0) - ty.theta_prime(0.0))).abs() < 1e-12);
}

#[test]
fn grid_of_perturbations_certifies() {
    let grid = linspace(-0.005, 0.005, 5);
    for name in ["paper-110", "paper-9"] {
        let base = BaseQuadruple::preset(name).unwrap();
        for &t in &grid {
            for &w in &grid {
                if t == 0.0 && w == 0.0 {
                    continue;
                }
                match build_measure_pair(t, w, &base) {
                    Ok((a, b)) => {
                        certify_tangency(&a, &b)
                            .unwrap_or_else(|e| panic!("{name} ({t},{w}): {e}"));
                    }
                    // w = 0 forces the second vector to be a rearrangement
                    // of the first
                    Err(TangencyError::DegeneratePair) => assert_eq!(w, 0.0, "{name} ({t},{w})"),
                    Err(e) => panic!("{name} ({t},{w}): {e}"),
                }
            }
        }
    }
}

#[test]
fn other_column_pairs_are_regular() {
    let det = |j: &[[f64; 4]; 2], c1: usize, c2: usize| j[0][c1] * j[1][c2] - j[0][c2] * j[1][c1];
    let pairs = [(0, 2), (0, 3), (1, 3), (2, 3)];
    let j = jacobian_full(
        &PerturbationState::ORIGIN,
        &BaseQuadruple::preset("paper-110").unwrap(),
    )
    .unwrap();
    for (c1, c2) in pairs {
        assert!(det(&j, c1, c2).abs() > 1e-3, "columns {c1},{c2}");
    }
    // (t, u) is singular for any base
    assert!(det(&j, 0, 1).abs() < 1e-12);
    // with b = c the (v, w) columns coincide; the others stay regular
    let j = jacobian_full(
        &PerturbationState::ORIGIN,
        &BaseQuadruple::preset("paper-9").unwrap(),
    )
    .unwrap();
    for (c1, c2) in [(0, 2), (0, 3), (1, 3)] {
        assert!(det(&j, c1, c2).abs() > 1e-3, "columns {c1},{c2}");
    }
    assert!(det(&j, 2, 3).abs() < 1e-12);
}

#[test]
fn tangent_pair_curves_touch_only_at_zero_and_one() {
    let (a, b) =
        build_measure_pair(1e-3, 1e-3, &BaseQuadruple::preset("paper-110").unwrap()).unwrap();
    let pair = OlsenPair::from_probs(a, b);
    for q in linspace(-10.0, 10.0, 401) {
        let gap = pair.upper_value(q) - pair.lower_value(q);
        let near = q.abs() < 1e-9 || (q - 1.0).abs() < 1e-9;
        if near {
            assert!(gap < 1e-12);
        } else {
            assert!(gap > 1e-10, "q={q}: gap {gap}");
        }
    }
}
