//! The inhomogeneous multinomial measure `μ`.
//!
//! `μ(ε_1 … ε_n) = Π p_j` where `p_j = a_{ε_j + 1}` on odd epochs and
//! `p_j = b_{ε_j + 1}` on even epochs. All masses are handled as natural
//! logarithms: at depth ~5000 every linear representation underflows.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::log_sum_exp;
use crate::space::{Alphabet, EpochSchedule, MixedSpaceSpec, SpaceError, Word};

/// Tolerance on `Σ p_i = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("probability entry {index} = {value} is not strictly inside (0, 1)")]
    EntryOutOfRange { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("probability vector has {got} entries, alphabet has {expected} letters")]
    LengthMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Entries in `(0, 1)` summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, MeasureError> {
        for (index, &value) in entries.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(MeasureError::EntryOutOfRange { index, value });
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(Self { entries })
    }

    /// Normalizes nonnegative weights without the open-interval check; used
    /// for tilted vectors, whose entries may underflow to 0 at extreme `q`.
    pub(crate) fn from_weights_unchecked(weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        Self {
            entries: weights.into_iter().map(|w| w / total).collect(),
        }
    }

    /// `(1/c, …, 1/c)`.
    pub fn uniform(c: usize) -> Result<Self, MeasureError> {
        Self::new(vec![1.0 / c as f64; c])
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.len() as f64;
        self.entries
            .iter()
            .all(|p| (p - target).abs() <= SUM_TOLERANCE)
    }

    /// `ln Σ p_i^q`.
    pub fn log_power_sum(&self, q: f64) -> f64 {
        log_sum_exp(self.entries.iter().map(|p| q * p.ln()))
    }

    /// Equal as multisets up to `tol`.
    pub fn multiset_eq(&self, other: &Self, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut x = self.entries.clone();
        let mut y = other.entries.clone();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = MeasureError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.entries
    }
}

/// A mixed symbolic space together with the two digit distributions.
///
/// JSON form: `{"c1":4,"c2":4,"probs_a":[…],"probs_b":[…],"schedule":{…}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureConfig", into = "MeasureConfig")]
pub struct MeasureSpec {
    space: MixedSpaceSpec,
    probs_a: ProbabilityVector,
    probs_b: ProbabilityVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MeasureConfig {
    c1: usize,
    c2: usize,
    probs_a: Vec<f64>,
    probs_b: Vec<f64>,
    #[serde(default)]
    schedule: EpochSchedule,
}

impl TryFrom<MeasureConfig> for MeasureSpec {
    type Error = MeasureError;

    fn try_from(c: MeasureConfig) -> Result<Self, Self::Error> {
        let space = MixedSpaceSpec::new(Alphabet::new(c.c1)?, Alphabet::new(c.c2)?, c.schedule);
        MeasureSpec::new(
            space,
            ProbabilityVector::new(c.probs_a)?,
            ProbabilityVector::new(c.probs_b)?,
        )
    }
}

impl From<MeasureSpec> for MeasureConfig {
    fn from(m: MeasureSpec) -> Self {
        MeasureConfig {
            c1: m.space.alphabet_1.size() as usize,
            c2: m.space.alphabet_2.size() as usize,
            probs_a: m.probs_a.into(),
            probs_b: m.probs_b.into(),
            schedule: m.space.schedule,
        }
    }
}

impl MeasureSpec {
    pub fn new(
        space: MixedSpaceSpec,
        probs_a: ProbabilityVector,
        probs_b: ProbabilityVector,
    ) -> Result<Self, MeasureError> {
        for (alphabet, probs) in [(space.alphabet_1, &probs_a), (space.alphabet_2, &probs_b)] {
            if alphabet.size() as usize != probs.len() {
                return Err(MeasureError::LengthMismatch {
                    expected: alphabet.size() as usize,
                    got: probs.len(),
                });
            }
        }
        Ok(Self {
            space,
            probs_a,
            probs_b,
        })
    }

    /// Both alphabets sized by the vectors, factorial schedule.
    pub fn with_factorial_schedule(
        probs_a: ProbabilityVector,
        probs_b: ProbabilityVector,
    ) -> Result<Self, MeasureError> {
        let space = MixedSpaceSpec::new(
            Alphabet::new(probs_a.len())?,
            Alphabet::new(probs_b.len())?,
            EpochSchedule::Factorial,
        );
        Self::new(space, probs_a, probs_b)
    }

    pub fn space(&self) -> &MixedSpaceSpec {
        &self.space
    }

    pub fn probs_a(&self) -> &ProbabilityVector {
        &self.probs_a
    }

    pub fn probs_b(&self) -> &ProbabilityVector {
        &self.probs_b
    }

    /// The vector in force at a 1-based position.
    pub fn probs_at(&self, position: u64) -> &ProbabilityVector {
        if self.space.schedule.is_first_alphabet(position) {
            &self.probs_a
        } else {
            &self.probs_b
        }
    }

    /// `ln μ(w)`; `0` for the empty word.
    pub fn log_cylinder_mass(&self, w: &Word) -> Result<f64, MeasureError> {
        self.space.check_word(w)?;
        let mask = self.space.schedule.first_alphabet_mask(w.len());
        Ok(w.digits()
            .iter()
            .zip(mask)
            .map(|(&d, first)| {
                let p = if first { &self.probs_a } else { &self.probs_b };
                p.entries[d as usize].ln()
            })
            .sum())
    }

    /// `ln Σ_{|w| = n} μ(w)^q = N_n ln Σ a_i^q + (n - N_n) ln Σ b_i^q`.
    pub fn log_partition_sum(&self, q: f64, n: u64) -> f64 {
        let first = self.space.count_n(n);
        let mut total = 0.0;
        if first > 0 {
            total += first as f64 * self.probs_a.log_power_sum(q);
        }
        if n > first {
            total += (n - first) as f64 * self.probs_b.log_power_sum(q);
        }
        total
    }

    /// Running local exponent `-ln μ(x|n) / (N_n ln c_1 + (n - N_n) ln c_2)`.
    pub fn running_exponent(&self, x: &Word, n: usize) -> Result<f64, MeasureError> {
        assert!(n >= 1 && n <= x.len(), "need 1 <= n <= |x|");
        let lm = self.log_cylinder_mass(&x.prefix(n))?;
        Ok(-lm / self.space.log_scale(n as u64))
    }

    /// [`Self::running_exponent`] for every `n = 1..=|x|` in one pass.
    pub fn exponent_trajectory(&self, x: &Word) -> Result<Vec<f64>, MeasureError> {
        self.space.check_word(x)?;
        let mask = self.space.schedule.first_alphabet_mask(x.len());
        let (ln1, ln2) = (
            self.space.alphabet_1.ln_size(),
            self.space.alphabet_2.ln_size(),
        );
        let mut log_mass = 0.0;
        let mut scale = 0.0;
        Ok(x.digits()
            .iter()
            .zip(mask)
            .map(|(&d, first)| {
                let (p, l) = if first {
                    (&self.probs_a, ln1)
                } else {
                    (&self.probs_b, ln2)
                };
                log_mass += p.entries[d as usize].ln();
                scale += l;
                -log_mass / scale
            })
            .collect())
    }
}

/// `ν_n(w) = μ(w)^q · c^{-n τ_n(q)}` on level-`n` words, extended to all
/// finite words so that it is a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedMeasureParams {
    pub base: MeasureSpec,
    pub q: f64,
    pub depth: usize,
}

impl TiltedMeasureParams {
    pub fn new(base: MeasureSpec, q: f64, depth: usize) -> Self {
        assert!(depth >= 1, "depth must be positive");
        Self { base, q, depth }
    }

    /// `ln ν_n(x)` for a word of any length.
    pub fn log_mass(&self, x: &Word) -> Result<f64, MeasureError> {
        let n = self.depth;
        let m = x.len();
        let log_norm = self.base.log_partition_sum(self.q, n as u64);
        if m <= n {
            // Σ over the extensions of x factorizes position by position.
            let log_ext = log_norm - self.base.log_partition_sum(self.q, m as u64);
            Ok(self.q * self.base.log_cylinder_mass(x)? + log_ext - log_norm)
        } else {
            self.base.space().check_word(x)?;
            let spread: f64 = (n as u64 + 1..=m as u64)
                .map(|j| self.base.space().alphabet_at(j).ln_size())
                .sum();
            Ok(self.log_mass(&x.prefix(n))? - spread)
        }
    }

    pub fn mass(&self, x: &Word) -> Result<f64, MeasureError> {
        self.log_mass(x).map(f64::exp)
    }
}

/// Draws words with probability `μ(w)`.
///
/// The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
/// `seed_from_u64`; each digit is drawn by inverse CDF from one uniform
/// `f64`. A given seed therefore yields the same words on every platform.
pub struct WordSampler<'a> {
    spec: &'a MeasureSpec,
    rng: ChaCha8Rng,
}

impl<'a> WordSampler<'a> {
    pub fn new(spec: &'a MeasureSpec, seed: u64) -> Self {
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self, depth: usize) -> Word {
        let mask = self.spec.space.schedule.first_alphabet_mask(depth);
        let digits = mask
            .into_iter()
            .map(|first| {
                let p = if first {
                    &self.spec.probs_a
                } else {
                    &self.spec.probs_b
                };
                draw(p, self.rng.random::<f64>())
            })
            .collect();
        Word::from_digits(digits)
    }
}

fn draw(p: &ProbabilityVector, u: f64) -> u8 {
    let mut acc = 0.0;
    for (i, &pi) in p.entries.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i as u8;
        }
    }
    (p.len() - 1) as u8
}

/// One `μ`-distributed word of the given depth.
pub fn sample_word(spec: &MeasureSpec, depth: usize, seed: u64) -> Word {
    WordSampler::new(spec, seed).sample(depth)
}

/// Writes `sample,n,exponent` rows.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    trajectories: &[Vec<f64>],
    stride: usize,
) -> std::io::Result<()> {
    writeln!(out, "sample,n,exponent")?;
    let stride = stride.max(1);
    for (s, traj) in trajectories.iter().enumerate() {
        for (i, e) in traj.iter().enumerate() {
            let n = i + 1;
            if n % stride == 0 || n == traj.len() {
                writeln!(out, "{s},{n},{e}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::words_of_level;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn spec4() -> MeasureSpec {
        MeasureSpec::with_factorial_schedule(pv(&[0.1, 0.2, 0.3, 0.4]), pv(&[0.4, 0.3, 0.2, 0.1]))
            .unwrap()
    }

    #[test]
    fn probability_vector_errors() {
        assert!(matches!(
            ProbabilityVector::new(vec![0.0, 1.0]),
            Err(MeasureError::EntryOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            ProbabilityVector::new(vec![0.5, 0.6]),
            Err(MeasureError::NotNormalized { .. })
        ));
        assert!(ProbabilityVector::new(vec![0.5, f64::NAN]).is_err());
    }

    #[test]
    fn length_mismatch() {
        let space = MixedSpaceSpec::uniform(3).unwrap();
        let err = MeasureSpec::new(space, pv(&[0.5, 0.5]), pv(&[0.2, 0.3, 0.5])).unwrap_err();
        assert_eq!(
            err,
            MeasureError::LengthMismatch {
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn cylinder_mass_examples() {
        let s = spec4();
        assert_eq!(s.log_cylinder_mass(&Word::empty()).unwrap(), 0.0);
        let w = Word::parse("3").unwrap();
        assert!((s.log_cylinder_mass(&w).unwrap() - 0.4f64.ln()).abs() < 1e-15);
        assert!(s.log_cylinder_mass(&Word::parse("4").unwrap()).is_err());

        let u = MeasureSpec::with_factorial_schedule(
            ProbabilityVector::uniform(3).unwrap(),
            ProbabilityVector::uniform(3).unwrap(),
        )
        .unwrap();
        let w = Word::parse("0212011").unwrap();
        assert!((u.log_cylinder_mass(&w).unwrap() + 7.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn level_additivity() {
        let s = spec4();
        let c = Alphabet::new(4).unwrap();
        for level in 0..=5 {
            for w in words_of_level(level, c) {
                let parent = s.log_cylinder_mass(&w).unwrap().exp();
                let kids: f64 = (0..4)
                    .map(|j| s.log_cylinder_mass(&w.child(j)).unwrap().exp())
                    .sum();
                assert!((parent - kids).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tilted_special_values() {
        let s = spec4();
        let c = Alphabet::new(4).unwrap();
        let n = 4;
        let t0 = TiltedMeasureParams::new(s.clone(), 0.0, n);
        let t1 = TiltedMeasureParams::new(s.clone(), 1.0, n);
        for w in words_of_level(n, c) {
            assert!((t0.mass(&w).unwrap() - 4f64.powi(-(n as i32))).abs() < 1e-15);
            let mu = s.log_cylinder_mass(&w).unwrap().exp();
            assert!((t1.mass(&w).unwrap() - mu).abs() < 1e-15);
        }
    }

    #[test]
    fn tilted_deeper_words_spread_uniformly() {
        let s = spec4();
        let t = TiltedMeasureParams::new(s, 2.0, 2);
        let x = Word::parse("13").unwrap();
        let kids: f64 = (0..4).map(|j| t.mass(&x.child(j)).unwrap()).sum();
        assert!((kids - t.mass(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec4();
        assert_eq!(sample_word(&s, 50, 7), sample_word(&s, 50, 7));
        assert_ne!(sample_word(&s, 50, 7), sample_word(&s, 50, 8));
    }

    #[test]
    fn running_exponent_examples() {
        let u = MeasureSpec::with_factorial_schedule(
            ProbabilityVector::uniform(4).unwrap(),
            ProbabilityVector::uniform(4).unwrap(),
        )
        .unwrap();
        let w = sample_word(&u, 40, 1);
        for n in 1..=40 {
            assert!((u.running_exponent(&w, n).unwrap() - 1.0).abs() < 1e-12);
        }

        let p = pv(&[0.55, 0.15, 0.15, 0.15]);
        let s = MeasureSpec::with_factorial_schedule(p.clone(), p).unwrap();
        let zeros = Word::from_digits(vec![0; 30]);
        let expect = -0.55f64.ln() / 4f64.ln();
        let traj = s.exponent_trajectory(&zeros).unwrap();
        for (i, e) in traj.iter().enumerate() {
            assert!((e - expect).abs() < 1e-12);
            assert!((s.running_exponent(&zeros, i + 1).unwrap() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let json = r#"{"c1":4,"c2":4,"probs_a":[0.1,0.2,0.3,0.4],"probs_b":[0.4,0.3,0.2,0.1],"schedule":{"kind":"factorial"}}"#;
        let s: MeasureSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s, spec4());
        assert_eq!(serde_json::to_string(&s).unwrap(), json);
        let bad = r#"{"c1":4,"c2":4,"probs_a":[0.1,0.2,0.3,0.5],"probs_b":[0.4,0.3,0.2,0.1]}"#;
        assert!(serde_json::from_str::<MeasureSpec>(bad).is_err());
    }

    #[test]
    fn trajectory_csv() {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[vec![1.0, 0.5, 0.25]], 2).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sample,n,exponent\n0,2,0.5\n0,3,0.25\n"
        );
    }
}
