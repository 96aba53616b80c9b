//! Closed-form Olsen functions of the multinomial measures, their Legendre
//! transforms, and the level-set spectrum.
//!
//! For a probability vector `p` over `c` letters,
//! `θ_p(q) = log_c Σ p_i^q`. With two vectors `a` (first alphabet) and `b`
//! (second alphabet), `B = max(θ_a, θ_b)` and `b = min(θ_a, θ_b)`.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::measure::{MeasureSpec, ProbabilityVector};

/// Newton/bisection iteration cap in [`legendre`].
pub const LEGENDRE_MAX_ITER: usize = 200;
/// Target on `|f'(q) + α|`.
pub const LEGENDRE_TOL: f64 = 1e-13;
/// Solutions closer than this (in `q`) to a kink of `B` or `b` are refused.
pub const CROSSING_GUARD: f64 = 1e-9;
/// Agreement required between the Legendre and entropy routes.
pub const SPECTRUM_CROSS_CHECK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OlsenError {
    #[error("Legendre solve did not converge (last q = {q}, residual = {residual:e})")]
    NoConvergence { q: f64, residual: f64 },

    #[error("alpha = {alpha} is outside the admissible window ({lo}, {hi})")]
    OutsideWindow { alpha: f64, lo: f64, hi: f64 },

    #[error("alpha = {alpha}: the Legendre transform is undefined")]
    Undefined { alpha: f64 },

    #[error("solution q = {q} lies on a crossing of the two free-energy curves")]
    OnCrossing { q: f64 },

    #[error("spectrum needs equal alphabets, got c1 = {c1}, c2 = {c2}")]
    UnequalBases { c1: u32, c2: u32 },

    #[error("{what}: Legendre route gives {legendre}, entropy route gives {entropy}")]
    CrossCheck {
        what: &'static str,
        legendre: f64,
        entropy: f64,
    },
}

impl OlsenError {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            OlsenError::NoConvergence { .. } | OlsenError::CrossCheck { .. }
        )
    }
}

/// Left and right derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneSided {
    pub left: f64,
    pub right: f64,
}

impl OneSided {
    pub fn both(v: f64) -> Self {
        Self { left: v, right: v }
    }

    pub fn is_kink(&self, tol: f64) -> bool {
        (self.left - self.right).abs() > tol
    }
}

/// A convex free-energy curve with a derivative oracle.
pub trait FreeEnergy {
    fn value(&self, q: f64) -> f64;

    fn derivative(&self, q: f64) -> OneSided;

    /// Second derivative where it exists; used for Newton steps.
    fn second_derivative(&self, _q: f64) -> Option<f64> {
        None
    }

    /// `(lim_{q→-∞} f'(q), lim_{q→+∞} f'(q))`.
    fn derivative_limits(&self) -> (f64, f64);

    /// `lim (α q + f(q))` as `q → ±∞` when `-α` equals the corresponding
    /// derivative limit.
    fn conjugate_at_limit(&self, _upper: bool) -> Option<f64> {
        None
    }
}

/// `θ(q) = ln(Σ p_i^q) / log_base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFunction {
    probs: ProbabilityVector,
    log_base: f64,
}

impl ThetaFunction {
    pub fn new(probs: ProbabilityVector, log_base: f64) -> Self {
        Self { probs, log_base }
    }

    /// Base `c` = number of letters.
    pub fn natural(probs: ProbabilityVector) -> Self {
        let log_base = (probs.len() as f64).ln();
        Self::new(probs, log_base)
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }

    pub fn theta(&self, q: f64) -> f64 {
        self.probs.log_power_sum(q) / self.log_base
    }

    /// `Σ p_i^q ln p_i / (Σ p_i^q · ln c)`.
    pub fn theta_prime(&self, q: f64) -> f64 {
        let t = tilde_params(&self.probs, q);
        t.entries()
            .iter()
            .zip(self.probs.entries())
            .map(|(w, p)| w * p.ln())
            .sum::<f64>()
            / self.log_base
    }

    /// Variance of `ln p` under the tilted weights, over `ln c`.
    pub fn theta_second(&self, q: f64) -> f64 {
        let t = tilde_params(&self.probs, q);
        let mean: f64 = t
            .entries()
            .iter()
            .zip(self.probs.entries())
            .map(|(w, p)| w * p.ln())
            .sum();
        t.entries()
            .iter()
            .zip(self.probs.entries())
            .map(|(w, p)| w * (p.ln() - mean).powi(2))
            .sum::<f64>()
            / self.log_base
    }

    fn multiplicity_log(&self, extreme: f64) -> f64 {
        let m = self
            .probs
            .entries()
            .iter()
            .filter(|&&p| (p - extreme).abs() <= 1e-15)
            .count();
        (m as f64).ln() / self.log_base
    }
}

impl FreeEnergy for ThetaFunction {
    fn value(&self, q: f64) -> f64 {
        self.theta(q)
    }

    fn derivative(&self, q: f64) -> OneSided {
        OneSided::both(self.theta_prime(q))
    }

    fn second_derivative(&self, q: f64) -> Option<f64> {
        Some(self.theta_second(q))
    }

    fn derivative_limits(&self) -> (f64, f64) {
        (
            self.probs.min().ln() / self.log_base,
            self.probs.max().ln() / self.log_base,
        )
    }

    fn conjugate_at_limit(&self, upper: bool) -> Option<f64> {
        // α q + θ(q) = log_c Σ (p_i / p_ext)^q → log_c #{i : p_i = p_ext}
        let ext = if upper {
            self.probs.max()
        } else {
            self.probs.min()
        };
        Some(self.multiplicity_log(ext))
    }
}

/// `θ(q) = log_c Σ p_i^q` with `c = probs.len()` unless `log_base` says otherwise.
pub fn theta(probs: &ProbabilityVector, log_base: f64, q: f64) -> f64 {
    probs.log_power_sum(q) / log_base
}

pub fn theta_prime(probs: &ProbabilityVector, log_base: f64, q: f64) -> f64 {
    ThetaFunction::new(probs.clone(), log_base).theta_prime(q)
}

/// `ã_i = a_i^q / Σ_j a_j^q`.
pub fn tilde_params(probs: &ProbabilityVector, q: f64) -> ProbabilityVector {
    let logs: Vec<f64> = probs.entries().iter().map(|p| q * p.ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ProbabilityVector::from_weights_unchecked(logs.iter().map(|l| (l - max).exp()).collect())
}

/// Shannon entropy `-Σ p_i ln p_i / log_base`.
pub fn entropy(probs: &ProbabilityVector, log_base: f64) -> f64 {
    -probs
        .entries()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
        / log_base
}

/// `τ_n(q)`, the exact finite-depth partition exponent:
/// `Σ_{|w| = n} μ(w)^q = exp(τ_n(q) · (N_n ln c_1 + (n - N_n) ln c_2))`.
pub fn tau_n(spec: &MeasureSpec, q: f64, n: u64) -> f64 {
    assert!(n >= 1, "depth must be positive");
    spec.log_partition_sum(q, n) / spec.space().log_scale(n)
}

/// The two free-energy curves of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsenPair {
    pub theta_a: ThetaFunction,
    pub theta_b: ThetaFunction,
}

impl OlsenPair {
    pub fn new(theta_a: ThetaFunction, theta_b: ThetaFunction) -> Self {
        Self { theta_a, theta_b }
    }

    pub fn from_probs(probs_a: ProbabilityVector, probs_b: ProbabilityVector) -> Self {
        Self::new(
            ThetaFunction::natural(probs_a),
            ThetaFunction::natural(probs_b),
        )
    }

    pub fn from_spec(spec: &MeasureSpec) -> Self {
        let sp = spec.space();
        Self::new(
            ThetaFunction::new(spec.probs_a().clone(), sp.alphabet_1.ln_size()),
            ThetaFunction::new(spec.probs_b().clone(), sp.alphabet_2.ln_size()),
        )
    }

    /// `B(q) = max(θ_a, θ_b)`.
    pub fn upper_value(&self, q: f64) -> f64 {
        self.theta_a.theta(q).max(self.theta_b.theta(q))
    }

    /// `b(q) = min(θ_a, θ_b)`.
    pub fn lower_value(&self, q: f64) -> f64 {
        self.theta_a.theta(q).min(self.theta_b.theta(q))
    }

    pub fn upper_derivative(&self, q: f64) -> OneSided {
        self.envelope_derivative(q, true)
    }

    pub fn lower_derivative(&self, q: f64) -> OneSided {
        self.envelope_derivative(q, false)
    }

    fn envelope_derivative(&self, q: f64, upper: bool) -> OneSided {
        let (ta, tb) = (self.theta_a.theta(q), self.theta_b.theta(q));
        let (da, db) = (self.theta_a.theta_prime(q), self.theta_b.theta_prime(q));
        let scale = ta.abs().max(tb.abs()).max(1.0);
        if (ta - tb).abs() <= 1e-12 * scale {
            // On a crossing the max takes the steeper branch on the right.
            let (lo, hi) = (da.min(db), da.max(db));
            return if upper {
                OneSided {
                    left: lo,
                    right: hi,
                }
            } else {
                OneSided {
                    left: hi,
                    right: lo,
                }
            };
        }
        let pick_a = (ta > tb) == upper;
        OneSided::both(if pick_a { da } else { db })
    }

    /// `B` as a [`FreeEnergy`].
    pub fn upper(&self) -> Envelope<'_> {
        Envelope {
            pair: self,
            upper: true,
        }
    }

    /// `b` as a [`FreeEnergy`].
    pub fn lower(&self) -> Envelope<'_> {
        Envelope {
            pair: self,
            upper: false,
        }
    }

    /// Distance (in `q`) from `q` to the nearest crossing with distinct
    /// slopes, estimated by one Newton step on `θ_a - θ_b`. `∞` when the
    /// slopes agree.
    fn kink_distance(&self, q: f64) -> f64 {
        let gap = self.theta_a.theta(q) - self.theta_b.theta(q);
        let slope = self.theta_a.theta_prime(q) - self.theta_b.theta_prime(q);
        if slope.abs() <= 1e-12 {
            f64::INFINITY
        } else {
            (gap / slope).abs()
        }
    }
}

/// `B` or `b` of an [`OlsenPair`].
pub struct Envelope<'a> {
    pair: &'a OlsenPair,
    upper: bool,
}

impl FreeEnergy for Envelope<'_> {
    fn value(&self, q: f64) -> f64 {
        if self.upper {
            self.pair.upper_value(q)
        } else {
            self.pair.lower_value(q)
        }
    }

    fn derivative(&self, q: f64) -> OneSided {
        self.pair.envelope_derivative(q, self.upper)
    }

    fn second_derivative(&self, q: f64) -> Option<f64> {
        let (ta, tb) = (self.pair.theta_a.theta(q), self.pair.theta_b.theta(q));
        let pick_a = (ta >= tb) == self.upper;
        Some(if pick_a {
            self.pair.theta_a.theta_second(q)
        } else {
            self.pair.theta_b.theta_second(q)
        })
    }

    fn derivative_limits(&self) -> (f64, f64) {
        let (la, ha) = self.pair.theta_a.derivative_limits();
        let (lb, hb) = self.pair.theta_b.derivative_limits();
        // As q → -∞ the curve with the more negative slope is on top.
        if self.upper {
            (la.min(lb), ha.max(hb))
        } else {
            (la.max(lb), ha.min(hb))
        }
    }

    fn conjugate_at_limit(&self, upper: bool) -> Option<f64> {
        let (la, ha) = self.pair.theta_a.derivative_limits();
        let (lb, hb) = self.pair.theta_b.derivative_limits();
        let target = if upper {
            self.derivative_limits().1
        } else {
            self.derivative_limits().0
        };
        let (sa, sb) = if upper { (ha, hb) } else { (la, lb) };
        let mut vals = Vec::new();
        if (sa - target).abs() <= 1e-15 {
            vals.push(self.pair.theta_a.conjugate_at_limit(upper)?);
        }
        if (sb - target).abs() <= 1e-15 {
            vals.push(self.pair.theta_b.conjugate_at_limit(upper)?);
        }
        let pick = if self.upper { f64::max } else { f64::min };
        vals.into_iter().reduce(pick)
    }
}

/// Outcome of [`legendre`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Conjugate {
    /// `f*(α) = α q + f(q)` attained at `q` (infinite when only approached).
    Value { value: f64, q: f64 },
    /// `-α` lies outside the closure of `f'(ℝ)`.
    Undefined,
}

impl Conjugate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Conjugate::Value { value, .. } => Some(*value),
            Conjugate::Undefined => None,
        }
    }
}

/// `f*(α) = inf_q (α q + f(q))` for convex `f`, by solving `f'(q) = -α`
/// with a bisection-safeguarded Newton iteration.
pub fn legendre<F: FreeEnergy + ?Sized>(f: &F, alpha: f64) -> Result<Conjugate, OlsenError> {
    let target = -alpha;
    let (dlo, dhi) = f.derivative_limits();
    let edge_tol = 1e-12 * target.abs().max(1.0);

    if target < dlo - edge_tol || target > dhi + edge_tol {
        return Ok(Conjugate::Undefined);
    }
    if dhi - dlo <= edge_tol {
        // affine f: every q is a minimizer
        return Ok(Conjugate::Value {
            value: f.value(0.0),
            q: 0.0,
        });
    }
    if (target - dlo).abs() <= edge_tol || (target - dhi).abs() <= edge_tol {
        let upper = (target - dhi).abs() <= edge_tol;
        return Ok(match f.conjugate_at_limit(upper) {
            Some(value) => Conjugate::Value {
                value,
                q: if upper {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
            },
            None => Conjugate::Undefined,
        });
    }

    // residual: distance from the target slope to [f'_-(q), f'_+(q)]
    let residual = |q: f64| -> f64 {
        let d = f.derivative(q);
        let (l, r) = (d.left.min(d.right), d.left.max(d.right));
        if target < l {
            target - l
        } else if target > r {
            target - r
        } else {
            0.0
        }
    };

    let mut lo = -1.0;
    let mut hi = 1.0;
    while residual(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(OlsenError::NoConvergence {
                q: lo,
                residual: residual(lo),
            });
        }
    }
    while residual(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(OlsenError::NoConvergence {
                q: hi,
                residual: residual(hi),
            });
        }
    }

    let mut q = 0.5 * (lo + hi);
    for _ in 0..LEGENDRE_MAX_ITER {
        let r = residual(q);
        if r.abs() <= LEGENDRE_TOL {
            return Ok(Conjugate::Value {
                value: alpha * q + f.value(q),
                q,
            });
        }
        // residual > 0 means f'(q) < target: the root is to the right
        if r > 0.0 {
            lo = q;
        } else {
            hi = q;
        }
        if hi - lo <= 4.0 * f64::EPSILON * q.abs().max(1.0) {
            if r.abs() <= 1e-9 {
                return Ok(Conjugate::Value {
                    value: alpha * q + f.value(q),
                    q,
                });
            }
            return Err(OlsenError::NoConvergence { q, residual: r });
        }
        let newton = f
            .second_derivative(q)
            .filter(|s| *s > 0.0)
            .map(|s| q + r / s)
            .filter(|x| *x > lo && *x < hi);
        q = newton.unwrap_or(0.5 * (lo + hi));
    }
    let r = residual(q);
    Err(OlsenError::NoConvergence { q, residual: r })
}

/// `(α, dim X(α), Dim X(α), q_a, q_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    /// `b*(α)`
    pub dim: f64,
    /// `B*(α)`
    #[serde(rename = "Dim")]
    pub dim_packing: f64,
    /// Solution of `B'(q) = -α`.
    pub q_a: f64,
    /// Solution of `b'(q) = -α`.
    pub q_b: f64,
}

impl OlsenPair {
    /// The vector whose free energy is on top (smaller minimum entry) first.
    fn ordered_probs(&self) -> (&ProbabilityVector, &ProbabilityVector) {
        let (a, b) = (self.theta_a.probs(), self.theta_b.probs());
        if a.min() <= b.min() {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// `(-log_c max b, -log_c min b)` for the lower-curve vector `b` (the one
    /// with the larger minimum entry).
    pub fn spectrum_window(&self) -> (f64, f64) {
        let (_, low) = self.ordered_probs();
        let lb = self.theta_a.log_base();
        (-low.max().ln() / lb, -low.min().ln() / lb)
    }

    fn check_equal_bases(&self) -> Result<(), OlsenError> {
        let (la, lb) = (self.theta_a.log_base(), self.theta_b.log_base());
        if (la - lb).abs() > 1e-15 {
            return Err(OlsenError::UnequalBases {
                c1: la.exp().round() as u32,
                c2: lb.exp().round() as u32,
            });
        }
        Ok(())
    }
}

/// Hausdorff and packing dimensions of the level set `X(α)`, obtained as
/// `b*(α)` and `B*(α)` and cross-checked against the entropies of the
/// tilted vectors.
pub fn spectrum(pair: &OlsenPair, alpha: f64) -> Result<SpectrumPoint, OlsenError> {
    pair.check_equal_bases()?;
    let (lo, hi) = pair.spectrum_window();
    if !(alpha > lo && alpha < hi) {
        return Err(OlsenError::OutsideWindow { alpha, lo, hi });
    }
    let log_base = pair.theta_a.log_base();

    let solve = |upper: bool| -> Result<(f64, f64), OlsenError> {
        let curve = if upper { pair.upper() } else { pair.lower() };
        match legendre(&curve, alpha)? {
            Conjugate::Value { value, q } if q.is_finite() => {
                if pair.kink_distance(q) < CROSSING_GUARD {
                    return Err(OlsenError::OnCrossing { q });
                }
                Ok((value, q))
            }
            _ => Err(OlsenError::Undefined { alpha }),
        }
    };
    let (dim_packing, q_a) = solve(true)?;
    let (dim, q_b) = solve(false)?;

    // Entropy route: h(tilde(p, q)) for the vector active at q.
    let active = |q: f64, upper: bool| -> &ProbabilityVector {
        let (ta, tb) = (pair.theta_a.theta(q), pair.theta_b.theta(q));
        if (ta >= tb) == upper {
            pair.theta_a.probs()
        } else {
            pair.theta_b.probs()
        }
    };
    let h_a = entropy(&tilde_params(active(q_a, true), q_a), log_base);
    let h_b = entropy(&tilde_params(active(q_b, false), q_b), log_base);
    if (h_a - dim_packing).abs() > SPECTRUM_CROSS_CHECK {
        return Err(OlsenError::CrossCheck {
            what: "packing dimension",
            legendre: dim_packing,
            entropy: h_a,
        });
    }
    if (h_b - dim).abs() > SPECTRUM_CROSS_CHECK {
        return Err(OlsenError::CrossCheck {
            what: "Hausdorff dimension",
            legendre: dim,
            entropy: h_b,
        });
    }

    Ok(SpectrumPoint {
        alpha,
        dim,
        dim_packing,
        q_a,
        q_b,
    })
}

/// `φ_ν(x) = log_c max{Σ a_i^x ã_i, Σ b_i^x b̃_i}`, the free energy of `μ`
/// weighted by the measure built from the tilted vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiNu {
    pub probs_a: ProbabilityVector,
    pub probs_b: ProbabilityVector,
    pub tilde_a: ProbabilityVector,
    pub tilde_b: ProbabilityVector,
    pub log_base: f64,
}

impl PhiNu {
    pub fn new(
        probs_a: ProbabilityVector,
        probs_b: ProbabilityVector,
        tilde_a: ProbabilityVector,
        tilde_b: ProbabilityVector,
    ) -> Self {
        let log_base = (probs_a.len() as f64).ln();
        Self {
            probs_a,
            probs_b,
            tilde_a,
            tilde_b,
            log_base,
        }
    }

    /// Tilts matched to `α` through the spectrum solve.
    pub fn matched(pair: &OlsenPair, point: &SpectrumPoint) -> Self {
        let (pa, pb) = (pair.theta_a.probs().clone(), pair.theta_b.probs().clone());
        let (up, low) = pair.ordered_probs();
        let (tu, tl) = (tilde_params(up, point.q_a), tilde_params(low, point.q_b));
        let (ta, tb) = if std::ptr::eq(up, pair.theta_a.probs()) {
            (tu, tl)
        } else {
            (tl, tu)
        };
        Self::new(pa, pb, ta, tb)
    }

    fn branch(probs: &ProbabilityVector, tilde: &ProbabilityVector, x: f64) -> (f64, f64) {
        // (ln Σ t_i p_i^x, d/dx of it)
        let logs: Vec<f64> = probs
            .entries()
            .iter()
            .zip(tilde.entries())
            .map(|(p, t)| t.ln() + x * p.ln())
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let d = w
            .iter()
            .zip(probs.entries())
            .map(|(wi, p)| wi * p.ln())
            .sum::<f64>()
            / total;
        (max + total.ln(), d)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (va, _) = Self::branch(&self.probs_a, &self.tilde_a, x);
        let (vb, _) = Self::branch(&self.probs_b, &self.tilde_b, x);
        va.max(vb) / self.log_base
    }

    pub fn derivative(&self, x: f64) -> OneSided {
        let (va, da) = Self::branch(&self.probs_a, &self.tilde_a, x);
        let (vb, db) = Self::branch(&self.probs_b, &self.tilde_b, x);
        let (da, db) = (da / self.log_base, db / self.log_base);
        if (va - vb).abs() <= 1e-13 * va.abs().max(vb.abs()).max(1.0) {
            OneSided {
                left: da.min(db),
                right: da.max(db),
            }
        } else if va > vb {
            OneSided::both(da)
        } else {
            OneSided::both(db)
        }
    }
}

/// `φ_ν(x)`.
pub fn phi_nu(
    probs_a: &ProbabilityVector,
    probs_b: &ProbabilityVector,
    tilde_a: &ProbabilityVector,
    tilde_b: &ProbabilityVector,
    x: f64,
) -> f64 {
    PhiNu::new(
        probs_a.clone(),
        probs_b.clone(),
        tilde_a.clone(),
        tilde_b.clone(),
    )
    .value(x)
}

/// CSV `q,b,B,b',B'`; derivatives are right derivatives.
pub fn write_tau_csv<W: Write>(mut out: W, pair: &OlsenPair, qs: &[f64]) -> std::io::Result<()> {
    writeln!(out, "q,b,B,b',B'")?;
    for &q in qs {
        writeln!(
            out,
            "{},{},{},{},{}",
            q,
            pair.lower_value(q),
            pair.upper_value(q),
            pair.lower_derivative(q).right,
            pair.upper_derivative(q).right
        )?;
    }
    Ok(())
}

/// CSV `alpha,dim,Dim,q_a,q_b`.
pub fn write_spectrum_csv<W: Write>(mut out: W, points: &[SpectrumPoint]) -> std::io::Result<()> {
    writeln!(out, "alpha,dim,Dim,q_a,q_b")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.alpha, p.dim, p.dim_packing, p.q_a, p.q_b
        )?;
    }
    Ok(())
}
