//! Generalized Dirichlet polynomials `F(x) = Σ a_j e^{p_j x}` and a zero
//! counter that reports orders.
//!
//! Zeros are isolated with the Descartes–Laguerre reduction: if the
//! coefficients change sign between exponents `p_i > p_{i+1}`, pick `s`
//! between them; `G = (e^{-sx} F)'` is again a Dirichlet polynomial with one
//! sign change fewer, and `e^{-sx} F` is monotone between consecutive zeros
//! of `G`. Recursing until no sign change is left yields breakpoints that
//! split the window into intervals holding at most one simple zero each.
//! Even-order zeros show up as breakpoints where `F` itself is negligible.
//!
//! A candidate counts as a zero when `|F|` is negligible against the local
//! term scale; its order is then found by probing successive derivatives
//! against a looser scale-relative threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A candidate is a zero only if `|F(x)|` is below this fraction of
/// `Σ |a_j e^{p_j x}|`.
pub const LOCATION_THRESHOLD: f64 = 1e-10;
/// For `m >= 1`, `|F^{(m)}(x)|` below this fraction of `Σ |a_j p_j^m e^{p_j x}|` counts as zero.
pub const ORDER_THRESHOLD: f64 = 1e-8;
/// Numeric roots closer than this are one zero. Roots joined by a stretch
/// on which `|F|` is negligible are merged as well.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Highest derivative probed when assigning an order.
pub const MAX_ORDER: u32 = 8;
/// Default search window.
pub const DEFAULT_WINDOW: (f64, f64) = (-20.0, 20.0);

const EXPONENT_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroCountError {
    #[error("polynomial is identically zero")]
    Degenerate,

    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub exponent: f64,
}

/// Terms are kept with strictly descending exponents and nonzero
/// coefficients. Exponents closer than `1e-12` (relative) are merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DirichletPolynomial {
    terms: Vec<Term>,
}

impl From<Vec<(f64, f64)>> for DirichletPolynomial {
    fn from(pairs: Vec<(f64, f64)>) -> Self {
        Self::new(pairs)
    }
}

impl From<DirichletPolynomial> for Vec<(f64, f64)> {
    fn from(f: DirichletPolynomial) -> Self {
        f.terms.iter().map(|t| (t.coef, t.exponent)).collect()
    }
}

impl DirichletPolynomial {
    /// Builds from `(coefficient, exponent)` pairs.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<Term> = pairs
            .into_iter()
            .map(|(coef, exponent)| Term { coef, exponent })
            .collect();
        raw.sort_by(|a, b| b.exponent.total_cmp(&a.exponent));

        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        let mut mass: Vec<f64> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.last_mut() {
                Some(last)
                    if (last.exponent - t.exponent).abs()
                        <= EXPONENT_MERGE_TOL * last.exponent.abs().max(1.0) =>
                {
                    last.coef += t.coef;
                    *mass.last_mut().unwrap() += t.coef.abs();
                }
                _ => {
                    terms.push(t);
                    mass.push(t.coef.abs());
                }
            }
        }
        let terms = terms
            .into_iter()
            .zip(mass)
            .filter(|(t, m)| t.coef.abs() > 4.0 * f64::EPSILON * m)
            .map(|(t, _)| t)
            .collect();
        Self { terms }
    }

    /// `Σ p_i^x = Σ e^{x ln p_i}`.
    pub fn power_sum(probs: &[f64]) -> Self {
        Self::new(probs.iter().map(|p| (1.0, p.ln())))
    }

    /// `Σ a_i^x - Σ b_i^x`.
    pub fn power_sum_difference(a: &[f64], b: &[f64]) -> Self {
        Self::power_sum(a).sub(&Self::power_sum(b))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: -t.coef,
                    exponent: t.exponent,
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|t| (t.coef, t.exponent)),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().flat_map(|s| {
            other
                .terms
                .iter()
                .map(move |o| (s.coef * o.coef, s.exponent + o.exponent))
        }))
    }

    /// `(Σ a_j p_j^m e^{(p_j) x - M}, Σ |a_j p_j^m| e^{p_j x - M})` with
    /// `M = max_j p_j x`; the common factor `e^M` is returned separately.
    fn shifted(&self, x: f64, m: u32) -> (f64, f64, f64) {
        let shift = self
            .terms
            .iter()
            .map(|t| t.exponent * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut signed = 0.0;
        let mut abs = 0.0;
        for t in &self.terms {
            let v = t.coef * t.exponent.powi(m as i32) * (t.exponent * x - shift).exp();
            signed += v;
            abs += v.abs();
        }
        (signed, abs, shift)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `F^{(m)}(x) = Σ a_j p_j^m e^{p_j x}`.
    pub fn derivative(&self, x: f64, m: u32) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let (s, _, shift) = self.shifted(x, m);
        s * shift.exp()
    }

    /// `Σ |a_j p_j^m| e^{p_j x}`, the magnitude against which
    /// `F^{(m)}(x)` is judged.
    pub fn term_scale(&self, x: f64, m: u32) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let (_, a, shift) = self.shifted(x, m);
        a * shift.exp()
    }

    /// `|F^{(m)}(x)| / Σ |a_j p_j^m e^{p_j x}|`, overflow-free.
    pub fn relative_magnitude(&self, x: f64, m: u32) -> f64 {
        let (s, a, _) = self.shifted(x, m);
        if a == 0.0 {
            0.0
        } else {
            s.abs() / a
        }
    }

    fn sign_at(&self, x: f64) -> f64 {
        let (s, _, _) = self.shifted(x, 0);
        if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// Sign changes in the coefficient sequence; bounds the number of real
    /// zeros counted with order.
    pub fn sign_changes(&self) -> usize {
        self.terms
            .windows(2)
            .filter(|w| (w[0].coef > 0.0) != (w[1].coef > 0.0))
            .count()
    }

    /// Every coefficient is `±1` and both signs occur equally often.
    pub fn is_bipartite(&self) -> bool {
        if self.terms.is_empty() {
            return false;
        }
        let mut balance = 0i64;
        for t in &self.terms {
            if t.coef == 1.0 {
                balance += 1;
            } else if t.coef == -1.0 {
                balance -= 1;
            } else {
                return false;
            }
        }
        balance == 0
    }

    /// Jameson's bound: a bipartite polynomial of length `2n` has at most
    /// `n` real zeros counted with order.
    pub fn jameson_bound(&self) -> JamesonBound {
        if self.is_bipartite() {
            JamesonBound::AtMost(self.len() / 2)
        } else {
            JamesonBound::Inapplicable
        }
    }

    /// `(x_L, x_R)` such that `F` has no zero outside `[x_L, x_R]`: beyond
    /// them the term with the extreme exponent outweighs all the others.
    pub fn dominance_bounds(&self) -> (f64, f64) {
        if self.terms.len() < 2 {
            return (0.0, 0.0);
        }
        let right = dominance_threshold(&self.terms);
        let mirrored: Vec<Term> = self
            .terms
            .iter()
            .rev()
            .map(|t| Term {
                coef: t.coef,
                exponent: -t.exponent,
            })
            .collect();
        let left = -dominance_threshold(&mirrored);
        (left, right)
    }

    /// Derivative polynomial of `e^{-s x} F(x)`.
    fn laguerre_reduce(&self, s: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * (t.exponent - s),
                    exponent: t.exponent - s,
                })
                .collect(),
        }
    }
}

/// Smallest `x >= 0` past which `|a_0| e^{p_0 x}` beats the rest.
fn dominance_threshold(terms: &[Term]) -> f64 {
    let lead = terms[0];
    let rest = |x: f64| -> f64 {
        terms[1..]
            .iter()
            .map(|t| t.coef.abs() * ((t.exponent - lead.exponent) * x).exp())
            .sum()
    };
    let target = lead.coef.abs();
    if rest(0.0) < target {
        return 0.0;
    }
    let total: f64 = terms[1..].iter().map(|t| t.coef.abs()).sum();
    let gap = lead.exponent - terms[1].exponent;
    let mut hi = (total / target).ln() / gap;
    hi = hi * (1.0 + 1e-12) + 1e-12;
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rest(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JamesonBound {
    AtMost(usize),
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTolerances {
    pub location_threshold: f64,
    pub order_threshold: f64,
    pub cluster_radius: f64,
    pub max_order: u32,
}

impl Default for ZeroTolerances {
    fn default() -> Self {
        Self {
            location_threshold: LOCATION_THRESHOLD,
            order_threshold: ORDER_THRESHOLD,
            cluster_radius: CLUSTER_RADIUS,
            max_order: MAX_ORDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub location: f64,
    pub order: u32,
    /// The probe reached `max_order` without finding a nonvanishing
    /// derivative; the true order is at least `order`.
    pub order_undetermined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub zeros: Vec<Zero>,
    pub total_order: u32,
    pub interval: (f64, f64),
    pub tolerances: ZeroTolerances,
    /// No zero of `F` lies outside this range.
    pub dominance_bounds: (f64, f64),
    /// The search window contains `dominance_bounds`, so every real zero is
    /// accounted for.
    pub covers_all_real_zeros: bool,
}

impl ZeroReport {
    pub fn locations(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.location).collect()
    }

    /// The zero within `radius` of `x`, if any.
    pub fn zero_near(&self, x: f64, radius: f64) -> Option<&Zero> {
        self.zeros.iter().find(|z| (z.location - x).abs() <= radius)
    }
}

/// Counts zeros of `f` on `[lo, hi]` with the default tolerances.
pub fn count_zeros(
    f: &DirichletPolynomial,
    lo: f64,
    hi: f64,
) -> Result<ZeroReport, ZeroCountError> {
    count_zeros_with(f, lo, hi, &ZeroTolerances::default())
}

/// Counts zeros on a window wide enough to contain all real zeros (at least
/// the default window).
pub fn count_all_zeros(f: &DirichletPolynomial) -> Result<ZeroReport, ZeroCountError> {
    let (l, r) = f.dominance_bounds();
    let lo = (l - 1.0).min(DEFAULT_WINDOW.0);
    let hi = (r + 1.0).max(DEFAULT_WINDOW.1);
    count_zeros(f, lo, hi)
}

pub fn count_zeros_with(
    f: &DirichletPolynomial,
    lo: f64,
    hi: f64,
    tol: &ZeroTolerances,
) -> Result<ZeroReport, ZeroCountError> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(ZeroCountError::InvalidInterval { lo, hi });
    }
    if f.is_empty() {
        return Err(ZeroCountError::Degenerate);
    }

    let mut candidates = isolate(f, lo, hi, tol.location_threshold);
    for x in [lo, hi] {
        if f.relative_magnitude(x, 0) <= tol.location_threshold {
            candidates.push(x);
        }
    }
    candidates.sort_by(f64::total_cmp);

    let mut zeros = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let mut j = i + 1;
        while j < candidates.len()
            && (candidates[j] - candidates[j - 1] < tol.cluster_radius
                || negligible_between(f, candidates[j - 1], candidates[j], tol.location_threshold))
        {
            j += 1;
        }
        // Rounding noise around an even-order zero produces spurious sign
        // changes; the member with the flattest slope is the critical point.
        let rep = candidates[i..j]
            .iter()
            .copied()
            .min_by(|a, b| {
                let key = |x: f64| {
                    (
                        f.relative_magnitude(x, 0) > tol.location_threshold,
                        f.relative_magnitude(x, 1),
                    )
                };
                key(*a)
                    .partial_cmp(&key(*b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if let Some(z) = classify(f, rep, tol) {
            zeros.push(z);
        }
        i = j;
    }

    let total_order = zeros.iter().map(|z| z.order).sum();
    let dominance_bounds = f.dominance_bounds();
    Ok(ZeroReport {
        zeros,
        total_order,
        interval: (lo, hi),
        tolerances: *tol,
        dominance_bounds,
        covers_all_real_zeros: lo <= dominance_bounds.0 && dominance_bounds.1 <= hi,
    })
}

/// Whether `|F|` stays at noise level on `[a, b]` (probed at interior points).
fn negligible_between(f: &DirichletPolynomial, a: f64, b: f64, threshold: f64) -> bool {
    [0.25, 0.5, 0.75]
        .iter()
        .all(|t| f.relative_magnitude(a + t * (b - a), 0) <= threshold)
}

/// Order of the zero at `x` (the first derivative that is not negligible),
/// or `None` if `F(x)` itself is not negligible.
fn classify(f: &DirichletPolynomial, x: f64, tol: &ZeroTolerances) -> Option<Zero> {
    if f.relative_magnitude(x, 0) > tol.location_threshold {
        return None;
    }
    for m in 1..=tol.max_order {
        if f.relative_magnitude(x, m) > tol.order_threshold {
            return Some(Zero {
                location: x,
                order: m,
                order_undetermined: false,
            });
        }
    }
    Some(Zero {
        location: x,
        order: tol.max_order,
        order_undetermined: true,
    })
}

/// Candidate zeros of `f` in `[lo, hi]`: sign-change roots plus critical
/// points at which `f` is negligible. Unclustered and possibly repeated.
fn isolate(f: &DirichletPolynomial, lo: f64, hi: f64, threshold: f64) -> Vec<f64> {
    let split = f
        .terms
        .windows(2)
        .position(|w| (w[0].coef > 0.0) != (w[1].coef > 0.0));
    let Some(i) = split else {
        // One sign throughout: no real zeros.
        return Vec::new();
    };
    let s = 0.5 * (f.terms[i].exponent + f.terms[i + 1].exponent);
    let critical = isolate(&f.laguerre_reduce(s), lo, hi, threshold);

    let mut breaks = Vec::with_capacity(critical.len() + 2);
    breaks.push(lo);
    breaks.extend(critical.iter().copied().filter(|&x| x > lo && x < hi));
    breaks.push(hi);
    breaks.dedup();

    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (sa, sb) = (f.sign_at(a), f.sign_at(b));
        if sa == 0.0 {
            out.push(a);
        } else if sa * sb < 0.0 {
            out.push(bisect(f, a, b, sa));
        }
    }
    if f.sign_at(hi) == 0.0 {
        out.push(hi);
    }
    out.extend(
        critical
            .into_iter()
            .filter(|&z| z >= lo && z <= hi && f.relative_magnitude(z, 0) <= threshold),
    );
    out.sort_by(f64::total_cmp);
    out
}

fn bisect(f: &DirichletPolynomial, mut a: f64, mut b: f64, sign_a: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let s = f.sign_at(mid);
        if s == 0.0 {
            return mid;
        }
        if s == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    if f.relative_magnitude(a, 0) <= f.relative_magnitude(b, 0) {
        a
    } else {
        b
    }
}
