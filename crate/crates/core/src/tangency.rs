//! Parameter pairs whose free-energy curves touch exactly at `q = 0` and
//! `q = 1`.
//!
//! Starting from a base quadruple `(a, b, c, d)`, the first vector is
//! `(a + t, b, c, d - t)` and the second is
//! `(a + u, b + v, c + w, d - u - v - w)`. For small `(t, w)` the pair
//! `(u, v)` is chosen so that
//!
//! - `φ = Σ x ln x - Σ y ln y = 0` (equal slopes at `q = 1`),
//! - `ψ = Σ ln x - Σ ln y = 0` (equal slopes at `q = 0`).
//!
//! Both curves already agree at `q = 0` and `q = 1`, so the two zeros of
//! `F(q) = Σ x^q - Σ y^q` become double zeros.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirichlet::{count_zeros, DirichletPolynomial, ZeroCountError, ZeroReport};
use crate::measure::ProbabilityVector;
use crate::numeric::linspace;

/// Documented region `|t|, |w| <= SMALLNESS_BOX` in which convergence is
/// expected. Solves outside it are attempted but not promised.
pub const SMALLNESS_BOX: f64 = 0.02;
/// Newton stops once `max(|φ|, |ψ|)` falls below this.
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 60;
pub const MAX_HALVINGS: u32 = 30;
/// Tolerance for calling the solved pair a permutation of each other.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Certification thresholds.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const CURVATURE_MIN: f64 = 1e-6;
pub const CERT_WINDOW: (f64, f64) = (-20.0, 20.0);
pub const SIGN_GRID_POINTS: usize = 2000;
pub const SIGN_GRID_EXCLUSION: f64 = 1e-4;
/// Distance within which a counted zero is identified with 0 or 1.
pub const ZERO_LOCATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TangencyError {
    #[error("base entries must lie in (0, 1) and sum to 1, got {0:?}")]
    InvalidBase([f64; 4]),

    #[error("base {base:?} has a singular (u, v) block (det = {det:e})")]
    SingularBase { base: [f64; 4], det: f64 },

    #[error("unknown base preset {0:?} (expected paper-110 or paper-9)")]
    UnknownPreset(String),

    #[error("state (t={t}, u={u}, v={v}, w={w}) leaves the open simplex")]
    OutsideDomain { t: f64, u: f64, v: f64, w: f64 },

    #[error("Newton failed at (u, v) = ({u}, {v}) with residual {residual:e}")]
    NoConvergence { u: f64, v: f64, residual: f64 },

    #[error("the solved vectors are permutations of each other")]
    DegeneratePair,

    #[error("cannot compare vectors of lengths {0} and {1}")]
    Lengths(usize, usize),

    #[error("zero counting failed: {0}")]
    Zeros(#[from] ZeroCountError),

    #[error("tangency not certified: {0}")]
    NotCertified(String),
}

impl TangencyError {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            TangencyError::NoConvergence { .. } | TangencyError::NotCertified(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct BaseQuadruple {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl From<BaseQuadruple> for [f64; 4] {
    fn from(q: BaseQuadruple) -> Self {
        q.entries()
    }
}

impl TryFrom<[f64; 4]> for BaseQuadruple {
    type Error = TangencyError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BaseQuadruple::new(v[0], v[1], v[2], v[3])
    }
}

impl BaseQuadruple {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, TangencyError> {
        let v = [a, b, c, d];
        let inside = v.iter().all(|x| *x > 0.0 && *x < 1.0);
        if !inside || (v.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
            return Err(TangencyError::InvalidBase(v));
        }
        let base = Self { a, b, c, d };
        let j = jacobian_uv(&PerturbationState::ORIGIN, &base)?;
        let det = det2(&j);
        if det.abs() <= 1e-9 {
            return Err(TangencyError::SingularBase { base: v, det });
        }
        Ok(base)
    }

    /// `"paper-110"` is `(0.1, 0.2, 0.3, 0.4)`; `"paper-9"` is
    /// `(1/9, 2/9, 2/9, 4/9)`.
    pub fn preset(name: &str) -> Result<Self, TangencyError> {
        match name {
            "paper-110" => Self::new(0.1, 0.2, 0.3, 0.4),
            "paper-9" => Self::new(1.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 4.0 / 9.0),
            other => Err(TangencyError::UnknownPreset(other.to_string())),
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Offsets `(t, u, v, w)` from the base quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationState {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl PerturbationState {
    pub const ORIGIN: Self = Self {
        t: 0.0,
        u: 0.0,
        v: 0.0,
        w: 0.0,
    };

    pub fn new(t: f64, u: f64, v: f64, w: f64) -> Self {
        Self { t, u, v, w }
    }

    /// `(a + t, b, c, d - t)`
    pub fn first_group(&self, base: &BaseQuadruple) -> [f64; 4] {
        [base.a + self.t, base.b, base.c, base.d - self.t]
    }

    /// `(a + u, b + v, c + w, d - u - v - w)`
    pub fn second_group(&self, base: &BaseQuadruple) -> [f64; 4] {
        [
            base.a + self.u,
            base.b + self.v,
            base.c + self.w,
            base.d - (self.u + self.v + self.w),
        ]
    }

    pub fn check(&self, base: &BaseQuadruple) -> Result<(), TangencyError> {
        let ok = self
            .first_group(base)
            .iter()
            .chain(self.second_group(base).iter())
            .all(|x| *x > 0.0 && *x < 1.0);
        if ok {
            Ok(())
        } else {
            Err(TangencyError::OutsideDomain {
                t: self.t,
                u: self.u,
                v: self.v,
                w: self.w,
            })
        }
    }
}

/// `Σ x ln x` over the first group minus the same over the second.
/// Equals `ln 4 · (θ'_a(1) - θ'_b(1))` for base-4 `θ`.
pub fn phi(state: &PerturbationState, base: &BaseQuadruple) -> Result<f64, TangencyError> {
    state.check(base)?;
    let s = |g: [f64; 4]| g.iter().map(|x| x * x.ln()).sum::<f64>();
    Ok(s(state.first_group(base)) - s(state.second_group(base)))
}

/// `Σ ln x` over the first group minus the same over the second.
/// Equals `4 ln 4 · (θ'_a(0) - θ'_b(0))` for base-4 `θ`.
pub fn psi(state: &PerturbationState, base: &BaseQuadruple) -> Result<f64, TangencyError> {
    state.check(base)?;
    let s = |g: [f64; 4]| g.iter().map(|x| x.ln()).sum::<f64>();
    Ok(s(state.first_group(base)) - s(state.second_group(base)))
}

/// Rows `φ, ψ`; columns `t, u, v, w`.
pub fn jacobian_full(
    state: &PerturbationState,
    base: &BaseQuadruple,
) -> Result<[[f64; 4]; 2], TangencyError> {
    state.check(base)?;
    let [a1, _, _, d1] = state.first_group(base);
    let [b1, b2, b3, b4] = state.second_group(base);
    Ok([
        [
            (a1 / d1).ln(),
            (b4 / b1).ln(),
            (b4 / b2).ln(),
            (b4 / b3).ln(),
        ],
        [
            1.0 / a1 - 1.0 / d1,
            1.0 / b4 - 1.0 / b1,
            1.0 / b4 - 1.0 / b2,
            1.0 / b4 - 1.0 / b3,
        ],
    ])
}

/// The `(u, v)` columns of [`jacobian_full`].
pub fn jacobian_uv(
    state: &PerturbationState,
    base: &BaseQuadruple,
) -> Result<[[f64; 2]; 2], TangencyError> {
    let j = jacobian_full(state, base)?;
    Ok([[j[0][1], j[0][2]], [j[1][1], j[1][2]]])
}

pub(crate) fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Root found by [`solve_uv_traced`], with `max(|φ|, |ψ|)` after each
/// accepted step (the first entry is the starting residual).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonTrace {
    pub u: f64,
    pub v: f64,
    pub residuals: Vec<f64>,
}

fn residual(state: &PerturbationState, base: &BaseQuadruple) -> Option<f64> {
    let f = phi(state, base).ok()?;
    let g = psi(state, base).ok()?;
    Some(f.abs().max(g.abs()))
}

/// Solves `φ = ψ = 0` for `(u, v)` by damped Newton from `(0, 0)`.
pub fn solve_uv(t: f64, w: f64, base: &BaseQuadruple) -> Result<(f64, f64), TangencyError> {
    solve_uv_traced(t, w, base).map(|tr| (tr.u, tr.v))
}

pub fn solve_uv_traced(t: f64, w: f64, base: &BaseQuadruple) -> Result<NewtonTrace, TangencyError> {
    let mut state = PerturbationState::new(t, 0.0, 0.0, w);
    state.check(base)?;
    let mut r = residual(&state, base).expect("checked state");
    let mut history = vec![r];

    for _ in 0..NEWTON_MAX_ITER {
        if r < NEWTON_TOL {
            return Ok(NewtonTrace {
                u: state.u,
                v: state.v,
                residuals: history,
            });
        }
        let j = jacobian_uv(&state, base)?;
        let det = det2(&j);
        let fail = || TangencyError::NoConvergence {
            u: state.u,
            v: state.v,
            residual: r,
        };
        if det.abs() < 1e-300 {
            return Err(fail());
        }
        let (f, g) = (phi(&state, base)?, psi(&state, base)?);
        let du = -(j[1][1] * f - j[0][1] * g) / det;
        let dv = -(-j[1][0] * f + j[0][0] * g) / det;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = PerturbationState {
                u: state.u + scale * du,
                v: state.v + scale * dv,
                ..state
            };
            match residual(&trial, base) {
                Some(tr) if tr <= r => {
                    accepted = Some((trial, tr));
                    break;
                }
                _ => scale *= 0.5,
            }
        }
        let Some((next, nr)) = accepted else {
            return Err(fail());
        };
        state = next;
        r = nr;
        history.push(r);
    }
    if r < NEWTON_TOL {
        return Ok(NewtonTrace {
            u: state.u,
            v: state.v,
            residuals: history,
        });
    }
    Err(TangencyError::NoConvergence {
        u: state.u,
        v: state.v,
        residual: r,
    })
}

/// Solves for `(u, v)` and returns the two probability vectors.
pub fn build_measure_pair(
    t: f64,
    w: f64,
    base: &BaseQuadruple,
) -> Result<(ProbabilityVector, ProbabilityVector), TangencyError> {
    let (u, v) = solve_uv(t, w, base)?;
    let state = PerturbationState::new(t, u, v, w);
    state.check(base)?;
    let to_pv = |g: [f64; 4]| {
        ProbabilityVector::new(g.to_vec()).map_err(|_| TangencyError::OutsideDomain { t, u, v, w })
    };
    let a = to_pv(state.first_group(base))?;
    let b = to_pv(state.second_group(base))?;
    if a.multiset_eq(&b, DEGENERATE_TOL) {
        return Err(TangencyError::DegeneratePair);
    }
    Ok((a, b))
}

/// Entries of the `k`-fold tensor power of `p`.
fn tensor_power(p: &[f64], k: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|x| p.iter().map(move |y| x * y))
            .collect();
    }
    out
}

/// `F(q) = Σ x_i^q - Σ y_i^q`, after lifting the shorter vector to a tensor
/// power when one length is a power of the other (a binary vector against a
/// 4-letter one, for instance). The sign of `F` is the sign of
/// `θ_x - θ_y`.
pub fn difference_polynomial(
    x: &ProbabilityVector,
    y: &ProbabilityVector,
) -> Result<DirichletPolynomial, TangencyError> {
    let (lx, ly) = (x.len(), y.len());
    let lift = |short: &ProbabilityVector, long: usize| -> Option<Vec<f64>> {
        let mut k = 1;
        let mut n = short.len();
        while n < long {
            n *= short.len();
            k += 1;
        }
        (n == long).then(|| tensor_power(short.entries(), k))
    };
    let (ex, ey) = if lx == ly {
        (x.entries().to_vec(), y.entries().to_vec())
    } else if lx < ly {
        let ex = lift(x, ly).ok_or(TangencyError::Lengths(lx, ly))?;
        (ex, y.entries().to_vec())
    } else {
        let ey = lift(y, lx).ok_or(TangencyError::Lengths(lx, ly))?;
        (x.entries().to_vec(), ey)
    };
    Ok(DirichletPolynomial::power_sum_difference(&ex, &ey))
}

/// Measurements behind a tangency claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyCertificate {
    pub params_a: ProbabilityVector,
    pub params_b: ProbabilityVector,
    /// `|F(0)|, |F'(0)|, |F(1)|, |F'(1)|`
    pub residuals: [f64; 4],
    /// `F''(0), F''(1)`
    pub curvatures: [f64; 2],
    /// Common sign of `F` on the separation grid, `0` if it changes.
    pub grid_sign: i8,
    pub grid_points: usize,
    pub zero_report: ZeroReport,
}

impl TangencyCertificate {
    /// Every failed check, in a human-readable form.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let labels = ["|F(0)|", "|F'(0)|", "|F(1)|", "|F'(1)|"];
        for (l, r) in labels.iter().zip(self.residuals) {
            if r.is_nan() || r >= RESIDUAL_TOL {
                out.push(format!("{l} = {r:e}"));
            }
        }
        for (l, c) in ["F''(0)", "F''(1)"].iter().zip(self.curvatures) {
            if c.is_nan() || c.abs() <= CURVATURE_MIN {
                out.push(format!("{l} = {c:e}"));
            }
        }
        if self.grid_sign == 0 {
            out.push("F changes sign away from 0 and 1".into());
        }
        let zr = &self.zero_report;
        let expected = zr.zeros.len() == 2
            && [0.0, 1.0].iter().all(|&x| {
                zr.zero_near(x, ZERO_LOCATION_TOL)
                    .is_some_and(|z| z.order == 2 && !z.order_undetermined)
            });
        if !expected {
            let found: Vec<String> = zr
                .zeros
                .iter()
                .map(|z| format!("{}@{}", z.order, z.location))
                .collect();
            out.push(format!("zeros (order@location) = [{}]", found.join(", ")));
        }
        out
    }

    pub fn is_certified(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Collects the certificate measurements without judging them. Errors only
/// on incompatible lengths or identical inputs.
pub fn inspect_tangency(
    params_a: &ProbabilityVector,
    params_b: &ProbabilityVector,
) -> Result<TangencyCertificate, TangencyError> {
    let f = difference_polynomial(params_a, params_b)?;
    let zero_report = count_zeros(&f, CERT_WINDOW.0, CERT_WINDOW.1)?;

    let residuals = [
        f.eval(0.0).abs(),
        f.derivative(0.0, 1).abs(),
        f.eval(1.0).abs(),
        f.derivative(1.0, 1).abs(),
    ];
    let curvatures = [f.derivative(0.0, 2), f.derivative(1.0, 2)];

    let mut signs = linspace(CERT_WINDOW.0, CERT_WINDOW.1, SIGN_GRID_POINTS)
        .into_iter()
        .filter(|q| q.abs() > SIGN_GRID_EXCLUSION && (q - 1.0).abs() > SIGN_GRID_EXCLUSION)
        .map(|q| {
            let v = f.eval(q);
            if v > 0.0 {
                1i8
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        });
    let first = signs.next().unwrap_or(0);
    let grid_sign = if signs.all(|s| s == first) { first } else { 0 };

    Ok(TangencyCertificate {
        params_a: params_a.clone(),
        params_b: params_b.clone(),
        residuals,
        curvatures,
        grid_sign,
        grid_points: SIGN_GRID_POINTS,
        zero_report,
    })
}

/// [`inspect_tangency`] followed by the checks: residuals below `1e-10`,
/// curvatures above `1e-6` in magnitude, one sign on the grid, and exactly
/// two counted zeros, at `0` and `1`, of order 2 each.
pub fn certify_tangency(
    params_a: &ProbabilityVector,
    params_b: &ProbabilityVector,
) -> Result<TangencyCertificate, TangencyError> {
    let cert = inspect_tangency(params_a, params_b).map_err(|e| match e {
        TangencyError::Zeros(ZeroCountError::Degenerate) => TangencyError::DegeneratePair,
        other => other,
    })?;
    let failures = cert.failures();
    if failures.is_empty() {
        Ok(cert)
    } else {
        Err(TangencyError::NotCertified(failures.join("; ")))
    }
}
