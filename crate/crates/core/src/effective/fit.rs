//! Least-squares extraction of effective-model parameters from ΔE(φ)
//! curves, with ΔE read as E₊ − E₋ of the respective model.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::brent::BrentOpt;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, OMatrix, Vector2, U2};
use thiserror::Error;

pub const MIN_FIT_POINTS: usize = 10;
const CONSTANT_CURVE_TOL: f64 = 1e-12;
const TRANSMISSION_TOL: f64 = 1e-9;

/// Initial (amplitude, offset) guesses for `fit_mbs`, in units of half the
/// curve maximum.
pub const MBS_STARTS: [(f64, f64); 5] = [
    (1.0, 0.05),
    (1.0, 0.5),
    (0.5, 0.5),
    (0.1, 1.0),
    (2.0, 0.01),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("curve has {0} points; at least {MIN_FIT_POINTS} are required")]
    TooFewPoints(usize),
    #[error("curve spans [{min}, {max}] and does not cover [0, 2π]")]
    DoesNotSpan { min: f64, max: f64 },
    #[error("curve contains non-finite values")]
    NonFinite,
    #[error("uninformative curve: ΔE is constant within {CONSTANT_CURVE_TOL:e}")]
    Uninformative,
    #[error("delta0 must be positive (got {0})")]
    NonPositiveGap(f64),
    #[error("minimizer failed: {0}")]
    Minimizer(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsFit {
    pub transmission: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbsFit {
    pub amplitude: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

fn check_curve(curve: &[(f64, f64)]) -> Result<(), FitError> {
    if curve.len() < MIN_FIT_POINTS {
        return Err(FitError::TooFewPoints(curve.len()));
    }
    if curve.iter().any(|(p, e)| !p.is_finite() || !e.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let (min, max) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (p, _)| (lo.min(*p), hi.max(*p)));
    if max - min < 2.0 * PI * (1.0 - 1e-9) {
        return Err(FitError::DoesNotSpan { min, max });
    }
    let (lo, hi) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, e)| (lo.min(*e), hi.max(*e)));
    if hi - lo <= CONSTANT_CURVE_TOL {
        return Err(FitError::Uninformative);
    }
    Ok(())
}

struct AbsCurve<'a> {
    sin2: Vec<f64>,
    values: &'a [(f64, f64)],
    delta0: f64,
}

impl AbsCurve<'_> {
    fn model(&self, t: f64, s2: f64) -> f64 {
        2.0 * self.delta0 * (1.0 - t * s2).max(0.0).sqrt()
    }

    fn ssr(&self, t: f64) -> f64 {
        self.sin2
            .iter()
            .zip(self.values)
            .map(|(&s2, &(_, y))| (self.model(t, s2) - y).powi(2))
            .sum()
    }

    /// One Gauss–Newton step; `None` where the model derivative diverges.
    fn gauss_newton_step(&self, t: f64) -> Option<f64> {
        let (mut jtj, mut jtr) = (0.0, 0.0);
        for (&s2, &(_, y)) in self.sin2.iter().zip(self.values) {
            let root = (1.0 - t * s2).sqrt();
            if root < 1e-9 {
                return None;
            }
            let r = 2.0 * self.delta0 * root - y;
            let j = -self.delta0 * s2 / root;
            jtj += j * j;
            jtr += j * r;
        }
        (jtj > 0.0).then(|| t - jtr / jtj)
    }
}

impl CostFunction for AbsCurve<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, t: &f64) -> Result<f64, ArgminError> {
        Ok(self.ssr(*t))
    }
}

/// Transmission of the Andreev model `ΔE = 2Δ0 √(1 − T sin²(φ/2))` that
/// best matches `curve`, with T restricted to [0, 1].
pub fn fit_abs(curve: &[(f64, f64)], delta0: f64) -> Result<AbsFit, FitError> {
    check_curve(curve)?;
    if !(delta0 > 0.0) {
        return Err(FitError::NonPositiveGap(delta0));
    }
    let problem = AbsCurve {
        sin2: curve.iter().map(|(p, _)| (p / 2.0).sin().powi(2)).collect(),
        values: curve,
        delta0,
    };
    let n = curve.len() as f64;

    let solver = BrentOpt::new(0.0, 1.0).set_tolerance(f64::EPSILON.sqrt(), TRANSMISSION_TOL / 10.0);
    let res = Executor::new(
        AbsCurve {
            sin2: problem.sin2.clone(),
            values: curve,
            delta0,
        },
        solver,
    )
    .configure(|s| s.max_iters(500))
    .run()
    .map_err(|e| FitError::Minimizer(e.to_string()))?;
    let mut t = *res
        .state()
        .get_best_param()
        .ok_or_else(|| FitError::Minimizer("no parameter returned".into()))?;

    // Brent locates the minimum of the SSR only to ~√ε; finish on the residuals
    let mut best = problem.ssr(t);
    for _ in 0..20 {
        let Some(next) = problem.gauss_newton_step(t) else { break };
        let next = next.clamp(0.0, 1.0);
        let s = problem.ssr(next);
        if s >= best {
            break;
        }
        let moved = (next - t).abs();
        t = next;
        best = s;
        if moved < 1e-15 {
            break;
        }
    }
    for edge in [0.0, 1.0] {
        let s = problem.ssr(edge);
        if s < best {
            t = edge;
            best = s;
        }
    }
    Ok(AbsFit {
        transmission: t,
        rms_residual: (best / n).sqrt(),
    })
}

struct MbsProblem<'a> {
    cos2: Vec<f64>,
    values: &'a [(f64, f64)],
    params: Vector2<f64>,
}

impl MbsProblem<'_> {
    fn ssr(&self, amp: f64, offset: f64) -> f64 {
        self.cos2
            .iter()
            .zip(self.values)
            .map(|(&c2, &(_, y))| (2.0 * (amp * amp * c2 + offset * offset).sqrt() - y).powi(2))
            .sum()
    }
}

impl LeastSquaresProblem<f64, Dyn, U2> for MbsProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U2>;
    type ParameterStorage = Owned<f64, U2>;

    fn set_params(&mut self, x: &Vector2<f64>) {
        self.params = *x;
    }

    fn params(&self) -> Vector2<f64> {
        self.params
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let (a, o) = (self.params[0], self.params[1]);
        Some(DVector::from_iterator(
            self.values.len(),
            self.cos2
                .iter()
                .zip(self.values)
                .map(|(&c2, &(_, y))| 2.0 * (a * a * c2 + o * o).sqrt() - y),
        ))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U2>> {
        let (a, o) = (self.params[0], self.params[1]);
        let mut j = OMatrix::<f64, Dyn, U2>::zeros(self.values.len());
        for (i, &c2) in self.cos2.iter().enumerate() {
            let root = (a * a * c2 + o * o).sqrt().max(1e-300);
            j[(i, 0)] = 2.0 * a * c2 / root;
            j[(i, 1)] = 2.0 * o / root;
        }
        Some(j)
    }
}

/// Amplitude Δ_eff√T and offset g₁₂ + g₃₄ of the Majorana model
/// `ΔE = 2√(amplitude² cos²(φ/2) + offset²)` that best match `curve`.
/// Both are returned non-negative.
pub fn fit_mbs(curve: &[(f64, f64)]) -> Result<MbsFit, FitError> {
    check_curve(curve)?;
    let cos2: Vec<f64> = curve.iter().map(|(p, _)| (p / 2.0).cos().powi(2)).collect();
    let scale = 0.5 * curve.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    let lm = LevenbergMarquardt::new();

    let mut best: Option<(f64, f64, f64)> = None;
    for (fa, fo) in MBS_STARTS {
        let problem = MbsProblem {
            cos2: cos2.clone(),
            values: curve,
            params: Vector2::new(fa * scale, fo * scale),
        };
        let (solved, _report) = lm.minimize(problem);
        let (a, o) = (solved.params[0].abs(), solved.params[1].abs());
        if !(a.is_finite() && o.is_finite()) {
            continue;
        }
        let s = solved.ssr(a, o);
        if best.is_none_or(|(_, _, b)| s < b) {
            best = Some((a, o, s));
        }
    }
    let (amplitude, offset, ssr) =
        best.ok_or_else(|| FitError::Minimizer("no start converged to finite parameters".into()))?;
    Ok(MbsFit {
        amplitude,
        offset,
        rms_residual: (ssr / curve.len() as f64).sqrt(),
    })
}
