//! Shape and transmission-sensitivity diagnostics of ΔE(φ) curves.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::effective::{fit_abs, FitError};
use crate::model::{field_ratio, JunctionGeometry, MaterialParams, PhaseGrid};
use crate::spectrum::{sweep, SolverOptions, SpectrumError, SweepGrid, SweepResult};

/// Half-width (rad) of the window around φ = π searched for extrema.
pub const WINDOW: f64 = 0.3;
pub const MIN_CURVE_POINTS: usize = 41;
/// Allowed mirror asymmetry, relative to max |ΔE|.
pub const SYMMETRY_TOL: f64 = 0.05;
pub const MIN_ETAS: usize = 3;

const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremumLabel {
    Dip,
    Peak,
    PeakInDip,
}

impl ExtremumLabel {
    pub fn is_abs_evidence(self) -> bool {
        !matches!(self, ExtremumLabel::Dip)
    }
}

impl fmt::Display for ExtremumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtremumLabel::Dip => "Dip",
            ExtremumLabel::Peak => "Peak",
            ExtremumLabel::PeakInDip => "PeakInDip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    Trivial,
    Topological,
}

impl PhaseLabel {
    pub fn from_ratio(b_over_bc: f64) -> Self {
        if b_over_bc > 1.0 {
            PhaseLabel::Topological
        } else {
            PhaseLabel::Trivial
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::Trivial => "Trivial",
            PhaseLabel::Topological => "Topological",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    AbsLike,
    MbsLike,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AbsLike => "ABS-like",
            Verdict::MbsLike => "MBS-like",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("curve too coarse: {points} points, at least {MIN_CURVE_POINTS} required")]
    TooCoarse { points: usize },
    #[error("curve phases are not uniformly spaced and increasing")]
    NotUniform,
    #[error("curve does not cover [0, 2π]")]
    NotFullPeriod,
    #[error("curve has no node at φ = π")]
    NoNodeAtPi,
    #[error("curve not mirror-symmetric about π: deviation {deviation:.3e} of max |ΔE|")]
    Asymmetric { deviation: f64 },
    #[error("curve contains non-finite values")]
    NonFinite,
    #[error("gapless at optimal spot")]
    Gapless,
    #[error("sensitivity needs at least {required} values, got {got}")]
    TooFewValues { required: usize, got: usize },
    #[error("eta values span [{min}, {max}] and do not cover [0.6, 1.0]")]
    EtaSpan { min: f64, max: f64 },
    #[error("B/Bc = {b_over_bc}, eta = {eta}: {source}")]
    Curve {
        b_over_bc: f64,
        eta: f64,
        #[source]
        source: Box<ClassifyError>,
    },
    #[error("B/Bc = {b_over_bc}: {source}")]
    AtField {
        b_over_bc: f64,
        #[source]
        source: Box<ClassifyError>,
    },
    #[error("transmission fit failed at eta = {eta}: {source}")]
    Fit {
        eta: f64,
        #[source]
        source: FitError,
    },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

impl ClassifyError {
    /// The innermost error, past node and field tags.
    pub fn root(&self) -> &ClassifyError {
        match self {
            ClassifyError::Curve { source, .. } | ClassifyError::AtField { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Index of the node at φ = π after checking the curve is a uniform,
/// full-period, finite sampling.
fn pi_index(curve: &[(f64, f64)]) -> Result<usize, ClassifyError> {
    let n = curve.len();
    if n < MIN_CURVE_POINTS {
        return Err(ClassifyError::TooCoarse { points: n });
    }
    if curve.iter().any(|(p, e)| !p.is_finite() || !e.is_finite()) {
        return Err(ClassifyError::NonFinite);
    }
    let h = (curve[n - 1].0 - curve[0].0) / (n - 1) as f64;
    if !(h > 0.0) || curve.windows(2).any(|w| ((w[1].0 - w[0].0) - h).abs() > GRID_TOL * h) {
        return Err(ClassifyError::NotUniform);
    }
    let slack = GRID_TOL * h;
    if curve[0].0 > slack || curve[n - 1].0 < 2.0 * PI - slack {
        return Err(ClassifyError::NotFullPeriod);
    }
    let i = ((PI - curve[0].0) / h).round() as usize;
    if i >= n || (curve[i].0 - PI).abs() > slack {
        return Err(ClassifyError::NoNodeAtPi);
    }
    Ok(i)
}

/// ΔE at the node φ = π of a valid curve.
pub fn delta_e_at_pi(curve: &[(f64, f64)]) -> Result<f64, ClassifyError> {
    Ok(curve[pi_index(curve)?].1)
}

/// Largest |ΔE(π + x) − ΔE(π − x)| over mirrored node pairs, relative to
/// max |ΔE|.
pub fn mirror_deviation(curve: &[(f64, f64)], i_pi: usize) -> f64 {
    let scale = curve.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let reach = i_pi.min(curve.len() - 1 - i_pi);
    (1..=reach)
        .map(|k| (curve[i_pi + k].1 - curve[i_pi - k].1).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Shape of ΔE(φ) at the optimal spot φ = π.
///
/// `Dip` when ΔE(π) is the minimum over the ±[`WINDOW`] window. When π is a
/// local maximum, `PeakInDip` if a lower local minimum of the curve lies in
/// the window, `Peak` otherwise.
pub fn classify_extremum(curve: &[(f64, f64)]) -> Result<ExtremumLabel, ClassifyError> {
    let ip = pi_index(curve)?;
    let deviation = mirror_deviation(curve, ip);
    if deviation > SYMMETRY_TOL {
        return Err(ClassifyError::Asymmetric { deviation });
    }
    let n = curve.len();
    let in_window: Vec<usize> = (0..n)
        .filter(|&j| (curve[j].0 - PI).abs() <= WINDOW + GRID_TOL)
        .collect();
    let e_pi = curve[ip].1;
    let window_min = in_window.iter().map(|&j| curve[j].1).fold(f64::INFINITY, f64::min);
    if e_pi <= window_min {
        return Ok(ExtremumLabel::Dip);
    }
    let local_max = e_pi >= curve[ip - 1].1 && e_pi >= curve[ip + 1].1;
    if !local_max {
        return Ok(ExtremumLabel::Dip);
    }
    let inner_min = in_window.iter().any(|&j| {
        j != ip
            && j > 0
            && j + 1 < n
            && curve[j].1 < e_pi
            && curve[j].1 <= curve[j - 1].1
            && curve[j].1 <= curve[j + 1].1
    });
    Ok(if inner_min {
        ExtremumLabel::PeakInDip
    } else {
        ExtremumLabel::Peak
    })
}

/// Relative spread (max − min)/mean of ΔE(π) values.
pub fn sensitivity(values: &[f64]) -> Result<f64, ClassifyError> {
    if values.len() < 2 {
        return Err(ClassifyError::TooFewValues {
            required: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFinite);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean > 0.0) {
        return Err(ClassifyError::Gapless);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok((hi - lo) / mean)
}

/// [`sensitivity`] of `(eta, ΔE(π))` pairs from at least three η values
/// covering [0.6, 1.0].
pub fn transmission_sensitivity(points: &[(f64, f64)]) -> Result<f64, ClassifyError> {
    if points.len() < MIN_ETAS {
        return Err(ClassifyError::TooFewValues {
            required: MIN_ETAS,
            got: points.len(),
        });
    }
    let (min, max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(eta, _)| (lo.min(eta), hi.max(eta)));
    if min > 0.6 + 1e-9 || max < 1.0 - 1e-9 {
        return Err(ClassifyError::EtaSpan { min, max });
    }
    let values: Vec<f64> = points.iter().map(|&(_, e)| e).collect();
    sensitivity(&values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub s_topo: f64,
    pub s_triv: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            s_topo: 0.10,
            s_triv: 0.50,
        }
    }
}

/// One ΔE(φ) curve tagged with its sweep coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCurve {
    pub b_over_bc: f64,
    pub eta: f64,
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub b_over_bc: f64,
    pub eta: f64,
    pub extremum_label: ExtremumLabel,
    pub phase_label: PhaseLabel,
    pub delta_e_at_pi: f64,
    /// Transmission sensitivity of the field value this node belongs to.
    pub sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub thresholds: Thresholds,
    pub nodes: Vec<Classification>,
    pub verdict: Verdict,
}

impl VerdictReport {
    pub fn sensitivities(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for c in &self.nodes {
            if out.last().is_none_or(|&(b, _)| b != c.b_over_bc) {
                out.push((c.b_over_bc, c.sensitivity));
            }
        }
        out
    }
}

/// Summary rule over classified nodes.
pub fn summarize(nodes: &[Classification], thresholds: &Thresholds) -> Verdict {
    let abs = nodes
        .iter()
        .any(|c| c.extremum_label.is_abs_evidence() || c.sensitivity >= thresholds.s_triv);
    if abs {
        return Verdict::AbsLike;
    }
    let mbs = nodes
        .iter()
        .all(|c| c.extremum_label == ExtremumLabel::Dip && c.sensitivity <= thresholds.s_topo);
    if mbs && !nodes.is_empty() {
        Verdict::MbsLike
    } else {
        Verdict::Inconclusive
    }
}

/// Classifies every curve and the collection as a whole. Curves sharing a
/// field value form one sensitivity group, which needs at least three η.
pub fn verdict_from_curves(curves: &[LabeledCurve], thresholds: &Thresholds) -> Result<VerdictReport, ClassifyError> {
    let mut fields: Vec<f64> = Vec::new();
    for c in curves {
        if !fields.contains(&c.b_over_bc) {
            fields.push(c.b_over_bc);
        }
    }
    if fields.is_empty() {
        return Err(ClassifyError::TooFewValues {
            required: MIN_ETAS,
            got: 0,
        });
    }
    let tag = |c: &LabeledCurve, e: ClassifyError| ClassifyError::Curve {
        b_over_bc: c.b_over_bc,
        eta: c.eta,
        source: Box::new(e),
    };
    let mut nodes = Vec::with_capacity(curves.len());
    for b in fields {
        let group: Vec<&LabeledCurve> = curves.iter().filter(|c| c.b_over_bc == b).collect();
        if group.len() < MIN_ETAS {
            return Err(ClassifyError::TooFewValues {
                required: MIN_ETAS,
                got: group.len(),
            });
        }
        let mut at_pi = Vec::with_capacity(group.len());
        let mut labels = Vec::with_capacity(group.len());
        for c in &group {
            at_pi.push(delta_e_at_pi(&c.curve).map_err(|e| tag(c, e))?);
            labels.push(classify_extremum(&c.curve).map_err(|e| tag(c, e))?);
        }
        let s = sensitivity(&at_pi).map_err(|e| ClassifyError::AtField {
            b_over_bc: b,
            source: Box::new(e),
        })?;
        for ((c, label), e_pi) in group.iter().zip(labels).zip(at_pi) {
            nodes.push(Classification {
                b_over_bc: b,
                eta: c.eta,
                extremum_label: label,
                phase_label: PhaseLabel::from_ratio(b),
                delta_e_at_pi: e_pi,
                sensitivity: s,
            });
        }
    }
    let verdict = summarize(&nodes, thresholds);
    Ok(VerdictReport {
        thresholds: *thresholds,
        nodes,
        verdict,
    })
}

/// Splits a sweep into labelled curves, field-major then η.
pub fn sweep_curves(result: &SweepResult) -> Vec<LabeledCurve> {
    let bc = result.provenance.params.critical_field();
    let mut out = Vec::new();
    for (ib, &b) in result.grid.zeeman.iter().enumerate() {
        for (ie, &eta) in result.grid.etas.iter().enumerate() {
            out.push(LabeledCurve {
                b_over_bc: field_ratio(b, bc),
                eta,
                curve: result.curve(ib, ie),
            });
        }
    }
    out
}

pub fn verdict(result: &SweepResult, thresholds: &Thresholds) -> Result<VerdictReport, ClassifyError> {
    verdict_from_curves(&sweep_curves(result), thresholds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationEntry {
    pub eta: f64,
    pub transmission: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub entries: Vec<CalibrationEntry>,
    pub warnings: Vec<String>,
}

/// Empirical η → T map from zero-field phase sweeps fitted to the Andreev
/// model. Non-monotone results are reported as warnings.
pub fn calibrate_transmission(
    params: &MaterialParams,
    geom: &JunctionGeometry,
    etas: &[f64],
    phases: &PhaseGrid,
    opts: &SolverOptions,
) -> Result<Calibration, ClassifyError> {
    let params = params.with_zeeman(0.0);
    let grid = SweepGrid {
        phases: phases.clone(),
        etas: etas.to_vec(),
        zeeman: vec![0.0],
    };
    let result = sweep(&params, geom, &grid, opts)?;
    let mut entries = Vec::with_capacity(etas.len());
    for (ie, &eta) in etas.iter().enumerate() {
        let fit = fit_abs(&result.curve(0, ie), params.delta0).map_err(|source| ClassifyError::Fit { eta, source })?;
        entries.push(CalibrationEntry {
            eta,
            transmission: fit.transmission,
            rms_residual: fit.rms_residual,
        });
    }
    let mut sorted = entries.clone();
    sorted.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let warnings = sorted
        .windows(2)
        .filter(|w| w[1].transmission < w[0].transmission)
        .map(|w| {
            format!(
                "transmission decreases from {} at eta = {} to {} at eta = {}",
                w[0].transmission, w[0].eta, w[1].transmission, w[1].eta
            )
        })
        .collect();
    Ok(Calibration { entries, warnings })
}
