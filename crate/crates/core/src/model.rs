//! Physical constants, parameter records and the phase grid.
//!
//! Units are fixed crate-wide: energies in meV, lengths in nm, phases in
//! radians. The Zeeman energy `B` is taken directly as an energy; converting
//! from a laboratory field (g-factor, Bohr magneton) is left to the caller.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Fixed physical constants.
pub struct PhysicalConstants;

impl PhysicalConstants {
    /// ħ²/2mₑ in meV·nm².
    pub const HBAR2_OVER_2ME: f64 = 38.0998;
}

/// Continuum-limit bound: the hopping energy must exceed this multiple of
/// the largest on-site energy scale.
pub const CONTINUUM_FACTOR: f64 = 20.0;

/// Relative slack used when checking that lengths are integer multiples of
/// the lattice spacing.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Material parameters of the proximitized nanowire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// m*/mₑ
    pub effective_mass_ratio: f64,
    /// Rashba coupling α_R in meV·nm.
    pub rashba_alpha: f64,
    /// Chemical potential, measured from the band bottom (meV).
    pub mu: f64,
    /// Induced gap magnitude Δ0 (meV).
    pub delta0: f64,
    /// Zeeman energy B (meV).
    pub zeeman_b: f64,
}

impl MaterialParams {
    /// InSb wire used throughout the reference figures: m* = 0.015 mₑ,
    /// α_R = 20 meV·nm, μ = 0.5 meV, Δ0 = 0.25 meV, B = 0.
    pub fn insb_reference() -> Self {
        Self {
            effective_mass_ratio: 0.015,
            rashba_alpha: 20.0,
            mu: 0.5,
            delta0: 0.25,
            zeeman_b: 0.0,
        }
    }

    pub fn with_zeeman(self, zeeman_b: f64) -> Self {
        Self { zeeman_b, ..self }
    }

    pub fn critical_field(&self) -> f64 {
        critical_field(self.delta0, self.mu)
    }

    pub fn is_topological(&self) -> bool {
        self.zeeman_b > self.critical_field()
    }
}

/// Three-part S–N–S geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionGeometry {
    /// Length L of each superconducting section (nm).
    pub length_sc: f64,
    /// Length l of the normal section (nm).
    pub length_normal: f64,
    /// Lattice spacing a (nm).
    pub lattice_spacing: f64,
    /// Interpart hopping ratio η: the two bonds crossing an S/N interface
    /// carry η times the bulk hopping.
    pub eta: f64,
}

impl JunctionGeometry {
    /// L = 2 µm, l = 10 nm, a = 10 nm, η = 1.
    pub fn reference() -> Self {
        Self {
            length_sc: 2000.0,
            length_normal: 10.0,
            lattice_spacing: 10.0,
            eta: 1.0,
        }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn with_spacing(self, lattice_spacing: f64) -> Self {
        Self {
            lattice_spacing,
            ..self
        }
    }

    /// Number of sites in each superconducting section.
    pub fn sc_sites(&self) -> Result<usize, GeometryError> {
        sites_for(self.length_sc, self.lattice_spacing, Section::Superconducting)
    }

    /// Number of sites in the normal section.
    pub fn normal_sites(&self) -> Result<usize, GeometryError> {
        sites_for(self.length_normal, self.lattice_spacing, Section::Normal)
    }

    pub fn total_sites(&self) -> Result<usize, GeometryError> {
        Ok(2 * self.sc_sites()? + self.normal_sites()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Superconducting,
    Normal,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Section::Superconducting => f.write_str("superconducting length"),
            Section::Normal => f.write_str("normal length"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("lattice_spacing must be positive (got {0})")]
    NonPositiveSpacing(f64),
    #[error("{section} must be positive (got {length} nm)")]
    NonPositiveLength { section: Section, length: f64 },
    #[error("{section} not commensurate: {length} nm is not a multiple of a = {spacing} nm")]
    NotCommensurate {
        section: Section,
        length: f64,
        spacing: f64,
    },
}

fn sites_for(length: f64, spacing: f64, section: Section) -> Result<usize, GeometryError> {
    if !(spacing > 0.0) {
        return Err(GeometryError::NonPositiveSpacing(spacing));
    }
    if !(length > 0.0) {
        return Err(GeometryError::NonPositiveLength { section, length });
    }
    let ratio = length / spacing;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > COMMENSURATE_TOL * ratio.max(1.0) {
        return Err(GeometryError::NotCommensurate {
            section,
            length,
            spacing,
        });
    }
    Ok(n as usize)
}

/// Zeeman energy in units of `bc`, rounded to 12 significant digits so
/// that fields given as multiples of B_c read back as entered.
pub fn field_ratio(zeeman_b: f64, bc: f64) -> f64 {
    let r = zeeman_b / bc;
    if r.is_finite() {
        format!("{r:.11e}").parse().unwrap_or(r)
    } else {
        r
    }
}

/// Critical Zeeman energy B_c = √(Δ0² + μ²) of the topological transition.
pub fn critical_field(delta0: f64, mu: f64) -> f64 {
    delta0.hypot(mu)
}

/// Nearest-neighbour hopping t = ħ²/(2 m* a²) of the discretized kinetic term.
pub fn hopping_energy(params: &MaterialParams, geom: &JunctionGeometry) -> f64 {
    PhysicalConstants::HBAR2_OVER_2ME
        / (params.effective_mass_ratio * geom.lattice_spacing * geom.lattice_spacing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One violated condition found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    NonPositiveMass(f64),
    NegativeGap(f64),
    NegativeZeeman(f64),
    Geometry(GeometryError),
    EtaOutOfRange(f64),
    LongNormalSection { length_normal: f64, length_sc: f64 },
    CoarseLattice { hopping: f64, bound: f64 },
}

impl Diagnostic {
    pub fn severity(&self) -> Severity {
        match self {
            Diagnostic::LongNormalSection { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NonPositiveMass(m) => {
                write!(f, "effective_mass_ratio must be positive (got {m})")
            }
            Diagnostic::NegativeGap(d) => write!(f, "delta0 must be non-negative (got {d})"),
            Diagnostic::NegativeZeeman(b) => {
                write!(f, "zeeman_b must be non-negative (got {b})")
            }
            Diagnostic::Geometry(e) => write!(f, "{e}"),
            Diagnostic::EtaOutOfRange(eta) => write!(f, "eta must lie in (0, 1] (got {eta})"),
            Diagnostic::LongNormalSection {
                length_normal,
                length_sc,
            } => write!(
                f,
                "normal length {length_normal} nm exceeds L/10 = {} nm; short-junction regime not guaranteed",
                length_sc / 10.0
            ),
            Diagnostic::CoarseLattice { hopping, bound } => write!(
                f,
                "lattice too coarse: hopping t = {hopping:.4} meV is below {CONTINUUM_FACTOR}·max(Δ0, |μ|, B) = {bound:.4} meV"
            ),
        }
    }
}

/// Checks every parameter invariant plus the continuum-limit bound on t.
/// An empty result means the inputs are fit for lattice construction.
pub fn validate(params: &MaterialParams, geom: &JunctionGeometry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !(params.effective_mass_ratio > 0.0) {
        out.push(Diagnostic::NonPositiveMass(params.effective_mass_ratio));
    }
    if !(params.delta0 >= 0.0) {
        out.push(Diagnostic::NegativeGap(params.delta0));
    }
    if !(params.zeeman_b >= 0.0) {
        out.push(Diagnostic::NegativeZeeman(params.zeeman_b));
    }
    if !(geom.eta > 0.0 && geom.eta <= 1.0) {
        out.push(Diagnostic::EtaOutOfRange(geom.eta));
    }

    let spacing_ok = geom.lattice_spacing > 0.0;
    if !spacing_ok {
        out.push(Diagnostic::Geometry(GeometryError::NonPositiveSpacing(
            geom.lattice_spacing,
        )));
    } else {
        for (length, section) in [
            (geom.length_sc, Section::Superconducting),
            (geom.length_normal, Section::Normal),
        ] {
            if let Err(e) = sites_for(length, geom.lattice_spacing, section) {
                out.push(Diagnostic::Geometry(e));
            }
        }
    }
    if geom.length_normal > geom.length_sc / 10.0 {
        out.push(Diagnostic::LongNormalSection {
            length_normal: geom.length_normal,
            length_sc: geom.length_sc,
        });
    }

    if spacing_ok && params.effective_mass_ratio > 0.0 {
        let t = hopping_energy(params, geom);
        let scale = params.delta0.abs().max(params.mu.abs()).max(params.zeeman_b.abs());
        let bound = CONTINUUM_FACTOR * scale;
        if t < bound {
            out.push(Diagnostic::CoarseLattice { hopping: t, bound });
        }
    }
    out
}

/// Strictly increasing sequence of phase differences φ = φ_R − φ_L.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseGridError {
    #[error("phase grid needs at least 2 points (got {0})")]
    TooFewPoints(usize),
    #[error("phase grid must be strictly increasing and finite")]
    NotIncreasing,
    #[error("phase grid [{start}, {stop}] does not cover [0, 2π]")]
    DoesNotCoverPeriod { start: f64, stop: f64 },
}

impl PhaseGrid {
    /// `count` uniformly spaced points from `start` to `stop` inclusive.
    pub fn uniform(start: f64, stop: f64, count: usize) -> Result<Self, PhaseGridError> {
        if count < 2 {
            return Err(PhaseGridError::TooFewPoints(count));
        }
        let step = (stop - start) / (count - 1) as f64;
        let values = (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + step * i as f64
                }
            })
            .collect();
        Self::from_values(values)
    }

    /// `count` points over one full period [0, 2π].
    pub fn full_period(count: usize) -> Result<Self, PhaseGridError> {
        Self::uniform(0.0, 2.0 * PI, count)
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self, PhaseGridError> {
        if values.len() < 2 {
            return Err(PhaseGridError::TooFewPoints(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PhaseGridError::NotIncreasing);
        }
        let (start, stop) = (values[0], values[values.len() - 1]);
        if start > 1e-12 || stop < 2.0 * PI - 1e-12 {
            return Err(PhaseGridError::DoesNotCoverPeriod { start, stop });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn stop(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_ratio_reads_back_multiples() {
        let bc = critical_field(0.25, 0.5);
        for r in [0.0, 0.6, 0.9, 1.2, 1.8, 2.5] {
            assert_eq!(field_ratio(r * bc, bc), r);
        }
    }

    #[test]
    fn critical_field_examples() {
        assert_eq!(critical_field(0.25, 0.0), 0.25);
        assert_eq!(critical_field(0.0, 0.0), 0.0);
        // √(0.0625 + 0.25) = √0.3125
        assert!((critical_field(0.25, 0.5) - 0.559_016_994_374_947_4).abs() < 1e-15);
    }

    #[test]
    fn hopping_energy_examples() {
        let p = MaterialParams::insb_reference();
        let g = JunctionGeometry::reference();
        // 38.0998 / (0.015 · 100)
        let t10 = hopping_energy(&p, &g);
        assert!((t10 - 25.399_866_666_666_67).abs() < 1e-9);
        let t5 = hopping_energy(&p, &g.with_spacing(5.0));
        assert!((t5 - 101.599_466_666_666_7).abs() < 1e-9);

        let unit = MaterialParams {
            effective_mass_ratio: 1.0,
            ..p
        };
        let a = hopping_energy(&unit, &g);
        let b = hopping_energy(&unit, &g.with_spacing(20.0));
        assert!((a / b - 4.0).abs() < 1e-14);
    }

    #[test]
    fn reference_set_validates_clean() {
        let p = MaterialParams::insb_reference();
        assert!(validate(&p, &JunctionGeometry::reference()).is_empty());
        // strongest field used by the topological sweeps
        let b = 1.8 * p.critical_field();
        assert!(validate(&p.with_zeeman(b), &JunctionGeometry::reference()).is_empty());
    }

    #[test]
    fn zero_spacing_is_reported() {
        let d = validate(
            &MaterialParams::insb_reference(),
            &JunctionGeometry::reference().with_spacing(0.0),
        );
        assert!(d
            .iter()
            .any(|d| d.to_string().contains("lattice_spacing must be positive")));
    }

    #[test]
    fn incommensurate_normal_length_is_reported() {
        let g = JunctionGeometry {
            length_normal: 15.0,
            ..JunctionGeometry::reference()
        };
        let d = validate(&MaterialParams::insb_reference(), &g);
        assert_eq!(d.len(), 1);
        assert!(d[0].to_string().contains("normal length not commensurate"));
    }

    #[test]
    fn eta_and_long_junction_diagnostics() {
        let p = MaterialParams::insb_reference();
        let d = validate(&p, &JunctionGeometry::reference().with_eta(1.5));
        assert!(d.iter().any(|d| matches!(d, Diagnostic::EtaOutOfRange(_))));

        let long = JunctionGeometry {
            length_normal: 400.0,
            ..JunctionGeometry::reference()
        };
        let d = validate(&p, &long);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity(), Severity::Warning);
    }

    #[test]
    fn coarse_lattice_is_reported() {
        let p = MaterialParams::insb_reference().with_zeeman(2.0);
        let d = validate(&p, &JunctionGeometry::reference());
        assert!(d.iter().any(|d| matches!(d, Diagnostic::CoarseLattice { .. })));
    }

    #[test]
    fn reference_geometry_site_count() {
        let g = JunctionGeometry::reference();
        assert_eq!(g.sc_sites().unwrap(), 200);
        assert_eq!(g.normal_sites().unwrap(), 1);
        assert_eq!(g.total_sites().unwrap(), 401);
    }

    #[test]
    fn phase_grid_rules() {
        let g = PhaseGrid::full_period(41).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g.values()[20], PI);
        assert_eq!(g.stop(), 2.0 * PI);
        assert!(PhaseGrid::uniform(0.0, PI, 10).is_err());
        assert!(PhaseGrid::from_values(vec![0.0, 1.0, 1.0, 7.0]).is_err());
        assert!(PhaseGrid::uniform(-1.0, 7.0, 9).is_ok());
    }

    proptest! {
        #[test]
        fn critical_field_is_monotone(d in 0.0f64..5.0, mu in -5.0f64..5.0, dd in 0.0f64..1.0, dm in 0.0f64..1.0) {
            prop_assert!(critical_field(d + dd, mu) >= critical_field(d, mu));
            let m = mu.abs();
            prop_assert!(critical_field(d, m + dm) >= critical_field(d, m));
            prop_assert!(critical_field(d, mu) >= d.max(mu.abs()));
        }

        #[test]
        fn hopping_times_area_is_constant(m in 0.001f64..2.0, a in 0.1f64..50.0, b in 0.1f64..50.0) {
            let p = MaterialParams { effective_mass_ratio: m, ..MaterialParams::insb_reference() };
            let g = JunctionGeometry::reference();
            let ta = hopping_energy(&p, &g.with_spacing(a)) * a * a;
            let tb = hopping_energy(&p, &g.with_spacing(b)) * b * b;
            prop_assert!(((ta - tb) / ta).abs() <= 1e-14);
        }

        #[test]
        fn validate_is_pure(mu in -2.0f64..2.0, b in 0.0f64..3.0, a in 0.0f64..20.0) {
            let p = MaterialParams { mu, zeeman_b: b, ..MaterialParams::insb_reference() };
            let g = JunctionGeometry::reference().with_spacing(a);
            prop_assert_eq!(validate(&p, &g), validate(&p, &g));
        }
    }
}
