//! Low-lying BdG spectra, the many-body pair-transition energy ΔE, and
//! (φ, η, B) sweeps.
//!
//! ΔE is the splitting between the two even-parity many-body states built
//! from the two lowest quasiparticle levels ε₁ ≤ ε₂. When the BdG vacuum is
//! even these are |00⟩ and |11⟩ and ΔE = ε₁ + ε₂. When a level has crossed
//! zero the vacuum is odd, the even pair is {|10⟩, |01⟩} and ΔE = ε₂ − ε₁.
//! [`GapConvention::LowestPair`] ignores parity and always reports ε₁ + ε₂.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{junction_bdg, BdgMatrix, LatticeError};
use crate::linalg::{bisect_eigenvalues, dense_eigenvalues, ground_state_parity_sign, SolverError};
use crate::model::{JunctionGeometry, MaterialParams, PhaseGrid};

pub const DEFAULT_LEVELS: usize = 4;
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("need at least 2 non-negative energies, got {0}")]
    TooFewEnergies(usize),
    #[error("quasiparticle energies must be non-negative (got {0})")]
    NegativeEnergy(f64),
    #[error("at phi = {phi}, eta = {eta}, B = {zeeman_b} meV: {source}")]
    AtNode {
        phi: f64,
        eta: f64,
        zeeman_b: f64,
        #[source]
        source: Box<SpectrumError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Inertia bisection on the block-tridiagonal matrix.
    #[default]
    Bisection,
    /// Full dense diagonalization.
    Dense,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Bisection => "bisection",
            SolverKind::Dense => "dense",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bisection" => Ok(Self::Bisection),
            "dense" => Ok(Self::Dense),
            other => Err(format!("unknown solver '{other}' (expected bisection or dense)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapConvention {
    /// ε₂ + P·ε₁ with P the ground-state parity.
    #[default]
    EvenParity,
    /// ε₁ + ε₂ regardless of parity.
    LowestPair,
}

impl fmt::Display for GapConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapConvention::EvenParity => "even_parity",
            GapConvention::LowestPair => "lowest_pair",
        })
    }
}

impl FromStr for GapConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even_parity" => Ok(Self::EvenParity),
            "lowest_pair" => Ok(Self::LowestPair),
            other => Err(format!(
                "unknown gap convention '{other}' (expected even_parity or lowest_pair)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Absolute eigenvalue tolerance in meV.
    pub tolerance: f64,
    /// Number of non-negative quasiparticle levels retained.
    pub levels: usize,
    pub convention: GapConvention,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            kind: SolverKind::default(),
            tolerance: DEFAULT_TOLERANCE,
            levels: DEFAULT_LEVELS,
            convention: GapConvention::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Eigenvalues with index range `range` of the ascending spectrum.
fn eigen_window(h: &BdgMatrix, lo: usize, hi: usize, opts: &SolverOptions) -> Result<Vec<f64>, SolverError> {
    if hi > h.dim() {
        return Err(SolverError::TooManyRequested {
            requested: hi - lo,
            dim: h.dim(),
        });
    }
    match opts.kind {
        SolverKind::Dense => Ok(dense_eigenvalues(h)?[lo..hi].to_vec()),
        SolverKind::Bisection => {
            let idx: Vec<usize> = (lo..hi).collect();
            bisect_eigenvalues(h, &idx, opts.tolerance)
        }
    }
}

/// The 2k eigenvalues nearest zero, ascending. For a particle-hole
/// symmetric matrix these are k negative/positive pairs.
pub fn lowest_spectrum(h: &BdgMatrix, k: usize, opts: &SolverOptions) -> Result<Vec<f64>, SpectrumError> {
    let half = h.dim() / 2;
    if k > half {
        return Err(SolverError::TooManyRequested {
            requested: 2 * k,
            dim: h.dim(),
        }
        .into());
    }
    Ok(eigen_window(h, half - k, half + k, opts)?)
}

/// The k smallest non-negative quasiparticle energies, ascending.
pub fn quasiparticle_energies(h: &BdgMatrix, k: usize, opts: &SolverOptions) -> Result<Vec<f64>, SpectrumError> {
    let half = h.dim() / 2;
    let mut e = eigen_window(h, half, half + k, opts)?;
    for v in &mut e {
        *v = v.abs();
    }
    e.sort_by(f64::total_cmp);
    Ok(e)
}

pub fn ground_state_parity(h: &BdgMatrix) -> Parity {
    if ground_state_parity_sign(h) >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

fn two_lowest(energies: &[f64]) -> Result<(f64, f64), SpectrumError> {
    if energies.len() < 2 {
        return Err(SpectrumError::TooFewEnergies(energies.len()));
    }
    if let Some(&neg) = energies.iter().find(|&&e| e < 0.0 || e.is_nan()) {
        return Err(SpectrumError::NegativeEnergy(neg));
    }
    let mut s = energies.to_vec();
    s.sort_by(f64::total_cmp);
    Ok((s[0], s[1]))
}

/// ε₁ + ε₂ of the two smallest non-negative energies.
pub fn many_body_gap(energies: &[f64]) -> Result<f64, SpectrumError> {
    let (e1, e2) = two_lowest(energies)?;
    Ok(e1 + e2)
}

/// Splitting of the even-parity pair: ε₁ + ε₂ for an even vacuum,
/// ε₂ − ε₁ for an odd one.
pub fn even_parity_gap(energies: &[f64], parity: Parity) -> Result<f64, SpectrumError> {
    let (e1, e2) = two_lowest(energies)?;
    Ok(e2 + parity.sign() * e1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub phi: f64,
    pub eta: f64,
    pub zeeman_b: f64,
    pub quasiparticle_energies: Vec<f64>,
    pub parity: Parity,
    pub delta_e: f64,
}

/// Spectrum of an already-built matrix.
pub fn analyze(
    h: &BdgMatrix,
    phi: f64,
    eta: f64,
    zeeman_b: f64,
    opts: &SolverOptions,
) -> Result<SpectrumPoint, SpectrumError> {
    let levels = opts.levels.max(2);
    let energies = quasiparticle_energies(h, levels, opts)?;
    let parity = ground_state_parity(h);
    let delta_e = match opts.convention {
        GapConvention::EvenParity => even_parity_gap(&energies, parity)?,
        GapConvention::LowestPair => many_body_gap(&energies)?,
    };
    Ok(SpectrumPoint {
        phi,
        eta,
        zeeman_b,
        quasiparticle_energies: energies,
        parity,
        delta_e,
    })
}

/// Builds and analyzes one grid node.
pub fn compute_point(
    params: &MaterialParams,
    geom: &JunctionGeometry,
    phi: f64,
    eta: f64,
    zeeman_b: f64,
    opts: &SolverOptions,
) -> Result<SpectrumPoint, SpectrumError> {
    let node = |e: SpectrumError| SpectrumError::AtNode {
        phi,
        eta,
        zeeman_b,
        source: Box::new(e),
    };
    let params = params.with_zeeman(zeeman_b);
    let geom = geom.with_eta(eta);
    let h = junction_bdg(&params, &geom, phi).map_err(|e| node(e.into()))?;
    analyze(&h, phi, eta, zeeman_b, opts).map_err(node)
}

/// Sweep axes. Zeeman values are energies in meV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub phases: PhaseGrid,
    pub etas: Vec<f64>,
    pub zeeman: Vec<f64>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.phases.len() * self.etas.len() * self.zeeman.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (b, eta, phi) indices of flat index `i`, phase fastest.
    pub fn unflatten(&self, i: usize) -> (usize, usize, usize) {
        let np = self.phases.len();
        let ne = self.etas.len();
        (i / (np * ne), (i / np) % ne, i % np)
    }

    pub fn flatten(&self, ib: usize, ie: usize, ip: usize) -> usize {
        (ib * self.etas.len() + ie) * self.phases.len() + ip
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub params: MaterialParams,
    pub geometry: JunctionGeometry,
    pub solver: SolverOptions,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    /// Row order: b slowest, then eta, then phi.
    pub points: Vec<SpectrumPoint>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn point(&self, ib: usize, ie: usize, ip: usize) -> &SpectrumPoint {
        &self.points[self.grid.flatten(ib, ie, ip)]
    }

    /// (φ, ΔE) pairs for one (B, η) line.
    pub fn curve(&self, ib: usize, ie: usize) -> Vec<(f64, f64)> {
        (0..self.grid.phases.len())
            .map(|ip| {
                let p = self.point(ib, ie, ip);
                (p.phi, p.delta_e)
            })
            .collect()
    }
}

/// Computes every grid node. Nodes are independent and evaluated in
/// parallel on the current rayon pool; results are stored by grid index.
pub fn sweep(
    params: &MaterialParams,
    geom: &JunctionGeometry,
    grid: &SweepGrid,
    opts: &SolverOptions,
) -> Result<SweepResult, SpectrumError> {
    let points = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (ib, ie, ip) = grid.unflatten(i);
            compute_point(
                params,
                geom,
                grid.phases.values()[ip],
                grid.etas[ie],
                grid.zeeman[ib],
                opts,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        grid: grid.clone(),
        points,
        provenance: Provenance {
            params: *params,
            geometry: *geom,
            solver: *opts,
            version: env!("CARGO_PKG_VERSION"),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble, Block, Region, RegionProfile};
    use crate::model::hopping_energy;
    use nalgebra::Vector4;
    use num_complex::Complex64;

    fn diag_site(v: [f64; 4]) -> BdgMatrix {
        let d = Vector4::from_iterator(v.iter().map(|&x| Complex64::new(x, 0.0)));
        BdgMatrix::from_blocks(vec![Block::from_diagonal(&d)], vec![])
    }

    #[test]
    fn diagonal_matrix_window() {
        let h = diag_site([-3.0, -1.0, 1.0, 3.0]);
        for kind in [SolverKind::Bisection, SolverKind::Dense] {
            let opts = SolverOptions { kind, ..Default::default() };
            let s = lowest_spectrum(&h, 1, &opts).unwrap();
            assert!((s[0] + 1.0).abs() < 1e-11 && (s[1] - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn pure_pairing_site_spectrum() {
        let geom = JunctionGeometry::reference();
        let t = hopping_energy(&MaterialParams::insb_reference(), &geom);
        let params = MaterialParams {
            mu: 2.0 * t,
            ..MaterialParams::insb_reference()
        };
        let profile = RegionProfile {
            regions: vec![Region::LeftSc],
            gaps: vec![Complex64::new(0.25, 0.0)],
        };
        let h = assemble(&params, &geom, &profile);
        let s = lowest_spectrum(&h, 2, &SolverOptions::default()).unwrap();
        let expected = [-0.25, -0.25, 0.25, 0.25];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn too_many_levels_is_an_error() {
        let h = diag_site([-3.0, -1.0, 1.0, 3.0]);
        assert!(lowest_spectrum(&h, 3, &SolverOptions::default()).is_err());
    }

    #[test]
    fn gap_definitions() {
        assert!((many_body_gap(&[0.1, 0.2, 0.5]).unwrap() - 0.3).abs() < 1e-15);
        assert!((even_parity_gap(&[0.1, 0.2, 0.5], Parity::Odd).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(many_body_gap(&[0.1]), Err(SpectrumError::TooFewEnergies(1))));
        assert!(matches!(many_body_gap(&[0.1, -0.2]), Err(SpectrumError::NegativeEnergy(_))));
        // order of input is irrelevant
        assert_eq!(many_body_gap(&[0.5, 0.2, 0.1]).unwrap(), many_body_gap(&[0.1, 0.2, 0.5]).unwrap());
    }

    #[test]
    fn grid_index_roundtrip() {
        let grid = SweepGrid {
            phases: PhaseGrid::full_period(5).unwrap(),
            etas: vec![0.6, 0.8, 1.0],
            zeeman: vec![0.0, 0.1],
        };
        for i in 0..grid.len() {
            let (b, e, p) = grid.unflatten(i);
            assert_eq!(grid.flatten(b, e, p), i);
        }
        assert_eq!(grid.unflatten(5), (0, 1, 0));
    }

    #[test]
    fn node_errors_carry_coordinates() {
        let geom = JunctionGeometry {
            length_normal: 15.0,
            ..JunctionGeometry::reference()
        };
        let err = compute_point(&MaterialParams::insb_reference(), &geom, 1.0, 0.7, 0.2, &SolverOptions::default())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("phi = 1") && msg.contains("eta = 0.7") && msg.contains("B = 0.2"));
    }
}
