//! Tight-binding Bogoliubov–de Gennes matrix of the S–N–S nanowire.
//!
//! Basis: site-major, and within each site the Nambu⊗spin spinor
//! (ψ↑, ψ↓, ψ†↓, −ψ†↑). In this basis the continuum Hamiltonian
//!
//! ```text
//! H = (p²/2m* − μ − (α_R/ħ) σ_y p) τ_z + B σ_x + Re Δ τ_x − Im Δ τ_y
//! ```
//!
//! discretizes to an on-site block `(2t − μ) τ_z + B σ_x + Re Δ τ_x − Im Δ τ_y`
//! and a nearest-neighbour block `−t τ_z + i λ σ_y τ_z` with `λ = α_R / 2a`.
//! The chemical potential is measured from the band bottom. The two bonds
//! that cross a superconductor/normal interface carry `η` times the bulk
//! hopping block.
//!
//! The matrix is stored as its block-tridiagonal pieces; `to_dense` expands
//! it when a full matrix is needed.

use std::io::{self, Write};

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

use crate::model::{hopping_energy, GeometryError, JunctionGeometry, MaterialParams};

/// Largest lattice accepted by [`build_bdg`].
pub const MAX_SITES: usize = 1_000_000;

pub type Block = Matrix4<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("lattice of {0} sites exceeds the limit of {MAX_SITES}")]
    TooLarge(usize),
    #[error("profile has {profile} sites but the geometry implies {geometry}")]
    ProfileMismatch { profile: usize, geometry: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    LeftSc,
    Normal,
    RightSc,
}

/// Per-site region labels and pairing potential for one phase bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionProfile {
    pub regions: Vec<Region>,
    pub gaps: Vec<Complex64>,
}

impl RegionProfile {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Lays out LeftSc | Normal | RightSc with the symmetric gauge
/// φ_L = −φ/2, φ_R = +φ/2.
pub fn build_profile(
    geom: &JunctionGeometry,
    delta0: f64,
    phi: f64,
) -> Result<RegionProfile, LatticeError> {
    let n_sc = geom.sc_sites()?;
    let n_normal = geom.normal_sites()?;
    let total = 2 * n_sc + n_normal;
    if total > MAX_SITES {
        return Err(LatticeError::TooLarge(total));
    }
    let left = Complex64::from_polar(delta0, -phi / 2.0);
    let right = Complex64::from_polar(delta0, phi / 2.0);

    let mut regions = Vec::with_capacity(total);
    let mut gaps = Vec::with_capacity(total);
    for _ in 0..n_sc {
        regions.push(Region::LeftSc);
        gaps.push(left);
    }
    for _ in 0..n_normal {
        regions.push(Region::Normal);
        gaps.push(Complex64::new(0.0, 0.0));
    }
    for _ in 0..n_sc {
        regions.push(Region::RightSc);
        gaps.push(right);
    }
    Ok(RegionProfile { regions, gaps })
}

/// Block-tridiagonal Hermitian BdG matrix of dimension 4N.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgMatrix {
    onsite: Vec<Block>,
    /// `hopping[i]` is the block H[i, i+1]; H[i+1, i] is its adjoint.
    hopping: Vec<Block>,
}

impl BdgMatrix {
    /// Assembles a matrix from explicit blocks. `hopping` must have exactly
    /// one entry fewer than `onsite`.
    pub fn from_blocks(onsite: Vec<Block>, hopping: Vec<Block>) -> Self {
        assert!(!onsite.is_empty(), "BdG matrix needs at least one site");
        assert_eq!(hopping.len() + 1, onsite.len(), "hopping/on-site block count mismatch");
        Self { onsite, hopping }
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.onsite.len()
    }

    pub fn onsite(&self) -> &[Block] {
        &self.onsite
    }

    pub fn hopping(&self) -> &[Block] {
        &self.hopping
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, b) in self.onsite.iter().enumerate() {
            m.fixed_view_mut::<4, 4>(4 * i, 4 * i).copy_from(b);
        }
        for (i, b) in self.hopping.iter().enumerate() {
            m.fixed_view_mut::<4, 4>(4 * i, 4 * i + 4).copy_from(b);
            m.fixed_view_mut::<4, 4>(4 * i + 4, 4 * i).copy_from(&b.adjoint());
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.onsite
            .iter()
            .chain(self.hopping.iter())
            .flat_map(|b| b.iter())
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.n_sites();
        let mut bound = 0.0f64;
        for i in 0..n {
            for r in 0..4 {
                let mut s: f64 = (0..4).map(|c| self.onsite[i][(r, c)].norm()).sum();
                if i + 1 < n {
                    s += (0..4).map(|c| self.hopping[i][(r, c)].norm()).sum::<f64>();
                }
                if i > 0 {
                    s += (0..4).map(|c| self.hopping[i - 1][(c, r)].norm()).sum::<f64>();
                }
                bound = bound.max(s);
            }
        }
        bound
    }

    /// max |H − H†| over the stored on-site blocks (off-diagonal blocks are
    /// Hermitian-paired by construction).
    pub fn hermiticity_error(&self) -> f64 {
        self.onsite
            .iter()
            .map(|b| (b - b.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm())))
            .fold(0.0, f64::max)
    }

    /// max |P H P⁻¹ + H| for the particle-hole operator P = (τ_y ⊗ σ_y) K.
    pub fn particle_hole_error(&self) -> f64 {
        let u = ph_unitary();
        let err = |b: &Block| {
            let mapped = u * b.conjugate() * u.adjoint();
            (mapped + b).iter().fold(0.0f64, |a, z| a.max(z.norm()))
        };
        self.onsite
            .iter()
            .chain(self.hopping.iter())
            .map(err)
            .fold(0.0, f64::max)
    }

    /// Debug dump: one `row col re im` line per nonzero entry, zero-based,
    /// in row-major order.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.n_sites();
        for site in 0..n {
            for r in 0..4 {
                let row = 4 * site + r;
                let emit = |col: usize, z: Complex64, out: &mut W| -> io::Result<()> {
                    if z.re != 0.0 || z.im != 0.0 {
                        writeln!(out, "{row} {col} {:e} {:e}", z.re, z.im)?;
                    }
                    Ok(())
                };
                if site > 0 {
                    let b = self.hopping[site - 1];
                    for c in 0..4 {
                        emit(4 * (site - 1) + c, b[(c, r)].conj(), &mut out)?;
                    }
                }
                for c in 0..4 {
                    emit(4 * site + c, self.onsite[site][(r, c)], &mut out)?;
                }
                if site + 1 < n {
                    for c in 0..4 {
                        emit(4 * (site + 1) + c, self.hopping[site][(r, c)], &mut out)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// τ_a ⊗ σ_b in the (ψ↑, ψ↓, ψ†↓, −ψ†↑) ordering; τ acts on the
/// particle/hole halves and σ within each half.
fn pauli_product(tau: &[[Complex64; 2]; 2], sigma: &[[Complex64; 2]; 2]) -> Block {
    Block::from_fn(|r, col| tau[r / 2][col / 2] * sigma[r % 2][col % 2])
}

fn pauli(which: char) -> [[Complex64; 2]; 2] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match which {
        '0' => [[one, z], [z, one]],
        'x' => [[z, one], [one, z]],
        'y' => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        'z' => [[one, z], [z, -one]],
        _ => unreachable!("unknown Pauli label"),
    }
}

/// Unitary part of the particle-hole operator, τ_y ⊗ σ_y.
pub fn ph_unitary() -> Block {
    pauli_product(&pauli('y'), &pauli('y'))
}

/// On-site and bulk hopping blocks shared by every site.
struct Terms {
    tau_z: Block,
    sigma_x: Block,
    tau_x: Block,
    tau_y: Block,
    hop: Block,
    band_offset: f64,
}

impl Terms {
    fn new(params: &MaterialParams, geom: &JunctionGeometry) -> Self {
        let t = hopping_energy(params, geom);
        let lambda = params.rashba_alpha / (2.0 * geom.lattice_spacing);
        let tau_z = pauli_product(&pauli('z'), &pauli('0'));
        let sy_tz = pauli_product(&pauli('z'), &pauli('y'));
        Self {
            tau_z,
            sigma_x: pauli_product(&pauli('0'), &pauli('x')),
            tau_x: pauli_product(&pauli('x'), &pauli('0')),
            tau_y: pauli_product(&pauli('y'), &pauli('0')),
            hop: tau_z * c(-t, 0.0) + sy_tz * c(0.0, lambda),
            band_offset: 2.0 * t - params.mu,
        }
    }

    fn onsite(&self, zeeman_b: f64, gap: Complex64) -> Block {
        self.tau_z * c(self.band_offset, 0.0)
            + self.sigma_x * c(zeeman_b, 0.0)
            + self.tau_x * c(gap.re, 0.0)
            - self.tau_y * c(gap.im, 0.0)
    }
}

/// Discretized BdG matrix for `profile` with open ends. Interface bonds
/// (between sites of different regions) are scaled by `geom.eta`.
pub fn build_bdg(
    params: &MaterialParams,
    geom: &JunctionGeometry,
    profile: &RegionProfile,
) -> Result<BdgMatrix, LatticeError> {
    let expected = geom.total_sites()?;
    if profile.len() > MAX_SITES {
        return Err(LatticeError::TooLarge(profile.len()));
    }
    if profile.len() != expected {
        return Err(LatticeError::ProfileMismatch {
            profile: profile.len(),
            geometry: expected,
        });
    }
    Ok(assemble(params, geom, profile))
}

/// Builds the matrix for an arbitrary profile, bypassing the geometry
/// consistency check. Used for small hand-made lattices.
pub fn assemble(params: &MaterialParams, geom: &JunctionGeometry, profile: &RegionProfile) -> BdgMatrix {
    let terms = Terms::new(params, geom);
    let onsite = profile
        .gaps
        .iter()
        .map(|&gap| terms.onsite(params.zeeman_b, gap))
        .collect();
    let hopping = profile
        .regions
        .windows(2)
        .map(|w| {
            if w[0] == w[1] {
                terms.hop
            } else {
                terms.hop * c(geom.eta, 0.0)
            }
        })
        .collect();
    BdgMatrix::from_blocks(onsite, hopping)
}

/// Convenience: profile plus matrix for a single (φ, η, B) node.
pub fn junction_bdg(
    params: &MaterialParams,
    geom: &JunctionGeometry,
    phi: f64,
) -> Result<BdgMatrix, LatticeError> {
    let profile = build_profile(geom, params.delta0, phi)?;
    build_bdg(params, geom, &profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_site(mu_offset: f64, gap: Complex64, b: f64) -> BdgMatrix {
        let geom = JunctionGeometry::reference();
        let t = hopping_energy(&MaterialParams::insb_reference(), &geom);
        let params = MaterialParams {
            mu: 2.0 * t + mu_offset,
            zeeman_b: b,
            ..MaterialParams::insb_reference()
        };
        let profile = RegionProfile {
            regions: vec![Region::LeftSc],
            gaps: vec![gap],
        };
        assemble(&params, &geom, &profile)
    }

    #[test]
    fn reference_profile_layout() {
        let p = build_profile(&JunctionGeometry::reference(), 0.25, 0.7).unwrap();
        assert_eq!(p.len(), 401);
        assert_eq!(p.regions.iter().filter(|r| **r == Region::Normal).count(), 1);
        assert_eq!(p.regions[200], Region::Normal);
        assert!((p.gaps[0] - Complex64::from_polar(0.25, -0.35)).norm() < 1e-15);
        assert!((p.gaps[400] - Complex64::from_polar(0.25, 0.35)).norm() < 1e-15);
    }

    #[test]
    fn zero_phase_gaps_are_real() {
        let p = build_profile(&JunctionGeometry::reference(), 0.25, 0.0).unwrap();
        for (g, r) in p.gaps.iter().zip(&p.regions) {
            match r {
                Region::Normal => assert_eq!(*g, Complex64::new(0.0, 0.0)),
                _ => assert_eq!(*g, Complex64::new(0.25, 0.0)),
            }
        }
    }

    #[test]
    fn two_pi_phase_flips_gap_sign() {
        let p = build_profile(&JunctionGeometry::reference(), 0.25, 2.0 * PI).unwrap();
        assert!((p.gaps[0] + 0.25).norm() < 1e-15);
        assert!((p.gaps[400] + 0.25).norm() < 1e-15);
    }

    #[test]
    fn incommensurate_profile_names_length() {
        let g = JunctionGeometry {
            length_sc: 2005.0,
            ..JunctionGeometry::reference()
        };
        let err = build_profile(&g, 0.25, 0.0).unwrap_err();
        assert!(err.to_string().contains("superconducting length"));
    }

    #[test]
    fn oversized_lattice_is_refused() {
        let g = JunctionGeometry {
            length_sc: 1.0e7,
            ..JunctionGeometry::reference()
        };
        assert!(matches!(build_profile(&g, 0.25, 0.0), Err(LatticeError::TooLarge(_))));
    }

    #[test]
    fn band_bottom_site_is_zero() {
        let h = single_site(0.0, Complex64::new(0.0, 0.0), 0.0);
        assert!(h.max_abs() < 1e-12);
    }

    #[test]
    fn pure_pairing_site() {
        let h = single_site(0.0, Complex64::new(0.25, 0.0), 0.0);
        let d = h.to_dense();
        // τ_x pairing: each of the four components couples to exactly one partner
        for r in 0..4 {
            let row_norm: f64 = (0..4).map(|c| d[(r, c)].norm_sqr()).sum();
            assert!((row_norm - 0.0625).abs() < 1e-14);
        }
        assert!(h.particle_hole_error() < 1e-14);
    }

    #[test]
    fn reference_matrix_symmetries() {
        let params = MaterialParams::insb_reference().with_zeeman(0.4);
        let h = junction_bdg(&params, &JunctionGeometry::reference().with_eta(0.7), 1.3).unwrap();
        assert_eq!(h.dim(), 1604);
        let scale = h.max_abs();
        assert!(h.hermiticity_error() <= 1e-12 * scale);
        assert!(h.particle_hole_error() <= 1e-10 * scale);
        let d = h.to_dense();
        assert!((&d - d.adjoint()).iter().all(|z| z.norm() <= 1e-12 * scale));
    }

    #[test]
    fn interface_bonds_are_scaled() {
        let params = MaterialParams::insb_reference();
        let geom = JunctionGeometry::reference().with_eta(0.6);
        let h = junction_bdg(&params, &geom, 0.0).unwrap();
        let bulk = h.hopping()[0];
        assert_eq!(h.hopping()[199], bulk * c(0.6, 0.0));
        assert_eq!(h.hopping()[200], bulk * c(0.6, 0.0));
        assert_eq!(h.hopping()[201], bulk);
        assert_eq!(h.hopping()[198], bulk);
    }

    #[test]
    fn triplet_dump_matches_dense() {
        let params = MaterialParams::insb_reference().with_zeeman(0.3);
        let geom = JunctionGeometry {
            length_sc: 20.0,
            ..JunctionGeometry::reference()
        };
        let h = junction_bdg(&params, &geom, 0.9).unwrap();
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let dense = h.to_dense();
        let mut rebuilt = DMatrix::<Complex64>::zeros(h.dim(), h.dim());
        for line in String::from_utf8(buf).unwrap().lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            let (r, col): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            rebuilt[(r, col)] = Complex64::new(f[2].parse().unwrap(), f[3].parse().unwrap());
        }
        assert_eq!(rebuilt, dense);
    }
}
