//! Closed-form low-energy models of the junction.
//!
//! Trivial phase, B = 0: a spin-degenerate Andreev level
//! `E± = ±Δ0 √(1 − T sin²(φ/2))`.
//!
//! Topological phase: four Majorana modes γ₁…γ₄ along the wire with
//! nearest-neighbour couplings `H = i g₁₂ γ₁γ₂ + i g₂₃ γ₂γ₃ + i g₃₄ γ₃γ₄`,
//! where only the junction coupling `g₂₃ = Δ_eff √T cos(φ/2)` depends on the
//! phase. Pairing the modes as `a = (γ₂ + iγ₃)/2`, `b = (γ₁ + iγ₄)/2` and
//! restricting to the even sector {|00⟩, |11⟩} gives
//! `E_m± = ±√(g₂₃² + (g₁₂ + g₃₄)²)`.

mod fit;

pub use fit::{fit_abs, fit_mbs, AbsFit, FitError, MbsFit, MBS_STARTS};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveModelParams {
    pub transmission_t: f64,
    pub delta_eff: f64,
    pub g12: f64,
    pub g34: f64,
}

impl EffectiveModelParams {
    /// Reference Majorana coupling g₁₂ = g₃₄ = Δ_eff/20.
    pub fn reference(transmission_t: f64, delta_eff: f64) -> Self {
        Self {
            transmission_t,
            delta_eff,
            g12: delta_eff / 20.0,
            g34: delta_eff / 20.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.transmission_t) && self.delta_eff >= 0.0
    }

    /// Phase-dependent coupling of the two junction Majoranas.
    pub fn g23(&self, phi: f64) -> f64 {
        self.delta_eff * self.transmission_t.sqrt() * (phi / 2.0).cos()
    }
}

/// Andreev level pair (E₋, E₊) of a short junction with transmission `t`.
pub fn abs_energy(t: f64, phi: f64, delta0: f64) -> (f64, f64) {
    let s = (phi / 2.0).sin();
    let e = delta0 * (1.0 - t * s * s).max(0.0).sqrt();
    (-e, e)
}

/// Even-parity many-body energies (E_m₋, E_m₊) of the four-Majorana model.
pub fn mbs_energy(params: &EffectiveModelParams, phi: f64) -> (f64, f64) {
    let e = params.g23(phi).hypot(params.g12 + params.g34);
    (-e, e)
}

/// Even-sector Hamiltonian in the basis {|00⟩, |11⟩} of the (a, b) modes.
pub fn even_sector_hamiltonian(params: &EffectiveModelParams, phi: f64) -> Matrix2<Complex64> {
    let g23 = params.g23(phi);
    let off = Complex64::new(0.0, params.g12 + params.g34);
    Matrix2::new(Complex64::new(-g23, 0.0), off, off.conj(), Complex64::new(g23, 0.0))
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn hermitian2_eigenvalues(m: &Matrix2<Complex64>) -> (f64, f64) {
    let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let half_diff = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let r = half_diff.hypot(m[(0, 1)].norm());
    (mean - r, mean + r)
}

/// Real antisymmetric coupling matrix A of the Majorana chain:
/// `H = (i/2) Σ A_jk γ_j γ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajoranaCoupling {
    matrix: Matrix4<f64>,
}

impl MajoranaCoupling {
    pub fn from_couplings(g12: f64, g23: f64, g34: f64) -> Self {
        let mut m = Matrix4::zeros();
        for (i, g) in [(0usize, g12), (1, g23), (2, g34)] {
            m[(i, i + 1)] = g;
            m[(i + 1, i)] = -g;
        }
        Self { matrix: m }
    }

    pub fn new(params: &EffectiveModelParams, phi: f64) -> Self {
        Self::from_couplings(params.g12, params.g23(phi), params.g34)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    /// Quasiparticle energies ε₁ ≤ ε₂: the singular values of 2A, each of
    /// which appears twice in the spectrum of i·2A.
    pub fn quasiparticle_energies(&self) -> [f64; 2] {
        let two_a = self.matrix * 2.0;
        let gram = two_a.transpose() * two_a;
        let mut ev: Vec<f64> = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        ev.sort_by(f64::total_cmp);
        // eigenvalues come in equal pairs; average each pair
        [0.5 * (ev[0] + ev[1]), 0.5 * (ev[2] + ev[3])]
    }

    /// Pfaffian of A; its sign is the parity of the quasiparticle vacuum.
    pub fn pfaffian(&self) -> f64 {
        let a = &self.matrix;
        a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)]
    }
}
