//! Library results against brute-force references: Jacobi diagonalization,
//! explicit Kronecker-product assembly and Fock-space many-body spectra.

mod common;

use std::f64::consts::PI;

use common::*;
use mjspec::effective::{even_sector_hamiltonian, hermitian2_eigenvalues, mbs_energy, EffectiveModelParams, MajoranaCoupling};
use mjspec::lattice::{junction_bdg, BdgMatrix};
use mjspec::linalg::dense_eigenvalues;
use mjspec::model::{JunctionGeometry, MaterialParams};
use mjspec::spectrum::{analyze, lowest_spectrum, Parity, SolverKind, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// γ₁…γ₄ built from two Jordan–Wigner fermions.
fn majoranas() -> [CMat; 4] {
    let f = annihilators(2);
    let mk = |op: &CMat, odd: bool| {
        let mut m = zeros(4);
        let dag = adjoint(op);
        if odd {
            add_scaled(&mut m, op, c(0.0, -1.0));
            add_scaled(&mut m, &dag, c(0.0, 1.0));
        } else {
            add_scaled(&mut m, op, c(1.0, 0.0));
            add_scaled(&mut m, &dag, c(1.0, 0.0));
        }
        m
    };
    [mk(&f[0], false), mk(&f[0], true), mk(&f[1], false), mk(&f[1], true)]
}

/// Spectrum of `H = i(g₁₂γ₁γ₂ + g₂₃γ₂γ₃ + g₃₄γ₃γ₄)` split by the parity
/// P = −γ₁γ₂γ₃γ₄ of the pairing a = (γ₂ + iγ₃)/2, b = (γ₁ + iγ₄)/2.
fn four_majorana_sectors(g12: f64, g23: f64, g34: f64) -> (Vec<f64>, Vec<f64>) {
    let g = majoranas();
    let mut h = zeros(4);
    for (i, j, coupling) in [(0, 1, g12), (1, 2, g23), (2, 3, g34)] {
        add_scaled(&mut h, &matmul(&g[i], &g[j]), c(0.0, coupling));
    }
    let p = matmul(&matmul(&g[0], &g[1]), &matmul(&g[2], &g[3]));
    // shift one sector far away, then read off the other
    let sector = |sign: f64| {
        let mut shifted = h.clone();
        let mut proj = identity(4);
        add_scaled(&mut proj, &p, c(-sign, 0.0));
        add_scaled(&mut shifted, &proj, c(50.0, 0.0));
        hermitian_eigenvalues(&shifted)[..2].to_vec()
    };
    (sector(-1.0), sector(1.0))
}

#[test]
fn four_majorana_even_sector_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (g12, g23, g34): (f64, f64, f64) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let (even, odd) = four_majorana_sectors(g12, g23, g34);
        let e = g23.hypot(g12 + g34);
        assert!((even[0] + e).abs() < 1e-10 && (even[1] - e).abs() < 1e-10, "{even:?} vs ±{e}");
        let o = g23.hypot(g12 - g34);
        assert!((odd[0] + o).abs() < 1e-10 && (odd[1] - o).abs() < 1e-10);

        // the even-sector 2×2 block, with T and Δ_eff chosen to give g23 at φ = 0
        let params = EffectiveModelParams {
            transmission_t: 1.0,
            delta_eff: g23,
            g12,
            g34,
        };
        let (lo, hi) = hermitian2_eigenvalues(&even_sector_hamiltonian(&params, 0.0));
        assert!((lo - even[0]).abs() < 1e-12 && (hi - even[1]).abs() < 1e-12);

        // quasiparticle picture: even gap = ε₂ + sign(Pf A)·ε₁
        let m = MajoranaCoupling::from_couplings(g12, g23, g34);
        let [e1, e2] = m.quasiparticle_energies();
        let gap = e2 + m.pfaffian().signum() * e1;
        assert!((gap - (even[1] - even[0])).abs() < 1e-10 * gap.max(1.0));
        let ground = even[0].min(odd[0]);
        let vacuum_even = even[0] <= odd[0];
        assert_eq!(vacuum_even, m.pfaffian() >= 0.0, "ground {ground}");
    }
}

#[test]
fn mbs_curve_matches_fock_spectrum() {
    for t in [0.2, 0.6, 1.0] {
        let params = EffectiveModelParams::reference(t, 1.0);
        for i in 0..=16 {
            let phi = 2.0 * PI * i as f64 / 16.0;
            let (even, _) = four_majorana_sectors(params.g12, params.g23(phi), params.g34);
            let (lo, hi) = mbs_energy(&params, phi);
            assert!((lo - even[0]).abs() < 1e-12 && (hi - even[1]).abs() < 1e-12);
        }
    }
}

fn tiny_geometry(eta: f64) -> JunctionGeometry {
    JunctionGeometry {
        length_sc: 10.0,
        length_normal: 10.0,
        lattice_spacing: 10.0,
        eta,
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> (MaterialParams, f64, f64) {
    let p = MaterialParams {
        effective_mass_ratio: rng.random_range(0.01..2.0),
        rashba_alpha: rng.random_range(-40.0..40.0),
        mu: rng.random_range(-1.0..1.0),
        delta0: rng.random_range(0.05..1.0),
        zeeman_b: rng.random_range(0.0..1.5),
    };
    (p, rng.random_range(0.0..2.0 * PI), rng.random_range(0.05..1.0))
}

/// The three-site matrix written out term by term with Kronecker products.
fn hand_assembled(p: &MaterialParams, geom: &JunctionGeometry, phi: f64) -> CMat {
    let a = geom.lattice_spacing;
    let t = 38.0998 / (p.effective_mass_ratio * a * a);
    let lambda = p.rashba_alpha / (2.0 * a);
    let (tx, ty, tz, s0, sx, sy) = (pauli('x'), pauli('y'), pauli('z'), pauli('0'), pauli('x'), pauli('y'));
    let gaps = [
        c(0.0, -phi / 2.0).exp() * p.delta0,
        c(0.0, 0.0),
        c(0.0, phi / 2.0).exp() * p.delta0,
    ];
    let mut h = zeros(12);
    let mut put = |row: usize, col: usize, block: &CMat| {
        for r in 0..4 {
            for k in 0..4 {
                h[4 * row + r][4 * col + k] += block[r][k];
            }
        }
    };
    for (site, gap) in gaps.iter().enumerate() {
        let mut b = zeros(4);
        add_scaled(&mut b, &kron(&tz, &s0), c(2.0 * t - p.mu, 0.0));
        add_scaled(&mut b, &kron(&pauli('0'), &sx), c(p.zeeman_b, 0.0));
        add_scaled(&mut b, &kron(&tx, &s0), c(gap.re, 0.0));
        add_scaled(&mut b, &kron(&ty, &s0), c(-gap.im, 0.0));
        put(site, site, &b);
    }
    for site in 0..2 {
        let mut b = zeros(4);
        add_scaled(&mut b, &kron(&tz, &s0), c(-t * geom.eta, 0.0));
        add_scaled(&mut b, &kron(&tz, &sy), c(0.0, lambda * geom.eta));
        put(site, site + 1, &b);
        put(site + 1, site, &adjoint(&b));
    }
    h
}

#[test]
fn three_site_matrix_matches_hand_assembly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (p, phi, eta) = random_params(&mut rng);
        let geom = tiny_geometry(eta);
        let built = junction_bdg(&p, &geom, phi).unwrap().to_dense();
        let reference = hand_assembled(&p, &geom, phi);
        for i in 0..12 {
            for j in 0..12 {
                assert!(
                    (built[(i, j)] - reference[i][j]).norm() < 1e-12,
                    "entry ({i}, {j}): {} vs {}",
                    built[(i, j)],
                    reference[i][j]
                );
            }
        }
    }
}

fn to_cmat(h: &BdgMatrix) -> CMat {
    let d = h.to_dense();
    (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect()).collect()
}

#[test]
fn eigenvalues_match_jacobi_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..20 {
        let (p, phi, eta) = random_params(&mut rng);
        let geom = if round % 2 == 0 {
            tiny_geometry(eta)
        } else {
            JunctionGeometry {
                length_sc: 50.0,
                ..tiny_geometry(eta)
            }
        };
        let h = junction_bdg(&p, &geom, phi).unwrap();
        let reference = hermitian_eigenvalues(&to_cmat(&h));
        let dense = dense_eigenvalues(&h).unwrap();
        let k = h.dim() / 2;
        let opts = SolverOptions::default();
        let bisected = lowest_spectrum(&h, k, &opts).unwrap();
        let scale = h.max_abs();
        for i in 0..h.dim() {
            assert!((dense[i] - reference[i]).abs() < 1e-9 * scale.max(1.0));
            assert!((bisected[i] - reference[i]).abs() < 1e-9, "{} vs {}", bisected[i], reference[i]);
        }
        // particle-hole pairing
        for i in 0..k {
            assert!((reference[i] + reference[h.dim() - 1 - i]).abs() < 1e-9);
        }
    }
}

/// Many-body Hamiltonian ½ Σ Ψ†_a H_ab Ψ_b with Ψ = (c↑, c↓, c†↓, −c†↑)
/// per site, on the full Fock space.
fn fock_hamiltonian(h: &BdgMatrix) -> CMat {
    let sites = h.n_sites();
    let ops = annihilators(2 * sites);
    let dim = 1 << (2 * sites);
    let mut psi: Vec<CMat> = Vec::with_capacity(4 * sites);
    for j in 0..sites {
        let (up, down) = (&ops[2 * j], &ops[2 * j + 1]);
        let mut minus_up_dag = zeros(dim);
        add_scaled(&mut minus_up_dag, &adjoint(up), c(-1.0, 0.0));
        psi.extend([up.clone(), down.clone(), adjoint(down), minus_up_dag]);
    }
    let psi_dag: Vec<CMat> = psi.iter().map(adjoint).collect();
    let dense = h.to_dense();
    let mut out = zeros(dim);
    for a in 0..psi.len() {
        for b in 0..psi.len() {
            let w = dense[(a, b)];
            if w.norm() == 0.0 {
                continue;
            }
            add_scaled(&mut out, &matmul(&psi_dag[a], &psi[b]), w * 0.5);
        }
    }
    out
}

#[test]
fn parity_and_even_gap_match_fock_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = SolverOptions {
        kind: SolverKind::Dense,
        ..SolverOptions::default()
    };
    let mut seen = [false; 2];
    for _ in 0..40 {
        let (p, phi, eta) = random_params(&mut rng);
        let h = junction_bdg(&p, &tiny_geometry(eta), phi).unwrap();
        let fock = fock_hamiltonian(&h);
        let even = hermitian_eigenvalues(&parity_block(&fock, true));
        let odd = hermitian_eigenvalues(&parity_block(&fock, false));
        let point = analyze(&h, phi, eta, p.zeeman_b, &opts).unwrap();
        let expected = if even[0] <= odd[0] { Parity::Even } else { Parity::Odd };
        if (even[0] - odd[0]).abs() > 1e-9 {
            assert_eq!(point.parity, expected, "even {} odd {}", even[0], odd[0]);
            seen[(expected == Parity::Odd) as usize] = true;
        }
        let gap = even[1] - even[0];
        assert!((point.delta_e - gap).abs() < 1e-9, "{} vs {gap}", point.delta_e);
    }
    assert!(seen[0] && seen[1], "draws should visit both parities");
}
