//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

pub type CMat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(n: usize) -> CMat {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> CMat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn add_scaled(acc: &mut CMat, m: &CMat, s: Complex64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, y) in ra.iter_mut().zip(rm) {
            *x += s * y;
        }
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a complex Hermitian matrix through its real embedding
/// [[Re, −Im], [Im, Re]], whose spectrum repeats each eigenvalue twice.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.len();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            r[i][j] = h[i][j].re;
            r[i + n][j + n] = h[i][j].re;
            r[i][j + n] = -h[i][j].im;
            r[i + n][j] = h[i][j].im;
        }
    }
    jacobi_eigenvalues(r).into_iter().step_by(2).collect()
}

/// Annihilation operators of `modes` fermions in the Jordan–Wigner
/// representation on a 2^modes dimensional Fock space. Basis state `s`
/// has mode m occupied when bit m of `s` is set.
pub fn annihilators(modes: usize) -> Vec<CMat> {
    let dim = 1 << modes;
    (0..modes)
        .map(|m| {
            let mut op = zeros(dim);
            for s in 0..dim {
                if s & (1 << m) != 0 {
                    let target = s & !(1 << m);
                    let below = (s & ((1 << m) - 1)).count_ones();
                    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                    op[target][s] = c(sign, 0.0);
                }
            }
            op
        })
        .collect()
}

/// Restriction of a Fock-space operator to basis states of given parity.
pub fn parity_block(h: &CMat, even: bool) -> CMat {
    let states: Vec<usize> = (0..h.len())
        .filter(|s| (s.count_ones() % 2 == 0) == even)
        .collect();
    states
        .iter()
        .map(|&i| states.iter().map(|&j| h[i][j]).collect())
        .collect()
}

/// Pauli matrices, indexed 0, x, y, z.
pub fn pauli(which: char) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match which {
        '0' => vec![vec![one, z], vec![z, one]],
        'x' => vec![vec![z, one], vec![one, z]],
        'y' => vec![vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]],
        'z' => vec![vec![one, z], vec![z, -one]],
        _ => panic!("unknown Pauli label"),
    }
}
