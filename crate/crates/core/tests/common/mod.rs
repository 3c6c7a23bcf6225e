//! Dense reference constructions shared by the integration tests. They build
//! operators explicitly and exponentiate them, independent of the closed
//! forms used in the library.
#![allow(dead_code)]

use eit_memory::fock::CMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn annihilation(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    a
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `exp[(r/2)(a² − a†²)]|0⟩` at cutoff `2 dim`, first `dim` amplitudes renormalized.
pub fn squeezed_amplitudes(r: f64, dim: usize) -> Vec<Complex64> {
    let big = 2 * dim;
    let a = annihilation(big);
    let ad = a.adjoint();
    let gen = (&a * &a - &ad * &ad) * c(0.5 * r);
    let u = gen.exp();
    let col: Vec<Complex64> = (0..dim).map(|n| u[(n, 0)]).collect();
    let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    col.into_iter().map(|z| z / norm).collect()
}

/// Beam splitter of transmission amplitude `cos θ = |t|` between the mode
/// acting as `a` and an environment mode `e` (both as full-space operators).
fn beam_splitter(a: &CMatrix, e: &CMatrix, t: f64) -> CMatrix {
    let theta = t.clamp(0.0, 1.0).acos();
    let gen = (a.adjoint() * e - a * e.adjoint()) * c(theta);
    gen.exp()
}

/// Trace out the last factor of a `d_keep ⊗ d_env` matrix.
pub fn trace_last(m: &CMatrix, d_keep: usize, d_env: usize) -> CMatrix {
    CMatrix::from_fn(d_keep, d_keep, |i, j| {
        (0..d_env).map(|k| m[(i * d_env + k, j * d_env + k)]).sum()
    })
}

/// Phase `e^{iφ n}` on a mode.
fn phase(d: usize, t: Complex64) -> CMatrix {
    let u = if t.norm() > 0.0 { t / t.norm() } else { c(1.0) };
    DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| u.powu(n as u32)))
}

/// `U|n,0⟩` for the beam splitter of transmission `cos θ`, as amplitudes on
/// `|k, n−k⟩`, by exponentiating the generator inside the `n`-photon block.
fn split_photons(n: usize, theta: f64) -> Vec<Complex64> {
    // basis |k, n−k⟩, k = 0..=n; G = θ(a†e − a e†)
    let mut g = CMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        // a†e |k, n−k⟩ = sqrt((k+1)(n−k)) |k+1, n−k−1⟩
        let w = (((k + 1) * (n - k)) as f64).sqrt() * theta;
        g[(k + 1, k)] = c(w);
        g[(k, k + 1)] = c(-w);
    }
    let u = g.exp();
    (0..=n).map(|k| u[(k, n)]).collect()
}

/// Single-mode loss with transmission amplitude `t`, via an explicit beam
/// splitter onto a vacuum environment followed by the trace over it.
pub fn dense_loss(rho: &CMatrix, t: Complex64) -> CMatrix {
    let d = rho.nrows();
    let theta = t.norm().clamp(0.0, 1.0).acos();
    let cols: Vec<Vec<Complex64>> = (0..d).map(|n| split_photons(n, theta)).collect();
    let mut out = CMatrix::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            let r = rho[(n, m)];
            if r == c(0.0) {
                continue;
            }
            // environment holds n−k = m−k' photons
            for k in 0..=n {
                let j = n - k;
                if j > m {
                    continue;
                }
                let kk = m - j;
                out[(k, kk)] += r * cols[n][k] * cols[m][kk].conj();
            }
        }
    }
    let p = phase(d, t);
    &p * out * p.adjoint()
}

/// Independent loss on both factors of a `d ⊗ d` state, with one environment
/// mode each, traced out at the end.
pub fn dense_two_mode_loss(rho: &CMatrix, d: usize, t_a: Complex64, t_b: Complex64) -> CMatrix {
    let id = identity(d);
    let an = annihilation(d);
    // ordering A, B, E_A, E_B
    let op = |k: usize| {
        let mut m = CMatrix::identity(1, 1);
        for j in 0..4 {
            m = m.kronecker(if j == k { &an } else { &id });
        }
        m
    };
    let u = beam_splitter(&op(1), &op(3), t_b.norm()) * beam_splitter(&op(0), &op(2), t_a.norm());
    let mut env = CMatrix::zeros(d * d, d * d);
    env[(0, 0)] = c(1.0);
    let joint = &u * rho.kronecker(&env) * u.adjoint();
    let p = phase(d, t_a).kronecker(&phase(d, t_b));
    &p * trace_last(&joint, d * d, d * d) * p.adjoint()
}

/// Partial transpose on the second factor, then the sum of negative eigenvalues.
pub fn dense_negativity(rho: &CMatrix, d: usize) -> f64 {
    let pt = CMatrix::from_fn(d * d, d * d, |r, col| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (col / d, col % d);
        rho[(i * d + l, j * d + k)]
    });
    let eig = nalgebra::SymmetricEigen::new(pt);
    eig.eigenvalues.iter().filter(|&&x| x < 0.0).map(|x| -x).sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
}
