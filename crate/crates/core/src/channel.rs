//! Pure-loss (beam-splitter) channels on Fock-basis density matrices.
//!
//! A pure-loss channel with complex transmission amplitude `t` maps
//! `|n⟩ → Σ_l sqrt(C(n,l)) t^(n-l) r^l |n-l⟩|l⟩_env`, `|r|² = 1 − |t|²`, and
//! traces out the environment. Capture, metastable decay and release are all
//! of this form, so they compose by multiplying amplitudes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{hermitize, CMatrix, FockStateMatrix};

const AMPLITUDE_TOL: f64 = 1e-12;

/// Where population removed by a loss channel ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossRouting {
    /// Beam-splitter trace-out: lost excitations leave the state in lower Fock levels.
    #[default]
    Recycle,
    /// Lost population leaves the truncated space (trace decreases).
    Sink,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn check_amplitude(t: Complex64) -> Result<()> {
    if !(t.norm() <= 1.0 + AMPLITUDE_TOL) {
        return Err(Error::InvalidParameter(format!(
            "loss amplitude |t| = {} exceeds 1",
            t.norm()
        )));
    }
    Ok(())
}

fn powers(t: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        out.push(p);
        p *= t;
    }
    out
}

/// Kraus-sum weights `w[l][i] = sqrt(C(i+l, l)) (1-|t|²)^(l/2)` for `i + l < dim`.
struct LossWeights {
    t_pow: Vec<Complex64>,
    tc_pow: Vec<Complex64>,
    weights: Vec<Vec<f64>>,
}

impl LossWeights {
    fn new(t: Complex64, dim: usize, routing: LossRouting) -> Self {
        let lf = ln_factorials(dim);
        let loss = (1.0 - t.norm_sqr()).max(0.0);
        let max_l = match routing {
            LossRouting::Recycle if loss > 0.0 => dim,
            _ => 1,
        };
        let weights = (0..max_l)
            .map(|l| {
                (0..dim - l)
                    .map(|i| {
                        if l == 0 {
                            1.0
                        } else {
                            let ln_binom = lf[i + l] - lf[l] - lf[i];
                            (0.5 * ln_binom + 0.5 * l as f64 * loss.ln()).exp()
                        }
                    })
                    .collect()
            })
            .collect();
        LossWeights {
            t_pow: powers(t, dim),
            tc_pow: powers(t.conj(), dim),
            weights,
        }
    }

    /// Output element (i, j) as a function of the input accessor.
    #[inline]
    fn element(&self, i: usize, j: usize, input: impl Fn(usize, usize) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, w) in self.weights.iter().enumerate() {
            if i >= w.len() || j >= w.len() {
                break;
            }
            acc += input(i + l, j + l) * (w[i] * w[j]);
        }
        acc * self.t_pow[i] * self.tc_pow[j]
    }
}

/// Apply the pure-loss channel to an arbitrary (not necessarily Hermitian) matrix.
pub fn pure_loss_matrix(m: &CMatrix, t: Complex64) -> Result<CMatrix> {
    pure_loss_matrix_routed(m, t, LossRouting::Recycle)
}

pub fn pure_loss_matrix_routed(m: &CMatrix, t: Complex64, routing: LossRouting) -> Result<CMatrix> {
    check_amplitude(t)?;
    let dim = m.nrows();
    let lw = LossWeights::new(t, dim, routing);
    Ok(CMatrix::from_fn(dim, dim, |i, j| lw.element(i, j, |a, b| m[(a, b)])))
}

/// Pure-loss channel on one factor of a `dims.0 x dims.1` bipartite matrix
/// (index `n * dims.1 + m`). `subsystem` is 0 for the first factor.
pub fn pure_loss_subsystem(
    m: &CMatrix,
    dims: (usize, usize),
    subsystem: usize,
    t: Complex64,
) -> Result<CMatrix> {
    check_amplitude(t)?;
    let (da, db) = dims;
    if m.nrows() != da * db || !m.is_square() {
        return Err(Error::DimMismatch {
            left: m.nrows(),
            right: da * db,
        });
    }
    let out = match subsystem {
        0 => {
            let lw = LossWeights::new(t, da, LossRouting::Recycle);
            CMatrix::from_fn(da * db, da * db, |r, c| {
                let (i, k) = (r / db, r % db);
                let (j, l) = (c / db, c % db);
                lw.element(i, j, |a, b| m[(a * db + k, b * db + l)])
            })
        }
        1 => {
            let lw = LossWeights::new(t, db, LossRouting::Recycle);
            CMatrix::from_fn(da * db, da * db, |r, c| {
                let (i, k) = (r / db, r % db);
                let (j, l) = (c / db, c % db);
                lw.element(k, l, |a, b| m[(i * db + a, j * db + b)])
            })
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "subsystem index {other} (expected 0 or 1)"
            )))
        }
    };
    Ok(out)
}

/// Pure-loss channel on a density matrix.
pub fn pure_loss(rho: &FockStateMatrix, t: Complex64, routing: LossRouting) -> Result<FockStateMatrix> {
    let mut out = pure_loss_matrix_routed(rho.matrix(), t, routing)?;
    hermitize(&mut out);
    Ok(FockStateMatrix::from_matrix_unchecked(out))
}

/// Post-selected map `α_n → t^n α_n`, renormalized to unit trace.
pub fn project_and_renormalize(rho: &FockStateMatrix, t: Complex64) -> Result<FockStateMatrix> {
    check_amplitude(t)?;
    let dim = rho.dim();
    let tp = powers(t, dim);
    let mut out = CMatrix::from_fn(dim, dim, |i, j| rho.get(i, j) * tp[i] * tp[j].conj());
    let tr = out.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidState(
            "projection leaves no population to renormalize".into(),
        ));
    }
    out /= Complex64::new(tr, 0.0);
    hermitize(&mut out);
    Ok(FockStateMatrix::from_matrix_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_photon_splits_into_vacuum() {
        let one = FockStateMatrix::fock(1, 3).unwrap();
        let eta: f64 = 0.3;
        let out = pure_loss(&one, c(eta.sqrt(), 0.0), LossRouting::Recycle).unwrap();
        assert!((out.get(1, 1).re - eta).abs() < 1e-15);
        assert!((out.get(0, 0).re - (1.0 - eta)).abs() < 1e-15);
        assert!((out.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sink_routing_drops_lost_population() {
        let one = FockStateMatrix::fock(1, 3).unwrap();
        let out = pure_loss(&one, c(0.5, 0.0), LossRouting::Sink).unwrap();
        assert!((out.get(1, 1).re - 0.25).abs() < 1e-15);
        assert_eq!(out.get(0, 0).re, 0.0);
    }

    #[test]
    fn unit_amplitude_is_a_phase_map() {
        let alpha = c(0.8, 0.3);
        let st = FockStateMatrix::coherent(alpha, 20).unwrap();
        let t = c(0.0, -1.0);
        let out = pure_loss(&st, t, LossRouting::Recycle).unwrap();
        for n in 0..20 {
            for m in 0..20 {
                let phase = t.powu(n as u32) * t.conj().powu(m as u32);
                assert!((out.get(n, m) - st.get(n, m) * phase).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_gain() {
        let one = FockStateMatrix::fock(1, 3).unwrap();
        assert!(pure_loss(&one, c(1.1, 0.0), LossRouting::Recycle).is_err());
    }

    #[test]
    fn subsystem_loss_matches_single_mode_on_products() {
        let a = FockStateMatrix::coherent(c(0.6, 0.2), 8).unwrap();
        let b = FockStateMatrix::squeezed_vacuum(0.2, 8).unwrap();
        let t = c(0.3, -0.7);
        let ab = a.tensor(&b);
        let on_a = pure_loss_subsystem(ab.matrix(), (8, 8), 0, t).unwrap();
        let expect_a = pure_loss_matrix(a.matrix(), t).unwrap().kronecker(b.matrix());
        assert!((on_a - expect_a).camax() < 1e-14);
        let on_b = pure_loss_subsystem(ab.matrix(), (8, 8), 1, t).unwrap();
        let expect_b = a.matrix().kronecker(&pure_loss_matrix(b.matrix(), t).unwrap());
        assert!((on_b - expect_b).camax() < 1e-14);
    }

    #[test]
    fn projection_renormalizes() {
        let st = FockStateMatrix::coherent(c(1.0, 0.0), 12).unwrap();
        let out = project_and_renormalize(&st, c(0.5, 0.0)).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-14);
        assert!((out.purity() - 1.0).abs() < 1e-12);
    }
}
