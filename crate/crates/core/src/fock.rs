//! Density matrices of a single generalized mode in the photon-number basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Largest trace lost to truncating an infinite-support pure state.
pub const TAIL_TOL: f64 = 1e-6;

const MAX_SEARCH_DIM: usize = 1 << 16;

/// Hermitian, positive semidefinite ρ_nm with trace at most one.
///
/// Two-mode states use the same type with `dim = d*d` and index `n*d + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateMatrix {
    rho: CMatrix,
}

impl FockStateMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        let state = FockStateMatrix { rho };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(rho: CMatrix) -> Self {
        FockStateMatrix { rho }
    }

    /// `|ψ⟩⟨ψ|` from amplitudes, without renormalizing.
    pub fn from_amplitudes(amplitudes: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        Self::from_matrix(&v * v.adjoint())
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Cutoff { n, dim });
        }
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(FockStateMatrix { rho })
    }

    /// Squeezed vacuum `exp[(r/2)(a² − a†²)]|0⟩`, truncated and renormalized.
    pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("squeeze parameter r = {r}")));
        }
        let t = r.tanh();
        let mut c = r.cosh().sqrt().recip();
        let series = (0..).map(move |n: usize| {
            if n % 2 == 1 {
                return Complex64::new(0.0, 0.0);
            }
            if n > 0 {
                // c_n / c_{n-2} = -tanh(r) sqrt(n(n-1)) / n
                c *= -t * ((n * (n - 1)) as f64).sqrt() / n as f64;
            }
            Complex64::new(c, 0.0)
        });
        truncate_series(dim, series)
    }

    /// Coherent state `|α⟩`, truncated and renormalized.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        let series = (0..).map(move |n: usize| {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            c
        });
        truncate_series(dim, series)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.rho[(n, m)]
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        state_fidelity_raw(&self.rho, &self.rho)
    }

    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.rho[(n, n)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_square() || self.rho.nrows() == 0 {
            return Err(Error::InvalidState("not a non-empty square matrix".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("hermiticity error {herm:.3e}")));
        }
        let tr = self.trace();
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// ρ_a ⊗ ρ_b with index `n * dim_b + m`.
    pub fn tensor(&self, other: &FockStateMatrix) -> FockStateMatrix {
        FockStateMatrix {
            rho: self.rho.kronecker(&other.rho),
        }
    }
}

/// Keep the first `dim` amplitudes of a unit-norm series; fail if the tail
/// beyond `dim` carries more than [`TAIL_TOL`].
fn truncate_series(
    dim: usize,
    series: impl Iterator<Item = Complex64>,
) -> Result<FockStateMatrix> {
    let mut amps = Vec::with_capacity(dim);
    let mut captured = 0.0;
    let mut required = None;
    for (n, c) in series.take(MAX_SEARCH_DIM).enumerate() {
        captured += c.norm_sqr();
        if n < dim {
            amps.push(c);
        }
        if required.is_none() && 1.0 - captured < TAIL_TOL {
            required = Some(n + 1);
        }
        if required.is_some() && n + 1 >= dim {
            break;
        }
    }
    let required = required.unwrap_or(MAX_SEARCH_DIM);
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if required > dim {
        return Err(Error::CutoffTail {
            dim,
            deficit: 1.0 - kept,
            required_dim: required,
        });
    }
    let scale = kept.sqrt().recip();
    let v = DVector::from_vec(amps) * Complex64::new(scale, 0.0);
    let mut rho = &v * v.adjoint();
    hermitize(&mut rho);
    Ok(FockStateMatrix::from_matrix_unchecked(rho))
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// Replace `m` by `(m + m†)/2`.
pub(crate) fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn state_fidelity_raw(a: &CMatrix, b: &CMatrix) -> f64 {
    // Re Tr(ab) = Re Σ_nm a_nm b_mn
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Overlap fidelity `Re Tr{a b}`.
pub fn state_fidelity(a: &FockStateMatrix, b: &FockStateMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(state_fidelity_raw(&a.rho, &b.rho))
}
