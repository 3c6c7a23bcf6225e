//! Classical RK4 for a few system amplitudes coupled to many bath modes with
//! `ξ̇_k = −iΔ_k ξ_k + b(t)`, where `b` depends on the system only and the
//! system sees the bath only through `S = Σ_k ξ_k`.
//!
//! Every RK4 stage value of a mode is a polynomial in `a_k = −iΔ_k` applied to
//! `ξ_k` plus a polynomial in `a_k` with stage-dependent constants. Stage sums
//! `Σ_k ξ_k^(s)` therefore only need the moments `Σ a^j ξ` and `Σ a^j`, and a
//! whole step costs one pass over the modes. The arithmetic is classical RK4,
//! only reassociated.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(−i)^j`
fn minus_i_pow(j: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ][j % 4]
}

/// A stage value `P(a) ξ + Q(a)`.
#[derive(Debug, Clone, Copy)]
struct StagePoly {
    p: [f64; 5],
    q: [Complex64; 5],
}

impl StagePoly {
    fn identity() -> Self {
        let mut p = [0.0; 5];
        p[0] = 1.0;
        StagePoly { p, q: [ZERO; 5] }
    }

    /// Derivative `a · self + b`.
    fn derivative(&self, b: Complex64) -> Self {
        let mut p = [0.0; 5];
        let mut q = [ZERO; 5];
        p[1..].copy_from_slice(&self.p[..4]);
        q[1..].copy_from_slice(&self.q[..4]);
        debug_assert!(self.p[4] == 0.0 && self.q[4] == ZERO);
        q[0] = b;
        StagePoly { p, q }
    }

    /// `self + scale · other`
    fn add_scaled(&self, scale: f64, other: &StagePoly) -> Self {
        let mut out = *self;
        for j in 0..5 {
            out.p[j] += scale * other.p[j];
            out.q[j] += other.q[j] * scale;
        }
        out
    }

    /// `Σ_k` of the stage value, from moments `m_j = Σ a^j ξ` and `a_j = Σ a^j`.
    fn sum(&self, m: &[Complex64; 4], a: &[Complex64; 4]) -> Complex64 {
        debug_assert!(self.p[4] == 0.0 && self.q[4] == ZERO);
        (0..4).map(|j| m[j] * self.p[j] + self.q[j] * a[j]).sum()
    }
}

/// Few-amplitude system driven by the bath sum.
pub(crate) trait Coupled<const N: usize> {
    /// Returns `(ẏ, b)` at time `t`, where `b` is the drive of every bath mode.
    fn rhs(&self, t: f64, y: &[Complex64; N], bath_sum: Complex64) -> ([Complex64; N], Complex64);
}

/// Bath amplitudes stored as split real/imaginary arrays with the per-mode
/// RK4 propagator `R(−iΔ_k h)`.
struct ModeBank {
    delta: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
    prop_re: Vec<f64>,
    prop_im: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    /// `Σ Δ^j ξ`, j = 0..4
    t: [Complex64; 4],
    norm: f64,
}

const LANES: usize = 4;

impl ModeBank {
    fn new(xi: &[Complex64], delta: &[f64], p: &[f64; 5]) -> Self {
        let (prop_re, prop_im) = delta
            .iter()
            .map(|&d| {
                // Σ p_j (−iΔ)^j with real p
                let d2 = d * d;
                let re = p[0] - p[2] * d2 + p[4] * d2 * d2;
                let im = -p[1] * d + p[3] * d2 * d;
                (re, im)
            })
            .unzip();
        ModeBank {
            delta: delta.to_vec(),
            re: xi.iter().map(|z| z.re).collect(),
            im: xi.iter().map(|z| z.im).collect(),
            prop_re,
            prop_im,
        }
    }

    fn sums(&self) -> Sums {
        let mut s = Sums::default();
        for k in 0..self.delta.len() {
            let x = Complex64::new(self.re[k], self.im[k]);
            let d = self.delta[k];
            s.t[0] += x;
            s.t[1] += x * d;
            s.t[2] += x * (d * d);
            s.t[3] += x * (d * d * d);
            s.norm += x.norm_sqr();
        }
        s
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    /// `ξ ← R ξ + Σ_j c_j Δ^j`, returning the moments of the new amplitudes.
    fn advance(&mut self, c: &[Complex64; 4]) -> Sums {
        let cr = [c[0].re, c[1].re, c[2].re, c[3].re];
        let ci = [c[0].im, c[1].im, c[2].im, c[3].im];

        #[inline(always)]
        #[allow(clippy::too_many_arguments)]
        fn one(
            d: f64,
            re: &mut f64,
            im: &mut f64,
            pr: f64,
            pi: f64,
            cr: &[f64; 4],
            ci: &[f64; 4],
            acc: &mut [f64; 9],
        ) {
            let qr = ((cr[3] * d + cr[2]) * d + cr[1]) * d + cr[0];
            let qi = ((ci[3] * d + ci[2]) * d + ci[1]) * d + ci[0];
            let xr = pr * *re - pi * *im + qr;
            let xi = pr * *im + pi * *re + qi;
            *re = xr;
            *im = xi;
            let d2 = d * d;
            let d3 = d2 * d;
            acc[0] += xr;
            acc[1] += xi;
            acc[2] += d * xr;
            acc[3] += d * xi;
            acc[4] += d2 * xr;
            acc[5] += d2 * xi;
            acc[6] += d3 * xr;
            acc[7] += d3 * xi;
            acc[8] += xr * xr + xi * xi;
        }

        // one accumulator per lane so the reductions vectorize
        let mut acc = [[0.0; LANES]; 9];
        let n = self.delta.len();
        let main = n - n % LANES;
        {
            let chunks = self.re[..main]
                .chunks_exact_mut(LANES)
                .zip(self.im[..main].chunks_exact_mut(LANES))
                .zip(self.delta[..main].chunks_exact(LANES))
                .zip(self.prop_re[..main].chunks_exact(LANES))
                .zip(self.prop_im[..main].chunks_exact(LANES));
            for ((((re, im), d), pr), pi) in chunks {
                for l in 0..LANES {
                    let (qr, qi) = (
                        ((cr[3] * d[l] + cr[2]) * d[l] + cr[1]) * d[l] + cr[0],
                        ((ci[3] * d[l] + ci[2]) * d[l] + ci[1]) * d[l] + ci[0],
                    );
                    let xr = pr[l] * re[l] - pi[l] * im[l] + qr;
                    let xi = pr[l] * im[l] + pi[l] * re[l] + qi;
                    re[l] = xr;
                    im[l] = xi;
                    let d1 = d[l];
                    let d2 = d1 * d1;
                    let d3 = d2 * d1;
                    acc[0][l] += xr;
                    acc[1][l] += xi;
                    acc[2][l] += d1 * xr;
                    acc[3][l] += d1 * xi;
                    acc[4][l] += d2 * xr;
                    acc[5][l] += d2 * xi;
                    acc[6][l] += d3 * xr;
                    acc[7][l] += d3 * xi;
                    acc[8][l] += xr * xr + xi * xi;
                }
            }
        }
        let mut tail = [0.0; 9];
        for k in main..n {
            one(
                self.delta[k],
                &mut self.re[k],
                &mut self.im[k],
                self.prop_re[k],
                self.prop_im[k],
                &cr,
                &ci,
                &mut tail,
            );
        }
        let mut tot = tail;
        for (j, row) in acc.iter().enumerate() {
            tot[j] += row.iter().sum::<f64>();
        }
        Sums {
            t: [
                Complex64::new(tot[0], tot[1]),
                Complex64::new(tot[2], tot[3]),
                Complex64::new(tot[4], tot[5]),
                Complex64::new(tot[6], tot[7]),
            ],
            norm: tot[8],
        }
    }
}

pub(crate) struct RunOutput<const N: usize> {
    /// System amplitudes at each recorded sample.
    pub y: Vec<[Complex64; N]>,
    /// Total norm `Σ|ξ|² + Σ|y|²` at each recorded sample.
    pub norm: Vec<f64>,
    pub xi_final: Vec<Complex64>,
}

fn add_scaled<const N: usize>(y: &[Complex64; N], h: f64, k: &[Complex64; N]) -> [Complex64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += k[i] * h;
    }
    out
}

fn norm_sqr<const N: usize>(y: &[Complex64; N]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum()
}

/// One RK4 step of the coupled system, expressed through stage polynomials.
/// Returns the new system state and the final bath polynomial.
fn rk4_stages<const N: usize, S: Coupled<N>>(
    sys: &S,
    t: f64,
    h: f64,
    y: &[Complex64; N],
    m: &[Complex64; 4],
    a: &[Complex64; 4],
) -> ([Complex64; N], StagePoly) {
    let base = StagePoly::identity();

    let (ky1, b1) = sys.rhs(t, y, base.sum(m, a));
    let k1 = base.derivative(b1);

    let x2 = base.add_scaled(0.5 * h, &k1);
    let y2 = add_scaled(y, 0.5 * h, &ky1);
    let (ky2, b2) = sys.rhs(t + 0.5 * h, &y2, x2.sum(m, a));
    let k2 = x2.derivative(b2);

    let x3 = base.add_scaled(0.5 * h, &k2);
    let y3 = add_scaled(y, 0.5 * h, &ky2);
    let (ky3, b3) = sys.rhs(t + 0.5 * h, &y3, x3.sum(m, a));
    let k3 = x3.derivative(b3);

    let x4 = base.add_scaled(h, &k3);
    let y4 = add_scaled(y, h, &ky3);
    let (ky4, b4) = sys.rhs(t + h, &y4, x4.sum(m, a));
    let k4 = x4.derivative(b4);

    let w = h / 6.0;
    let next = base
        .add_scaled(w, &k1)
        .add_scaled(2.0 * w, &k2)
        .add_scaled(2.0 * w, &k3)
        .add_scaled(w, &k4);
    let mut y_next = *y;
    for i in 0..N {
        y_next[i] += (ky1[i] + (ky2[i] + ky3[i]) * 2.0 + ky4[i]) * w;
    }
    (y_next, next)
}

/// Polynomial part of the RK4 propagator; independent of the system.
fn propagator(h: f64) -> [f64; 5] {
    struct Free;
    impl Coupled<1> for Free {
        fn rhs(&self, _: f64, _: &[Complex64; 1], _: Complex64) -> ([Complex64; 1], Complex64) {
            ([ZERO], ZERO)
        }
    }
    let zeros = [ZERO; 4];
    rk4_stages(&Free, 0.0, h, &[ZERO], &zeros, &zeros).1.p
}

/// Integrate from `t0` for `samples - 1` intervals of `substeps` steps of size `h`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run<const N: usize, S: Coupled<N>>(
    sys: &S,
    xi0: &[Complex64],
    delta: &[f64],
    y0: [Complex64; N],
    t0: f64,
    h: f64,
    substeps: usize,
    samples: usize,
) -> RunOutput<N> {
    let p = propagator(h);
    let mut bank = ModeBank::new(xi0, delta, &p);
    let mut a = [ZERO; 4];
    for &d in delta {
        a[0] += 1.0;
        a[1] += d;
        a[2] += d * d;
        a[3] += d * d * d;
    }
    for (j, aj) in a.iter_mut().enumerate() {
        *aj *= minus_i_pow(j);
    }
    let moments = |s: &Sums| -> [Complex64; 4] {
        [
            s.t[0],
            s.t[1] * minus_i_pow(1),
            s.t[2] * minus_i_pow(2),
            s.t[3] * minus_i_pow(3),
        ]
    };

    let mut sums = bank.sums();
    let mut y = y0;
    let mut out_y = Vec::with_capacity(samples);
    let mut out_norm = Vec::with_capacity(samples);
    out_y.push(y);
    out_norm.push(sums.norm + norm_sqr(&y));

    let mut step = 0usize;
    for _ in 1..samples {
        for _ in 0..substeps {
            let t = t0 + step as f64 * h;
            let m = moments(&sums);
            let (y_next, poly) = rk4_stages(sys, t, h, &y, &m, &a);
            // Σ q_j (−iΔ)^j = Σ (q_j (−i)^j) Δ^j
            let c = [
                poly.q[0],
                poly.q[1] * minus_i_pow(1),
                poly.q[2] * minus_i_pow(2),
                poly.q[3] * minus_i_pow(3),
            ];
            debug_assert!(poly.q[4] == ZERO);
            sums = bank.advance(&c);
            y = y_next;
            step += 1;
        }
        out_y.push(y);
        out_norm.push(sums.norm + norm_sqr(&y));
    }
    RunOutput {
        y: out_y,
        norm: out_norm,
        xi_final: bank.amplitudes(),
    }
}
