//! Prolate/coupling matrices and their stable spectral decomposition.
//!
//! The discrete prolate spheroidal sequences (DPSS) are obtained from the
//! symmetric tridiagonal matrix that commutes with the prolate matrix, not
//! from the prolate matrix itself: the prolate eigenproblem is hopelessly
//! ill-conditioned in its clustered tail, while the commuting tridiagonal has
//! well-separated eigenvalues and shares the exact eigenvectors. Ordering
//! follows the decreasing tridiagonal eigenvalues, which matches decreasing
//! spectral concentration.
//!
//! Concentrations are taken from the prolate Rayleigh quotient only while it
//! is resolvable (absolute rounding floor ~1e-15). Below that the energy of
//! U_k inside the visible region is integrated directly: U_k is evaluated in
//! a cancellation-free form (the even-parity cosine sum is rewritten through
//! sin^2 with a leakage-cleaned zeroth moment), which keeps the *relative*
//! accuracy of the tiny visible amplitudes and lets ratios like
//! U_k(f)^2 / lambda_k stay well-conditioned far below the Rayleigh floor.

mod tridiagonal;

pub use tridiagonal::eigen_symmetric_tridiagonal;

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::numerics::quadrature;
use crate::numerics::sum::{neumaier_sum, NeumaierSum};

/// Rayleigh-quotient concentrations at or above this are used directly;
/// below it the quadrature route takes over.
pub const MU_RAYLEIGH_TRUST: f64 = 1e-10;

/// N x N prolate matrix: entry (n, m) = sin(2 pi d (n-m)) / (pi (n-m)),
/// diagonal 2d. Real, symmetric, Toeplitz, positive definite.
#[derive(Debug, Clone)]
pub struct ProlateMatrix {
    n: usize,
    d: f64,
    lags: Vec<f64>, // entry value per |n - m|
}

impl ProlateMatrix {
    pub fn new(n: usize, d: f64) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::domain(format!("matrix order must be odd, got {n}")));
        }
        if !(d > 0.0 && d <= 0.5) {
            return Err(Error::domain(format!("spacing must be in (0, 1/2], got {d}")));
        }
        let pi = std::f64::consts::PI;
        let lags = (0..n)
            .map(|l| {
                if l == 0 {
                    2.0 * d
                } else {
                    (2.0 * pi * d * l as f64).sin() / (pi * l as f64)
                }
            })
            .collect();
        Ok(Self { n, d, lags })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.lags[row.abs_diff(col)]
    }

    /// Trace = N * 2d.
    pub fn trace(&self) -> f64 {
        self.n as f64 * 2.0 * self.d
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut acc = NeumaierSum::new();
                for (j, &vj) in v.iter().enumerate() {
                    acc.add(self.entry(i, j) * vj);
                }
                acc.value()
            })
            .collect()
    }

    /// Rayleigh quotient v^T Omega v for a unit vector.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let av = self.apply(v);
        let mut acc = NeumaierSum::new();
        for (&x, &y) in v.iter().zip(&av) {
            acc.add(x * y);
        }
        acc.value()
    }
}

/// Build the prolate matrix for (N, d).
pub fn build_prolate(n: usize, d: f64) -> Result<ProlateMatrix> {
    ProlateMatrix::new(n, d)
}

/// Cancellation-free evaluation of U_k(f) from the DPSS vector.
///
/// Even k: U_k(f) = sum_n v_n cos(2 pi f n)
///               = moment0 - 2 sum_n v_n sin^2(pi f n),
/// where moment0 carries the leakage-cleaned sum of entries; the sin^2 terms
/// are relatively accurate for small f n, so tiny visible-region amplitudes
/// survive with full relative precision.
/// Odd k: U_k(f) = sum_n v_n sin(2 pi f n), already relatively accurate.
fn dpswf_eval(v: &[f64], moment0: f64, k: usize, f: f64) -> f64 {
    let half = (v.len() as i64 - 1) / 2;
    let pi = std::f64::consts::PI;
    let mut acc = NeumaierSum::new();
    if k % 2 == 0 {
        for (i, &vi) in v.iter().enumerate() {
            let n = (i as i64 - half) as f64;
            let s = (pi * f * n).sin();
            acc.add(-2.0 * vi * s * s);
        }
        moment0 + acc.value()
    } else {
        for (i, &vi) in v.iter().enumerate() {
            let n = (i as i64 - half) as f64;
            acc.add(vi * (2.0 * pi * f * n).sin());
        }
        acc.value()
    }
}

/// Eigenstructure of the prolate/coupling matrix pair: concentrations mu_k
/// (decreasing), coupling eigenvalues lambda_k = mu_k/(2d), and the
/// orthonormal DPSS eigenvectors, sign-normalized so the first entry above
/// 1e-12 in magnitude is positive.
#[derive(Debug, Clone)]
pub struct CouplingSpectrum {
    n: usize,
    d: f64,
    mu: Vec<f64>,
    lambda: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    moment0: Vec<f64>,
    theta: Vec<f64>,
    floor_limited: Vec<bool>,
    degenerate: bool,
}

impl CouplingSpectrum {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    /// Concentration mu_k = energy of U_k in [-d, d].
    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    /// Lossless coupling eigenvalue lambda_k = mu_k / (2d).
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda[k]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// DPSS eigenvector v_k (orthonormal, sign-normalized).
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k]
    }

    /// Tridiagonal eigenvalues used for ordering (decreasing); empty in the
    /// degenerate d = 1/2 case where the basis is arbitrary.
    pub fn theta_order(&self) -> &[f64] {
        &self.theta
    }

    /// True where mu_k cannot be resolved in double precision even through
    /// the quadrature route.
    pub fn is_floor_limited(&self, k: usize) -> bool {
        self.floor_limited[k]
    }

    /// True for d = 1/2: the prolate matrix is the identity and the basis is
    /// chosen canonically.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.n {
            return Err(Error::domain(format!(
                "mode index {k} out of range for N = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Discrete prolate spheroidal wave function U_k(f), the real realization
    /// of eps_k sqrt(N) a(f)^H v_k: a cosine sum for even k (symmetric U_k),
    /// a sine sum for odd k (antisymmetric).
    pub fn dpswf_value(&self, k: usize, f: f64) -> Result<f64> {
        self.check_mode(k)?;
        Ok(dpswf_eval(&self.vectors[k], self.moment0[k], k, f))
    }

    /// Stored concentration.
    pub fn concentration(&self, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        Ok(self.mu[k])
    }

    /// Concentration via quadrature of U_k^2 over the visible region; the
    /// independent route against the stored value.
    pub fn concentration_by_quadrature(&self, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        quadrature::integrate_default(
            |f| {
                let u = dpswf_eval(&self.vectors[k], self.moment0[k], k, f);
                u * u
            },
            -self.d,
            self.d,
        )
    }

    /// Rows (k, mu_k, lambda_k, floor_limited) for table dumps.
    pub fn table(&self) -> impl Iterator<Item = (usize, f64, f64, bool)> + '_ {
        (0..self.n).map(move |k| (k, self.mu[k], self.lambda[k], self.floor_limited[k]))
    }
}

/// Split decreasing tridiagonal eigenvalues into clusters of nearly equal
/// values (tunneling pairs appear for spacings approaching 1/2).
fn theta_clusters(theta: &[f64]) -> Vec<(usize, usize)> {
    let scale = theta.iter().fold(1.0f64, |m, &t| m.max(t.abs()));
    let tol = 1e-5 * scale;
    let mut clusters = Vec::new();
    let mut start = 0usize;
    for k in 1..=theta.len() {
        if k == theta.len() || (theta[k - 1] - theta[k]).abs() > tol {
            clusters.push((start, k));
            start = k;
        }
    }
    clusters
}

fn symmetric_part(v: &[f64], sign: f64) -> Vec<f64> {
    let m = v.len();
    (0..m).map(|i| 0.5 * (v[i] + sign * v[m - 1 - i])).collect()
}

fn norm(v: &[f64]) -> f64 {
    neumaier_sum(v.iter().map(|&x| x * x)).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    neumaier_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Decompose the prolate/coupling matrix for (N, d).
///
/// d = 1/2 yields the degenerate identity case: all concentrations are 1 and
/// the canonical basis is returned with the `degenerate` flag set.
pub fn decompose(n: usize, d: f64) -> Result<CouplingSpectrum> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::domain(format!("antenna count must be odd, got {n}")));
    }
    if !(d > 0.0 && d <= 0.5) {
        return Err(Error::domain(format!("spacing must be in (0, 1/2], got {d}")));
    }

    if d == 0.5 {
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                e
            })
            .collect();
        let moment0 = vec![1.0; n];
        return Ok(CouplingSpectrum {
            n,
            d,
            mu: vec![1.0; n],
            lambda: vec![1.0; n],
            vectors,
            moment0,
            theta: Vec::new(),
            floor_limited: vec![false; n],
            degenerate: true,
        });
    }

    // Commuting tridiagonal: diagonal ((N-1-2t)/2)^2 cos(2 pi d),
    // off-diagonal (t+1)(N-1-t)/2.
    let cos2pid = (2.0 * std::f64::consts::PI * d).cos();
    let diag: Vec<f64> = (0..n)
        .map(|t| {
            let half_gap = (n as f64 - 1.0 - 2.0 * t as f64) / 2.0;
            half_gap * half_gap * cos2pid
        })
        .collect();
    let off: Vec<f64> = (0..n - 1)
        .map(|t| ((t + 1) as f64) * ((n - 1 - t) as f64) / 2.0)
        .collect();

    let (theta_asc, vecs_asc) = eigen_symmetric_tridiagonal(&diag, &off);

    // reorder to decreasing theta: k = 0 is the most concentrated mode
    let mut theta = Vec::with_capacity(n);
    let mut raw_vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        theta.push(theta_asc[n - 1 - k]);
        raw_vectors.push(vecs_asc[n - 1 - k].clone());
    }

    // U_k is symmetric for even k and antisymmetric for odd k. Inverse
    // iteration may return an arbitrary rotation inside a tunneling pair, so
    // parity is restored cluster by cluster: each slot takes the dominant
    // projection of its cluster onto the slot's parity class.
    let mut vectors: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (start, end) in theta_clusters(&theta) {
        let members: Vec<&Vec<f64>> = raw_vectors[start..end].iter().collect();
        let mut used: Vec<Vec<f64>> = Vec::new();
        for k in start..end {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut best: Option<Vec<f64>> = None;
            let mut best_norm = -1.0;
            for m in &members {
                let mut cand = symmetric_part(m, sign);
                // stay orthogonal to already-assigned vectors of this cluster
                for u in &used {
                    let c = dot(&cand, u);
                    for (ci, ui) in cand.iter_mut().zip(u) {
                        *ci -= c * ui;
                    }
                }
                let nn = norm(&cand);
                if nn > best_norm {
                    best_norm = nn;
                    best = Some(cand);
                }
            }
            let mut v = best.expect("cluster is non-empty");
            if k % 2 == 1 {
                v[n / 2] = 0.0;
            }
            let nn = norm(&v);
            for x in v.iter_mut() {
                *x /= nn;
            }
            // deterministic sign: first non-negligible entry positive
            let lead = v.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(0.0);
            if lead < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            used.push(v.clone());
            vectors[k] = v;
        }
    }

    // Zeroth moments with first-order leakage cleaning: the tiny moment of a
    // high-order even mode is polluted by the large moment of v_0 through
    // eps-level cross-contamination of the computed eigenvectors. Odd modes
    // have exactly zero moment after the parity projection.
    let raw_moment: Vec<f64> = vectors
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k % 2 == 0 {
                neumaier_sum(v.iter().copied())
            } else {
                0.0
            }
        })
        .collect();
    let mut moment0 = raw_moment.clone();
    for k in (0..n).step_by(2) {
        let mut corr = NeumaierSum::new();
        for j in (0..n).step_by(2) {
            if j == k {
                continue;
            }
            corr.add(dot(&vectors[j], &vectors[k]) * raw_moment[j]);
        }
        moment0[k] = raw_moment[k] - corr.value();
    }

    let prolate = ProlateMatrix::new(n, d)?;
    let mut mu = vec![0.0; n];
    let mut floor_limited = vec![false; n];
    let eps = f64::EPSILON;
    for k in 0..n {
        let rayleigh = prolate.quadratic_form(&vectors[k]);
        if rayleigh >= MU_RAYLEIGH_TRUST {
            mu[k] = rayleigh;
            continue;
        }
        // quadrature route: relative accuracy survives far below the
        // Rayleigh floor thanks to the stable evaluator
        let quad = match quadrature::integrate(
            |f| {
                let u = dpswf_eval(&vectors[k], moment0[k], k, f);
                u * u
            },
            -d,
            d,
            1e-9,
        ) {
            Ok(v) => v,
            Err(Error::QuadratureNoConvergence { last, .. }) => last,
            Err(e) => return Err(e),
        };
        mu[k] = quad;
        // evaluation noise of U_k over the visible region
        let l1norm: f64 = vectors[k].iter().map(|x| x.abs()).sum();
        let half = (n as f64 - 1.0) / 2.0;
        let noise = if k % 2 == 0 {
            let s_max = (std::f64::consts::PI * d * half).sin().powi(2).min(1.0);
            eps * (moment0[k].abs() + 2.0 * s_max * l1norm)
        } else {
            let s_max = (2.0 * std::f64::consts::PI * d * half).sin().abs().min(1.0);
            eps * s_max * l1norm
        };
        let kappa = (quad.max(0.0) / (2.0 * d)).sqrt();
        if kappa < 50.0 * noise {
            floor_limited[k] = true;
        }
    }

    // clamp into (0, 1) and keep the ordering strict; visible distortion is
    // 1e-12-relative at most except inside the unresolvable tail
    let upper = 1.0 - f64::EPSILON;
    if mu[0] > upper {
        mu[0] = upper;
    }
    for k in 1..n {
        if !(mu[k] < mu[k - 1]) {
            mu[k] = mu[k - 1] * (1.0 - 1e-12);
            if !(mu[k] > 0.0) {
                mu[k] = f64::MIN_POSITIVE;
            }
            floor_limited[k] = true;
        }
        if mu[k] <= 0.0 {
            mu[k] = mu[k - 1] * 0.5;
            floor_limited[k] = true;
        }
    }

    let lambda = mu.iter().map(|&m| m / (2.0 * d)).collect();

    Ok(CouplingSpectrum {
        n,
        d,
        mu,
        lambda,
        vectors,
        moment0,
        theta,
        floor_limited,
        degenerate: false,
    })
}

/// Lossy coupling eigenstructure: shared DPSS eigenvectors, eigenvalues
/// shifted to lambda_k + rho.
#[derive(Debug, Clone)]
pub struct LossyCoupling {
    base: CouplingSpectrum,
    rho: f64,
    lambda_lossy: Vec<f64>,
}

impl LossyCoupling {
    pub fn new(base: CouplingSpectrum, rho: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("loss factor must be >= 0, got {rho}")));
        }
        let lambda_lossy = base.lambdas().iter().map(|&l| l + rho).collect();
        Ok(Self {
            base,
            rho,
            lambda_lossy,
        })
    }

    pub fn base(&self) -> &CouplingSpectrum {
        &self.base
    }

    pub fn loss_factor(&self) -> f64 {
        self.rho
    }

    pub fn lambda_lossy(&self, k: usize) -> f64 {
        self.lambda_lossy[k]
    }

    pub fn lambdas_lossy(&self) -> &[f64] {
        &self.lambda_lossy
    }
}

/// Spatial degrees of freedom N0 = 2 d N, the eigenvalue transition index
/// (transition width is of order log N).
pub fn dof(cfg: &ArrayConfig) -> f64 {
    cfg.dof()
}
