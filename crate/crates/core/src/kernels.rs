//! Time-discretisation weights for the Caputo derivative.
//!
//! Two kernels are provided:
//!
//! * the L1 weights `C_{m,k}`, built from `f(r) = r^{1-a} - (r-1)^{1-a}`, which
//!   turn `g tau^a d^a u(t^m)` into `u^m - sum_k C_{m,k} u^k` with
//!   `g = Gamma(2 - a)`;
//! * the Grünwald–Letnikov weights `c_j = (-1)^j binom(a, j)`, the backward
//!   Euler convolution quadrature for the Riemann–Liouville derivative.
//!
//! Both collapse to a one-step difference at `a = 1`.

use crate::error::{Error, Result};

/// L1 weights for a single step `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    pub alpha: f64,
    pub m: usize,
    /// `C_{m,0..m-1}`, index `k` multiplies `u^k`.
    pub weights: Vec<f64>,
    /// `Gamma(2 - alpha)`.
    pub g: f64,
}

/// Grünwald–Letnikov weights `c_0..c_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CQWeights {
    pub alpha: f64,
    pub weights: Vec<f64>,
}

/// `f(r) = r^{1-alpha} - (r-1)^{1-alpha}` for integer `r >= 1`.
///
/// Exact at `alpha = 0` (`f = 1`) and `alpha = 1` (`f(1) = 1`, else 0); the
/// general case uses `r^b (1 - (1 - 1/r)^b)` to avoid cancellation for large `r`.
fn l1_profile(alpha: f64, r: usize) -> f64 {
    debug_assert!(r >= 1);
    let beta = 1.0 - alpha;
    if r == 1 {
        return 1.0;
    }
    if beta == 0.0 {
        return 0.0;
    }
    if beta == 1.0 {
        return 1.0;
    }
    let r = r as f64;
    r.powf(beta) * -((beta * (-1.0 / r).ln_1p()).exp_m1())
}

/// Cached `f(1..=R)` so that the weights of any step `m <= R` are `O(m)`
/// subtractions. `f` does not depend on `m`, only the differences do.
#[derive(Debug, Clone)]
pub struct L1Kernel {
    alpha: f64,
    g: f64,
    // profile[r] = f(r); profile[0] unused
    profile: Vec<f64>,
}

impl L1Kernel {
    pub fn new(alpha: f64, max_step: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let g = gamma_one_plus(1.0 - alpha)?;
        let mut profile = Vec::with_capacity(max_step + 1);
        profile.push(f64::NAN);
        profile.extend((1..=max_step.max(1)).map(|r| l1_profile(alpha, r)));
        Ok(L1Kernel { alpha, g, profile })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Gamma(2 - alpha)`.
    pub fn g(&self) -> f64 {
        self.g
    }

    fn f(&mut self, r: usize) -> f64 {
        while self.profile.len() <= r {
            let next = self.profile.len();
            self.profile.push(l1_profile(self.alpha, next));
        }
        self.profile[r]
    }

    /// Write `C_{m,0..m-1}` into `out`.
    pub fn fill_weights(&mut self, m: usize, out: &mut Vec<f64>) {
        assert!(m >= 1, "L1 weights need m >= 1");
        self.f(m);
        out.clear();
        out.reserve(m);
        out.push(self.profile[m]);
        for k in 1..m {
            out.push(self.profile[m - k] - self.profile[m - k + 1]);
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// L1 weights `C_{m,k}`, `k = 0..m-1`, and the scale `g = Gamma(2 - alpha)`.
pub fn l1_weights(alpha: f64, m: usize) -> Result<L1Weights> {
    check_alpha(alpha)?;
    if m < 1 {
        return Err(Error::InvalidArgument("L1 weights need m >= 1".into()));
    }
    let mut kernel = L1Kernel::new(alpha, m)?;
    let mut weights = Vec::new();
    kernel.fill_weights(m, &mut weights);
    Ok(L1Weights {
        alpha,
        m,
        weights,
        g: kernel.g(),
    })
}

/// Grünwald–Letnikov weights of length `count + 1` from
/// `c_0 = 1`, `c_j = -((alpha - j + 1) / j) c_{j-1}`.
pub fn cq_weights(alpha: f64, count: usize) -> Result<CQWeights> {
    check_alpha(alpha)?;
    let mut weights = Vec::with_capacity(count + 1);
    weights.push(1.0);
    for j in 1..=count {
        let jf = j as f64;
        let prev = weights[j - 1];
        weights.push(-((alpha - jf + 1.0) / jf) * prev);
    }
    Ok(CQWeights { alpha, weights })
}

/// `Gamma(1 + x)` for `x` in `(-1, 1]`.
pub fn gamma_one_plus(x: f64) -> Result<f64> {
    if !(x > -1.0 && x <= 1.0) {
        return Err(Error::GammaDomain(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma(1.0 + x))
}
