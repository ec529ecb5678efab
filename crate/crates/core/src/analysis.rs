//! Post-processing: the stationary reference, error norms, the power-law
//! decay `J(t) = t^{-alpha} / (C Gamma(1 - alpha))`, full-contact time and
//! the `alpha = 0` control residual.

use crate::error::{check_len, Error, Result};
use crate::kernels::gamma_one_plus;
use crate::linalg::{Mask, TriDiag};
use crate::problem::{contact_mask, ProblemSpec, SchemeKind, SolveState, TimeGrid};
use crate::schemes::{run_with, RunOptions};

/// Step cap for the stationary reference run.
pub const STATIONARY_STEP_BUDGET: usize = 100_000;

/// The `alpha`-independent limit of the evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryRef {
    pub u_bar: Vec<f64>,
    /// Largest `|x|` over contact nodes; `None` when the obstacle is inactive.
    pub contact_extremum: Option<f64>,
    pub contact: Vec<bool>,
    pub solver_tol: f64,
    pub steps: usize,
}

/// One point of a decay curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySample {
    pub time: f64,
    pub l1_error: f64,
    pub j_value: f64,
}

impl DecaySample {
    pub fn ratio(&self) -> f64 {
        self.l1_error / self.j_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub alpha: f64,
    pub c_constant: f64,
    pub samples: Vec<DecaySample>,
}

impl DecayCurve {
    /// Fit `C` to `(time, l1_error)` pairs and attach `J(t)` to each.
    pub fn fit(alpha: f64, samples: &[(f64, f64)]) -> Result<Self> {
        let c_constant = fit_decay_constant(samples, alpha)?;
        let samples = samples
            .iter()
            .map(|&(time, l1_error)| {
                Ok(DecaySample {
                    time,
                    l1_error,
                    j_value: j_decay(time, alpha, c_constant)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if samples.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidArgument("decay sample times must increase".into()));
        }
        Ok(DecayCurve {
            alpha,
            c_constant,
            samples,
        })
    }
}

/// Run S3 at `alpha = 1` on the same grid until the stopping test holds at
/// `ref_tol`. The time step is chosen so that `tau / h^2` equals the spec's
/// `gamma_alpha`.
pub fn stationary_solve(spec: &ProblemSpec, ref_tol: f64) -> Result<StationaryRef> {
    if !(ref_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("ref_tol must be positive, got {ref_tol}")));
    }
    let h = spec.grid().h();
    let tau = spec.gamma_alpha() * h * h;
    let time = TimeGrid::new(tau, STATIONARY_STEP_BUDGET)?;
    let reference = spec
        .with_scheme(SchemeKind::S3)
        .with_dynamics(1.0, time, ref_tol)?;
    let (state, report) = run_with(&reference, &RunOptions::default())?;
    if !report.converged {
        return Err(Error::StationaryNotConverged {
            steps: STATIONARY_STEP_BUDGET,
        });
    }
    let u_bar = report.final_solution;
    let contact = contact_mask(&u_bar, spec.psi());
    let contact_extremum = spec
        .grid()
        .nodes()
        .iter()
        .zip(&contact)
        .filter(|(_, &c)| c)
        .map(|(x, _)| x.abs())
        .reduce(f64::max);
    Ok(StationaryRef {
        u_bar,
        contact_extremum,
        contact,
        solver_tol: ref_tol,
        steps: state.current_step(),
    })
}

/// `max_i |min(u_i - psi_i, (A u)_i)|`, the residual of the discrete
/// elliptic obstacle problem.
pub fn lcp_residual(u: &[f64], psi: &[f64], stencil: &TriDiag) -> f64 {
    let au = stencil.apply(u);
    u.iter()
        .zip(psi)
        .zip(&au)
        .map(|((&ui, &pi), &ai)| (ui - pi).min(ai).abs())
        .fold(0.0, f64::max)
}

/// Projected SOR for `A u >= 0, u >= psi, (u - psi)(A u) = 0`.
///
/// A direct elliptic solve used to cross-check [`stationary_solve`]; it
/// shares nothing with the time-stepping code.
pub fn psor_oracle(stencil: &TriDiag, psi: &[f64], sweeps: usize) -> Result<Vec<f64>> {
    let n = stencil.dim();
    check_len(n, psi.len())?;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (n as f64 + 1.0)).sin());
    let (sub, diag, sup) = (stencil.sub(), stencil.diag(), stencil.sup());
    let mut u: Vec<f64> = psi.iter().map(|&p| p.max(0.0)).collect();
    let mut residual = f64::INFINITY;
    for sweep in 1..=sweeps {
        let mut change = 0.0f64;
        for i in 0..n {
            let mut off = 0.0;
            if i > 0 {
                off += sub[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                off += sup[i] * u[i + 1];
            }
            let gs = -off / diag[i];
            let next = (u[i] + omega * (gs - u[i])).max(psi[i]);
            change = change.max((next - u[i]).abs());
            u[i] = next;
        }
        if change < 1e-14 || sweep % 16 == 0 {
            residual = lcp_residual(&u, psi, stencil);
            if residual < 1e-13 && change < 1e-13 {
                return Ok(u);
            }
        }
    }
    residual = residual.min(lcp_residual(&u, psi, stencil));
    if residual <= 1e-10 {
        return Ok(u);
    }
    Err(Error::PsorStalled { sweeps, residual })
}

/// Discrete L1 norm `h sum_i |u_i - u_bar_i|`.
pub fn l1_error(u: &[f64], u_bar: &[f64], h: f64) -> Result<f64> {
    check_len(u.len(), u_bar.len())?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    Ok(h * u.iter().zip(u_bar).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "power-law decay needs alpha in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `J(t) = t^{-alpha} / (C Gamma(1 - alpha))`.
pub fn j_decay(t: f64, alpha: f64, c_constant: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    if !(t > 0.0 && c_constant > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t > 0 and C > 0, got t = {t}, C = {c_constant}"
        )));
    }
    Ok(t.powf(-alpha) / (c_constant * gamma_one_plus(-alpha)?))
}

/// Least-squares `C` in `error = t^{-alpha} / (C Gamma(1 - alpha))`.
///
/// The model is linear in `1/C`: with `q_i = t_i^{-alpha} / Gamma(1 - alpha)`,
/// `1/C = sum e_i q_i / sum q_i^2`.
pub fn fit_decay_constant(samples: &[(f64, f64)], alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    if samples.is_empty() {
        return Err(Error::DegenerateFit("no samples".into()));
    }
    if samples.iter().all(|&(_, e)| e.abs() < 1e-14) {
        return Err(Error::DegenerateFit(
            "all errors below 1e-14 (exponential regime)".into(),
        ));
    }
    let gamma = gamma_one_plus(-alpha)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, e) in samples {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("sample time must be positive, got {t}")));
        }
        let q = t.powf(-alpha) / gamma;
        num += e * q;
        den += q * q;
    }
    if !(num > 0.0) {
        return Err(Error::DegenerateFit("errors do not decay like a positive power law".into()));
    }
    Ok(den / num)
}

/// First time `m tau` after which the contact mask equals its final value at
/// every later step. `None` when the final contact set is empty.
pub fn fc_time(state: &SolveState, tau: f64) -> Option<f64> {
    let masks = state.contact_masks();
    let last = masks.len() - 1;
    if last == 0 {
        return None;
    }
    let final_mask = &masks[last];
    if !final_mask.iter().any(|&c| c) {
        return None;
    }
    let mut first = last;
    while first > 1 && masks[first - 1] == *final_mask {
        first -= 1;
    }
    Some(first as f64 * tau)
}

/// `max` over off-contact nodes of `|((I + A/h^2) u1 - u0)_i|`.
pub fn alpha_zero_check(u1: &[f64], u0: &[f64], stencil: &TriDiag, h: f64, mask: &Mask) -> Result<f64> {
    check_len(u1.len(), u0.len())?;
    check_len(u1.len(), mask.len())?;
    let au = stencil.apply(u1);
    let inv_h2 = 1.0 / (h * h);
    Ok(u1
        .iter()
        .zip(u0)
        .zip(&au)
        .zip(&mask.bits)
        .filter(|(_, &off)| off)
        .map(|(((&u, &v), &a), _)| (u + inv_h2 * a - v).abs())
        .fold(0.0, f64::max))
}

/// Residual of the implicit step: `max_i |min(y_i, r_i)|` with `y = u - psi`
/// and `r = y + scale A u - (memory - psi)`, `memory = sum_k C_{m,k} u^k`.
pub fn s3_complementarity_residual(
    u: &[f64],
    psi: &[f64],
    memory: &[f64],
    scale: f64,
    stencil: &TriDiag,
) -> f64 {
    let au = stencil.apply(u);
    (0..u.len())
        .map(|i| {
            let y = u[i] - psi[i];
            let r = y + scale * au[i] - (memory[i] - psi[i]);
            y.min(r).abs()
        })
        .fold(0.0, f64::max)
}

/// `count` log-spaced points in `[t0, t1]`.
pub fn log_spaced(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![t0],
        _ => {
            let (l0, l1) = (t0.ln(), t1.ln());
            (0..count)
                .map(|k| (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// L1 errors of a stored trajectory at the steps nearest to `times`.
/// Returns `(t^m, error)` pairs using the actual step times; requested times
/// beyond the last stored step are dropped.
pub fn sample_l1_errors(
    state: &SolveState,
    u_bar: &[f64],
    h: f64,
    tau: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let last = state.current_step();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let m = (t / tau).round() as usize;
        if m == 0 || m > last {
            continue;
        }
        out.push((m as f64 * tau, l1_error(&state.history()[m], u_bar, h)?));
    }
    Ok(out)
}
