//! The three time-stepping schemes and the run driver.
//!
//! * `S1`: L1 kernel, semi-implicit system `(I + g gamma H(v^{m-1}) * A) u^m = b^m`
//!   followed by projection onto the obstacle.
//! * `S2`: same system with the Grünwald–Letnikov kernel and no `g` factor.
//! * `S3`: L1 kernel, implicit complementarity step
//!   `(I + g gamma A P(x)) x = b^m`, `u^m = psi + max(0, x)`, solved by Picard
//!   iterations on the active set `P`.
//!
//! For S1/S2 the memory sum is replaced by `u^{m-1}` on contact nodes
//! ("memory truncation"); without it a touched node is pushed back off the
//! obstacle by its own history.

use log::debug;

use crate::analysis;
use crate::error::{check_len, Error, Result};
use crate::kernels::{cq_weights, CQWeights, L1Kernel, L1Weights};
use crate::linalg::{
    column_masked_system, heaviside_mask, laplacian_stencil, masked_system, thomas_solve, Mask,
    TriDiag,
};
use crate::problem::{contact_tolerance, ProblemSpec, RunReport, SchemeKind, SolveState};

/// Knobs that are not part of the mathematical problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Replace the memory term by `u^{m-1}` on contact nodes (S1/S2).
    pub truncate_memory: bool,
    /// Hard cap on the number of steps; `None` means run to the horizon.
    pub step_budget: Option<usize>,
    /// Picard iteration cap for S3; `None` means `10 N`.
    pub max_picard: Option<usize>,
    /// Evaluate the stopping test after every step.
    pub stop_on_tolerance: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            truncate_memory: true,
            step_budget: None,
            max_picard: None,
            stop_on_tolerance: true,
        }
    }
}

/// The data one step reads.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub spec: &'a ProblemSpec,
    pub state: &'a SolveState,
    pub step_index: usize,
}

impl<'a> StepInput<'a> {
    /// The next step after the newest stored vector.
    pub fn next(spec: &'a ProblemSpec, state: &'a SolveState) -> Self {
        StepInput {
            spec,
            state,
            step_index: state.current_step() + 1,
        }
    }

    fn check(&self, expected: SchemeKind) -> Result<()> {
        if self.spec.scheme() != expected {
            return Err(Error::InvalidArgument(format!(
                "spec selects {} but step {} was requested",
                self.spec.scheme(),
                expected
            )));
        }
        if self.step_index == 0 || self.state.current_step() + 1 != self.step_index {
            return Err(Error::InvalidArgument(format!(
                "step {} requested but state holds steps 0..={}",
                self.step_index,
                self.state.current_step()
            )));
        }
        Ok(())
    }
}

/// Outcome of the Picard loop of one S3 step.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardTrace {
    pub iterations: usize,
    pub final_mask: Mask,
    pub converged: bool,
}

/// Per-run caches: the stencil, the L1 profile and the GL weights.
#[derive(Debug, Clone)]
pub struct SchemeContext {
    stencil: TriDiag,
    l1: L1Kernel,
    cq: CQWeights,
    truncate_memory: bool,
    max_picard: usize,
    weights: Vec<f64>,
}

impl SchemeContext {
    pub fn new(spec: &ProblemSpec, options: &RunOptions, max_step: usize) -> Result<Self> {
        let n = spec.grid().len();
        let stencil = laplacian_stencil(n)?;
        let l1 = L1Kernel::new(spec.alpha(), max_step)?;
        let cq = if spec.scheme() == SchemeKind::S2 {
            cq_weights(spec.alpha(), max_step)?
        } else {
            cq_weights(spec.alpha(), 0)?
        };
        Ok(SchemeContext {
            stencil,
            l1,
            cq,
            truncate_memory: options.truncate_memory,
            max_picard: options
                .max_picard
                .unwrap_or(10 * spec.grid().n_intervals()),
            weights: Vec::new(),
        })
    }

    pub fn stencil(&self) -> &TriDiag {
        &self.stencil
    }

    /// `Gamma(2 - alpha)`.
    pub fn g(&self) -> f64 {
        self.l1.g()
    }

    fn l1_weights(&mut self, m: usize) -> L1Weights {
        let mut weights = std::mem::take(&mut self.weights);
        self.l1.fill_weights(m, &mut weights);
        L1Weights {
            alpha: self.l1.alpha(),
            m,
            weights,
            g: self.l1.g(),
        }
    }

    fn recycle(&mut self, w: L1Weights) {
        self.weights = w.weights;
    }

    fn cq_for(&mut self, m: usize) -> Result<&CQWeights> {
        if self.cq.weights.len() < m {
            self.cq = cq_weights(self.cq.alpha, m.max(2 * self.cq.weights.len()))?;
        }
        Ok(&self.cq)
    }
}

/// Component-wise `max(u, psi)`.
pub fn project_onto_obstacle(u: &[f64], psi: &[f64]) -> Result<Vec<f64>> {
    check_len(u.len(), psi.len())?;
    Ok(u.iter().zip(psi).map(|(&a, &b)| a.max(b)).collect())
}

/// Put nodes that sit within the contact tolerance exactly onto the obstacle.
///
/// `H(0) = 0` makes the semi-implicit schemes sensitive to the sign of
/// round-off at contact; settling removes that sensitivity.
pub fn settle_contacts(u: &mut [f64], psi: &[f64]) {
    for (ui, &pi) in u.iter_mut().zip(psi) {
        if *ui - pi <= contact_tolerance(pi) {
            *ui = pi;
        }
    }
}

fn weighted_history(history: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = history[0].len();
    let mut b = vec![0.0; n];
    for (u, &w) in history.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (bi, &ui) in b.iter_mut().zip(u) {
            *bi += w * ui;
        }
    }
    b
}

/// `b^m = sum_{k<m} C_{m,k} u^k`.
pub fn s1_rhs(state: &SolveState, weights: &L1Weights) -> Result<Vec<f64>> {
    let m = weights.m;
    if m == 0 || state.history().len() < m || weights.weights.len() != m {
        return Err(Error::InvalidArgument(format!(
            "L1 weights for step {m} need {m} stored vectors, have {}",
            state.history().len()
        )));
    }
    Ok(weighted_history(&state.history()[..m], &weights.weights))
}

/// `b_i` where `prev_mask_i` is on, `u_prev_i` where the node is in contact.
pub fn memory_truncate(b: &[f64], prev_mask: &Mask, u_prev: &[f64]) -> Result<Vec<f64>> {
    check_len(b.len(), prev_mask.len())?;
    check_len(b.len(), u_prev.len())?;
    Ok(b.iter()
        .zip(&prev_mask.bits)
        .zip(u_prev)
        .map(|((&bi, &on), &up)| if on { bi } else { up })
        .collect())
}

/// `b^m = u^0 - sum_{j=1}^{m-1} c_j (u^{m-j} - u^0)` for `m = current_step + 1`.
///
/// Evaluated as `(1 + sum c_j) u^0 - sum c_j u^{m-j}`, which is exact at
/// `alpha = 1` where the coefficient of `u^0` vanishes.
pub fn s2_rhs(state: &SolveState, cq: &CQWeights, u0: &[f64]) -> Result<Vec<f64>> {
    let m = state.current_step() + 1;
    if cq.weights.len() < m {
        return Err(Error::InvalidArgument(format!(
            "step {m} needs {m} GL weights, have {}",
            cq.weights.len()
        )));
    }
    check_len(state.latest().len(), u0.len())?;
    let c = &cq.weights;
    let coeff_u0 = 1.0 + c[1..m].iter().sum::<f64>();
    let mut b: Vec<f64> = u0.iter().map(|&v| coeff_u0 * v).collect();
    let history = state.history();
    for j in 1..m {
        if c[j] == 0.0 {
            continue;
        }
        for (bi, &ui) in b.iter_mut().zip(&history[m - j]) {
            *bi -= c[j] * ui;
        }
    }
    Ok(b)
}

fn semi_implicit(
    input: &StepInput<'_>,
    ctx: &SchemeContext,
    rhs: Vec<f64>,
    scale: f64,
) -> Result<Vec<f64>> {
    let psi = input.spec.psi();
    let u_prev = input.state.latest();
    let mask = heaviside_mask(u_prev, psi)?;
    let rhs = if ctx.truncate_memory {
        memory_truncate(&rhs, &mask, u_prev)?
    } else {
        rhs
    };
    let system = masked_system(&mask, scale, &ctx.stencil)?;
    let u = thomas_solve(&system, &rhs)?;
    let mut u = project_onto_obstacle(&u, psi)?;
    settle_contacts(&mut u, psi);
    Ok(u)
}

/// One S1 step; returns `u^m`.
pub fn step_s1(input: StepInput<'_>, ctx: &mut SchemeContext) -> Result<Vec<f64>> {
    input.check(SchemeKind::S1)?;
    let weights = ctx.l1_weights(input.step_index);
    let rhs = s1_rhs(input.state, &weights);
    ctx.recycle(weights);
    let scale = ctx.g() * input.spec.gamma_alpha();
    semi_implicit(&input, ctx, rhs?, scale)
}

/// One S2 step; returns `u^m`.
pub fn step_s2(input: StepInput<'_>, ctx: &mut SchemeContext) -> Result<Vec<f64>> {
    input.check(SchemeKind::S2)?;
    let cq = ctx.cq_for(input.step_index)?;
    let rhs = s2_rhs(input.state, cq, input.spec.u0())?;
    semi_implicit(&input, ctx, rhs, input.spec.gamma_alpha())
}

/// One S3 step; returns `u^m` and the Picard trace.
pub fn step_s3(input: StepInput<'_>, ctx: &mut SchemeContext) -> Result<(Vec<f64>, PicardTrace)> {
    input.check(SchemeKind::S3)?;
    let psi = input.spec.psi();
    let n = psi.len();
    let scale = ctx.g() * input.spec.gamma_alpha();

    let weights = ctx.l1_weights(input.step_index);
    let memory = s1_rhs(input.state, &weights);
    ctx.recycle(weights);
    let memory = memory?;
    let a_psi = ctx.stencil.apply(psi);
    let b: Vec<f64> = (0..n)
        .map(|i| memory[i] - psi[i] - scale * a_psi[i])
        .collect();

    let mut active = Mask::all(n, false);
    let mut iterations = 0;
    let x = loop {
        iterations += 1;
        let system = column_masked_system(&active, scale, &ctx.stencil)?;
        let x = thomas_solve(&system, &b)?;
        let next = Mask {
            bits: x.iter().map(|&v| v > 0.0).collect(),
        };
        if next == active {
            break x;
        }
        if iterations >= ctx.max_picard {
            return Err(Error::PicardDiverged {
                step: input.step_index,
                iterations,
            });
        }
        active = next;
    };
    let u: Vec<f64> = psi.iter().zip(&x).map(|(&p, &xi)| p + xi.max(0.0)).collect();

    #[cfg(debug_assertions)]
    {
        let r = analysis::s3_complementarity_residual(&u, psi, &memory, scale, &ctx.stencil);
        let bound = 1e-10 * (1.0 + scale);
        debug_assert!(
            r <= bound,
            "S3 step {} complementarity residual {r:e} > {bound:e}",
            input.step_index
        );
    }

    Ok((
        u,
        PicardTrace {
            iterations,
            final_mask: active,
            converged: true,
        },
    ))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `max(|u^m - u^{m-1}|_inf, |(u^m - psi) . A u^m|_inf) < tol`.
pub fn stop_criterion(u_m: &[f64], u_prev: &[f64], psi: &[f64], stencil: &TriDiag, tol: f64) -> bool {
    let increment = max_abs_diff(u_m, u_prev);
    if !(increment < tol) {
        return false;
    }
    let au = stencil.apply(u_m);
    let residual = u_m
        .iter()
        .zip(psi)
        .zip(&au)
        .map(|((&u, &p), &a)| ((u - p) * a).abs())
        .fold(0.0, f64::max);
    residual < tol
}

/// Drives one scheme step by step over an owned [`SolveState`].
#[derive(Debug)]
pub struct Stepper<'a> {
    spec: &'a ProblemSpec,
    ctx: SchemeContext,
    state: SolveState,
}

impl<'a> Stepper<'a> {
    pub fn new(spec: &'a ProblemSpec, options: &RunOptions) -> Result<Self> {
        let steps = spec.time().m_steps();
        let cap = options.step_budget.map_or(steps, |b| b.min(steps));
        Ok(Stepper {
            spec,
            ctx: SchemeContext::new(spec, options, cap)?,
            state: SolveState::new(spec),
        })
    }

    pub fn state(&self) -> &SolveState {
        &self.state
    }

    pub fn into_state(self) -> SolveState {
        self.state
    }

    pub fn stencil(&self) -> &TriDiag {
        self.ctx.stencil()
    }

    /// Compute and store the next step. Returns the Picard trace for S3.
    pub fn advance(&mut self) -> Result<Option<PicardTrace>> {
        let input = StepInput::next(self.spec, &self.state);
        let psi = self.spec.psi();
        match self.spec.scheme() {
            SchemeKind::S1 => {
                let u = step_s1(input, &mut self.ctx)?;
                self.state.push(u, psi, 1, None);
                Ok(None)
            }
            SchemeKind::S2 => {
                let u = step_s2(input, &mut self.ctx)?;
                self.state.push(u, psi, 1, None);
                Ok(None)
            }
            SchemeKind::S3 => {
                let (u, trace) = step_s3(input, &mut self.ctx)?;
                self.state.push(u, psi, trace.iterations, Some(trace.iterations));
                Ok(Some(trace))
            }
        }
    }

    /// Stopping test on the two newest vectors.
    pub fn should_stop(&self) -> bool {
        let h = self.state.history();
        let m = h.len() - 1;
        m >= 1 && stop_criterion(&h[m], &h[m - 1], self.spec.psi(), self.ctx.stencil(), self.spec.tol())
    }
}

/// Run with default options.
pub fn run(spec: &ProblemSpec) -> Result<(SolveState, RunReport)> {
    run_with(spec, &RunOptions::default())
}

/// Iterate from `m = 1` until the stopping test fires, the horizon `M` is
/// reached, or the step budget runs out.
pub fn run_with(spec: &ProblemSpec, options: &RunOptions) -> Result<(SolveState, RunReport)> {
    let horizon_steps = spec.time().m_steps();
    let cap = options.step_budget.map_or(horizon_steps, |b| b.min(horizon_steps));
    let mut stepper = Stepper::new(spec, options)?;
    let mut stopped_at = None;
    for m in 1..=cap {
        stepper.advance()?;
        if options.stop_on_tolerance && stepper.should_stop() {
            stopped_at = Some(m);
            break;
        }
    }
    let state = stepper.into_state();
    let tau = spec.time().tau();
    let picard = state.picard_counts();
    let avg_picard = (spec.scheme() == SchemeKind::S3 && !picard.is_empty())
        .then(|| picard.iter().sum::<usize>() as f64 / picard.len() as f64);
    let converged = stopped_at.is_some();
    let report = RunReport {
        scheme: spec.scheme(),
        fc_time: analysis::fc_time(&state, tau),
        stop_time: stopped_at.map(|m| m as f64 * tau),
        n_iterations: state.current_step(),
        avg_picard,
        n_linear_systems: state.ls_count(),
        converged,
        budget_exhausted: !converged && cap < horizon_steps,
        final_solution: state.latest().to_vec(),
    };
    debug!(
        "{} alpha={} N={}: {} steps, converged={}",
        spec.scheme(),
        spec.alpha(),
        spec.grid().n_intervals(),
        report.n_iterations,
        converged
    );
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::l1_weights;
    use crate::problem::{make_grid, sample_problem, TimeGrid};

    fn spec(alpha: f64, scheme: SchemeKind, m_steps: usize) -> ProblemSpec {
        let grid = make_grid(-1.0, 1.0, 32).unwrap();
        let h = grid.h();
        let tau = if alpha > 0.0 { (15.0 * h * h).powf(1.0 / alpha) } else { 1.0 };
        sample_problem(
            alpha,
            grid,
            TimeGrid::new(tau, m_steps).unwrap(),
            |x| 0.7 - 0.7 * x * x,
            |x| 0.5 - 2.0 * x * x,
            scheme,
            1e-4,
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_obstacle(&[0.1, 0.9], &[0.5, 0.5]).unwrap(), vec![0.5, 0.9]);
        assert_eq!(project_onto_obstacle(&[0.6, 0.9], &[0.5, 0.5]).unwrap(), vec![0.6, 0.9]);
        assert_eq!(project_onto_obstacle(&[0.5, 0.2], &[0.5, 0.2]).unwrap(), vec![0.5, 0.2]);
        assert!(project_onto_obstacle(&[0.5], &[0.5, 0.2]).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn s1_rhs_examples() {
        let psi = [0.0, 0.0];
        let state = SolveState::from_history(vec![vec![1.0, 1.0]], &psi).unwrap();
        assert_eq!(s1_rhs(&state, &l1_weights(0.5, 1).unwrap()).unwrap(), vec![1.0, 1.0]);

        let state =
            SolveState::from_history(vec![vec![1.0, 1.0], vec![0.5, 0.5]], &psi).unwrap();
        let b = s1_rhs(&state, &l1_weights(0.5, 2).unwrap()).unwrap();
        let expected = (2f64.sqrt() - 1.0) + (2.0 - 2f64.sqrt()) * 0.5;
        assert!((b[0] - expected).abs() < 1e-15);
        assert!((b[0] - 0.70711).abs() < 1e-5);

        let state = SolveState::from_history(
            vec![vec![1.0, 1.0], vec![0.7, 0.3], vec![0.2, 0.1]],
            &psi,
        )
        .unwrap();
        assert_eq!(s1_rhs(&state, &l1_weights(1.0, 3).unwrap()).unwrap(), vec![0.2, 0.1]);
        assert!(s1_rhs(&state, &l1_weights(0.5, 4).unwrap()).is_err());
    }

    #[test]
    fn constant_history_is_reproduced() {
        let psi = [0.0; 3];
        let c = vec![0.3, 0.8, 0.1];
        for alpha in [0.1, 0.4, 0.9] {
            let state = SolveState::from_history(vec![c.clone(); 200], &psi).unwrap();
            let b = s1_rhs(&state, &l1_weights(alpha, 200).unwrap()).unwrap();
            assert!(max_abs_diff(&b, &c) < 1e-12);
        }
    }

    #[test]
    fn truncation_examples() {
        let b = [0.9, 0.9];
        let up = [0.8, 0.3];
        assert_eq!(memory_truncate(&b, &Mask::all(2, true), &up).unwrap(), vec![0.9, 0.9]);
        assert_eq!(memory_truncate(&b, &Mask::all(2, false), &up).unwrap(), vec![0.8, 0.3]);
        let mixed = Mask {
            bits: vec![true, false],
        };
        assert_eq!(memory_truncate(&b, &mixed, &up).unwrap(), vec![0.9, 0.3]);
    }

    #[test]
    fn s2_rhs_examples() {
        let psi = [0.0];
        let u0 = [1.0];
        let state = SolveState::from_history(vec![u0.to_vec()], &psi).unwrap();
        let cq = cq_weights(0.5, 4).unwrap();
        assert_eq!(s2_rhs(&state, &cq, &u0).unwrap(), vec![1.0]);

        let state = SolveState::from_history(vec![vec![1.0], vec![0.5]], &psi).unwrap();
        assert_eq!(s2_rhs(&state, &cq, &u0).unwrap(), vec![0.75]);

        let state =
            SolveState::from_history(vec![vec![1.0], vec![0.5], vec![0.37], vec![0.21]], &psi)
                .unwrap();
        let cq1 = cq_weights(1.0, 4).unwrap();
        assert_eq!(s2_rhs(&state, &cq1, &u0).unwrap(), vec![0.21]);
        assert!(s2_rhs(&state, &cq_weights(0.5, 2).unwrap(), &u0).is_err());
    }

    #[test]
    fn frozen_full_contact_for_semi_implicit() {
        for scheme in [SchemeKind::S1, SchemeKind::S2] {
            let spec = spec(0.5, scheme, 10);
            let history = vec![spec.u0().to_vec(), spec.psi().to_vec()];
            let state = SolveState::from_history(history, spec.psi()).unwrap();
            let mut ctx = SchemeContext::new(&spec, &RunOptions::default(), 10).unwrap();
            let input = StepInput::next(&spec, &state);
            let u = match scheme {
                SchemeKind::S1 => step_s1(input, &mut ctx).unwrap(),
                _ => step_s2(input, &mut ctx).unwrap(),
            };
            assert_eq!(u, spec.psi());
        }
    }

    #[test]
    fn s3_nonpositive_rhs_settles_in_one_iteration() {
        let grid = make_grid(-1.0, 1.0, 16).unwrap();
        let n = grid.len();
        let spec = ProblemSpec::from_nodal(
            1.0,
            grid,
            TimeGrid::new(0.05, 10).unwrap(),
            vec![0.5; n],
            vec![0.2; n],
            (0.0, 0.0),
            SchemeKind::S3,
            1e-4,
        )
        .unwrap();
        let state =
            SolveState::from_history(vec![spec.u0().to_vec(), spec.psi().to_vec()], spec.psi())
                .unwrap();
        let mut ctx = SchemeContext::new(&spec, &RunOptions::default(), 10).unwrap();
        let (u, trace) = step_s3(StepInput::next(&spec, &state), &mut ctx).unwrap();
        assert_eq!(trace.iterations, 1);
        assert!(trace.converged);
        assert_eq!(trace.final_mask, Mask::all(n, false));
        assert_eq!(u, spec.psi());
    }

    #[test]
    fn step_rejects_wrong_scheme_or_index() {
        let spec = spec(0.5, SchemeKind::S1, 10);
        let state = SolveState::new(&spec);
        let mut ctx = SchemeContext::new(&spec, &RunOptions::default(), 10).unwrap();
        assert!(step_s2(StepInput::next(&spec, &state), &mut ctx).is_err());
        let bad = StepInput {
            spec: &spec,
            state: &state,
            step_index: 3,
        };
        assert!(step_s1(bad, &mut ctx).is_err());
    }

    #[test]
    fn stop_criterion_cases() {
        let a = laplacian_stencil(5).unwrap();
        let psi = [0.1, -0.3, 0.2, 0.0, 0.4];
        assert!(stop_criterion(&psi, &psi, &psi, &a, 1e-14));

        let psi = [-1.0, -1.0, 0.5, -1.0, -1.0];
        let u = [0.5 / 3.0, 1.0 / 3.0, 0.5, 1.0 / 3.0, 0.5 / 3.0];
        assert!(stop_criterion(&u, &u, &psi, &a, 1e-12));

        let moved = [0.5 / 3.0, 1.0 / 3.0 + 1e-3, 0.5, 1.0 / 3.0, 0.5 / 3.0];
        assert!(!stop_criterion(&moved, &u, &psi, &a, 1e-4));
        let bent = [0.2, 0.3, 0.5, 1.0 / 3.0, 0.5 / 3.0];
        assert!(!stop_criterion(&bent, &bent, &psi, &a, 1e-4));
    }

    #[test]
    fn empty_run() {
        let spec = spec(0.5, SchemeKind::S1, 0);
        let (state, report) = run(&spec).unwrap();
        assert_eq!(state.history().len(), 1);
        assert!(!report.converged);
        assert_eq!(report.stop_time, None);
        assert_eq!(report.n_iterations, 0);
        assert_eq!(report.final_solution, spec.u0());
    }

    #[test]
    fn alpha_one_s1_is_semi_implicit_euler() {
        let spec = spec(1.0, SchemeKind::S1, 1);
        let (state, _) = run(&spec).unwrap();
        let a = laplacian_stencil(spec.grid().len()).unwrap();
        let mask = heaviside_mask(spec.u0(), spec.psi()).unwrap();
        let sys = masked_system(&mask, spec.gamma_alpha(), &a).unwrap();
        let direct = thomas_solve(&sys, spec.u0()).unwrap();
        let direct = project_onto_obstacle(&direct, spec.psi()).unwrap();
        assert!(max_abs_diff(&direct, &state.history()[1]) < 1e-15);
    }

    #[test]
    fn budget_cuts_run() {
        let spec = spec(0.5, SchemeKind::S3, 50);
        let opts = RunOptions {
            step_budget: Some(5),
            ..RunOptions::default()
        };
        let (state, report) = run_with(&spec, &opts).unwrap();
        assert_eq!(state.current_step(), 5);
        assert!(report.budget_exhausted);
        assert!(!report.converged);
        assert_eq!(report.n_linear_systems, state.picard_counts().iter().sum::<usize>());
        assert!(report.avg_picard.is_some());
    }

    #[test]
    fn picard_cap_is_an_error() {
        let spec = spec(0.5, SchemeKind::S3, 5);
        let opts = RunOptions {
            max_picard: Some(1),
            ..RunOptions::default()
        };
        assert!(matches!(run_with(&spec, &opts), Err(Error::PicardDiverged { .. })));
    }
}
