//! Grids, problem data and per-run state shared by every scheme.
//!
//! Only interior nodes are ever stored: the Dirichlet data is identically
//! zero, so boundary values never enter a vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};

/// Absolute floor of the contact tolerance. A node is "in contact" when
/// `u_i - psi_i <= CONTACT_EPS * max(1, |psi_i|)`.
pub const CONTACT_EPS: f64 = 1e-12;

/// Contact tolerance for a single obstacle value.
#[inline]
pub fn contact_tolerance(psi: f64) -> f64 {
    CONTACT_EPS * psi.abs().max(1.0)
}

/// Uniform mesh on `(a, b)` holding the `N - 1` interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_intervals: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of sub-intervals `N`.
    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior coordinates `x_i = a + i h`, `i = 1..N-1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of interior nodes, `N - 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Build the uniform grid with `n_intervals` sub-intervals on `(a, b)`.
pub fn make_grid(a: f64, b: f64, n_intervals: usize) -> Result<Grid1D> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::InvalidGrid(format!("need a < b, got a = {a}, b = {b}")));
    }
    if n_intervals < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 intervals, got {n_intervals}"
        )));
    }
    let h = (b - a) / n_intervals as f64;
    let nodes = (1..n_intervals).map(|i| a + i as f64 * h).collect();
    Ok(Grid1D {
        a,
        b,
        n_intervals,
        h,
        nodes,
    })
}

/// Uniform time stepping: `M` steps of size `tau`, horizon `T = M tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tau: f64,
    m_steps: usize,
    horizon: f64,
}

impl TimeGrid {
    /// `m_steps = 0` is accepted and describes an empty run.
    pub fn new(tau: f64, m_steps: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("tau must be positive, got {tau}")));
        }
        Ok(TimeGrid {
            tau,
            m_steps,
            horizon: tau * m_steps as f64,
        })
    }

    /// Number of steps is `round(T / tau)`.
    pub fn from_horizon(tau: f64, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon must be non-negative, got {horizon}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("tau must be positive, got {tau}")));
        }
        Self::new(tau, (horizon / tau).round() as usize)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn m_steps(&self) -> usize {
        self.m_steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `t^m = m tau`.
    pub fn time_at(&self, m: usize) -> f64 {
        m as f64 * self.tau
    }
}

/// Which of the three time-stepping schemes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// L1 Caputo kernel, semi-implicit Heaviside system.
    S1,
    /// Grünwald–Letnikov kernel, semi-implicit Heaviside system.
    S2,
    /// L1 Caputo kernel, implicit complementarity step solved by Picard iterations.
    S3,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::S1, SchemeKind::S2, SchemeKind::S3];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::S1 => "S1",
            SchemeKind::S2 => "S2",
            SchemeKind::S3 => "S3",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S1" | "s1" => Ok(SchemeKind::S1),
            "S2" | "s2" => Ok(SchemeKind::S2),
            "S3" | "s3" => Ok(SchemeKind::S3),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A fully sampled, validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    alpha: f64,
    grid: Grid1D,
    time: TimeGrid,
    u0: Vec<f64>,
    psi: Vec<f64>,
    psi_boundary: (f64, f64),
    scheme: SchemeKind,
    tol: f64,
    gamma_alpha: f64,
}

/// `tau^alpha / h^2`. At `alpha = 0` this is `1 / h^2` for any `tau`.
pub fn caputo_ratio(alpha: f64, tau: f64, h: f64) -> f64 {
    tau.powf(alpha) / (h * h)
}

/// Sample `u0_fn` and `psi_fn` on the interior nodes and validate the result.
#[allow(clippy::too_many_arguments)]
pub fn sample_problem(
    alpha: f64,
    grid: Grid1D,
    time: TimeGrid,
    u0_fn: impl Fn(f64) -> f64,
    psi_fn: impl Fn(f64) -> f64,
    scheme: SchemeKind,
    tol: f64,
) -> Result<ProblemSpec> {
    let u0 = grid.nodes().iter().map(|&x| u0_fn(x)).collect();
    let psi = grid.nodes().iter().map(|&x| psi_fn(x)).collect();
    let psi_boundary = (psi_fn(grid.a()), psi_fn(grid.b()));
    ProblemSpec::from_nodal(alpha, grid, time, u0, psi, psi_boundary, scheme, tol)
}

impl ProblemSpec {
    /// Build from tabulated interior values.
    #[allow(clippy::too_many_arguments)]
    pub fn from_nodal(
        alpha: f64,
        grid: Grid1D,
        time: TimeGrid,
        u0: Vec<f64>,
        psi: Vec<f64>,
        psi_boundary: (f64, f64),
        scheme: SchemeKind,
        tol: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
        }
        check_len(grid.len(), u0.len())?;
        check_len(grid.len(), psi.len())?;
        if let Some(bad) = u0.iter().chain(psi.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite nodal value {bad}")));
        }
        for ((&x, &u), &p) in grid.nodes().iter().zip(&u0).zip(&psi) {
            // strict: equality anywhere rejects the input
            if u - p <= 0.0 {
                return Err(Error::InitialDatumNotAboveObstacle { x, gap: u - p });
            }
        }
        for (x, v) in [(grid.a(), psi_boundary.0), (grid.b(), psi_boundary.1)] {
            if !(v <= 0.0) {
                return Err(Error::ObstacleAboveBoundary { x, value: v });
            }
        }
        let gamma_alpha = caputo_ratio(alpha, time.tau(), grid.h());
        Ok(ProblemSpec {
            alpha,
            grid,
            time,
            u0,
            psi,
            psi_boundary,
            scheme,
            tol,
            gamma_alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn psi_boundary(&self) -> (f64, f64) {
        self.psi_boundary
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `tau^alpha / h^2`.
    pub fn gamma_alpha(&self) -> f64 {
        self.gamma_alpha
    }

    /// Same data with a different scheme.
    pub fn with_scheme(&self, scheme: SchemeKind) -> ProblemSpec {
        ProblemSpec {
            scheme,
            ..self.clone()
        }
    }

    /// Same spatial data with new fractional order, time grid and tolerance.
    pub fn with_dynamics(&self, alpha: f64, time: TimeGrid, tol: f64) -> Result<ProblemSpec> {
        ProblemSpec::from_nodal(
            alpha,
            self.grid.clone(),
            time,
            self.u0.clone(),
            self.psi.clone(),
            self.psi_boundary,
            self.scheme,
            tol,
        )
    }
}

/// Contact indicator for one vector: `true` where `u_i <= psi_i + eps_i`.
pub fn contact_mask(u: &[f64], psi: &[f64]) -> Vec<bool> {
    u.iter()
        .zip(psi)
        .map(|(&ui, &pi)| ui - pi <= contact_tolerance(pi))
        .collect()
}

/// Full solution history of one run. Fractional schemes need every past
/// step, so nothing is discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveState {
    history: Vec<Vec<f64>>,
    contact_masks: Vec<Vec<bool>>,
    ls_count: usize,
    picard_counts: Vec<usize>,
}

impl SolveState {
    pub fn new(spec: &ProblemSpec) -> Self {
        let u0 = spec.u0().to_vec();
        let mask = contact_mask(&u0, spec.psi());
        SolveState {
            history: vec![u0],
            contact_masks: vec![mask],
            ls_count: 0,
            picard_counts: Vec::new(),
        }
    }

    /// Start from an arbitrary history (each entry must dominate `psi`).
    pub fn from_history(history: Vec<Vec<f64>>, psi: &[f64]) -> Result<Self> {
        if history.is_empty() {
            return Err(Error::InvalidArgument("history must hold u^0".into()));
        }
        for u in &history {
            check_len(psi.len(), u.len())?;
        }
        let contact_masks = history.iter().map(|u| contact_mask(u, psi)).collect();
        Ok(SolveState {
            history,
            contact_masks,
            ls_count: 0,
            picard_counts: Vec::new(),
        })
    }

    /// Index `m` of the newest stored vector.
    pub fn current_step(&self) -> usize {
        self.history.len() - 1
    }

    pub fn history(&self) -> &[Vec<f64>] {
        &self.history
    }

    pub fn latest(&self) -> &[f64] {
        self.history.last().expect("history always holds u^0")
    }

    /// One mask per stored vector, `contact_masks()[m]` belongs to `u^m`.
    pub fn contact_masks(&self) -> &[Vec<bool>] {
        &self.contact_masks
    }

    /// Linear systems solved so far.
    pub fn ls_count(&self) -> usize {
        self.ls_count
    }

    /// Picard iterations per step (S3 only).
    pub fn picard_counts(&self) -> &[usize] {
        &self.picard_counts
    }

    /// Append `u^{m}` after a completed step.
    pub fn push(&mut self, u: Vec<f64>, psi: &[f64], systems: usize, picard: Option<usize>) {
        debug_assert_eq!(u.len(), psi.len());
        debug_assert!(
            u.iter().zip(psi).all(|(&ui, &pi)| ui >= pi - 1e-12),
            "step {} violates the obstacle",
            self.history.len()
        );
        self.contact_masks.push(contact_mask(&u, psi));
        self.history.push(u);
        self.ls_count += systems;
        if let Some(p) = picard {
            self.picard_counts.push(p);
        }
    }
}

/// Summary of one run, one row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scheme: SchemeKind,
    /// First time after which the contact set never changes again.
    pub fc_time: Option<f64>,
    /// Exit time, set only when the stopping test fired.
    pub stop_time: Option<f64>,
    pub n_iterations: usize,
    /// Mean Picard iterations per step, S3 only.
    pub avg_picard: Option<f64>,
    pub n_linear_systems: usize,
    pub converged: bool,
    /// The run was cut by the step budget before reaching its horizon.
    pub budget_exhausted: bool,
    pub final_solution: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1(alpha: f64, n: usize) -> Result<ProblemSpec> {
        let grid = make_grid(-1.0, 1.0, n)?;
        let time = TimeGrid::new(0.01, 10)?;
        sample_problem(
            alpha,
            grid,
            time,
            |x| 0.7 - 0.7 * x * x,
            |x| 0.5 - 2.0 * x * x,
            SchemeKind::S1,
            1e-4,
        )
    }

    #[test]
    fn grid_small() {
        let g = make_grid(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), &[-0.5, 0.0, 0.5]);
        assert_eq!(g.h(), 0.5);
        let g = make_grid(-1.0, 1.0, 32).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g.h(), 0.0625);
        let g = make_grid(0.0, 1.0, 2).unwrap();
        assert_eq!(g.nodes(), &[0.5]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(1.0, 1.0, 4), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1.0, -1.0, 4), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(-1.0, 1.0, 1), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(-1.0, 1.0, 0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn grid_is_symmetric() {
        for n in [2, 4, 32, 64, 128] {
            let g = make_grid(-1.5, 1.5, n).unwrap();
            let xs = g.nodes();
            for i in 0..xs.len() {
                assert!((xs[i] + xs[xs.len() - 1 - i]).abs() < 1e-14);
            }
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn time_grid_horizon() {
        let t = TimeGrid::new(0.1, 30).unwrap();
        assert!((t.horizon() - 3.0).abs() < 1e-12 * 3.0);
        let t = TimeGrid::from_horizon(0.038, 10.0).unwrap();
        assert_eq!(t.m_steps(), 263);
        assert!(TimeGrid::new(0.0, 5).is_err());
        assert!(TimeGrid::new(-1.0, 5).is_err());
    }

    #[test]
    fn examples_validate() {
        let spec = example1(0.5, 32).unwrap();
        assert!(spec
            .u0()
            .iter()
            .zip(spec.psi())
            .all(|(u, p)| u - p > 0.0));
        let rel = (spec.gamma_alpha() - 0.01f64.sqrt() / 0.0625f64.powi(2)).abs();
        assert!(rel < 1e-12 * spec.gamma_alpha());

        let grid = make_grid(-1.0, 1.0, 32).unwrap();
        let time = TimeGrid::new(0.01, 10).unwrap();
        sample_problem(
            0.5,
            grid,
            time,
            |x| 1.0 - x * x,
            |x| 0.5 - (2.0 * x * x - 0.5).powi(2),
            SchemeKind::S3,
            1e-4,
        )
        .unwrap();
    }

    #[test]
    fn degenerate_equal_data_is_rejected() {
        let grid = make_grid(-1.0, 1.0, 8).unwrap();
        let time = TimeGrid::new(0.01, 10).unwrap();
        let err = sample_problem(0.5, grid, time, |_| 0.0, |_| 0.0, SchemeKind::S1, 1e-4);
        assert!(matches!(err, Err(Error::InitialDatumNotAboveObstacle { .. })));
    }

    #[test]
    fn positive_boundary_obstacle_is_rejected() {
        let grid = make_grid(-1.0, 1.0, 8).unwrap();
        let time = TimeGrid::new(0.01, 10).unwrap();
        let err = sample_problem(0.5, grid, time, |_| 2.0, |_| 0.1, SchemeKind::S1, 1e-4);
        assert!(matches!(err, Err(Error::ObstacleAboveBoundary { .. })));
    }

    #[test]
    fn zero_boundary_obstacle_is_accepted() {
        let grid = make_grid(-1.0, 1.0, 8).unwrap();
        let time = TimeGrid::new(0.01, 10).unwrap();
        sample_problem(
            0.5,
            grid,
            time,
            |x| 2.0 * (1.0 - x * x),
            |x| 1.0 - x * x,
            SchemeKind::S1,
            1e-4,
        )
        .unwrap();
    }

    #[test]
    fn alpha_range_checked() {
        assert!(matches!(example1(1.5, 8), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(example1(-0.1, 8), Err(Error::AlphaOutOfRange(_))));
        example1(0.0, 8).unwrap();
        example1(1.0, 8).unwrap();
    }

    #[test]
    fn gamma_alpha_decreases_with_alpha_for_small_tau() {
        let h = 0.0625;
        for tau in [0.9, 0.5, 0.1, 0.01] {
            let gs: Vec<f64> = (0..=10).map(|k| caputo_ratio(k as f64 / 10.0, tau, h)).collect();
            assert!(gs.windows(2).all(|w| w[1] < w[0]), "tau = {tau}: {gs:?}");
        }
    }

    #[test]
    fn scheme_kind_parses() {
        assert_eq!("S2".parse::<SchemeKind>().unwrap(), SchemeKind::S2);
        assert!("S4".parse::<SchemeKind>().is_err());
    }
}
