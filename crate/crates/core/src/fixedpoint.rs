//! Picard iteration `v_{k+1} = V(v_k)` in the `W_T` norm and checks of the
//! assembled solution `u = v + w`.

use log::{info, warn};

use crate::error::{Error, Result};
use crate::fieldcalc::{
    advect, curl2d, div, grad, interior_nodes, l2, l2_values, laplacian_vector, FieldHistory, ScalarField, VectorField,
};
use crate::geometry::dot;
use crate::linparab::{wt_norm, VelocityMap, VelocityMapInput};
use crate::stokes::{solve_stokes, BoundarySeries, StokesRun, StokesSolution, TimeScheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub tol_fix: f64,
    pub max_iter: usize,
    /// Consecutive non-contracting ratios that abort the iteration.
    pub contraction_window: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { tol_fix: 1e-8, max_iter: 30, contraction_window: 2 }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fix > 0.0) || self.max_iter < 2 || self.contraction_window == 0 {
            return Err(Error::InvalidSpec(format!("bad Picard configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardIter {
    pub iter: usize,
    pub delta: f64,
    /// `delta_k / delta_{k-1}`; NaN on the first iteration.
    pub ratio: f64,
}

/// Everything needed to run the iteration.
#[derive(Debug, Clone)]
pub struct NsProblem {
    pub u0: VectorField,
    pub a: BoundarySeries,
    pub mu: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    pub scheme: TimeScheme,
}

impl NsProblem {
    pub fn new(u0: VectorField, a: BoundarySeries, mu: f64, t_final: f64) -> Self {
        Self { u0, a, mu, t_final, dt: None, scheme: TimeScheme::default() }
    }
}

#[derive(Debug, Clone)]
pub struct NsSolution {
    pub v: FieldHistory<VectorField>,
    pub w: FieldHistory<VectorField>,
    pub u: FieldHistory<VectorField>,
    /// Pressure of the linearized problem at the fixed point.
    pub p: FieldHistory<ScalarField>,
    /// Harmonic pressure of the Stokes part.
    pub q: FieldHistory<ScalarField>,
    pub trace: Vec<PicardIter>,
    pub stokes: StokesSolution,
    pub mu: f64,
}

impl NsSolution {
    pub fn dt(&self) -> f64 {
        self.u.dt
    }

    /// Largest ratio after the first iteration, ignoring steps already at
    /// the tolerance.
    pub fn max_ratio_after_first(&self) -> f64 {
        self.trace.iter().skip(1).map(|t| t.ratio).filter(|r| r.is_finite()).fold(0.0, f64::max)
    }
}

fn history_diff(a: &FieldHistory<VectorField>, b: &FieldHistory<VectorField>) -> FieldHistory<VectorField> {
    FieldHistory::from_snapshots(a.t0, a.dt, a.iter().zip(b.iter()).map(|(x, y)| x.sub(y)).collect())
}

fn history_sum(a: &FieldHistory<VectorField>, b: &FieldHistory<VectorField>) -> FieldHistory<VectorField> {
    FieldHistory::from_snapshots(a.t0, a.dt, a.iter().zip(b.iter()).map(|(x, y)| x.add(y)).collect())
}

/// Solve Navier-Stokes as `u = v + w` with `v` the fixed point of the map.
pub fn picard_solve(prob: &NsProblem, cfg: &PicardConfig) -> Result<NsSolution> {
    cfg.validate()?;
    let grid = prob.u0.grid().clone();
    let run = StokesRun { dt: prob.dt, scheme: prob.scheme, ..StokesRun::new(prob.u0.clone(), prob.a.clone(), prob.mu, prob.t_final) };
    let stokes = solve_stokes(&run)?;
    let w = stokes.w.clone();
    let map = VelocityMap::new(grid.clone(), prob.mu, stokes.dt)?;
    if let Some(fr) = map.neumann().frame() {
        let om = curl2d(&prob.u0);
        let a0 = prob.a.at(0.0);
        let gap = fr
            .components
            .iter()
            .filter(|c| !c.artificial)
            .flat_map(|c| c.start..c.start + c.len)
            .fold(0.0f64, |m, b| m.max((om.values()[fr.nodes[b].node] - a0[b]).abs()));
        if gap > 1e-2 * om.max_abs().max(1.0) {
            warn!("initial vorticity differs from the boundary data by {gap:.3e}; expect an initial layer");
        }
    }
    let mut v = FieldHistory::from_snapshots(0.0, w.dt, vec![VectorField::zeros(grid.clone()); w.len()]);
    let mut trace: Vec<PicardIter> = Vec::new();
    for iter in 1..=cfg.max_iter {
        let next = map.apply(&VelocityMapInput { beta: &v, w: &w, mu: prob.mu }, None)?;
        let delta = wt_norm(&history_diff(&next, &v))?;
        let ratio = trace.last().map_or(f64::NAN, |p| if p.delta > 0.0 { delta / p.delta } else { f64::NAN });
        trace.push(PicardIter { iter, delta, ratio });
        info!("picard iteration {iter}: delta {delta:.3e} ratio {ratio:.3}");
        v = next;
        if delta <= cfg.tol_fix {
            let u = history_sum(&v, &w);
            let p = map.pressures(&v, &w)?;
            let q = stokes.q.clone();
            return Ok(NsSolution { v, w, u, p, q, trace, stokes, mu: prob.mu });
        }
        let k = cfg.contraction_window;
        if trace.len() > k && trace[trace.len() - k..].iter().all(|t| t.ratio >= 1.0) {
            return Err(Error::NoContraction { ratios: trace.iter().map(|t| t.ratio).collect() });
        }
    }
    let delta = trace.last().map_or(f64::NAN, |t| t.delta);
    Err(Error::MaxIterExceeded { iterations: cfg.max_iter, delta })
}

/// `||V(v) - v||_{W_T}` for a converged solution.
pub fn fixed_point_defect(sol: &NsSolution) -> Result<f64> {
    let map = VelocityMap::new(sol.u.get(0).grid().clone(), sol.mu, sol.dt())?;
    let again = map.apply(&VelocityMapInput { beta: &sol.v, w: &sol.w, mu: sol.mu }, None)?;
    wt_norm(&history_diff(&again, &sol.v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    /// `||div v(t)||_2` per snapshot.
    pub div_v: Vec<f64>,
    pub div_u: Vec<f64>,
}

impl DivergenceReport {
    pub fn max_div_v(&self) -> f64 {
        self.div_v.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn max_div_u(&self) -> f64 {
        self.div_u.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn exceeds(&self, threshold: f64) -> bool {
        self.max_div_v() > threshold
    }
}

pub fn verify_incompressibility(sol: &NsSolution) -> DivergenceReport {
    DivergenceReport {
        div_v: sol.v.iter().map(|v| l2(&div(v))).collect(),
        div_u: sol.u.iter().map(|u| l2(&div(u))).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsResidual {
    /// `sup_t` of the interior L2 residual of the momentum equation.
    pub interior: f64,
    pub normal_max: f64,
    pub vorticity_max: f64,
    pub initial: f64,
}

/// Residuals of the momentum equation, the boundary conditions and the
/// initial condition. The pressure is recovered from `u` alone.
pub fn ns_residual(sol: &NsSolution, u0: &VectorField, a: &BoundarySeries) -> Result<NsResidual> {
    let grid = u0.grid().clone();
    let solver = crate::elliptic::NeumannSolver::new(grid.clone())?;
    let frame = solver.frame();
    let interior = interior_nodes(&grid, 1);
    let weights: Vec<f64> = interior.iter().map(|&k| grid.weights()[k]).collect();
    let ut = sol.u.derivatives()?;
    let mut out = NsResidual { interior: 0.0, normal_max: 0.0, vorticity_max: 0.0, initial: l2(&sol.u.get(0).sub(u0)) };
    for (n, u) in sol.u.iter().enumerate() {
        let an = a.at(sol.u.time(n));
        let p = solver.pressure_ns(u, &an, sol.mu)?;
        let r = ut[n].add(&advect(u, u)).add(&grad(&p)).sub(&laplacian_vector(u).scale(sol.mu));
        let rv: Vec<f64> = interior.iter().map(|&k| r.values()[k][0].hypot(r.values()[k][1])).collect();
        out.interior = out.interior.max(l2_values(&weights, &rv));
        if let Some(fr) = frame {
            let om = curl2d(u);
            let tr = u.trace(fr);
            for c in &fr.components {
                for b in c.start..c.start + c.len {
                    out.normal_max = out.normal_max.max(dot(tr[b], fr.nodes[b].normal).abs());
                    if !c.artificial {
                        out.vorticity_max = out.vorticity_max.max((om.values()[fr.nodes[b].node] - an[b]).abs());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `sup_t ||p_ns(u) - (p_v + q)||_2` with every pressure at zero mean.
pub fn compare_pressures(sol: &NsSolution, a: &BoundarySeries) -> Result<f64> {
    let grid = sol.u.get(0).grid().clone();
    let solver = crate::elliptic::NeumannSolver::new(grid)?;
    let mut worst = 0.0f64;
    for (n, u) in sol.u.iter().enumerate() {
        let p_ns = solver.pressure_ns(u, &a.at(sol.u.time(n)), sol.mu)?;
        let split = sol.p.get(n).add(sol.q.get(n)).recentered();
        worst = worst.max(l2(&p_ns.recentered().sub(&split)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, BoundaryFrame, DomainSpec};
    use crate::scenarios::InitialCondition;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_converges_at_once() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 12, 16).unwrap();
        let nb = BoundaryFrame::new(&g).unwrap().len();
        let prob = NsProblem { dt: Some(0.02), ..NsProblem::new(VectorField::zeros(g.clone()), BoundarySeries::zero(nb), 0.1, 0.1) };
        let sol = picard_solve(&prob, &PicardConfig::default()).unwrap();
        assert_eq!(sol.trace.len(), 1);
        assert!(sol.u.iter().all(|u| u.max_abs() == 0.0));
        assert_eq!(verify_incompressibility(&sol).max_div_v(), 0.0);
        let r = ns_residual(&sol, &prob.u0, &prob.a).unwrap();
        assert_eq!(r, NsResidual { interior: 0.0, normal_max: 0.0, vorticity_max: 0.0, initial: 0.0 });
        assert_eq!(compare_pressures(&sol, &prob.a).unwrap(), 0.0);
    }

    #[test]
    fn circulation_stays_put() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 16, 32).unwrap();
        let nb = BoundaryFrame::new(&g).unwrap().len();
        let u0 = InitialCondition::Circulation { c: 0.2 }.velocity(&g).unwrap();
        for mu in [0.1, 0.01] {
            let prob = NsProblem { dt: Some(0.005), ..NsProblem::new(u0.clone(), BoundarySeries::zero(nb), mu, 0.1) };
            let sol = picard_solve(&prob, &PicardConfig::default()).unwrap();
            let err = sol.u.iter().fold(0.0f64, |m, u| m.max(l2(&u.sub(&u0))));
            assert!(err < 1e-3, "mu {mu}: {err}");
            assert!(compare_pressures(&sol, &prob.a).unwrap() < 1e-9);
            assert!(fixed_point_defect(&sol).unwrap() <= 2.0 * PicardConfig::default().tol_fix);
        }
    }

    #[test]
    fn taylor_green_matches_decay() {
        let g = build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), 32, 32).unwrap();
        let u0 = InitialCondition::TaylorGreen { amp: 1.0 }.velocity(&g).unwrap();
        let prob = NsProblem { dt: Some(0.01), ..NsProblem::new(u0.clone(), BoundarySeries::Steady(Vec::new()), 0.05, 0.3) };
        let sol = picard_solve(&prob, &PicardConfig::default()).unwrap();
        for (n, u) in sol.u.iter().enumerate() {
            let exact = u0.scale((-2.0 * 0.05 * sol.u.time(n)).exp());
            assert!(l2(&u.sub(&exact)) / l2(&exact) < 1e-2);
        }
        assert!(sol.max_ratio_after_first() <= 2.0 / 3.0, "{:?}", sol.trace);
    }

    #[test]
    fn long_horizon_strong_flow_does_not_contract() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 12, 24).unwrap();
        let fr = BoundaryFrame::new(&g).unwrap();
        let ic = InitialCondition::Swirl { a: 4.0, b: 0.0, c: -2.0 };
        let u0 = ic.velocity(&g).unwrap();
        let a = crate::scenarios::BoundaryData::Sine { amp: 20.0, mode: 3 }.sample(0.0, &g, &fr, &ic);
        let prob = NsProblem { dt: Some(0.004), ..NsProblem::new(u0, BoundarySeries::Steady(a), 0.01, 2.0) };
        let cfg = PicardConfig { max_iter: 12, ..Default::default() };
        match picard_solve(&prob, &cfg) {
            Err(Error::NoContraction { .. }) | Err(Error::CFLViolation { .. }) => {}
            other => panic!("expected failure, got {:?}", other.map(|s| s.trace)),
        }
    }
}
