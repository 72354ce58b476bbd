//! Inviscid reference solver and the vanishing-viscosity sweep.
//!
//! Euler is integrated in vorticity form with RK2 and centered advection.
//! The velocity is recovered as `u = u0 + R(omega - omega0)` where `R`
//! solves `Delta s = -zeta` with `s` constant on each wall and returns
//! `curl s`; the wall constant is chosen so the correction carries no
//! circulation around the lower wall, which keeps Kelvin's circulation of
//! `u0` and makes Euler-steady data exactly steady.

use std::sync::Arc;

use log::{info, warn};

use crate::elliptic::{NeumannProblem, NeumannSolver};
use crate::error::{Error, Result};
use crate::fieldcalc::ops::{d1, d2, scalar_laplacian_row};
use crate::fieldcalc::{
    curl2d, curl_scalar, grad_l2, h2, l2, trapezoid, vector_jet_summary, FieldHistory, ScalarField, VectorField,
};
use crate::fixedpoint::{picard_solve, NsProblem, NsSolution, PicardConfig};
use crate::geometry::{BoundaryFrame, Grid};
use crate::linalg::{SparseBuilder, SparseLu};
use crate::linparab::{cfl_number, CFL_LIMIT};
use crate::stokes::{frame_of, step_count, BoundarySeries, TimeScheme};

/// Streamfunction inversion `zeta -> curl s` with the circulation fixed.
#[derive(Debug)]
pub struct StreamSolver {
    grid: Arc<Grid>,
    frame: Option<BoundaryFrame>,
    kind: Inversion,
}

#[derive(Debug)]
enum Inversion {
    /// Dirichlet walls; `unit` is `curl s1` for `s1 = 1` on the lower wall.
    Walls { lu: SparseLu, wall: Vec<bool>, lower: Vec<bool>, unit: VectorField, unit_circ: f64 },
    Periodic(NeumannSolver),
}

impl StreamSolver {
    pub fn new(grid: Arc<Grid>) -> Result<Self> {
        let frame = frame_of(&grid)?;
        let kind = match &frame {
            None => Inversion::Periodic(NeumannSolver::new(grid.clone())?),
            Some(fr) => {
                let n = grid.len();
                let mut wall = vec![false; n];
                let mut lower = vec![false; n];
                for (b, nd) in fr.nodes.iter().enumerate() {
                    wall[nd.node] = true;
                    lower[nd.node] = fr.components[fr.component_of(b)].side == 0;
                }
                let mut m = SparseBuilder::new(n);
                let mut row = Vec::with_capacity(12);
                for k in 0..n {
                    if wall[k] {
                        m.add(k, k, 1.0);
                    } else {
                        row.clear();
                        scalar_laplacian_row(&grid, k, &mut row);
                        for (c, v) in &row {
                            m.add(k, *c, *v);
                        }
                    }
                }
                let lu = m.factor()?;
                let rhs: Vec<f64> = lower.iter().map(|l| if *l { 1.0 } else { 0.0 }).collect();
                let s1 = ScalarField::new(grid.clone(), lu.solve(&rhs)?)?;
                let unit = curl_scalar(&s1);
                let unit_circ = lower_circulation(fr, &unit);
                if unit_circ.abs() < 1e-12 {
                    return Err(Error::CirculationSystemSingular);
                }
                Inversion::Walls { lu, wall, lower, unit, unit_circ }
            }
        };
        Ok(Self { grid, frame, kind })
    }

    pub fn frame(&self) -> Option<&BoundaryFrame> {
        self.frame.as_ref()
    }

    /// Velocity of vorticity `zeta` with zero circulation on the lower wall
    /// (zero mean on the torus).
    pub fn velocity(&self, zeta: &ScalarField) -> Result<VectorField> {
        match &self.kind {
            Inversion::Periodic(ns) => {
                let rho = zeta.recentered().scale(-1.0);
                let s = ns.solve(&NeumannProblem { rho, g: Vec::new() })?;
                Ok(curl_scalar(&s))
            }
            Inversion::Walls { lu, wall, unit, unit_circ, .. } => {
                let rhs: Vec<f64> = zeta.values().iter().zip(wall).map(|(z, w)| if *w { 0.0 } else { -z }).collect();
                let s0 = ScalarField::new(self.grid.clone(), lu.solve(&rhs)?)?;
                let u0 = curl_scalar(&s0);
                let fr = self.frame.as_ref().expect("walls without frame");
                let c = -lower_circulation(fr, &u0) / unit_circ;
                Ok(u0.axpy(c, unit))
            }
        }
    }

    /// Whether node `k` lies on the lower wall.
    pub fn is_lower_wall(&self, k: usize) -> bool {
        match &self.kind {
            Inversion::Walls { lower, .. } => lower[k],
            Inversion::Periodic(_) => false,
        }
    }
}

fn lower_circulation(fr: &BoundaryFrame, u: &VectorField) -> f64 {
    circulations(fr, u)[0]
}

/// `oint u.tau ds` for each boundary component, in frame order.
pub fn circulations(fr: &BoundaryFrame, u: &VectorField) -> Vec<f64> {
    let ut = fr.tangential_component(&u.trace(fr));
    fr.components
        .iter()
        .map(|c| (c.start..c.start + c.len).map(|b| ut[b] * fr.nodes[b].ds).sum())
        .collect()
}

/// `u . grad f` for a scalar `f` in the local basis.
fn scalar_advection(u: &VectorField, f: &ScalarField) -> ScalarField {
    let g = u.grid();
    let a = d1(g, f.values());
    let b = d2(g, f.values());
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v[0] * a[k] + v[1] * b[k] / g.scale(g.ij(k).0))
        .collect();
    ScalarField::new(g.clone(), values).expect("finite advection")
}

#[derive(Debug, Clone)]
pub struct EulerSolution {
    pub u: FieldHistory<VectorField>,
    pub omega: FieldHistory<ScalarField>,
    /// Circulation per boundary component at every snapshot.
    pub circulation: Vec<Vec<f64>>,
}

impl EulerSolution {
    /// Largest change of any component's circulation.
    pub fn circulation_drift(&self) -> f64 {
        let first = match self.circulation.first() {
            Some(c) => c,
            None => return 0.0,
        };
        self.circulation
            .iter()
            .flat_map(|c| c.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn solve_euler(u0: &VectorField, t_final: f64, dt: f64) -> Result<EulerSolution> {
    let grid = u0.grid().clone();
    let stream = StreamSolver::new(grid.clone())?;
    crate::stokes::check_initial(u0, stream.frame())?;
    let (nsteps, dt) = step_count(t_final, dt)?;
    let omega0 = curl2d(u0);
    let velocity = |om: &ScalarField| -> Result<VectorField> { Ok(u0.add(&stream.velocity(&om.sub(&omega0))?)) };
    let rate = |om: &ScalarField| -> Result<(VectorField, ScalarField)> {
        let u = velocity(om)?;
        let cfl = cfl_number(&u, dt);
        if cfl > CFL_LIMIT {
            return Err(Error::CFLViolation { cfl, limit: CFL_LIMIT });
        }
        let r = scalar_advection(&u, om).scale(-1.0);
        Ok((u, r))
    };
    let circ = |u: &VectorField| stream.frame().map_or_else(Vec::new, |fr| circulations(fr, u));
    let mut om = omega0.clone();
    let mut uh = FieldHistory::new(0.0, dt);
    let mut wh = FieldHistory::new(0.0, dt);
    let mut circulation = Vec::with_capacity(nsteps + 1);
    for n in 0..=nsteps {
        let (u, k1) = rate(&om)?;
        circulation.push(circ(&u));
        uh.push(u);
        wh.push(om.clone());
        if n == nsteps {
            break;
        }
        let stage = om.add(&k1.scale(dt));
        let (_, k2) = rate(&stage)?;
        om = om.add(&k1.add(&k2).scale(0.5 * dt));
    }
    Ok(EulerSolution { u: uh, omega: wh, circulation })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Strictly decreasing viscosities.
    pub mu_list: Vec<f64>,
    pub u0: VectorField,
    pub a: BoundarySeries,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: TimeScheme,
    pub picard: PicardConfig,
    /// Worker cap for the per-viscosity runs.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu_list.is_empty() || self.mu_list.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::InvalidSpec("mu_list needs positive viscosities".into()));
        }
        if self.mu_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSpec("mu_list must be strictly decreasing".into()));
        }
        self.picard.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub e_sup: f64,
    pub e_grad: f64,
    pub noise_floor: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// One row per requested viscosity, in input order.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, String)>,
    /// Least-squares slope of `log e_sup` against `log mu`, if defined.
    pub slope: Option<f64>,
    /// Some converged `e_sup` lies below its noise floor.
    pub below_noise_floor: bool,
    /// `max / min` of `e_grad` over converged rows.
    pub e_grad_ratio: Option<f64>,
}

impl SweepReport {
    pub fn completed(&self) -> usize {
        self.rows.iter().filter(|r| r.converged).count()
    }

    /// `Err(PartialSweep)` if any viscosity failed.
    pub fn check(&self) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(Error::PartialSweep { completed: self.completed(), requested: self.rows.len() })
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn lsq_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// `(e_sup, e_grad)` of a viscous solution against the Euler reference.
pub fn viscous_errors(sol: &NsSolution, euler: &EulerSolution) -> Result<(f64, f64)> {
    if sol.u.len() != euler.u.len() {
        return Err(Error::Mismatch("viscous and inviscid runs use different time grids".into()));
    }
    let mut sup = 0.0f64;
    let mut gsq = Vec::with_capacity(sol.u.len());
    for (a, b) in sol.u.iter().zip(euler.u.iter()) {
        let d = a.sub(b);
        sup = sup.max(l2(&d));
        gsq.push(grad_l2(&d).powi(2));
    }
    Ok((sup, trapezoid(sol.u.dt, &gsq)))
}

/// Run every viscosity against one Euler reference.
pub fn sweep_mu(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let grid = cfg.u0.grid().clone();
    let euler = solve_euler(&cfg.u0, cfg.t_final, cfg.dt)?;
    let (_, dt) = step_count(cfg.t_final, cfg.dt)?;
    let h = grid.spacing();
    let floor = 10.0 * (h * h + dt);
    let results = crate::par::with_threads(cfg.threads, || {
        crate::par::map_items(&cfg.mu_list, |&mu| -> Result<(f64, f64)> {
            let prob = NsProblem {
                dt: Some(cfg.dt),
                scheme: cfg.scheme,
                ..NsProblem::new(cfg.u0.clone(), cfg.a.clone(), mu, cfg.t_final)
            };
            let sol = picard_solve(&prob, &cfg.picard)?;
            viscous_errors(&sol, &euler)
        })
    });
    let mut rows = Vec::with_capacity(cfg.mu_list.len());
    let mut failures = Vec::new();
    for (&mu, r) in cfg.mu_list.iter().zip(results) {
        match r {
            Ok((e_sup, e_grad)) => {
                info!("mu {mu:.3e}: e_sup {e_sup:.3e} e_grad {e_grad:.3e}");
                rows.push(SweepRow { mu, e_sup, e_grad, noise_floor: floor, converged: true })
            }
            Err(e) => {
                warn!("mu {mu:.3e} failed: {e}");
                failures.push((mu, e.to_string()));
                rows.push(SweepRow { mu, e_sup: f64::NAN, e_grad: f64::NAN, noise_floor: floor, converged: false });
            }
        }
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.converged && r.e_sup > 0.0).collect();
    let lx: Vec<f64> = ok.iter().map(|r| r.mu.ln()).collect();
    let ly: Vec<f64> = ok.iter().map(|r| r.e_sup.ln()).collect();
    let slope = lsq_slope(&lx, &ly);
    let below_noise_floor = rows.iter().any(|r| r.converged && r.e_sup < r.noise_floor);
    let grads: Vec<f64> = rows.iter().filter(|r| r.converged).map(|r| r.e_grad).collect();
    let e_grad_ratio = if grads.len() >= 2 {
        let lo = grads.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = grads.iter().cloned().fold(0.0, f64::max);
        Some(if lo > 0.0 { hi / lo } else { f64::INFINITY })
    } else {
        None
    };
    Ok(SweepReport { rows, failures, slope, below_noise_floor, e_grad_ratio })
}

/// Both sides of the energy inequality for `v = u_mu - u`, per snapshot.
/// The right-hand side is stored without the constant `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscousGronwall {
    pub t: Vec<f64>,
    /// `d/dt ||v||^2 + mu ||grad v||^2`.
    pub lhs: Vec<f64>,
    /// `(||grad u||_inf + mu0) ||v||^2 + mu (||a||^2_boundary + ||u||^2_H2)`.
    pub rhs: Vec<f64>,
    /// The same without the `mu` term.
    pub rhs_without_mu: Vec<f64>,
}

impl ViscousGronwall {
    pub fn calibrate(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |m, (l, r)| if *r > 0.0 { m.max(l / r) } else { m })
    }

    pub fn holds(&self, c: f64) -> bool {
        self.lhs.iter().zip(&self.rhs).all(|(l, r)| *l <= c * r)
    }

    pub fn holds_without_mu(&self, c: f64) -> bool {
        self.lhs.iter().zip(&self.rhs_without_mu).all(|(l, r)| *l <= c * r)
    }

    /// Index of the first violation of the bound without the `mu` term.
    pub fn first_violation_without_mu(&self, c: f64) -> Option<usize> {
        self.lhs.iter().zip(&self.rhs_without_mu).position(|(l, r)| *l > c * r)
    }
}

pub fn check_gronwall_viscous(
    v_mu: &FieldHistory<VectorField>,
    u: &FieldHistory<VectorField>,
    a: &BoundarySeries,
    mu: f64,
    mu0: f64,
) -> Result<ViscousGronwall> {
    if v_mu.len() != u.len() || v_mu.len() < 2 {
        return Err(Error::Mismatch("histories must match and hold two snapshots".into()));
    }
    let frame = frame_of(u.get(0).grid())?;
    let energy: Vec<f64> = v_mu.iter().map(|v| l2(v).powi(2)).collect();
    let series: Vec<Vec<f64>> = energy.iter().map(|e| vec![*e]).collect();
    let rates: Vec<f64> =
        FieldHistory::from_snapshots(v_mu.t0, v_mu.dt, series).derivatives()?.into_iter().map(|d| d[0]).collect();
    let mut out = ViscousGronwall { t: Vec::new(), lhs: Vec::new(), rhs: Vec::new(), rhs_without_mu: Vec::new() };
    for n in 0..v_mu.len() {
        let t = v_mu.time(n);
        let de = rates[n];
        let lhs = de + mu * grad_l2(v_mu.get(n)).powi(2);
        let un = u.get(n);
        let grad_inf = vector_jet_summary(un).iter().fold(0.0f64, |m, q| m.max(q.grad_sq.sqrt()));
        let a_sq = frame.as_ref().map_or(0.0, |fr| {
            let an = a.at(t);
            fr.surface_integrate(&an.iter().map(|x| x * x).collect::<Vec<_>>())
        });
        let base = (grad_inf + mu0) * energy[n];
        out.t.push(t);
        out.lhs.push(lhs);
        out.rhs_without_mu.push(base);
        out.rhs.push(base + mu * (a_sq + h2(un).powi(2)));
    }
    Ok(out)
}
