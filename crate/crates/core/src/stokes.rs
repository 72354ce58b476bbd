//! Unsteady Stokes problem with kinematic and vorticity boundary data,
//! solved by decoupling: the harmonic `q` carries the tangential derivative
//! of the vorticity data, then `w` takes an implicit diffusion step.

use std::fmt;
use std::sync::Arc;

use log::warn;

use crate::elliptic::NeumannSolver;
use crate::error::{Error, Result};
use crate::fieldcalc::{
    cumulative_trapezoid, curl2d, curl_scalar, div, grad, h1, h2, l2, scalar_jets, FieldHistory, ScalarField,
    VectorField,
};
use crate::geometry::{dot, BoundaryFrame, Grid};
use crate::implicit::{flatten, VectorDiffusion};

/// Boundary vorticity as a function of time, one value per frame node.
#[derive(Clone)]
pub enum BoundarySeries {
    Steady(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl fmt::Debug for BoundarySeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySeries::Steady(a) => write!(f, "Steady({} nodes)", a.len()),
            BoundarySeries::Function(_) => write!(f, "Function"),
        }
    }
}

impl BoundarySeries {
    pub fn zero(frame_len: usize) -> Self {
        BoundarySeries::Steady(vec![0.0; frame_len])
    }

    pub fn from_fn(f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        BoundarySeries::Function(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        match self {
            BoundarySeries::Steady(a) => a.clone(),
            BoundarySeries::Function(f) => f(t),
        }
    }

    pub fn is_steady(&self) -> bool {
        matches!(self, BoundarySeries::Steady(_))
    }

    /// Centered difference in time with step `dt`.
    pub fn time_derivative(&self, t: f64, dt: f64) -> Vec<f64> {
        match self {
            BoundarySeries::Steady(a) => vec![0.0; a.len()],
            BoundarySeries::Function(f) => {
                let (p, m) = (f(t + 0.5 * dt), f(t - 0.5 * dt));
                p.iter().zip(&m).map(|(x, y)| (x - y) / dt).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    CrankNicolson,
}

impl TimeScheme {
    pub fn theta(self) -> f64 {
        match self {
            TimeScheme::BackwardEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "be" | "backward_euler" => Some(TimeScheme::BackwardEuler),
            "cn" | "crank_nicolson" => Some(TimeScheme::CrankNicolson),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeScheme::BackwardEuler => "backward_euler",
            TimeScheme::CrankNicolson => "crank_nicolson",
        }
    }
}

/// Default step `min(h^2, T / 100)`.
pub fn default_dt(grid: &Grid, t_final: f64) -> f64 {
    grid.min_spacing().powi(2).min(t_final / 100.0)
}

/// Number of steps and the adjusted step that lands exactly on `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_final > 0.0 && dt > 0.0 && dt <= t_final) {
        return Err(Error::InvalidSpec(format!("need 0 < dt <= T, got dt = {dt}, T = {t_final}")));
    }
    let n = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t_final / n as f64))
}

#[derive(Debug, Clone)]
pub struct StokesRun {
    pub mu: f64,
    pub t_final: f64,
    /// `None` selects [`default_dt`].
    pub dt: Option<f64>,
    pub scheme: TimeScheme,
    pub u0: VectorField,
    pub a: BoundarySeries,
    /// Keep every `stride`-th snapshot (1 keeps all).
    pub stride: usize,
}

impl StokesRun {
    pub fn new(u0: VectorField, a: BoundarySeries, mu: f64, t_final: f64) -> Self {
        Self { mu, t_final, dt: None, scheme: TimeScheme::default(), u0, a, stride: 1 }
    }
}

/// Per-step constraint diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesStep {
    pub t: f64,
    pub l2: f64,
    pub div_l2: f64,
    /// `max |w.nu|` on the boundary.
    pub normal_max: f64,
    /// `max |omega - a|` on the physical boundary.
    pub vorticity_err: f64,
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub w: FieldHistory<VectorField>,
    pub q: FieldHistory<ScalarField>,
    /// One entry per time step, including `t = 0`.
    pub steps: Vec<StokesStep>,
    pub dt: f64,
}

impl StokesSolution {
    pub fn max_divergence(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.div_l2))
    }

    pub fn max_normal(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.normal_max))
    }

    pub fn max_vorticity_err(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.vorticity_err))
    }
}

pub(crate) fn frame_of(grid: &Grid) -> Result<Option<BoundaryFrame>> {
    match BoundaryFrame::new(grid) {
        Ok(f) => Ok(Some(f)),
        Err(Error::NoBoundary) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Reject data violating the kinematic condition; warn on divergence.
pub(crate) fn check_initial(u0: &VectorField, frame: Option<&BoundaryFrame>) -> Result<()> {
    if let Some(fr) = frame {
        let un = fr.normal_component(&u0.trace(fr));
        let m = un.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 1e-8 * u0.max_abs().max(1.0) {
            return Err(Error::BCViolation(format!("initial data has max |u.nu| = {m:.3e}")));
        }
    }
    let d = l2(&div(u0));
    if d > 1e-3 * h1(u0).max(1.0) {
        warn!("initial data is not discretely divergence-free: ||div u0|| = {d:.3e}");
    }
    Ok(())
}

pub(crate) fn step_diagnostics(t: f64, w: &VectorField, a: &[f64], frame: Option<&BoundaryFrame>) -> StokesStep {
    let (mut normal_max, mut vorticity_err) = (0.0f64, 0.0f64);
    if let Some(fr) = frame {
        let om = curl2d(w);
        let tr = w.trace(fr);
        for c in &fr.components {
            for b in c.start..c.start + c.len {
                normal_max = normal_max.max(dot(tr[b], fr.nodes[b].normal).abs());
                if !c.artificial {
                    vorticity_err = vorticity_err.max((om.values()[fr.nodes[b].node] - a[b]).abs());
                }
            }
        }
    }
    StokesStep { t, l2: l2(w), div_l2: l2(&div(w)), normal_max, vorticity_err }
}

/// Advance the Stokes problem from `u0`.
pub fn solve_stokes(run: &StokesRun) -> Result<StokesSolution> {
    let grid = run.u0.grid().clone();
    if !(run.mu >= 0.0 && run.mu.is_finite()) {
        return Err(Error::InvalidSpec(format!("viscosity {}", run.mu)));
    }
    let stride = run.stride.max(1);
    let dt0 = run.dt.unwrap_or_else(|| default_dt(&grid, run.t_final));
    let (nsteps, dt) = step_count(run.t_final, dt0)?;
    let neumann = NeumannSolver::new(grid.clone())?;
    let frame = neumann.frame();
    check_initial(&run.u0, frame)?;
    let nb = frame.map_or(0, |f| f.len());
    let theta = run.scheme.theta();
    let op = VectorDiffusion::new(grid.clone(), frame, theta * run.mu * dt)?;
    let explicit = (1.0 - theta) * run.mu * dt;

    let a_of = |t: f64| -> Result<Vec<f64>> {
        let a = run.a.at(t);
        if a.len() != nb {
            return Err(Error::Mismatch(format!("boundary data has {} values, frame has {nb}", a.len())));
        }
        Ok(a)
    };

    let mut w = run.u0.clone();
    let mut a_now = a_of(0.0)?;
    let mut q = neumann.harmonic_q(&a_now, run.mu)?;
    let mut wh = FieldHistory::new(0.0, dt * stride as f64);
    let mut qh = FieldHistory::new(0.0, dt * stride as f64);
    let mut steps = Vec::with_capacity(nsteps + 1);
    steps.push(step_diagnostics(0.0, &w, &a_now, frame));
    wh.push(w.clone());
    qh.push(q.clone());
    for n in 0..nsteps {
        let t1 = (n + 1) as f64 * dt;
        let a_next = a_of(t1)?;
        let q_drive = if theta < 1.0 {
            let mid: Vec<f64> = a_now.iter().zip(&a_next).map(|(x, y)| 0.5 * (x + y)).collect();
            neumann.harmonic_q(&mid, run.mu)?
        } else {
            q.clone()
        };
        let gq = flatten(&grad(&q_drive));
        let mut rhs = flatten(&w);
        for (r, g) in rhs.iter_mut().zip(&gq) {
            *r -= dt * g;
        }
        if explicit > 0.0 {
            for (r, v) in rhs.iter_mut().zip(op.apply(&w, &a_now)) {
                *r += explicit * v;
            }
        }
        for (r, b) in rhs.iter_mut().zip(op.boundary_term(&a_next)) {
            *r += theta * run.mu * dt * b;
        }
        w = op.solve(rhs)?;
        if w.values().iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::LinearSolveFailed(format!("non-finite velocity at step {}", n + 1)));
        }
        a_now = a_next;
        q = neumann.harmonic_q(&a_now, run.mu)?;
        steps.push(step_diagnostics(t1, &w, &a_now, frame));
        if (n + 1) % stride == 0 {
            wh.push(w.clone());
            qh.push(q.clone());
        }
    }
    Ok(StokesSolution { w: wh, q: qh, steps, dt })
}

/// Energy balances for `g = curl w` and `h = curl g`.
///
/// In 2D the boundary pairing of the `g` balance reduces to `a d_nu g`, and
/// that of the `h` balance to `d_t a d_nu g` (from `h.tau = -d_nu g` and
/// `mu Delta g = d_t a` on the wall).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: Vec<f64>,
    pub g_sq: Vec<f64>,
    pub h_sq: Vec<f64>,
    pub g_residual: Vec<f64>,
    pub h_residual: Vec<f64>,
}

impl EnergyReport {
    pub fn max_g_residual(&self) -> f64 {
        self.g_residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_h_residual(&self) -> f64 {
        self.h_residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn stokes_energy_report(w: &FieldHistory<VectorField>, a: &BoundarySeries, mu: f64) -> Result<EnergyReport> {
    if w.len() < 3 {
        return Err(Error::MissingTimeDerivative);
    }
    let grid = w.get(0).grid().clone();
    let frame = frame_of(&grid)?;
    let dt = w.dt;
    let m = w.len();
    let mut t = Vec::with_capacity(m);
    let (mut g_sq, mut h_sq) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut g_diss, mut h_diss) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut g_bd, mut h_bd) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for (n, wn) in w.iter().enumerate() {
        let tn = w.time(n);
        let g = curl2d(wn);
        let h = curl_scalar(&g);
        t.push(tn);
        g_sq.push(l2(&g).powi(2));
        h_sq.push(l2(&h).powi(2));
        g_diss.push(l2(&h).powi(2));
        h_diss.push(l2(&curl2d(&h)).powi(2));
        let (mut bg, mut bh) = (0.0, 0.0);
        if let Some(fr) = &frame {
            let jets = scalar_jets(&g);
            let an = a.at(tn);
            let at = a.time_derivative(tn, dt);
            let dn: Vec<f64> = fr
                .nodes
                .iter()
                .map(|nd| {
                    let j = &jets[nd.node];
                    dot([j.fx, j.fy], nd.normal)
                })
                .collect();
            bg = fr.surface_integrate(&dn.iter().zip(&an).map(|(d, x)| d * x).collect::<Vec<_>>());
            bh = fr.surface_integrate(&dn.iter().zip(&at).map(|(d, x)| d * x).collect::<Vec<_>>());
        }
        g_bd.push(bg);
        h_bd.push(bh);
    }
    let cg = cumulative_trapezoid(dt, &g_diss);
    let ch = cumulative_trapezoid(dt, &h_diss);
    let cbg = cumulative_trapezoid(dt, &g_bd);
    let cbh = cumulative_trapezoid(dt, &h_bd);
    let g_residual = (0..m).map(|n| g_sq[n] + 2.0 * mu * cg[n] - g_sq[0] - 2.0 * mu * cbg[n]).collect();
    let h_residual = (0..m).map(|n| h_sq[n] + 2.0 * mu * ch[n] - h_sq[0] - 2.0 * cbh[n]).collect();
    Ok(EnergyReport { t, g_sq, h_sq, g_residual, h_residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop43Row {
    pub mu: f64,
    /// `sup_t ||w||_{H2}`.
    pub sup_h2: f64,
    /// `sup_t ||w||_{H2}^2 + mu int ||h||_{H1}^2`.
    pub bound_lhs: f64,
    /// Data term: `||u0||_{H2}^2 + mu ||a||^2_{L2(boundary)}`, plus
    /// `int ||d_t a||^2` in the time-dependent branch.
    pub data: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop43Report {
    pub steady: bool,
    pub rows: Vec<Prop43Row>,
}

impl Prop43Report {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.ratio))
    }

    /// `max / min` of `sup_t ||w||_{H2}` across the viscosities.
    pub fn h2_spread(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.sup_h2), hi.max(r.sup_h2)));
        if lo > 0.0 {
            hi / lo
        } else if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// Run the Stokes problem for every viscosity and report the uniform-bound
/// quantities. Runs are independent and execute in parallel.
pub fn verify_prop43(
    u0: &VectorField,
    a: &BoundarySeries,
    mu_list: &[f64],
    t_final: f64,
    dt: Option<f64>,
) -> Result<Prop43Report> {
    let frame = frame_of(u0.grid())?;
    let rows = crate::par::map_items(mu_list, |&mu| -> Result<Prop43Row> {
        let run = StokesRun { dt, ..StokesRun::new(u0.clone(), a.clone(), mu, t_final) };
        let sol = solve_stokes(&run)?;
        let mut sup_h2 = 0.0f64;
        let mut diss = Vec::with_capacity(sol.w.len());
        let mut a_sq = 0.0f64;
        let mut at_sq = Vec::with_capacity(sol.w.len());
        for (n, w) in sol.w.iter().enumerate() {
            sup_h2 = sup_h2.max(h2(w));
            diss.push(h1(&curl_scalar(&curl2d(w))).powi(2));
            let tn = sol.w.time(n);
            if let Some(fr) = &frame {
                let an = a.at(tn);
                a_sq = a_sq.max(fr.surface_integrate(&an.iter().map(|v| v * v).collect::<Vec<_>>()));
                let at = a.time_derivative(tn, sol.w.dt);
                at_sq.push(fr.surface_integrate(&at.iter().map(|v| v * v).collect::<Vec<_>>()));
            }
        }
        let diss_int = cumulative_trapezoid(sol.w.dt, &diss).last().copied().unwrap_or(0.0);
        let at_int = cumulative_trapezoid(sol.w.dt, &at_sq).last().copied().unwrap_or(0.0);
        let bound_lhs = sup_h2 * sup_h2 + mu * diss_int;
        let mut data = h2(u0).powi(2) + mu * a_sq;
        if !a.is_steady() {
            data += at_int;
        }
        let ratio = if data > 0.0 { bound_lhs / data } else { 0.0 };
        Ok(Prop43Row { mu, sup_h2, bound_lhs, data, ratio })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Prop43Report { steady: a.is_steady(), rows })
}
