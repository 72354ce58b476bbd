//! The linearized map `V(beta)`: advance `v` under homogeneous absolute
//! boundary conditions with advection by `beta + w` frozen at the old time
//! level, plus the energy functional `F(t)` and its growth budget `Q(t)`.

use std::sync::Arc;

use crate::elliptic::{NeumannProblem, NeumannSolver};
use crate::error::{Error, Result};
use crate::fieldcalc::{
    advect, cumulative_trapezoid, curl2d, curl_scalar, div, grad, grad_l2, l2, n_norm, FieldHistory, ScalarField,
    VectorField,
};
use crate::geometry::{second_fundamental_form, BoundaryFrame, Grid};
use crate::implicit::{flatten, VectorDiffusion};

pub const CFL_LIMIT: f64 = 0.9;

/// `beta` and `w` on a common time grid.
#[derive(Debug, Clone, Copy)]
pub struct VelocityMapInput<'a> {
    pub beta: &'a FieldHistory<VectorField>,
    pub w: &'a FieldHistory<VectorField>,
    pub mu: f64,
}

impl VelocityMapInput<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.w.len() || self.w.len() < 2 {
            return Err(Error::Mismatch(format!(
                "beta has {} snapshots, w has {}",
                self.beta.len(),
                self.w.len()
            )));
        }
        if (self.beta.dt - self.w.dt).abs() > 1e-14 * self.w.dt {
            return Err(Error::Mismatch("beta and w have different time steps".into()));
        }
        if !Arc::ptr_eq(self.beta.get(0).grid(), self.w.get(0).grid()) && self.beta.get(0).grid() != self.w.get(0).grid() {
            return Err(Error::Mismatch("beta and w live on different grids".into()));
        }
        Ok(())
    }
}

/// Advective CFL number `dt max|u| / h_min`.
pub fn cfl_number(u: &VectorField, dt: f64) -> f64 {
    let g = u.grid();
    let mut c = 0.0f64;
    for (k, v) in u.values().iter().enumerate() {
        let s = g.scale(g.ij(k).0);
        c = c.max(dt * (v[0].abs() / g.axis1.h + v[1].abs() / (s * g.axis2.h)));
    }
    c
}

/// Factorizations for repeated applications of the map on one grid.
#[derive(Debug)]
pub struct VelocityMap {
    grid: Arc<Grid>,
    neumann: NeumannSolver,
    diffusion: VectorDiffusion,
    mu: f64,
    dt: f64,
}

impl VelocityMap {
    pub fn new(grid: Arc<Grid>, mu: f64, dt: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSpec(format!("mu = {mu}, dt = {dt}")));
        }
        let neumann = NeumannSolver::new(grid.clone())?;
        let diffusion = VectorDiffusion::new(grid.clone(), neumann.frame(), mu * dt)?;
        Ok(Self { grid, neumann, diffusion, mu, dt })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn neumann(&self) -> &NeumannSolver {
        &self.neumann
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step from `v` with frozen `beta`, `w`; also returns `p_beta`.
    pub fn step(&self, v: &VectorField, beta: &VectorField, w: &VectorField) -> Result<(VectorField, ScalarField)> {
        let carrier = beta.add(w);
        let cfl = cfl_number(&carrier, self.dt);
        if cfl > CFL_LIMIT {
            return Err(Error::CFLViolation { cfl, limit: CFL_LIMIT });
        }
        let p = self.neumann.pressure_euler(&carrier)?;
        let adv = advect(&carrier, &v.add(w));
        let gp = grad(&p);
        let mut rhs = flatten(v);
        for (k, (a, g)) in adv.values().iter().zip(gp.values()).enumerate() {
            rhs[2 * k] -= self.dt * (a[0] + g[0]);
            rhs[2 * k + 1] -= self.dt * (a[1] + g[1]);
        }
        let next = self.diffusion.solve(rhs)?;
        if next.values().iter().any(|x| !(x[0].is_finite() && x[1].is_finite())) {
            return Err(Error::LinearSolveFailed("non-finite velocity".into()));
        }
        Ok((next, p))
    }

    /// Apply the map from `v0` (zero if `None`).
    pub fn apply(&self, input: &VelocityMapInput<'_>, v0: Option<&VectorField>) -> Result<FieldHistory<VectorField>> {
        input.validate()?;
        if (input.w.dt - self.dt).abs() > 1e-14 * self.dt || input.mu != self.mu {
            return Err(Error::Mismatch("map built for a different mu or dt".into()));
        }
        let mut v = v0.cloned().unwrap_or_else(|| VectorField::zeros(self.grid.clone()));
        let mut out = FieldHistory::new(input.w.t0, self.dt);
        out.push(v.clone());
        for n in 0..input.w.len() - 1 {
            v = self.step(&v, input.beta.get(n), input.w.get(n))?.0;
            out.push(v.clone());
        }
        Ok(out)
    }

    /// Pressures `p_beta` at every snapshot.
    pub fn pressures(&self, beta: &FieldHistory<VectorField>, w: &FieldHistory<VectorField>) -> Result<FieldHistory<ScalarField>> {
        let snaps = beta
            .iter()
            .zip(w.iter())
            .map(|(b, w)| self.neumann.pressure_linearized(b, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldHistory::from_snapshots(w.t0, w.dt, snaps))
    }
}

pub fn apply_velocity_map(input: &VelocityMapInput<'_>) -> Result<FieldHistory<VectorField>> {
    input.validate()?;
    let grid = input.w.get(0).grid().clone();
    VelocityMap::new(grid, input.mu, input.w.dt)?.apply(input, None)
}

/// `sup_t ||v||_N` over the snapshots, with `v_t` from the history.
pub fn wt_norm(v: &FieldHistory<VectorField>) -> Result<f64> {
    let vt = v.derivatives()?;
    v.iter()
        .zip(&vt)
        .map(|(x, xt)| n_norm(x, Some(xt)))
        .try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TheoremDiagnostics {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub q: Vec<f64>,
    /// `||v||^2 + ||psi||^2`.
    pub v_psi: Vec<f64>,
    /// `||grad g||^2 + ||grad q||^2`.
    pub grads: Vec<f64>,
    /// `||v_t||^2 + ||d_t||^2 + ||omega_t||^2`.
    pub rates: Vec<f64>,
    /// `||beta||_N^2 + ||w||_N^2`.
    pub n_sq: Vec<f64>,
    /// Largest compatibility mismatch of the `q` problems, relative.
    pub max_mismatch: f64,
}

impl TheoremDiagnostics {
    pub fn columns() -> [&'static str; 7] {
        ["t", "F", "Q", "v_psi", "grads", "rates", "n_sq"]
    }

    pub fn row(&self, n: usize) -> Vec<f64> {
        vec![self.t[n], self.f[n], self.q[n], self.v_psi[n], self.grads[n], self.rates[n], self.n_sq[n]]
    }
}

/// Mean mismatch between volume and boundary data, relative to their size.
fn relative_mismatch(p: &NeumannProblem, frame: Option<&BoundaryFrame>) -> f64 {
    let g = p.rho.grid();
    let vol: f64 = p.rho.values().iter().zip(g.weights()).map(|(r, w)| r * w).sum();
    let abs_vol: f64 = p.rho.values().iter().zip(g.weights()).map(|(r, w)| (r * w).abs()).sum();
    let (bd, abs_bd) = frame.map_or((0.0, 0.0), |fr| {
        fr.nodes
            .iter()
            .zip(&p.g)
            .fold((0.0, 0.0), |(s, a), (nd, v)| (s + v * nd.ds, a + (v * nd.ds).abs()))
    });
    let scale = abs_vol + abs_bd;
    if scale == 0.0 {
        0.0
    } else {
        (vol - bd).abs() / scale
    }
}

/// Assemble `F(t)` and `Q(t)` for a map application `v = V(beta)`.
pub fn compute_f(
    v: &FieldHistory<VectorField>,
    beta: &FieldHistory<VectorField>,
    w: &FieldHistory<VectorField>,
    neumann: &NeumannSolver,
) -> Result<TheoremDiagnostics> {
    if v.len() < 3 || v.len() != beta.len() || v.len() != w.len() {
        return Err(Error::MissingTimeDerivative);
    }
    let frame = neumann.frame();
    let vt = v.derivatives()?;
    let bt = beta.derivatives()?;
    let wt = w.derivatives()?;
    let m = v.len();
    let rows = crate::par::map_indices(m, |n| -> Result<[f64; 6]> {
        let (vn, bn, wn) = (v.get(n), beta.get(n), w.get(n));
        let d = div(vn);
        let psi = curl_scalar(&curl2d(vn));
        let carrier = bn.add(wn);
        let diff = bn.sub(vn);
        let rho = neumann.fv_divergence(&advect(&carrier, &diff)).scale(-1.0);
        let gb = match frame {
            Some(fr) => second_fundamental_form(fr, &carrier.trace(fr), &diff.trace(fr)),
            None => Vec::new(),
        };
        let prob = NeumannProblem { rho, g: gb };
        let mism = relative_mismatch(&prob, frame);
        let q = neumann.solve(&prob)?;
        let g = d.sub(&q);
        let v_psi = l2(vn).powi(2) + l2(&psi).powi(2);
        let grads = grad_l2(&g).powi(2) + grad_l2(&q).powi(2);
        let rates = l2(&vt[n]).powi(2) + l2(&div(&vt[n])).powi(2) + l2(&curl2d(&vt[n])).powi(2);
        let n_sq = n_norm(bn, Some(&bt[n]))?.powi(2) + n_norm(wn, Some(&wt[n]))?.powi(2);
        Ok([v_psi, grads, rates, n_sq, mism, v.time(n)])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut d = TheoremDiagnostics::default();
    for r in &rows {
        d.t.push(r[5]);
        d.v_psi.push(r[0]);
        d.grads.push(r[1]);
        d.rates.push(r[2]);
        d.n_sq.push(r[3]);
        d.f.push(r[0] + r[1] + r[2]);
        d.max_mismatch = d.max_mismatch.max(r[4]);
    }
    let integrand: Vec<f64> = d.n_sq.iter().map(|x| 1.0 + x).collect();
    d.q = cumulative_trapezoid(v.dt, &integrand);
    Ok(d)
}

/// `F(0)` assembled directly from `u0`:
/// `||u0.grad u0 + grad p0||^2 + ||curl(u0.grad u0)||^2`.
pub fn f_zero_direct(u0: &VectorField, neumann: &NeumannSolver) -> Result<f64> {
    let adv = advect(u0, u0);
    let p0 = neumann.pressure_euler(u0)?;
    Ok(l2(&adv.add(&grad(&p0))).powi(2) + l2(&curl2d(&adv)).powi(2))
}

/// Right-hand side of the Gronwall bound at every time.
pub fn gronwall_bound(diag: &TheoremDiagnostics, c1: f64, c2: f64) -> Vec<f64> {
    let dt = if diag.t.len() > 1 { diag.t[1] - diag.t[0] } else { 0.0 };
    let integrand: Vec<f64> = diag
        .q
        .iter()
        .zip(&diag.n_sq)
        .map(|(q, n)| (-c2 * q).exp() * (1.0 + n).powi(2))
        .collect();
    let acc = cumulative_trapezoid(dt, &integrand);
    let f0 = diag.f.first().copied().unwrap_or(0.0);
    diag.q
        .iter()
        .zip(&acc)
        .map(|(q, i)| c1 * (c2 * q).exp() * (f0 + i))
        .collect()
}

/// Smallest `C1` making the bound hold for a given `C2`.
pub fn calibrate_c1(diag: &TheoremDiagnostics, c2: f64) -> f64 {
    gronwall_bound(diag, 1.0, c2)
        .iter()
        .zip(&diag.f)
        .fold(0.0, |m, (b, f)| if *b > 0.0 { m.max(f / b) } else { m })
}

/// `F(t) <= bound(t)` at every time.
pub fn check_gronwall_regression(diag: &TheoremDiagnostics, c1: f64, c2: f64) -> bool {
    gronwall_bound(diag, c1, c2).iter().zip(&diag.f).all(|(b, f)| f <= b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldcalc::normal_component;
    use crate::geometry::{build_grid, DomainSpec};
    use crate::scenarios::InitialCondition;
    use std::f64::consts::PI;

    fn constant_history(u: &VectorField, n: usize, dt: f64) -> FieldHistory<VectorField> {
        FieldHistory::from_snapshots(0.0, dt, vec![u.clone(); n])
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 12, 16).unwrap();
        let z = constant_history(&VectorField::zeros(g.clone()), 5, 0.01);
        let input = VelocityMapInput { beta: &z, w: &z, mu: 0.1 };
        let v = apply_velocity_map(&input).unwrap();
        assert!(v.iter().all(|x| x.max_abs() == 0.0));
        let map = VelocityMap::new(g, 0.1, 0.01).unwrap();
        let d = compute_f(&v, &z, &z, map.neumann()).unwrap();
        assert!(d.f.iter().all(|f| *f == 0.0));
        for (q, t) in d.q.iter().zip(&d.t) {
            assert!((q - t).abs() < 1e-14);
        }
    }

    #[test]
    fn one_step_matches_hand_assembly() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 16, 24).unwrap();
        let w0 = InitialCondition::Circulation { c: 0.5 }.velocity(&g).unwrap();
        let (mu, dt) = (0.05, 0.01);
        let w = constant_history(&w0, 2, dt);
        let z = constant_history(&VectorField::zeros(g.clone()), 2, dt);
        let v = apply_velocity_map(&VelocityMapInput { beta: &z, w: &w, mu }).unwrap();
        // Independent assembly: the explicit forcing, then the implicit solve.
        let fr = BoundaryFrame::new(&g).unwrap();
        let solver = NeumannSolver::new(g.clone()).unwrap();
        let p0 = solver.pressure_euler(&w0).unwrap();
        let force = advect(&w0, &w0).add(&grad(&p0)).scale(-dt);
        let op = VectorDiffusion::new(g.clone(), Some(&fr), mu * dt).unwrap();
        let expect = op.solve(flatten(&force)).unwrap();
        assert!(l2(&v.get(1).sub(&expect)) < 1e-13);
        assert!(normal_component(v.get(1), &fr).iter().all(|x| x.abs() < 1e-14));
        // The circulation is steady for Euler, so only truncation error is left.
        let rel = l2(v.get(1)) / (dt * l2(&advect(&w0, &w0)));
        assert!(rel < 2e-2, "{rel}");
    }

    #[test]
    fn map_is_affine_in_initial_data() {
        let g = build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), 16, 16).unwrap();
        let w0 = InitialCondition::TaylorGreen { amp: 1.0 }.velocity(&g).unwrap();
        let w = constant_history(&w0, 4, 0.01);
        let z = constant_history(&VectorField::zeros(g.clone()), 4, 0.01);
        let map = VelocityMap::new(g.clone(), 0.1, 0.01).unwrap();
        let input = VelocityMapInput { beta: &z, w: &w, mu: 0.1 };
        let p1 = VectorField::from_cartesian_fn(g.clone(), |x, y| [y.sin(), x.cos()]);
        let p2 = VectorField::from_cartesian_fn(g.clone(), |x, _| [0.0, (2.0 * x).sin()]);
        let base = map.apply(&input, None).unwrap();
        let a = map.apply(&input, Some(&p1)).unwrap();
        let b = map.apply(&input, Some(&p2)).unwrap();
        let ab = map.apply(&input, Some(&p1.add(&p2))).unwrap();
        for n in 0..4 {
            let lhs = ab.get(n).sub(base.get(n));
            let rhs = a.get(n).sub(base.get(n)).add(&b.get(n).sub(base.get(n)));
            assert!(l2(&lhs.sub(&rhs)) < 1e-12);
        }
    }

    #[test]
    fn cfl_guard_trips() {
        let g = build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), 16, 16).unwrap();
        let w0 = InitialCondition::TaylorGreen { amp: 10.0 }.velocity(&g).unwrap();
        let w = constant_history(&w0, 2, 0.5);
        let z = constant_history(&VectorField::zeros(g), 2, 0.5);
        let r = apply_velocity_map(&VelocityMapInput { beta: &z, w: &w, mu: 0.1 });
        assert!(matches!(r, Err(Error::CFLViolation { .. })));
    }

    #[test]
    fn gronwall_bound_is_monotone_in_constants() {
        let d = TheoremDiagnostics {
            t: vec![0.0, 0.1, 0.2],
            f: vec![1.0, 1.5, 2.5],
            q: vec![0.0, 0.2, 0.4],
            n_sq: vec![1.0, 1.0, 1.0],
            ..Default::default()
        };
        let c1 = calibrate_c1(&d, 1.0);
        assert!(check_gronwall_regression(&d, c1 * (1.0 + 1e-12), 1.0));
        assert!(!check_gronwall_regression(&d, c1 * (1.0 + 1e-12), 0.5));
    }
}
