//! Neumann problems for the Poisson equation.
//!
//! The Laplacian is discretized by finite volumes whose control volumes are
//! the quadrature weights of the grid, so interior rows coincide with the
//! compact Laplacian of [`fieldcalc::ops`](crate::fieldcalc::ops) and the
//! discrete compatibility condition is exactly
//! `sum_k w_k rho_k = sum_b g_b dS_b`. Sources given as divergences are
//! assembled with the matching finite-volume divergence, which makes the
//! pressure problems compatible to rounding.

use std::sync::Arc;

use log::debug;

use crate::error::{Error, Result};
use crate::fieldcalc::{advect, grad_l2, l2, ScalarField, VectorField};
use crate::geometry::{dot, second_fundamental_form, BoundaryFrame, Grid};
use crate::linalg::{SparseBuilder, SparseLu};

/// `Delta phi = rho` in the domain, `d_nu phi = g` on the boundary, zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannProblem {
    pub rho: ScalarField,
    /// One value per boundary-frame node; empty on the torus.
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticConfig {
    /// Relative compatibility tolerance; smaller mismatches are repaired.
    pub tol_compat: f64,
    /// Relative residual the direct solve must reach.
    pub tol_residual: f64,
    /// Allowed `max |u.nu|` relative to `max |u|` for pressure problems.
    pub tol_kinematic: f64,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self { tol_compat: 1e-8, tol_residual: 1e-10, tol_kinematic: 1e-8 }
    }
}

/// Factored Neumann Laplacian for one grid. Read-only after construction.
#[derive(Debug)]
pub struct NeumannSolver {
    grid: Arc<Grid>,
    frame: Option<BoundaryFrame>,
    /// Boundary-frame indices per node (at most one), `usize::MAX` if none.
    bnode: Vec<usize>,
    system: SparseBuilder,
    lu: SparseLu,
    cfg: EllipticConfig,
}

/// Cell extent along coordinate 2 of a node in column `j`.
fn ext2(g: &Grid, j: usize) -> f64 {
    if g.axis2.is_end(j) {
        0.5 * g.axis2.h
    } else {
        g.axis2.h
    }
}

fn ext1(g: &Grid, i: usize) -> f64 {
    if g.axis1.is_end(i) {
        0.5 * g.axis1.h
    } else {
        g.axis1.h
    }
}

/// Face couplings of node `k`: `(neighbour, coefficient)` such that the net
/// outward flux is `sum c (phi_nb - phi_k)`.
pub(crate) fn fv_couplings(g: &Grid, k: usize) -> Vec<(usize, f64)> {
    let (i, j) = g.ij(k);
    let mut out = Vec::with_capacity(4);
    for d in [-1isize, 1] {
        if let Some(ii) = g.axis1.step(i, d) {
            let s_face = g.scale_half(i, 0.5 * d as f64);
            out.push((g.index(ii, j), s_face * ext2(g, j) / g.axis1.h));
        }
        if let Some(jj) = g.axis2.step(j, d) {
            out.push((g.index(i, jj), ext1(g, i) / (g.scale(i) * g.axis2.h)));
        }
    }
    out
}

impl NeumannSolver {
    pub fn new(grid: Arc<Grid>) -> Result<Self> {
        Self::with_config(grid, EllipticConfig::default())
    }

    pub fn with_config(grid: Arc<Grid>, cfg: EllipticConfig) -> Result<Self> {
        let frame = match BoundaryFrame::new(&grid) {
            Ok(f) => Some(f),
            Err(Error::NoBoundary) => None,
            Err(e) => return Err(e),
        };
        let n = grid.len();
        let mut bnode = vec![usize::MAX; n];
        if let Some(fr) = &frame {
            for (b, node) in fr.nodes.iter().enumerate() {
                bnode[node.node] = b;
            }
        }
        // Rows are flux balances summing to zero, so with compatible data
        // row 0 is redundant; it is replaced by the pin `phi_0 = 0` and the
        // result recentered.
        let mut a = SparseBuilder::new(n);
        a.add(0, 0, 1.0);
        for k in 1..n {
            let mut diag = 0.0;
            for (nb, c) in fv_couplings(&grid, k) {
                a.add(k, nb, c);
                diag -= c;
            }
            a.add(k, k, diag);
        }
        let lu = a.factor()?;
        Ok(Self { grid, frame, bnode, system: a, lu, cfg })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn frame(&self) -> Option<&BoundaryFrame> {
        self.frame.as_ref()
    }

    pub fn config(&self) -> EllipticConfig {
        self.cfg
    }

    fn boundary_len(&self) -> usize {
        self.frame.as_ref().map_or(0, |f| f.len())
    }

    /// Solve, repairing a compatibility mismatch below tolerance.
    pub fn solve(&self, prob: &NeumannProblem) -> Result<ScalarField> {
        let g = &self.grid;
        let n = g.len();
        if prob.rho.len() != n || prob.g.len() != self.boundary_len() {
            return Err(Error::Mismatch("Neumann data does not match the grid".into()));
        }
        let w = g.weights();
        let mut rhs: Vec<f64> = prob.rho.values().iter().zip(w).map(|(r, w)| r * w).collect();
        let mut flux: Vec<f64> = match &self.frame {
            Some(fr) => prob.g.iter().zip(&fr.nodes).map(|(v, nd)| v * nd.ds).collect(),
            None => Vec::new(),
        };
        let vol: f64 = rhs.iter().sum();
        let bd: f64 = flux.iter().sum();
        let scale = rhs.iter().map(|v| v.abs()).sum::<f64>() + flux.iter().map(|v| v.abs()).sum::<f64>();
        if scale == 0.0 {
            return Ok(ScalarField::zeros(g.clone()));
        }
        let mismatch = vol - bd;
        let tol = self.cfg.tol_compat * scale;
        if mismatch.abs() > tol {
            return Err(Error::IncompatibleData { mismatch, tol });
        }
        if mismatch != 0.0 {
            debug!("Neumann compatibility repair: mismatch {mismatch:.3e}");
            match &self.frame {
                Some(fr) => {
                    let perim = fr.perimeter_all();
                    for (f, nd) in flux.iter_mut().zip(&fr.nodes) {
                        *f += mismatch / perim * nd.ds;
                    }
                }
                None => {
                    let area = g.area();
                    for (r, wk) in rhs.iter_mut().zip(w) {
                        *r -= mismatch / area * wk;
                    }
                }
            }
        }
        for (k, b) in self.bnode.iter().enumerate() {
            if *b != usize::MAX {
                rhs[k] -= flux[*b];
            }
        }
        rhs[0] = 0.0;
        let x = self.lu.solve(&rhs)?;
        let ax = self.system.matvec(&x);
        let rnorm = ax.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = rnorm / bnorm.max(f64::MIN_POSITIVE);
        if rel > self.cfg.tol_residual {
            return Err(Error::SolverDiverged(rel));
        }
        Ok(ScalarField::raw(g.clone(), x[..n].to_vec()).recentered())
    }

    /// Finite-volume divergence whose boundary faces carry `<F, nu>`.
    pub fn fv_divergence(&self, f: &VectorField) -> ScalarField {
        let g = &self.grid;
        let fv = f.values();
        let values = crate::par::map_indices(g.len(), |k| {
            let (i, j) = g.ij(k);
            let mut out = 0.0;
            for d in [-1isize, 1] {
                let sgn = d as f64;
                if let Some(ii) = g.axis1.step(i, d) {
                    let nb = g.index(ii, j);
                    out += sgn * ext2(g, j) * 0.5 * (g.scale(i) * fv[k][0] + g.scale(ii) * fv[nb][0]);
                }
                if let Some(jj) = g.axis2.step(j, d) {
                    let nb = g.index(i, jj);
                    out += sgn * ext1(g, i) * 0.5 * (fv[k][1] + fv[nb][1]);
                }
            }
            let b = self.bnode[k];
            if b != usize::MAX {
                let fr = self.frame.as_ref().expect("boundary node without frame");
                let nd = &fr.nodes[b];
                out += dot(g.to_cartesian(k, fv[k]), nd.normal) * nd.ds;
            }
            out / g.weights()[k]
        });
        ScalarField::raw(g.clone(), values)
    }

    fn check_kinematic(&self, u: &VectorField) -> Result<()> {
        if let Some(fr) = &self.frame {
            let un = fr.normal_component(&u.trace(fr));
            let m = un.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m > self.cfg.tol_kinematic * u.max_abs().max(1.0) {
                return Err(Error::BCViolation(format!("max |u.nu| = {m:.3e}")));
            }
        }
        Ok(())
    }

    /// `Delta p = -div(u.grad u)`, `d_nu p = pi(u, u) - mu d_s a`.
    pub fn pressure_ns(&self, u: &VectorField, a: &[f64], mu: f64) -> Result<ScalarField> {
        self.check_kinematic(u)?;
        let rho = self.fv_divergence(&advect(u, u)).scale(-1.0);
        let g = match &self.frame {
            Some(fr) => {
                if a.len() != fr.len() {
                    return Err(Error::Mismatch("boundary data does not match frame".into()));
                }
                let ut = u.trace(fr);
                let pi = second_fundamental_form(fr, &ut, &ut);
                let ds_a = fr.arc_derivative(a);
                pi.iter().zip(&ds_a).map(|(p, d)| p - mu * d).collect()
            }
            None => Vec::new(),
        };
        self.solve(&NeumannProblem { rho, g })
    }

    pub fn pressure_euler(&self, u: &VectorField) -> Result<ScalarField> {
        let zeros = vec![0.0; self.boundary_len()];
        self.pressure_ns(u, &zeros, 0.0)
    }

    /// Pressure of the linearized problem, driven by `beta + w`.
    pub fn pressure_linearized(&self, beta: &VectorField, w: &VectorField) -> Result<ScalarField> {
        self.pressure_euler(&beta.add(w))
    }

    /// Harmonic `q` with `d_nu q = -mu d_s a`.
    pub fn harmonic_q(&self, a: &[f64], mu: f64) -> Result<ScalarField> {
        let fr = match &self.frame {
            Some(fr) => fr,
            None => return Ok(ScalarField::zeros(self.grid.clone())),
        };
        if a.len() != fr.len() {
            return Err(Error::Mismatch("boundary data does not match frame".into()));
        }
        let g = fr.arc_derivative(a).iter().map(|d| -mu * d).collect();
        self.solve(&NeumannProblem { rho: ScalarField::zeros(self.grid.clone()), g })
    }

    /// Solve `Delta phi = div f`, `d_nu phi = <f, nu>`; returns `phi` and
    /// `||grad phi|| / ||f||`.
    pub fn solonnikov(&self, f: &VectorField) -> Result<(ScalarField, f64)> {
        let fnorm = l2(f);
        if fnorm == 0.0 {
            return Err(Error::DegenerateInput("zero field".into()));
        }
        let rho = self.fv_divergence(f);
        let g = match &self.frame {
            Some(fr) => fr.normal_component(&f.trace(fr)),
            None => Vec::new(),
        };
        let phi = self.solve(&NeumannProblem { rho, g })?;
        let ratio = grad_l2(&phi) / fnorm;
        Ok((phi, ratio))
    }
}

pub fn solve_neumann(prob: &NeumannProblem) -> Result<ScalarField> {
    NeumannSolver::new(prob.rho.grid().clone())?.solve(prob)
}

pub fn solve_pressure_ns(u: &VectorField, a: &[f64], mu: f64) -> Result<ScalarField> {
    NeumannSolver::new(u.grid().clone())?.pressure_ns(u, a, mu)
}

pub fn solve_pressure_euler(u: &VectorField) -> Result<ScalarField> {
    NeumannSolver::new(u.grid().clone())?.pressure_euler(u)
}

pub fn solve_pressure_linearized(beta: &VectorField, w: &VectorField) -> Result<ScalarField> {
    NeumannSolver::new(beta.grid().clone())?.pressure_linearized(beta, w)
}

pub fn solve_harmonic_q(grid: &Arc<Grid>, a: &[f64], mu: f64) -> Result<ScalarField> {
    NeumannSolver::new(grid.clone())?.harmonic_q(a, mu)
}

pub fn check_solonnikov(f: &VectorField) -> Result<f64> {
    NeumannSolver::new(f.grid().clone())?.solonnikov(f).map(|r| r.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldcalc::{checks::observed_orders, l2, ScalarField};
    use crate::geometry::{build_grid, DomainSpec};

    fn annulus(n: usize) -> Arc<Grid> {
        build_grid(DomainSpec::annulus(1.0, 2.0), n, n).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let s = NeumannSolver::new(annulus(16)).unwrap();
        let fr = s.frame().unwrap();
        let p = s
            .solve(&NeumannProblem { rho: ScalarField::zeros(s.grid().clone()), g: vec![0.0; fr.len()] })
            .unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn incompatible_source_is_rejected() {
        let s = NeumannSolver::new(annulus(16)).unwrap();
        let rho = ScalarField::from_fn(s.grid().clone(), |_, _| 1.0);
        let g = vec![0.0; s.frame().unwrap().len()];
        assert!(matches!(s.solve(&NeumannProblem { rho, g }), Err(Error::IncompatibleData { .. })));
    }

    #[test]
    fn manufactured_quadratic_converges() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [16, 32, 64] {
            let grid = annulus(n);
            let s = NeumannSolver::new(grid.clone()).unwrap();
            let fr = s.frame().unwrap();
            let rho = ScalarField::from_fn(grid.clone(), |_, _| 4.0);
            let g: Vec<f64> = fr
                .nodes
                .iter()
                .map(|nd| {
                    let p = grid.position(nd.node);
                    2.0 * (p[0] * nd.normal[0] + p[1] * nd.normal[1])
                })
                .collect();
            let phi = s.solve(&NeumannProblem { rho, g }).unwrap();
            let exact = ScalarField::from_fn(grid.clone(), |x, y| x * x + y * y).recentered();
            errs.push(l2(&phi.sub(&exact)));
            hs.push(grid.axis1.h);
            assert!(phi.mean().abs() <= 1e-12 * phi.max_abs());
        }
        let p = observed_orders(&hs, &errs);
        assert!(p.iter().all(|o| *o > 1.8), "{errs:?} {p:?}");
    }

    #[test]
    fn rigid_rotation_pressure() {
        let grid = annulus(48);
        let s = NeumannSolver::new(grid.clone()).unwrap();
        let fr = s.frame().unwrap();
        let om = 1.5;
        let u = VectorField::from_cartesian_fn(grid.clone(), |x, y| [-om * y, om * x]);
        let a = vec![2.0 * om; fr.len()];
        let p = s.pressure_ns(&u, &a, 0.3).unwrap();
        let exact = ScalarField::from_fn(grid, |x, y| 0.5 * om * om * (x * x + y * y)).recentered();
        assert!(l2(&p.sub(&exact)) / l2(&exact) < 5e-3);
    }

    #[test]
    fn pressure_rejects_normal_flow() {
        let grid = annulus(16);
        let s = NeumannSolver::new(grid.clone()).unwrap();
        let u = VectorField::from_cartesian_fn(grid, |x, _| [x, 0.0]);
        assert!(matches!(s.pressure_euler(&u), Err(Error::BCViolation(_))));
    }

    #[test]
    fn harmonic_q_of_constant_is_zero() {
        let grid = annulus(16);
        let s = NeumannSolver::new(grid).unwrap();
        let a = vec![0.7; s.frame().unwrap().len()];
        assert_eq!(s.harmonic_q(&a, 0.1).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn solonnikov_potential_field_is_sharp() {
        let grid = annulus(48);
        let s = NeumannSolver::new(grid.clone()).unwrap();
        let f = VectorField::from_cartesian_fn(grid, |x, y| [2.0 * x + y, x - 0.4 * y]);
        let (_, ratio) = s.solonnikov(&f).unwrap();
        assert!((ratio - 1.0).abs() < 1e-2, "{ratio}");
    }

    #[test]
    fn linearity() {
        let grid = annulus(24);
        let s = NeumannSolver::new(grid.clone()).unwrap();
        let fr = s.frame().unwrap();
        let make = |c: f64| {
            let f = VectorField::from_cartesian_fn(grid.clone(), |x, y| [(c * x).sin(), y * x * c]);
            NeumannProblem { rho: s.fv_divergence(&f), g: fr.normal_component(&f.trace(fr)) }
        };
        let (p1, p2) = (make(1.0), make(0.5));
        let combo = NeumannProblem {
            rho: p1.rho.scale(2.0).add(&p2.rho),
            g: p1.g.iter().zip(&p2.g).map(|(a, b)| 2.0 * a + b).collect(),
        };
        let lhs = s.solve(&combo).unwrap();
        let rhs = s.solve(&p1).unwrap().scale(2.0).add(&s.solve(&p2).unwrap());
        assert!(lhs.sub(&rhs).max_abs() < 1e-10 * lhs.max_abs());
    }
}
