//! Residuals of the boundary-frame and integral identities in 2D.
//!
//! Conventions: `u_n = <u, nu>`, `u_t = <u, tau>` with `tau` the normal
//! rotated by +90 degrees, `d_s` the arc-length derivative along `tau`,
//! `h` the boundary curvature (`H = h` in 2D) and `omega` the scalar
//! vorticity. The reductions checked here are
//!
//! ```text
//! <w.grad u, nu> = -h u_t w_t - H w_n u_n + w_n div u
//!                  + w_t d_s(u_n) + u_t d_s(w_n) - d_s(w_n u_t)
//! d_nu div u     = <lap u, nu> + d_s omega
//! 1/2 d_nu |u|^2 = omega u_t + u_n div u - h u_t^2 - H u_n^2
//!                  + 2 u_t d_s(u_n) - d_s(u_n u_t)
//! int omega phi  = int <u, curl phi> + oint phi u_t
//! int <lap u, u> = -int omega^2 - int (div u)^2 + oint omega u_t + oint div(u) u_n
//! int |grad u|^2 = int omega^2 + int (div u)^2 - oint h u_t^2 - oint H u_n^2
//!                  + 2 oint u_t d_s(u_n)
//! ```
//!
//! The integration-by-parts identity pairs a vector with a scalar because
//! the curl maps vectors to scalars in 2D.

use crate::error::{Error, Result};
use crate::geometry::{dot, BoundaryFrame, Grid};

use super::fields::{ScalarField, VectorField};
use super::jets::{jets_of, scalar_jets, vector_jet_summary, VectorJet};
use super::ops::{advect, curl2d, curl_scalar, div, grad, laplacian_scalar, laplacian_vector};

/// Nodes at least `depth` cells away from every bounded edge. On the Disk
/// the pole region `r < R/4` is excluded too: the cut-out shrinks with the
/// grid, so pointwise residuals there do not converge.
pub fn interior_nodes(g: &Grid, depth: usize) -> Vec<usize> {
    let r_min = if g.spec.kind == crate::geometry::DomainKind::Disk { 0.25 * g.spec.r_outer } else { f64::NEG_INFINITY };
    (0..g.len())
        .filter(|k| g.boundary_depth(*k) >= depth && g.axis1.coord(g.ij(*k).0) >= r_min)
        .collect()
}

/// Whether boundary node `b` lies on the physical boundary.
fn physical(frame: &BoundaryFrame, b: usize) -> bool {
    !frame.components[frame.component_of(b)].artificial
}

/// Observed convergence orders between successive `(h, error)` pairs.
pub fn observed_orders(hs: &[f64], errs: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errs.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

fn grad_dot(j: &super::jets::Jet, n: [f64; 2]) -> f64 {
    j.fx * n[0] + j.fy * n[1]
}

/// Max boundary residual of the frame decomposition of `<w.grad u, nu>`.
pub fn check_lemma21(u: &VectorField, w: &VectorField, frame: &BoundaryFrame) -> f64 {
    let [ux, uy] = super::jets::vector_jets(u);
    let ut = u.trace(frame);
    let wt = w.trace(frame);
    let un = frame.normal_component(&ut);
    let ul = frame.tangential_component(&ut);
    let wn = frame.normal_component(&wt);
    let wl = frame.tangential_component(&wt);
    let wn_ul: Vec<f64> = wn.iter().zip(&ul).map(|(a, b)| a * b).collect();
    let ds_un = frame.arc_derivative(&un);
    let ds_wn = frame.arc_derivative(&wn);
    let ds_wn_ul = frame.arc_derivative(&wn_ul);
    max_abs(frame.nodes.iter().enumerate().filter(|(b, _)| physical(frame, *b)).map(|(b, n)| {
        let k = n.node;
        let wv = wt[b];
        let adv = [
            wv[0] * ux[k].fx + wv[1] * ux[k].fy,
            wv[0] * uy[k].fx + wv[1] * uy[k].fy,
        ];
        let lhs = dot(adv, n.normal);
        let h = n.curvature;
        let div_u = ux[k].fx + uy[k].fy;
        let rhs = -h * ul[b] * wl[b] - h * wn[b] * un[b] + wn[b] * div_u + wl[b] * ds_un[b]
            + ul[b] * ds_wn[b]
            - ds_wn_ul[b];
        lhs - rhs
    }))
}

/// Max boundary residuals of parts (i) and (ii) of the normal-derivative
/// identities.
pub fn check_lemma22(u: &VectorField, frame: &BoundaryFrame) -> (f64, f64) {
    let [ux, uy] = super::jets::vector_jets(u);
    let q = vector_jet_summary(u);
    let ut = u.trace(frame);
    let un = frame.normal_component(&ut);
    let ul = frame.tangential_component(&ut);
    let omega: Vec<f64> = frame.nodes.iter().map(|n| q[n.node].vorticity).collect();
    let un_ul: Vec<f64> = un.iter().zip(&ul).map(|(a, b)| a * b).collect();
    let ds_omega = frame.arc_derivative(&omega);
    let ds_un = frame.arc_derivative(&un);
    let ds_un_ul = frame.arc_derivative(&un_ul);
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for (b, n) in frame.nodes.iter().enumerate().filter(|(b, _)| physical(frame, *b)) {
        let k = n.node;
        let qk = &q[k];
        let lhs1 = dot(qk.grad_div, n.normal);
        let rhs1 = dot(qk.laplacian, n.normal) + ds_omega[b];
        r1 = r1.max((lhs1 - rhs1).abs());
        let half_dn = qk.u[0] * grad_dot(&ux[k], n.normal) + qk.u[1] * grad_dot(&uy[k], n.normal);
        let h = n.curvature;
        let rhs2 = omega[b] * ul[b] + un[b] * qk.divergence - h * ul[b] * ul[b] - h * un[b] * un[b]
            + 2.0 * ul[b] * ds_un[b]
            - ds_un_ul[b];
        r2 = r2.max((half_dn - rhs2).abs());
    }
    (r1, r2)
}

fn volume(g: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    g.weights().iter().enumerate().map(|(k, w)| w * f(k)).sum()
}

fn surface(frame: Option<&BoundaryFrame>, f: impl Fn(usize) -> f64) -> f64 {
    match frame {
        Some(fr) => {
            let vals: Vec<f64> = (0..fr.len()).map(f).collect();
            fr.surface_integrate_all(&vals)
        }
        None => 0.0,
    }
}

/// `|int omega(u) phi - int <u, curl phi> - oint phi u_t|`. Pass `None` on
/// the torus.
pub fn check_integration_by_parts(u: &VectorField, phi: &ScalarField, frame: Option<&BoundaryFrame>) -> f64 {
    let g = u.grid();
    let q = vector_jet_summary(u);
    let pj = scalar_jets(phi);
    let vol = volume(g, |k| {
        let cp = [pj[k].fy, -pj[k].fx];
        q[k].vorticity * pj[k].f - (q[k].u[0] * cp[0] + q[k].u[1] * cp[1])
    });
    let bdry = frame.map(|fr| {
        let ut = u.trace(fr);
        let ul = fr.tangential_component(&ut);
        surface(Some(fr), |b| pj[fr.nodes[b].node].f * ul[b])
    });
    (vol - bdry.unwrap_or(0.0)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BochnerResiduals {
    /// Integral identity for `int <lap u, u>`.
    pub first: f64,
    /// Integral identity for `int |grad u|^2`.
    pub second: f64,
    /// Max interior residual of `<lap u, u> = 1/2 lap |u|^2 - |grad u|^2`.
    pub pointwise: f64,
}

pub fn check_bochner_suite(u: &VectorField, frame: Option<&BoundaryFrame>) -> BochnerResiduals {
    let g = u.grid();
    let q = vector_jet_summary(u);
    let lap_u_dot_u = |k: usize| q[k].laplacian[0] * q[k].u[0] + q[k].laplacian[1] * q[k].u[1];
    let omega_sq = volume(g, |k| q[k].vorticity.powi(2));
    let div_sq = volume(g, |k| q[k].divergence.powi(2));
    let (mut b_first, mut b_second) = (0.0, 0.0);
    if let Some(fr) = frame {
        let ut = u.trace(fr);
        let un = fr.normal_component(&ut);
        let ul = fr.tangential_component(&ut);
        let ds_un = fr.arc_derivative(&un);
        b_first = surface(frame, |b| {
            let k = fr.nodes[b].node;
            q[k].vorticity * ul[b] + q[k].divergence * un[b]
        });
        b_second = surface(frame, |b| {
            let h = fr.nodes[b].curvature;
            -h * ul[b] * ul[b] - h * un[b] * un[b] + 2.0 * ul[b] * ds_un[b]
        });
    }
    let first = volume(g, lap_u_dot_u) + omega_sq + div_sq - b_first;
    let second = volume(g, |k| q[k].grad_sq) - omega_sq - div_sq - b_second;
    let half_lap = laplacian_scalar(&u.magnitude_sq());
    let pointwise = max_abs(
        interior_nodes(g, 2)
            .into_iter()
            .map(|k| lap_u_dot_u(k) - 0.5 * half_lap.values()[k] + q[k].grad_sq),
    );
    BochnerResiduals { first: first.abs(), second: second.abs(), pointwise }
}

/// Max interior residual of `lap u = -curl curl u + grad div u` using the
/// discrete operators.
pub fn check_laplacian_identity(u: &VectorField) -> f64 {
    let lap = laplacian_vector(u);
    let rhs = grad(&div(u)).sub(&curl_scalar(&curl2d(u)));
    let g = u.grid();
    max_abs(interior_nodes(g, 2).into_iter().flat_map(|k| {
        let a = lap.values()[k];
        let b = rhs.values()[k];
        [a[0] - b[0], a[1] - b[1]]
    }))
}

/// Max interior residuals of `u.grad u = omega x u + grad |u|^2 / 2` and of
/// the curl-of-advection identity with `X = Y = u`.
pub fn check_vector_identities(u: &VectorField) -> (f64, f64) {
    let g = u.grid();
    let adv = advect(u, u);
    let omega = curl2d(u);
    let gk = grad(&u.magnitude_sq());
    let first = max_abs(interior_nodes(g, 2).into_iter().flat_map(|k| {
        let a = adv.values()[k];
        let v = u.values()[k];
        let w = omega.values()[k];
        let gr = gk.values()[k];
        [a[0] - (-w * v[1] + 0.5 * gr[0]), a[1] - (w * v[0] + 0.5 * gr[1])]
    }));
    (first, check_curl_advection(u, u))
}

/// Cartesian gradient `[d_x f, d_y f]` of each Cartesian component.
fn cartesian_gradients(u: &VectorField) -> [Vec<[f64; 2]>; 2] {
    let g = u.grid();
    let one = |c: usize| {
        let gr = grad(&u.cartesian_component(c));
        gr.values()
            .iter()
            .enumerate()
            .map(|(k, v)| g.to_cartesian(k, *v))
            .collect::<Vec<_>>()
    };
    [one(0), one(1)]
}

/// Max interior residual of
/// `curl(X.grad Y) = sum_a (d_x X^a d_a Y^y - d_y X^a d_a Y^x) + X.grad omega(Y)`.
pub fn check_curl_advection(x: &VectorField, y: &VectorField) -> f64 {
    let g = x.grid();
    let lhs = curl2d(&advect(x, y));
    let [gx, gy] = cartesian_gradients(x);
    let [hx, hy] = cartesian_gradients(y);
    let gw = grad(&curl2d(y));
    max_abs(interior_nodes(g, 2).into_iter().map(|k| {
        // dX[a][b] = d_b X^a
        let dx = [gx[k], gy[k]];
        let dy = [hx[k], hy[k]];
        let mut rhs = 0.0;
        for a in 0..2 {
            rhs += dx[a][0] * dy[1][a] - dx[a][1] * dy[0][a];
        }
        let xv = x.values()[k];
        let gwv = gw.values()[k];
        rhs += xv[0] * gwv[0] + xv[1] * gwv[1];
        lhs.values()[k] - rhs
    }))
}

/// Max over the boundary of `|<curl omega, nu>|`, which vanishes when the
/// vorticity has zero trace.
pub fn vorticity_flux_trace(u: &VectorField, frame: &BoundaryFrame) -> f64 {
    let q = vector_jet_summary(u);
    let omega: Vec<f64> = q.iter().map(|v| v.vorticity).collect();
    let oj = jets_of(u.grid(), &omega);
    max_abs(frame.nodes.iter().map(|n| {
        let j = &oj[n.node];
        dot([j.fy, -j.fx], n.normal)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// `||u||_{H1} / ||(omega, div u, u)||_2`.
    pub h1_ratio: f64,
    /// `||grad^2 u||^2 / (||lap u||^2 + ||grad u||^2)`.
    pub hessian_ratio: f64,
    /// `||u||_{H2} / ||(grad div u, curl omega, u)||_2`.
    pub h2_ratio: f64,
}

impl InequalityReport {
    fn max(self, o: Self) -> Self {
        Self {
            h1_ratio: self.h1_ratio.max(o.h1_ratio),
            hessian_ratio: self.hessian_ratio.max(o.hessian_ratio),
            h2_ratio: self.h2_ratio.max(o.h2_ratio),
        }
    }
}

fn sums(g: &Grid, q: &[VectorJet], f: impl Fn(&VectorJet) -> f64) -> f64 {
    q.iter().zip(g.weights()).map(|(v, w)| w * f(v)).sum()
}

/// Verify the discrete absolute conditions `u_n = 0`, `omega = 0` on the
/// physical boundary. `omega_tol` is relative to `max |grad u|`.
pub fn check_absolute_bcs(u: &VectorField, frame: &BoundaryFrame, omega_tol: f64) -> Result<()> {
    let q = vector_jet_summary(u);
    let scale = q.iter().fold(0.0f64, |m, v| m.max(v.grad_sq.sqrt())).max(u.max_abs());
    let real: Vec<usize> = frame
        .components
        .iter()
        .filter(|c| !c.artificial)
        .flat_map(|c| c.start..c.start + c.len)
        .collect();
    let un = frame.normal_component(&u.trace(frame));
    let un_max = max_abs(real.iter().map(|&b| un[b]));
    if un_max > 1e-10 * scale.max(1.0) {
        return Err(Error::BCViolation(format!("max |u.nu| = {un_max:.3e}")));
    }
    let om = max_abs(real.iter().map(|&b| q[frame.nodes[b].node].vorticity));
    if om > omega_tol * scale {
        return Err(Error::BCViolation(format!("max |omega| on boundary = {om:.3e}")));
    }
    Ok(())
}

/// Largest norm-equivalence ratios over an ensemble of fields satisfying
/// absolute boundary conditions.
pub fn check_absolute_bc_inequalities(
    ensemble: &[VectorField],
    frame: &BoundaryFrame,
    omega_tol: f64,
) -> Result<InequalityReport> {
    if ensemble.is_empty() {
        return Err(Error::DegenerateInput("empty ensemble".into()));
    }
    let reports = crate::par::map_items(ensemble, |u| -> Result<InequalityReport> {
        let g = u.grid();
        let q = vector_jet_summary(u);
        let l2 = sums(g, &q, |v| v.u[0] * v.u[0] + v.u[1] * v.u[1]);
        if l2 == 0.0 {
            return Err(Error::DegenerateInput("zero field in ensemble".into()));
        }
        check_absolute_bcs(u, frame, omega_tol)?;
        let gr = sums(g, &q, |v| v.grad_sq);
        let hs = sums(g, &q, |v| v.hess_sq);
        let om = sums(g, &q, |v| v.vorticity.powi(2));
        let dv = sums(g, &q, |v| v.divergence.powi(2));
        let lap = sums(g, &q, |v| v.laplacian[0].powi(2) + v.laplacian[1].powi(2));
        let gd = sums(g, &q, |v| v.grad_div[0].powi(2) + v.grad_div[1].powi(2));
        let cw = sums(g, &q, |v| v.curl_vorticity[0].powi(2) + v.curl_vorticity[1].powi(2));
        Ok(InequalityReport {
            h1_ratio: ((l2 + gr) / (om + dv + l2)).sqrt(),
            hessian_ratio: hs / (lap + gr),
            h2_ratio: ((l2 + gr + hs) / (gd + cw + l2)).sqrt(),
        })
    });
    let mut out: Option<InequalityReport> = None;
    for r in reports {
        let r = r?;
        out = Some(out.map_or(r, |o| o.max(r)));
    }
    Ok(out.expect("non-empty ensemble"))
}

/// Smallest `C` with `oint |u|^2 <= eps ||grad u||^2 + (C / eps) ||u||^2`
/// for every field and every `eps`.
pub fn trace_constant(ensemble: &[VectorField], frame: &BoundaryFrame, eps: &[f64]) -> f64 {
    let mut c: f64 = 0.0;
    for u in ensemble {
        let g = u.grid();
        let q = vector_jet_summary(u);
        let l2 = sums(g, &q, |v| v.u[0] * v.u[0] + v.u[1] * v.u[1]);
        let gr = sums(g, &q, |v| v.grad_sq);
        let tr = u.trace(frame);
        let sq: Vec<f64> = tr.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
        let bd = frame.surface_integrate_all(&sq);
        for e in eps {
            c = c.max(e * (bd - e * gr) / l2);
        }
    }
    c
}

/// Manufactured fields for the identity suite: two smooth vector fields and
/// a smooth scalar, periodic along any periodic Cartesian direction.
pub fn manufactured_fields(g: &std::sync::Arc<Grid>) -> (VectorField, VectorField, ScalarField) {
    use crate::geometry::DomainKind;
    use std::f64::consts::TAU;
    let sp = g.spec;
    // Map a periodic coordinate to a bounded smooth one with the right period.
    let wrap = |t: f64, len: f64| if len > 0.0 { (TAU * t / len).sin() * len / TAU } else { t };
    let (lx, ly) = match sp.kind {
        DomainKind::Channel => (sp.length_x, 0.0),
        DomainKind::Torus => (sp.length_x, sp.length_y),
        _ => (0.0, 0.0),
    };
    let u = VectorField::from_cartesian_fn(g.clone(), |x, y| {
        let (x, y) = (wrap(x, lx), wrap(y, ly));
        [(0.7 * x).sin() * y + 0.3 * x * x, (0.5 * y).cos() * x - 0.2 * x * y]
    });
    let w = VectorField::from_cartesian_fn(g.clone(), |x, y| {
        let (x, y) = (wrap(x, lx), wrap(y, ly));
        [y.cos(), x * (0.4 * y).sin()]
    });
    let phi = ScalarField::from_fn(g.clone(), |x, y| (wrap(x, lx) + 0.3 * wrap(y, ly)).sin());
    (u, w, phi)
}

/// Every identity residual on the manufactured fields. Boundary identities
/// are skipped when `frame` is `None`.
pub fn identity_residuals(g: &std::sync::Arc<Grid>, frame: Option<&BoundaryFrame>) -> Vec<(&'static str, f64)> {
    let (u, w, phi) = manufactured_fields(g);
    let bo = check_bochner_suite(&u, frame);
    let (adv, curl_adv) = check_vector_identities(&u);
    let mut out = Vec::with_capacity(11);
    if let Some(f) = frame {
        let (nd, ne) = check_lemma22(&u, f);
        out.push(("boundary_advection", check_lemma21(&u, &w, f)));
        out.push(("normal_divergence", nd));
        out.push(("normal_energy", ne));
    }
    out.extend([
        ("integration_by_parts", check_integration_by_parts(&u, &phi, frame)),
        ("bochner_integral", bo.first),
        ("gradient_integral", bo.second),
        ("bochner_pointwise", bo.pointwise),
        ("laplacian_identity", check_laplacian_identity(&u)),
        ("advection_identity", adv),
        ("curl_advection", curl_adv),
        ("curl_advection_mixed", check_curl_advection(&u, &w)),
    ]);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub name: &'static str,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
}

impl ConvergenceRow {
    /// Order on the finest pair, or exactness at round-off level.
    pub fn passes(&self, min_order: f64) -> bool {
        let exact = self.residuals.iter().all(|r| *r < 1e-10);
        exact || self.orders.last().is_some_and(|p| *p >= min_order)
    }
}

/// Identity residuals across grids, with observed orders in `h = 1/n1`.
pub fn identity_convergence(grids: &[std::sync::Arc<Grid>]) -> Result<Vec<ConvergenceRow>> {
    let per_grid = crate::par::map_items(grids, |g| -> Result<Vec<(&'static str, f64)>> {
        let frame = match BoundaryFrame::new(g) {
            Ok(f) => Some(f),
            Err(Error::NoBoundary) => None,
            Err(e) => return Err(e),
        };
        Ok(identity_residuals(g, frame.as_ref()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = grids.iter().map(|g| 1.0 / g.n1 as f64).collect();
    let first = per_grid.first().ok_or_else(|| Error::DegenerateInput("no grids".into()))?;
    Ok(first
        .iter()
        .enumerate()
        .map(|(c, (name, _))| {
            let residuals: Vec<f64> = per_grid.iter().map(|r| r[c].1).collect();
            ConvergenceRow { name, orders: observed_orders(&hs, &residuals), residuals }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    fn annulus(n: usize) -> (std::sync::Arc<Grid>, BoundaryFrame) {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), n, n).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        (g, f)
    }

    fn smooth(g: std::sync::Arc<Grid>) -> VectorField {
        VectorField::from_cartesian_fn(g, |x, y| {
            [(0.7 * x).sin() * y + 0.3 * x * x, (0.5 * y).cos() * x - 0.2 * x * y]
        })
    }

    #[test]
    fn zero_fields_give_zero_residuals() {
        let (g, f) = annulus(16);
        let z = VectorField::zeros(g.clone());
        assert_eq!(check_lemma21(&z, &z, &f), 0.0);
        assert_eq!(check_lemma22(&z, &f), (0.0, 0.0));
        let b = check_bochner_suite(&z, Some(&f));
        assert_eq!((b.first, b.second, b.pointwise), (0.0, 0.0, 0.0));
        assert_eq!(check_integration_by_parts(&z, &ScalarField::zeros(g), Some(&f)), 0.0);
    }

    #[test]
    fn circular_flow_matches_curvature_term() {
        // Unit outer circle: <u.grad u, nu> = -pi(u, u) = -1 for u = e_theta.
        let g = build_grid(DomainSpec::annulus(0.5, 1.0), 32, 64).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let u = VectorField::from_cartesian_fn(g, |x, y| {
            let r = (x * x + y * y).sqrt();
            [-y / r, x / r]
        });
        assert!(check_lemma21(&u, &u, &f) < 5e-3);
    }

    #[test]
    fn identities_converge_on_smooth_fields() {
        let mut hs = Vec::new();
        let mut errs: Vec<[f64; 6]> = Vec::new();
        for n in [16, 32, 64] {
            let (g, f) = annulus(n);
            let u = smooth(g.clone());
            let w = VectorField::from_cartesian_fn(g.clone(), |x, y| [y.cos(), x * (0.4 * y).sin()]);
            let phi = ScalarField::from_fn(g.clone(), |x, y| (x + 0.3 * y).sin());
            let (a, b) = check_lemma22(&u, &f);
            let bo = check_bochner_suite(&u, Some(&f));
            errs.push([
                check_lemma21(&u, &w, &f),
                a,
                b,
                check_integration_by_parts(&u, &phi, Some(&f)),
                bo.first,
                bo.second,
            ]);
            hs.push(1.0 / n as f64);
        }
        for c in 0..6 {
            let e: Vec<f64> = errs.iter().map(|r| r[c]).collect();
            let p = observed_orders(&hs, &e);
            assert!(p[1] > 1.8, "column {c}: errors {e:?} orders {p:?}");
        }
    }

    #[test]
    fn constant_field_on_torus() {
        let g = build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), 16, 16).unwrap();
        let u = VectorField::from_cartesian_fn(g, |_, _| [1.5, -0.5]);
        let b = check_bochner_suite(&u, None);
        assert!(b.first < 1e-12 && b.second < 1e-12 && b.pointwise < 1e-12);
        let (a, c) = check_vector_identities(&u);
        assert!(a < 1e-12 && c < 1e-12);
    }

    #[test]
    fn degenerate_ensemble_is_rejected() {
        let (g, f) = annulus(16);
        let z = vec![VectorField::zeros(g)];
        assert!(matches!(
            check_absolute_bc_inequalities(&z, &f, 1.0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn suite_converges_on_every_domain() {
        for spec in [
            DomainSpec::annulus(1.0, 2.0),
            DomainSpec::disk(1.0),
            DomainSpec::channel(2.0, 1.0),
            DomainSpec::torus(6.0, 6.0),
        ] {
            let gs: Vec<_> = [24, 48, 96].iter().map(|n| build_grid(spec, *n, *n).unwrap()).collect();
            for row in identity_convergence(&gs).unwrap() {
                assert!(row.passes(1.8), "{:?} {row:?}", spec.kind);
            }
        }
    }

    #[test]
    fn observed_order_of_quadratic_decay() {
        let p = observed_orders(&[0.1, 0.05], &[1e-2, 2.5e-3]);
        assert!((p[0] - 2.0).abs() < 1e-12);
    }
}
