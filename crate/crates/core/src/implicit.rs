//! Implicit vector diffusion `(I - c L) u = rhs` with the kinematic and
//! vorticity boundary conditions built into the operator.
//!
//! On a boundary row the normal component is pinned to zero. The tangential
//! component keeps its diffusion equation, but the second derivative across
//! the wall is taken over the half cell next to the wall with the wall flux
//! prescribed by the vorticity: on polar grids
//! `(1/r) d_r(r u_theta) = omega + (1/r) d_theta u_r = omega` because
//! `u_r = 0` along the wall, and on channel walls `d_y u_x = -omega`. This
//! is the curved-wall form of Thom's ghost-point closure.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fieldcalc::ops::{metric_radial_row, vector_laplacian_row, vector_tangential_rows};
use crate::fieldcalc::VectorField;
use crate::geometry::{BoundaryFrame, Grid};
use crate::linalg::{SparseBuilder, SparseLu};

/// Boundary bookkeeping shared by the vector operators.
#[derive(Debug, Clone)]
pub(crate) struct WallRows {
    /// Per grid node: `Some((frame index, upper side))` on a wall.
    pub wall: Vec<Option<(usize, bool)>>,
    /// Bounded axis (1 or 2), `None` on the torus.
    pub axis: Option<usize>,
}

impl WallRows {
    pub fn new(g: &Grid, frame: Option<&BoundaryFrame>) -> Self {
        let mut wall = vec![None; g.len()];
        if let Some(fr) = frame {
            for (b, nd) in fr.nodes.iter().enumerate() {
                let side = fr.components[fr.component_of(b)].side;
                wall[nd.node] = Some((b, side == 1));
            }
        }
        Self { wall, axis: g.bounded_axis() }
    }

    /// Local component normal to the walls.
    pub fn normal_comp(&self) -> usize {
        self.axis.map_or(usize::MAX, |a| a - 1)
    }

    pub fn tangential_comp(&self) -> usize {
        self.axis.map_or(usize::MAX, |a| 2 - a)
    }

    /// Sign relating the wall flux of the tangential component to omega.
    pub fn kappa(&self) -> f64 {
        if self.axis == Some(1) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Half-cell closure of the across-wall second derivative for the
/// tangential component at wall node `(i, j)`; returns the coefficient of
/// the wall flux.
fn wall_row(g: &Grid, i: usize, j: usize, axis: usize, upper: bool, comp: usize, out: &mut Vec<(usize, f64)>) -> f64 {
    let (h, m) = if axis == 1 { (g.axis1.h, i) } else { (g.axis2.h, j) };
    let inward: isize = if upper { -1 } else { 1 };
    let node = |d: isize| {
        if axis == 1 {
            g.index((i as isize + d) as usize, j)
        } else {
            g.index(i, (j as isize + d) as usize)
        }
    };
    let (s_b, s_in, s_face) = if axis == 1 {
        let mi = (m as isize + inward) as usize;
        (g.scale(m), g.scale(mi), g.scale_half(m, 0.5 * inward as f64))
    } else {
        (1.0, 1.0, 1.0)
    };
    // X_face = (s_in g_in - s_b g_b) / (h s_face) * (-inward), second
    // derivative = +-(X_wall - X_face) * 2 / h.
    let c = 2.0 / (h * h * s_face);
    out.push((2 * node(0) + comp, -c * s_b));
    out.push((2 * node(inward) + comp, c * s_in));
    if upper {
        2.0 / h
    } else {
        -2.0 / h
    }
}

/// Factored `I - c L` for one grid, `c` fixed.
#[derive(Debug)]
pub struct VectorDiffusion {
    grid: Arc<Grid>,
    rows: WallRows,
    coef: f64,
    lmat: SparseBuilder,
    lu: SparseLu,
    /// Wall-flux coefficient per frame node.
    data_coef: Vec<f64>,
}

impl VectorDiffusion {
    /// `coef` is `theta * mu * dt`.
    pub fn new(grid: Arc<Grid>, frame: Option<&BoundaryFrame>, coef: f64) -> Result<Self> {
        if !(coef.is_finite() && coef >= 0.0) {
            return Err(Error::InvalidSpec(format!("diffusion coefficient {coef}")));
        }
        let rows = WallRows::new(&grid, frame);
        let n = grid.len();
        let mut l = SparseBuilder::new(2 * n);
        let mut data_coef = vec![0.0; frame.map_or(0, |f| f.len())];
        let mut buf = Vec::with_capacity(16);
        for k in 0..n {
            let (i, j) = grid.ij(k);
            for comp in 0..2 {
                buf.clear();
                match rows.wall[k] {
                    None => vector_laplacian_row(&grid, k, comp, &mut buf),
                    Some(_) if comp == rows.normal_comp() => {}
                    Some((b, upper)) => {
                        let axis = rows.axis.expect("wall without bounded axis");
                        data_coef[b] = rows.kappa() * wall_row(&grid, i, j, axis, upper, comp, &mut buf);
                        if axis == 1 {
                            vector_tangential_rows(&grid, i, j, comp, &mut buf);
                        } else {
                            metric_radial_row(&grid, i, j, comp, &mut buf);
                        }
                    }
                }
                for (col, v) in &buf {
                    l.add(2 * k + comp, *col, *v);
                }
            }
        }
        let mut m = SparseBuilder::new(2 * n);
        for r in 0..2 * n {
            m.add(r, r, 1.0);
        }
        for (r, c, v) in l.entries() {
            m.add(r, c, -coef * v);
        }
        let lu = m.factor().map_err(|e| Error::BCEnforcementFailed(e.to_string()))?;
        Ok(Self { grid, rows, coef, lmat: l, lu, data_coef })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coef(&self) -> f64 {
        self.coef
    }

    /// Interleaved wall-flux term `b(a)` of the operator.
    pub fn boundary_term(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.grid.len()];
        if a.is_empty() {
            return out;
        }
        let t = self.rows.tangential_comp();
        for (k, w) in self.rows.wall.iter().enumerate() {
            if let Some((b, _)) = w {
                out[2 * k + t] = self.data_coef[*b] * a[*b];
            }
        }
        out
    }

    /// `L u + b(a)`, interleaved; zero on pinned rows.
    pub fn apply(&self, u: &VectorField, a: &[f64]) -> Vec<f64> {
        let x = flatten(u);
        let mut y = self.lmat.matvec(&x);
        for (o, b) in y.iter_mut().zip(self.boundary_term(a)) {
            *o += b;
        }
        y
    }

    /// Solve with the given interleaved right-hand side; wall-normal entries
    /// are overwritten with zero.
    pub fn solve(&self, mut rhs: Vec<f64>) -> Result<VectorField> {
        let nc = self.rows.normal_comp();
        for (k, w) in self.rows.wall.iter().enumerate() {
            if w.is_some() {
                rhs[2 * k + nc] = 0.0;
            }
        }
        let x = self.lu.solve(&rhs)?;
        Ok(unflatten(&self.grid, &x))
    }
}

pub(crate) fn flatten(u: &VectorField) -> Vec<f64> {
    u.values().iter().flat_map(|v| [v[0], v[1]]).collect()
}

pub(crate) fn unflatten(g: &Arc<Grid>, x: &[f64]) -> VectorField {
    VectorField::raw(g.clone(), x.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldcalc::{curl2d, l2};
    use crate::geometry::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    #[test]
    fn steady_circulation_is_preserved() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 24, 32).unwrap();
        let fr = BoundaryFrame::new(&g).unwrap();
        let u = VectorField::from_cartesian_fn(g.clone(), |x, y| {
            let r2 = x * x + y * y;
            [-0.3 * y / r2, 0.3 * x / r2]
        });
        let a = vec![0.0; fr.len()];
        let op = VectorDiffusion::new(g.clone(), Some(&fr), 0.05).unwrap();
        let lu = op.apply(&u, &a);
        assert!(lu.iter().all(|v| v.abs() < 1e-12));
        let next = op.solve(flatten(&u)).unwrap();
        assert!(l2(&next.sub(&u)) < 1e-12);
    }

    #[test]
    fn wall_vorticity_follows_data() {
        // Shear u = (y^2 / 2 - y, 0) in a channel: omega = 1 - y, so the
        // wall values are 1 (bottom) and 0 (top); L u = (1, 0).
        let g = build_grid(DomainSpec::channel(2.0 * PI, 1.0), 16, 33).unwrap();
        let fr = BoundaryFrame::new(&g).unwrap();
        let u = VectorField::from_cartesian_fn(g.clone(), |_, y| [0.5 * y * y - y, 0.0]);
        let a: Vec<f64> = fr.nodes.iter().map(|n| 1.0 - g.position(n.node)[1]).collect();
        let op = VectorDiffusion::new(g.clone(), Some(&fr), 1.0).unwrap();
        let lu = op.apply(&u, &a);
        for k in 0..g.len() {
            assert!((lu[2 * k] - 1.0).abs() < 1e-9, "node {k}: {}", lu[2 * k]);
            assert!(lu[2 * k + 1].abs() < 1e-12);
        }
        let w = curl2d(&u);
        assert!(w.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn polar_wall_flux_reproduces_rigid_rotation() {
        // u = r e_theta has omega = 2 and L u = 0.
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 16, 32).unwrap();
        let fr = BoundaryFrame::new(&g).unwrap();
        let u = VectorField::from_cartesian_fn(g.clone(), |x, y| [-y, x]);
        let a = vec![2.0; fr.len()];
        let op = VectorDiffusion::new(g, Some(&fr), 1.0).unwrap();
        assert!(op.apply(&u, &a).iter().all(|v| v.abs() < 1e-10));
    }
}
