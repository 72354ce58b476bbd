//! Built-in initial conditions, boundary data and seeded random fields.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fieldcalc::VectorField;
use crate::geometry::{BoundaryFrame, DomainKind, Grid};
use crate::stokes::BoundarySeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `c e_theta / r`, irrotational (polar domains).
    Circulation { c: f64 },
    /// `f(r) e_theta` with `f = a r + b / r + c r^2`, vorticity `2a + 3cr`.
    Swirl { a: f64, b: f64, c: f64 },
    /// `amp (sin x cos y, -cos x sin y)` on the torus.
    TaylorGreen { amp: f64 },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::Zero => "zero",
            InitialCondition::Circulation { .. } => "circulation",
            InitialCondition::Swirl { .. } => "swirl",
            InitialCondition::TaylorGreen { .. } => "taylor_green",
        }
    }

    fn require_polar(&self, g: &Grid) -> Result<()> {
        if g.is_polar() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("{} needs an annulus or disk", self.name())))
        }
    }

    pub fn velocity(&self, grid: &Arc<Grid>) -> Result<VectorField> {
        let g = grid.clone();
        match *self {
            InitialCondition::Zero => Ok(VectorField::zeros(g)),
            InitialCondition::Circulation { c } => {
                self.require_polar(grid)?;
                Ok(polar_field(g, |r| [0.0, c / r]))
            }
            InitialCondition::Swirl { a, b, c } => {
                self.require_polar(grid)?;
                Ok(polar_field(g, |r| [0.0, a * r + b / r + c * r * r]))
            }
            InitialCondition::TaylorGreen { amp } => {
                if grid.spec.kind != DomainKind::Torus {
                    return Err(Error::InvalidSpec("taylor_green needs a torus".into()));
                }
                Ok(VectorField::from_cartesian_fn(g, |x, y| {
                    [amp * x.sin() * y.cos(), -amp * x.cos() * y.sin()]
                }))
            }
        }
    }

    /// Exact vorticity at a Cartesian point.
    pub fn vorticity(&self, x: f64, y: f64) -> f64 {
        match *self {
            InitialCondition::Zero | InitialCondition::Circulation { .. } => 0.0,
            InitialCondition::Swirl { a, c, .. } => 2.0 * a + 3.0 * c * (x * x + y * y).sqrt(),
            InitialCondition::TaylorGreen { amp } => 2.0 * amp * x.sin() * y.sin(),
        }
    }
}

/// Field with local polar components depending on `r` only.
fn polar_field(g: Arc<Grid>, f: impl Fn(f64) -> [f64; 2]) -> VectorField {
    let values = (0..g.len()).map(|k| f(g.scale(g.ij(k).0))).collect();
    VectorField::raw(g, values)
}

/// Prescribed boundary vorticity `a(t)`. Artificial boundaries always get 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryData {
    Zero,
    Constant { value: f64 },
    /// Vorticity of the initial condition plus a constant offset.
    MatchInitial { offset: f64 },
    /// `amp sin(m theta)` (polar) or `amp sin(2 pi m x / L)` (channel).
    Sine { amp: f64, mode: u32 },
    /// `amp sin(freq t)`, uniform along the boundary.
    Oscillating { amp: f64, freq: f64 },
}

impl BoundaryData {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryData::Zero => "zero",
            BoundaryData::Constant { .. } => "constant",
            BoundaryData::MatchInitial { .. } => "match_initial",
            BoundaryData::Sine { .. } => "sine",
            BoundaryData::Oscillating { .. } => "oscillating",
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, BoundaryData::Oscillating { .. })
    }

    /// Boundary series on `grid`; empty on domains without a boundary.
    pub fn series(&self, grid: &Arc<Grid>, ic: &InitialCondition) -> Result<BoundarySeries> {
        let frame = match BoundaryFrame::new(grid) {
            Ok(f) => f,
            Err(Error::NoBoundary) => return Ok(BoundarySeries::Steady(Vec::new())),
            Err(e) => return Err(e),
        };
        if !self.is_time_dependent() {
            return Ok(BoundarySeries::Steady(self.sample(0.0, grid, &frame, ic)));
        }
        let (data, grid, ic) = (*self, grid.clone(), *ic);
        Ok(BoundarySeries::from_fn(move |t| data.sample(t, &grid, &frame, &ic)))
    }

    pub fn sample(&self, t: f64, grid: &Grid, frame: &BoundaryFrame, ic: &InitialCondition) -> Vec<f64> {
        let mut out = vec![0.0; frame.len()];
        for c in frame.components.iter().filter(|c| !c.artificial) {
            for b in c.start..c.start + c.len {
                let p = grid.position(frame.nodes[b].node);
                out[b] = match *self {
                    BoundaryData::Zero => 0.0,
                    BoundaryData::Constant { value } => value,
                    BoundaryData::MatchInitial { offset } => ic.vorticity(p[0], p[1]) + offset,
                    BoundaryData::Sine { amp, mode } => {
                        let phase = if grid.is_polar() {
                            p[1].atan2(p[0])
                        } else {
                            2.0 * PI * p[0] / grid.spec.length_x
                        };
                        amp * (mode as f64 * phase).sin()
                    }
                    BoundaryData::Oscillating { amp, freq } => amp * (freq * t).sin(),
                };
            }
        }
        out
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random trigonometric polynomial of the given modes in `phase`.
fn trig(c: &[f64], phase: f64) -> f64 {
    c.chunks(2)
        .enumerate()
        .map(|(m, ab)| {
            let m = m as f64;
            ab[0] * (m * phase).cos() + ab.get(1).copied().unwrap_or(0.0) * (m * phase).sin()
        })
        .sum()
}

/// Normalized wall-normal coordinate in [0, 1] and the periodic phase.
fn wall_coords(g: &Grid, k: usize) -> Result<(f64, f64)> {
    let (i, j) = g.ij(k);
    match g.bounded_axis() {
        Some(1) => Ok((i as f64 / (g.n1 - 1) as f64, g.axis2.coord(j))),
        Some(_) => Ok((
            j as f64 / (g.n2 - 1) as f64,
            2.0 * PI * g.axis1.coord(i) / g.spec.length_x,
        )),
        None => Err(Error::NoBoundary),
    }
}

/// Random smooth field satisfying the absolute conditions `u.nu = 0`,
/// `omega = 0` exactly on every physical boundary component.
pub fn random_absolute_field(grid: &Arc<Grid>, seed: u64, modes: usize) -> Result<VectorField> {
    let mut r = rng(seed);
    let m = 2 * (modes + 1);
    let p = coeffs(&mut r, m);
    let q0 = coeffs(&mut r, m);
    let q1 = coeffs(&mut r, m);
    let q2 = coeffs(&mut r, m);
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (xi, ph) = wall_coords(grid, k)?;
        let bump = xi * (1.0 - xi);
        let g1 = 3.0 * xi * xi - 2.0 * xi.powi(3);
        let g2 = bump * bump;
        let normal = bump * trig(&p, ph);
        let tang = trig(&q0, ph) + g1 * trig(&q1, ph) + 4.0 * g2 * trig(&q2, ph);
        let rad = grid.scale(grid.ij(k).0);
        values.push(if grid.spec.kind == DomainKind::Disk {
            // Only the outer wall is physical; r u_theta = R^2 (rho^2 - rho^4 / 2) Q
            // stays bounded at the centre and is flat at rho = 1.
            let rho = rad / grid.spec.r_outer;
            [rho * (1.0 - rho) * trig(&p, ph), (rho - 0.5 * rho.powi(3)) * trig(&q0, ph)]
        } else if grid.is_polar() {
            // r u_theta has zero radial derivative at both walls.
            [normal, tang / rad]
        } else {
            [tang, normal]
        });
    }
    Ok(VectorField::raw(grid.clone(), values))
}

/// Random smooth Cartesian field with no boundary constraints.
pub fn random_smooth_field(grid: &Arc<Grid>, seed: u64) -> VectorField {
    let mut r = rng(seed);
    let terms: Vec<[f64; 6]> = (0..4)
        .map(|_| {
            [
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.5..1.5),
                r.gen_range(-1.5..1.5),
                r.gen_range(0.0..2.0 * PI),
                r.gen_range(0.0..2.0 * PI),
            ]
        })
        .collect();
    VectorField::from_cartesian_fn(grid.clone(), |x, y| {
        let mut u = [0.0; 2];
        for t in &terms {
            u[0] += t[0] * (t[2] * x + t[3] * y + t[4]).sin();
            u[1] += t[1] * (t[3] * x - t[2] * y + t[5]).cos();
        }
        u
    })
}
