//! Finite-difference operators in the local basis of the grid.
//!
//! Interior stencils are second-order centered; bounded ends use
//! second-order one-sided stencils. The Laplacians use the conservative
//! form in the metric direction, which makes the steady circulation
//! `c e_theta / r` an exact discrete null vector of the vector Laplacian.

use crate::geometry::{Axis, Grid};
use crate::par;

use super::fields::{ScalarField, VectorField};

/// Up to four `(offset, coefficient)` pairs along one axis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil1 {
    pub taps: [(isize, f64); 4],
    pub len: usize,
}

impl Stencil1 {
    fn new(taps: &[(isize, f64)]) -> Self {
        let mut t = [(0, 0.0); 4];
        t[..taps.len()].copy_from_slice(taps);
        Self { taps: t, len: taps.len() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.taps[..self.len].iter().copied()
    }
}

/// Whether index `m` has neighbours on both sides along `axis`.
#[inline]
pub(crate) fn centered(axis: &Axis, m: usize) -> bool {
    axis.periodic || (m > 0 && m + 1 < axis.n)
}

pub(crate) fn first_stencil(axis: &Axis, m: usize) -> Stencil1 {
    let h = axis.h;
    if centered(axis, m) {
        Stencil1::new(&[(-1, -0.5 / h), (1, 0.5 / h)])
    } else if m == 0 {
        Stencil1::new(&[(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)])
    } else {
        Stencil1::new(&[(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)])
    }
}

pub(crate) fn second_stencil(axis: &Axis, m: usize) -> Stencil1 {
    let h2 = axis.h * axis.h;
    if centered(axis, m) {
        Stencil1::new(&[(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)])
    } else if m == 0 {
        Stencil1::new(&[(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)])
    } else {
        Stencil1::new(&[(0, 2.0 / h2), (-1, -5.0 / h2), (-2, 4.0 / h2), (-3, -1.0 / h2)])
    }
}

/// Node index reached from `(i, j)` by `d` steps along `axis` (1 or 2).
#[inline]
pub(crate) fn neighbour(g: &Grid, i: usize, j: usize, axis: usize, d: isize) -> usize {
    if axis == 1 {
        g.index(g.axis1.step(i, d).expect("stencil leaves grid"), j)
    } else {
        g.index(i, g.axis2.step(j, d).expect("stencil leaves grid"))
    }
}

fn apply_axis(g: &Grid, f: &[f64], axis: usize, second: bool) -> Vec<f64> {
    par::map_indices(g.len(), |k| {
        let (i, j) = g.ij(k);
        let (ax, m) = if axis == 1 { (&g.axis1, i) } else { (&g.axis2, j) };
        let st = if second { second_stencil(ax, m) } else { first_stencil(ax, m) };
        st.iter().map(|(d, c)| c * f[neighbour(g, i, j, axis, d)]).sum()
    })
}

/// Derivative with respect to coordinate 1 (not arc length).
pub fn d1(g: &Grid, f: &[f64]) -> Vec<f64> {
    apply_axis(g, f, 1, false)
}

pub fn d2(g: &Grid, f: &[f64]) -> Vec<f64> {
    apply_axis(g, f, 2, false)
}

pub fn d11(g: &Grid, f: &[f64]) -> Vec<f64> {
    apply_axis(g, f, 1, true)
}

pub fn d22(g: &Grid, f: &[f64]) -> Vec<f64> {
    apply_axis(g, f, 2, true)
}

pub fn d12(g: &Grid, f: &[f64]) -> Vec<f64> {
    d1(g, &d2(g, f))
}

/// Row of the scalar Laplacian at node `k`, appended to `out` as
/// `(node, coefficient)`.
pub(crate) fn scalar_laplacian_row(g: &Grid, k: usize, out: &mut Vec<(usize, f64)>) {
    let (i, j) = g.ij(k);
    let s = g.scale(i);
    let sp = g.scale_slope();
    if centered(&g.axis1, i) {
        let h = g.axis1.h;
        let sp_half = g.scale_half(i, 0.5);
        let sm_half = g.scale_half(i, -0.5);
        out.push((neighbour(g, i, j, 1, 1), sp_half / (s * h * h)));
        out.push((k, -(sp_half + sm_half) / (s * h * h)));
        out.push((neighbour(g, i, j, 1, -1), sm_half / (s * h * h)));
    } else {
        for (d, c) in second_stencil(&g.axis1, i).iter() {
            out.push((neighbour(g, i, j, 1, d), c));
        }
        if sp != 0.0 {
            for (d, c) in first_stencil(&g.axis1, i).iter() {
                out.push((neighbour(g, i, j, 1, d), c * sp / s));
            }
        }
    }
    for (d, c) in second_stencil(&g.axis2, j).iter() {
        out.push((neighbour(g, i, j, 2, d), c / (s * s)));
    }
}

/// Radial part `d1((1/s) d1(s g))` of the vector Laplacian, conservative
/// in the interior.
pub(crate) fn metric_radial_row(g: &Grid, i: usize, j: usize, comp: usize, out: &mut Vec<(usize, f64)>) {
    let k = g.index(i, j);
    let s = g.scale(i);
    let sp = g.scale_slope();
    let h = g.axis1.h;
    if centered(&g.axis1, i) {
        let sp_half = g.scale_half(i, 0.5);
        let sm_half = g.scale_half(i, -0.5);
        let (ip, im) = (neighbour(g, i, j, 1, 1), neighbour(g, i, j, 1, -1));
        let (s_ip, s_im) = (g.scale(g.ij(ip).0), g.scale(g.ij(im).0));
        out.push((2 * ip + comp, s_ip / (h * h * sp_half)));
        out.push((2 * k + comp, -s / (h * h * sp_half) - s / (h * h * sm_half)));
        out.push((2 * im + comp, s_im / (h * h * sm_half)));
    } else {
        for (d, c) in second_stencil(&g.axis1, i).iter() {
            out.push((2 * neighbour(g, i, j, 1, d) + comp, c));
        }
        if sp != 0.0 {
            for (d, c) in first_stencil(&g.axis1, i).iter() {
                out.push((2 * neighbour(g, i, j, 1, d) + comp, c * sp / s));
            }
            out.push((2 * k + comp, -(sp * sp) / (s * s)));
        }
    }
}

/// Row of the vector Laplacian for component `comp` at node `k`; columns
/// index the interleaved unknowns `2 * node + component`.
pub(crate) fn vector_laplacian_row(g: &Grid, k: usize, comp: usize, out: &mut Vec<(usize, f64)>) {
    let (i, j) = g.ij(k);
    metric_radial_row(g, i, j, comp, out);
    vector_tangential_rows(g, i, j, comp, out);
}

/// Coordinate-2 part and metric coupling of the vector Laplacian.
pub(crate) fn vector_tangential_rows(g: &Grid, i: usize, j: usize, comp: usize, out: &mut Vec<(usize, f64)>) {
    let s = g.scale(i);
    for (d, c) in second_stencil(&g.axis2, j).iter() {
        out.push((2 * neighbour(g, i, j, 2, d) + comp, c / (s * s)));
    }
    let sp = g.scale_slope();
    if sp != 0.0 {
        let (other, sign) = if comp == 0 { (1, -1.0) } else { (0, 1.0) };
        for (d, c) in first_stencil(&g.axis2, j).iter() {
            out.push((2 * neighbour(g, i, j, 2, d) + other, sign * 2.0 * sp * c / (s * s)));
        }
    }
}

pub fn grad(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let a = d1(g, f.values());
    let b = d2(g, f.values());
    let values = (0..g.len())
        .map(|k| [a[k], b[k] / g.scale(g.ij(k).0)])
        .collect();
    VectorField::raw(g.clone(), values)
}

fn scaled_component(u: &VectorField, c: usize) -> Vec<f64> {
    let g = u.grid();
    u.values()
        .iter()
        .enumerate()
        .map(|(k, v)| g.scale(g.ij(k).0) * v[c])
        .collect()
}

pub fn div(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let a = d1(g, &scaled_component(u, 0));
    let u2: Vec<f64> = u.values().iter().map(|v| v[1]).collect();
    let b = d2(g, &u2);
    let values = (0..g.len())
        .map(|k| (a[k] + b[k]) / g.scale(g.ij(k).0))
        .collect();
    ScalarField::raw(g.clone(), values)
}

/// Scalar vorticity `d_x u_y - d_y u_x`.
pub fn curl2d(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let a = d1(g, &scaled_component(u, 1));
    let u1: Vec<f64> = u.values().iter().map(|v| v[0]).collect();
    let b = d2(g, &u1);
    let values = (0..g.len())
        .map(|k| (a[k] - b[k]) / g.scale(g.ij(k).0))
        .collect();
    ScalarField::raw(g.clone(), values)
}

/// Vector curl of a scalar, `(d_y w, -d_x w)`; the 2D form of curl of an
/// out-of-plane field.
pub fn curl_scalar(w: &ScalarField) -> VectorField {
    let gr = grad(w);
    let values = gr.values().iter().map(|v| [v[1], -v[0]]).collect();
    VectorField::raw(w.grid().clone(), values)
}

pub fn laplacian_scalar(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let x = f.values();
    let values = par::map_indices(g.len(), |k| {
        let mut row = Vec::with_capacity(12);
        scalar_laplacian_row(g, k, &mut row);
        row.iter().map(|(c, a)| a * x[*c]).sum()
    });
    ScalarField::raw(g.clone(), values)
}

pub fn laplacian_vector(u: &VectorField) -> VectorField {
    let g = u.grid();
    let x = u.values();
    let values = par::map_indices(g.len(), |k| {
        let mut row = Vec::with_capacity(16);
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            row.clear();
            vector_laplacian_row(g, k, c, &mut row);
            *o = row.iter().map(|(col, a)| a * x[col / 2][col % 2]).sum();
        }
        out
    });
    VectorField::raw(g.clone(), values)
}

/// Covariant derivative `(X . grad) Y` in the local basis.
pub fn advect(x: &VectorField, y: &VectorField) -> VectorField {
    let g = x.grid();
    let y1: Vec<f64> = y.values().iter().map(|v| v[0]).collect();
    let y2: Vec<f64> = y.values().iter().map(|v| v[1]).collect();
    let (a1, a2) = (d1(g, &y1), d1(g, &y2));
    let (b1, b2) = (d2(g, &y1), d2(g, &y2));
    let sp = g.scale_slope();
    let values = (0..g.len())
        .map(|k| {
            let s = g.scale(g.ij(k).0);
            let xv = x.values()[k];
            let yv = y.values()[k];
            [
                xv[0] * a1[k] + xv[1] * (b1[k] - sp * yv[1]) / s,
                xv[0] * a2[k] + xv[1] * (b2[k] + sp * yv[0]) / s,
            ]
        })
        .collect();
    VectorField::raw(g.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    fn torus(n: usize) -> std::sync::Arc<Grid> {
        build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), n, n).unwrap()
    }

    fn max_err(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
        a.iter().enumerate().fold(0.0, |m, (k, v)| m.max((v - b(k)).abs()))
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 12, 16).unwrap();
        let f = ScalarField::from_fn(g, |_, _| 3.25);
        assert!(grad(&f).max_abs() == 0.0);
    }

    #[test]
    fn rigid_rotation_has_vorticity_two() {
        let g = torus(32);
        // Periodic stand-in for (-y, x) near the origin.
        let u = VectorField::from_cartesian_fn(g, |x, y| [-y.sin(), x.sin()]);
        let w = curl2d(&u);
        let h = 2.0 * PI / 32.0;
        let factor = h.sin() / h;
        let g = u.grid().clone();
        let e = max_err(w.values(), |k| {
            let p = g.position(k);
            factor * (p[0].cos() + p[1].cos())
        });
        assert!(e < 1e-12);
        let ann = build_grid(DomainSpec::annulus(1.0, 2.0), 32, 64).unwrap();
        let u = VectorField::from_cartesian_fn(ann, |x, y| [-y, x]);
        let w = curl2d(&u);
        assert!(max_err(w.values(), |_| 2.0) < 1e-12);
    }

    #[test]
    fn laplacian_of_product_of_sines() {
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = torus(n);
            let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin());
            let l = laplacian_scalar(&f);
            errs.push(max_err(l.values(), |k| -2.0 * f.values()[k]));
        }
        assert!(errs[0] / errs[1] > 3.9);
    }

    #[test]
    fn circulation_is_a_discrete_null_vector() {
        let g = build_grid(DomainSpec::annulus(0.5, 2.0), 17, 24).unwrap();
        let u = VectorField::from_cartesian_fn(g.clone(), |x, y| {
            let r2 = x * x + y * y;
            [-y / r2, x / r2]
        });
        let l = laplacian_vector(&u);
        let interior: Vec<usize> = (0..g.len()).filter(|k| !g.on_boundary(*k)).collect();
        for k in &interior {
            assert!(l.values()[*k][0].abs() < 1e-11 && l.values()[*k][1].abs() < 1e-11);
        }
    }

    #[test]
    fn divergence_of_scalar_curl_vanishes_on_torus() {
        let g = torus(24);
        let w = ScalarField::from_fn(g, |x, y| (2.0 * x).sin() * y.cos() + (x + y).cos());
        let d = div(&curl_scalar(&w));
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn advection_examples() {
        let g = build_grid(DomainSpec::annulus(0.5, 1.0), 16, 64).unwrap();
        let e_theta = VectorField::from_cartesian_fn(g.clone(), |x, y| {
            let r = (x * x + y * y).sqrt();
            [-y / r, x / r]
        });
        let a = advect(&e_theta, &e_theta);
        let outer = g.n1 - 1;
        for j in 0..g.n2 {
            let k = g.index(outer, j);
            assert!((a.values()[k][0] + 1.0).abs() < 1e-12);
        }
        let t = torus(16);
        let x = VectorField::from_cartesian_fn(t.clone(), |_, _| [1.0, 0.0]);
        let y = VectorField::from_cartesian_fn(t.clone(), |x, _| [x.sin(), 0.0]);
        let a = advect(&x, &y);
        let h = 2.0 * PI / 16.0;
        let e = max_err(&a.component(0).into_values(), |k| {
            t.position(k)[0].cos() * h.sin() / h
        });
        assert!(e < 1e-12);
        let z = VectorField::zeros(t);
        assert_eq!(advect(&z, &y).max_abs(), 0.0);
    }

    #[test]
    fn one_sided_stencils_are_second_order() {
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = build_grid(DomainSpec::channel(1.0, 1.0), 8, n).unwrap();
            let f: Vec<f64> = (0..g.len()).map(|k| (3.0 * g.position(k)[1]).exp()).collect();
            let d = d2(&g, &f);
            let dd = d22(&g, &f);
            let e1 = max_err(&d, |k| 3.0 * f[k]);
            let e2 = max_err(&dd, |k| 9.0 * f[k]);
            errs.push((e1, e2));
        }
        for w in errs.windows(2) {
            assert!(w[0].0 / w[1].0 > 3.5);
            assert!(w[0].1 / w[1].1 > 3.5);
        }
    }
}
