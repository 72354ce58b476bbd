//! Pointwise Cartesian derivatives up to second order.
//!
//! Jets are built from the coordinate difference stencils by the chain rule,
//! so they stay second-order accurate on the boundary rows as well. They
//! feed the norms and the identity checks.

use crate::geometry::Grid;

use super::fields::{ScalarField, VectorField};
use super::ops::{d1, d11, d12, d2, d22};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

impl Jet {
    pub fn grad_sq(&self) -> f64 {
        self.fx * self.fx + self.fy * self.fy
    }

    pub fn hess_sq(&self) -> f64 {
        self.fxx * self.fxx + 2.0 * self.fxy * self.fxy + self.fyy * self.fyy
    }

    pub fn laplacian(&self) -> f64 {
        self.fxx + self.fyy
    }
}

pub fn jets_of(g: &Grid, f: &[f64]) -> Vec<Jet> {
    let a = d1(g, f);
    let b = d2(g, f);
    let aa = d11(g, f);
    let bb = d22(g, f);
    let ab = d12(g, f);
    (0..g.len())
        .map(|k| {
            if !g.is_polar() {
                return Jet { f: f[k], fx: a[k], fy: b[k], fxx: aa[k], fxy: ab[k], fyy: bb[k] };
            }
            let (i, j) = g.ij(k);
            let r = g.scale(i);
            let (s, c) = g.axis2.coord(j).sin_cos();
            let (fr, ft, frr, ftt, frt) = (a[k], b[k], aa[k], bb[k], ab[k]);
            let (r2, cs, c2, s2) = (r * r, c * s, c * c, s * s);
            Jet {
                f: f[k],
                fx: c * fr - s / r * ft,
                fy: s * fr + c / r * ft,
                fxx: c2 * frr + s2 / r * fr + s2 / r2 * ftt - 2.0 * cs / r * frt + 2.0 * cs / r2 * ft,
                fyy: s2 * frr + c2 / r * fr + c2 / r2 * ftt + 2.0 * cs / r * frt - 2.0 * cs / r2 * ft,
                fxy: cs * frr - cs / r * fr - cs / r2 * ftt + (c2 - s2) / r * frt - (c2 - s2) / r2 * ft,
            }
        })
        .collect()
}

pub fn scalar_jets(f: &ScalarField) -> Vec<Jet> {
    jets_of(f.grid(), f.values())
}

/// Jets of the two Cartesian components of `u`.
pub fn vector_jets(u: &VectorField) -> [Vec<Jet>; 2] {
    let g = u.grid();
    [
        jets_of(g, u.cartesian_component(0).values()),
        jets_of(g, u.cartesian_component(1).values()),
    ]
}

/// Pointwise quantities of a vector field derived from its jets.
#[derive(Debug, Clone, Copy, Default)]
pub struct VectorJet {
    pub u: [f64; 2],
    pub vorticity: f64,
    pub divergence: f64,
    /// `grad(div u)`.
    pub grad_div: [f64; 2],
    /// Cartesian Laplacian of each component.
    pub laplacian: [f64; 2],
    /// Frobenius norm squared of the gradient.
    pub grad_sq: f64,
    pub hess_sq: f64,
    /// `(d_y omega, -d_x omega)`.
    pub curl_vorticity: [f64; 2],
}

pub fn vector_jet_summary(u: &VectorField) -> Vec<VectorJet> {
    let [jx, jy] = vector_jets(u);
    jx.iter()
        .zip(&jy)
        .map(|(a, b)| {
            let wx = b.fxx - a.fxy;
            let wy = b.fxy - a.fyy;
            VectorJet {
                u: [a.f, b.f],
                vorticity: b.fx - a.fy,
                divergence: a.fx + b.fy,
                grad_div: [a.fxx + b.fxy, a.fxy + b.fyy],
                laplacian: [a.laplacian(), b.laplacian()],
                grad_sq: a.grad_sq() + b.grad_sq(),
                hess_sq: a.hess_sq() + b.hess_sq(),
                curl_vorticity: [wy, -wx],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};

    #[test]
    fn polar_chain_rule_converges_on_quadratics() {
        // Quadratics in (x, y) are not polynomial in (r, theta), so check at
        // high resolution and across a refinement instead.
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * x + 3.0 * x * y - y * y;
        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = build_grid(DomainSpec::annulus(1.0, 2.0), n, 2 * n).unwrap();
            let s = ScalarField::from_fn(g.clone(), f);
            let jets = scalar_jets(&s);
            let mut e: f64 = 0.0;
            for (k, jt) in jets.iter().enumerate() {
                let p = g.position(k);
                let (x, y) = (p[0], p[1]);
                e = e
                    .max((jt.fx - (2.0 + x + 3.0 * y)).abs())
                    .max((jt.fy - (-1.0 + 3.0 * x - 2.0 * y)).abs())
                    .max((jt.fxx - 1.0).abs())
                    .max((jt.fxy - 3.0).abs())
                    .max((jt.fyy + 2.0).abs());
            }
            errs.push(e);
        }
        assert!(errs[1] < 2e-2, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn rigid_rotation_summary() {
        // Angular differences of sin/cos carry an O(h^2) factor.
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 16, 64).unwrap();
        let u = VectorField::from_cartesian_fn(g, |x, y| [-y, x]);
        for q in vector_jet_summary(&u) {
            assert!((q.vorticity - 2.0).abs() < 1e-2);
            assert!(q.divergence.abs() < 1e-2);
            assert!((q.grad_sq - 2.0).abs() < 1e-2);
            assert!(q.hess_sq < 1e-4);
        }
    }
}
