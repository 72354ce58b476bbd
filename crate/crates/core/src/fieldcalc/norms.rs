//! Quadrature-weighted discrete Sobolev norms.

use crate::error::{Error, Result};

use super::fields::{ScalarField, VectorField};
use super::jets::{jets_of, Jet};

/// A field whose Cartesian components can be differentiated pointwise.
pub trait SobolevField {
    fn weights(&self) -> &[f64];
    fn component_jets(&self) -> Vec<Vec<Jet>>;
}

impl SobolevField for ScalarField {
    fn weights(&self) -> &[f64] {
        self.grid().weights()
    }

    fn component_jets(&self) -> Vec<Vec<Jet>> {
        vec![jets_of(self.grid(), self.values())]
    }
}

impl SobolevField for VectorField {
    fn weights(&self) -> &[f64] {
        self.grid().weights()
    }

    fn component_jets(&self) -> Vec<Vec<Jet>> {
        let g = self.grid();
        (0..2)
            .map(|c| jets_of(g, self.cartesian_component(c).values()))
            .collect()
    }
}

/// Squared norms of orders 0, 1 and 2 (seminorm parts, not cumulative).
fn parts<F: SobolevField>(f: &F) -> [f64; 3] {
    let w = f.weights();
    let mut out = [0.0; 3];
    for jets in f.component_jets() {
        for (j, wk) in jets.iter().zip(w) {
            out[0] += wk * j.f * j.f;
            out[1] += wk * j.grad_sq();
            out[2] += wk * j.hess_sq();
        }
    }
    out
}

pub fn l2<F: SobolevField>(f: &F) -> f64 {
    parts(f)[0].sqrt()
}

pub fn h1<F: SobolevField>(f: &F) -> f64 {
    let p = parts(f);
    (p[0] + p[1]).sqrt()
}

pub fn h2<F: SobolevField>(f: &F) -> f64 {
    let p = parts(f);
    (p[0] + p[1] + p[2]).sqrt()
}

/// `||grad f||_2`.
pub fn grad_l2<F: SobolevField>(f: &F) -> f64 {
    parts(f)[1].sqrt()
}

/// `sqrt(||v||_{H2}^2 + ||v_t||_{H1}^2)`.
pub fn n_norm(v: &VectorField, v_t: Option<&VectorField>) -> Result<f64> {
    let vt = v_t.ok_or(Error::MissingTimeDerivative)?;
    Ok((h2(v).powi(2) + h1(vt).powi(2)).sqrt())
}

/// Plain quadrature `sqrt(sum w f^2)` for values that are not fields.
pub fn l2_values(weights: &[f64], f: &[f64]) -> f64 {
    weights.iter().zip(f).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_norms() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 8, 16).unwrap();
        let z = VectorField::zeros(g.clone());
        assert_eq!(l2(&z), 0.0);
        assert_eq!(h2(&z), 0.0);
        assert_eq!(n_norm(&z, Some(&z)).unwrap(), 0.0);
        assert_eq!(h1(&ScalarField::zeros(g)), 0.0);
    }

    #[test]
    fn constant_field_l2() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 65, 64).unwrap();
        let c = ScalarField::from_fn(g, |_, _| -1.5);
        let exact = 1.5 * (3.0 * PI).sqrt();
        assert!((l2(&c) - exact).abs() / exact < 1e-4);
        assert!((h2(&c) - l2(&c)).abs() < 1e-10);
    }

    #[test]
    fn n_norm_definition() {
        let g = build_grid(DomainSpec::torus(2.0 * PI, 2.0 * PI), 16, 16).unwrap();
        let v = VectorField::from_cartesian_fn(g.clone(), |x, y| [x.sin(), y.cos()]);
        let z = VectorField::zeros(g);
        assert_eq!(n_norm(&v, Some(&z)).unwrap(), h2(&v));
        assert_eq!(n_norm(&v, None), Err(Error::MissingTimeDerivative));
    }
}
