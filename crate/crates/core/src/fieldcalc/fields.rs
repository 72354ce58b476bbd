use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFrame, Grid};

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Two components per node, stored in the local orthonormal basis of the
/// grid (`e_r, e_theta` on polar grids).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<Grid>,
    values: Vec<[f64; 2]>,
}

fn check_finite(it: impl Iterator<Item = f64>) -> Result<()> {
    for v in it {
        if !v.is_finite() {
            return Err(Error::DegenerateInput("field holds a non-finite value".into()));
        }
    }
    Ok(())
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(values.iter().copied())?;
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for values produced by the library itself.
    pub(crate) fn raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self::raw(grid, vec![0.0; n])
    }

    /// Sample `f(x, y)` at the Cartesian node positions.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let p = grid.position(k);
                f(p[0], p[1])
            })
            .collect();
        Self::raw(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::raw(self.grid.clone(), self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid);
        Self::raw(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Quadrature of the field over the domain.
    pub fn integrate(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / self.grid.area()
    }

    /// The field minus its weighted mean.
    pub fn recentered(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values at the boundary nodes, in frame order.
    pub fn trace(&self, frame: &BoundaryFrame) -> Vec<f64> {
        frame.nodes.iter().map(|n| self.values[n.node]).collect()
    }
}

impl VectorField {
    pub fn new(grid: Arc<Grid>, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(values.iter().flat_map(|v| v.iter().copied()))?;
        Ok(Self { grid, values })
    }

    pub(crate) fn raw(grid: Arc<Grid>, values: Vec<[f64; 2]>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self::raw(grid, vec![[0.0; 2]; n])
    }

    /// Sample a Cartesian vector function `f(x, y) -> [u_x, u_y]`.
    pub fn from_cartesian_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let p = grid.position(k);
                grid.to_local(k, f(p[0], p[1]))
            })
            .collect();
        Self::raw(grid, values)
    }

    /// Build from two scalar fields holding the local-basis components.
    pub fn from_components(c1: &ScalarField, c2: &ScalarField) -> Self {
        let values = c1.values.iter().zip(&c2.values).map(|(a, b)| [*a, *b]).collect();
        Self::raw(c1.grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn into_values(self) -> Vec<[f64; 2]> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Local-basis component `c` as a scalar field.
    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField::raw(self.grid.clone(), self.values.iter().map(|v| v[c]).collect())
    }

    /// Cartesian components at every node.
    pub fn cartesian(&self) -> Vec<[f64; 2]> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| self.grid.to_cartesian(k, *v))
            .collect()
    }

    pub fn cartesian_component(&self, c: usize) -> ScalarField {
        ScalarField::raw(
            self.grid.clone(),
            self.values
                .iter()
                .enumerate()
                .map(|(k, v)| self.grid.to_cartesian(k, *v)[c])
                .collect(),
        )
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1])])
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::raw(
            self.grid.clone(),
            self.values.iter().map(|v| [c * v[0], c * v[1]]).collect(),
        )
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Pointwise squared magnitude.
    pub fn magnitude_sq(&self) -> ScalarField {
        ScalarField::raw(
            self.grid.clone(),
            self.values.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0, |m, v| m.max((v[0] * v[0] + v[1] * v[1]).sqrt()))
    }

    /// Cartesian values at the boundary nodes, in frame order.
    pub fn trace(&self, frame: &BoundaryFrame) -> Vec<[f64; 2]> {
        frame
            .nodes
            .iter()
            .map(|n| self.grid.to_cartesian(n.node, self.values[n.node]))
            .collect()
    }
}

/// `u.nu` at each boundary node.
pub fn normal_component(u: &VectorField, frame: &BoundaryFrame) -> Vec<f64> {
    frame.normal_component(&u.trace(frame))
}

/// `u.tau` at each boundary node (the 2D tangential part).
pub fn tangential_part(u: &VectorField, frame: &BoundaryFrame) -> Vec<f64> {
    frame.tangential_component(&u.trace(frame))
}

/// Arc-length derivative of boundary data, the 2D form of the surface curl.
pub fn surface_curl(a: &[f64], frame: &BoundaryFrame) -> Vec<f64> {
    frame.arc_derivative(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = build_grid(DomainSpec::torus(1.0, 1.0), 8, 8).unwrap();
        assert!(ScalarField::new(g.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert!(matches!(ScalarField::new(g, v), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn constant_integrates_to_area() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 33, 64).unwrap();
        let f = ScalarField::from_fn(g, |_, _| 2.0);
        let exact = 2.0 * 3.0 * std::f64::consts::PI;
        assert!((f.integrate() - exact).abs() / exact < 1e-3);
        assert!(f.recentered().mean().abs() < 1e-14);
    }

    #[test]
    fn local_basis_round_trip() {
        let g = build_grid(DomainSpec::annulus(1.0, 2.0), 8, 16).unwrap();
        let u = VectorField::from_cartesian_fn(g.clone(), |x, y| [x - 2.0 * y, 0.5 * x * y]);
        for (k, c) in u.cartesian().iter().enumerate() {
            let p = g.position(k);
            assert!((c[0] - (p[0] - 2.0 * p[1])).abs() < 1e-14);
            assert!((c[1] - 0.5 * p[0] * p[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_and_tangential_traces() {
        let g = build_grid(DomainSpec::disk(1.0), 8, 8).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let outer = f.components[1].clone();
        let u = VectorField::from_cartesian_fn(g.clone(), |_, _| [1.0, 0.0]);
        let un = normal_component(&u, &f);
        // theta_1 = pi/4 on an 8-point circle.
        let b = outer.start + 1;
        assert!((g.axis2.coord(1) - FRAC_PI_4).abs() < 1e-15);
        assert!((un[b] - 0.5f64.sqrt()).abs() < 1e-14);
        let nu = VectorField::from_cartesian_fn(g.clone(), |x, y| {
            let r = (x * x + y * y).sqrt();
            [x / r, y / r]
        });
        let ut = tangential_part(&nu, &f);
        let un = normal_component(&nu, &f);
        for b in outer.start..outer.start + outer.len {
            assert!((un[b] - 1.0).abs() < 1e-14);
            assert!(ut[b].abs() < 1e-14);
        }
    }

    #[test]
    fn surface_curl_of_sine() {
        let g = build_grid(DomainSpec::disk(1.0), 8, 256).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let a = f.sample(&g, |x, y| y / (x * x + y * y).sqrt());
        let da = surface_curl(&a, &f);
        let outer = &f.components[1];
        for b in outer.start..outer.start + outer.len {
            let th = g.axis2.coord(b - outer.start);
            assert!((da[b] - th.cos()).abs() < 1e-3);
        }
        let c = vec![3.5; f.len()];
        assert!(surface_curl(&c, &f).iter().all(|v| *v == 0.0));
    }
}
