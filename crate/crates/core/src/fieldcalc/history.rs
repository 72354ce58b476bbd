//! Uniformly sampled time series of fields.

use crate::error::{Error, Result};

use super::fields::{ScalarField, VectorField};

/// Fields that can be linearly combined (for time differences).
pub trait Combine: Clone {
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl Combine for ScalarField {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1.scale(terms[0].0);
        for (c, f) in &terms[1..] {
            out = out.zip_with(f, |a, b| a + c * b);
        }
        out
    }
}

impl Combine for VectorField {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1.scale(terms[0].0);
        for (c, f) in &terms[1..] {
            out = out.axpy(*c, f);
        }
        out
    }
}

impl Combine for Vec<f64> {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out: Vec<f64> = terms[0].1.iter().map(|v| terms[0].0 * v).collect();
        for (c, f) in &terms[1..] {
            for (o, v) in out.iter_mut().zip(f.iter()) {
                *o += c * v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistory<T> {
    pub t0: f64,
    pub dt: f64,
    snapshots: Vec<T>,
}

impl<T: Combine> FieldHistory<T> {
    pub fn new(t0: f64, dt: f64) -> Self {
        Self { t0, dt, snapshots: Vec::new() }
    }

    pub fn from_snapshots(t0: f64, dt: f64, snapshots: Vec<T>) -> Self {
        Self { t0, dt, snapshots }
    }

    pub fn push(&mut self, f: T) {
        self.snapshots.push(f);
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn get(&self, n: usize) -> &T {
        &self.snapshots[n]
    }

    pub fn last(&self) -> Option<&T> {
        self.snapshots.last()
    }

    pub fn snapshots(&self) -> &[T] {
        &self.snapshots
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.snapshots.iter()
    }

    /// Time derivative at snapshot `n`: centered in the interior and
    /// second-order one-sided at the ends (first order with only two
    /// snapshots).
    pub fn derivative(&self, n: usize) -> Result<T> {
        let m = self.snapshots.len();
        if m < 2 || n >= m {
            return Err(Error::MissingTimeDerivative);
        }
        let s = &self.snapshots;
        let h = self.dt;
        Ok(if m == 2 {
            T::combine(&[(1.0 / h, &s[1]), (-1.0 / h, &s[0])])
        } else if n == 0 {
            T::combine(&[(-1.5 / h, &s[0]), (2.0 / h, &s[1]), (-0.5 / h, &s[2])])
        } else if n == m - 1 {
            T::combine(&[(1.5 / h, &s[n]), (-2.0 / h, &s[n - 1]), (0.5 / h, &s[n - 2])])
        } else {
            T::combine(&[(0.5 / h, &s[n + 1]), (-0.5 / h, &s[n - 1])])
        })
    }

    pub fn derivatives(&self) -> Result<Vec<T>> {
        (0..self.len()).map(|n| self.derivative(n)).collect()
    }

    pub fn map<U: Combine>(&self, f: impl Fn(&T) -> U) -> FieldHistory<U> {
        FieldHistory {
            t0: self.t0,
            dt: self.dt,
            snapshots: self.snapshots.iter().map(f).collect(),
        }
    }
}

/// Trapezoid rule over uniformly spaced samples.
pub fn trapezoid(dt: f64, values: &[f64]) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Running trapezoid integrals, starting at 0.
pub fn cumulative_trapezoid(dt: f64, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (n, v) in values.iter().enumerate() {
        if n > 0 {
            acc += 0.5 * dt * (v + values[n - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let dt = 0.1;
        let snaps: Vec<Vec<f64>> = (0..6).map(|n| vec![(n as f64 * dt).powi(2)]).collect();
        let h = FieldHistory::from_snapshots(0.0, dt, snaps);
        for n in 0..6 {
            let d = h.derivative(n).unwrap();
            assert!((d[0] - 2.0 * n as f64 * dt).abs() < 1e-12);
        }
        assert_eq!(h.derivative(6), Err(Error::MissingTimeDerivative));
        let one: FieldHistory<Vec<f64>> = FieldHistory::from_snapshots(0.0, dt, vec![vec![1.0]]);
        assert_eq!(one.derivative(0), Err(Error::MissingTimeDerivative));
    }

    #[test]
    fn trapezoid_rules() {
        assert!((trapezoid(0.5, &[0.0, 1.0, 2.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cumulative_trapezoid(1.0, &[1.0, 1.0, 1.0]), vec![0.0, 1.0, 2.0]);
    }
}
