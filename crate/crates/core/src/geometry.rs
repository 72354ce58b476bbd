//! Computational domains, structured grids and boundary frames.
//!
//! Every grid is logically rectangular with coordinates `(xi1, xi2)` and
//! node index `k = i * n2 + j` (coordinate 2 fastest). Polar grids use
//! `(r, theta)`, Cartesian grids use `(x, y)`. Exactly one axis is bounded
//! on the Annulus, Disk and Channel; the Torus is periodic in both.
//!
//! Vector fields are stored in the local orthonormal basis `(e1, e2)` of the
//! coordinate system: `(e_r, e_theta)` on polar grids and `(e_x, e_y)` on
//! Cartesian ones. The metric scale factor of coordinate 2 is `s(xi1)`
//! (`s = r` on polar grids, `s = 1` otherwise).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Annulus,
    Disk,
    Channel,
    Torus,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Annulus => "annulus",
            DomainKind::Disk => "disk",
            DomainKind::Channel => "channel",
            DomainKind::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "annulus" => Some(DomainKind::Annulus),
            "disk" => Some(DomainKind::Disk),
            "channel" => Some(DomainKind::Channel),
            "torus" => Some(DomainKind::Torus),
            _ => None,
        }
    }

    pub fn is_polar(self) -> bool {
        matches!(self, DomainKind::Annulus | DomainKind::Disk)
    }
}

/// Shape parameters of a domain. Unused lengths are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub r_inner: f64,
    pub r_outer: f64,
    pub length_x: f64,
    pub length_y: f64,
}

impl DomainSpec {
    pub fn annulus(r_inner: f64, r_outer: f64) -> Self {
        Self {
            kind: DomainKind::Annulus,
            r_inner,
            r_outer,
            length_x: 0.0,
            length_y: 0.0,
        }
    }

    pub fn disk(r_outer: f64) -> Self {
        Self {
            kind: DomainKind::Disk,
            r_inner: 0.0,
            r_outer,
            length_x: 0.0,
            length_y: 0.0,
        }
    }

    /// Periodic in x, walls at y = 0 and y = length_y.
    pub fn channel(length_x: f64, length_y: f64) -> Self {
        Self {
            kind: DomainKind::Channel,
            r_inner: 0.0,
            r_outer: 0.0,
            length_x,
            length_y,
        }
    }

    pub fn torus(length_x: f64, length_y: f64) -> Self {
        Self {
            kind: DomainKind::Torus,
            r_inner: 0.0,
            r_outer: 0.0,
            length_x,
            length_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        match self.kind {
            DomainKind::Annulus => {
                if !(finite_pos(self.r_inner) && finite_pos(self.r_outer)) {
                    return Err(Error::InvalidSpec("annulus radii must be positive".into()));
                }
                if self.r_inner >= self.r_outer {
                    return Err(Error::InvalidSpec(format!(
                        "annulus needs r_inner < r_outer (got {} >= {})",
                        self.r_inner, self.r_outer
                    )));
                }
            }
            DomainKind::Disk => {
                if !finite_pos(self.r_outer) {
                    return Err(Error::InvalidSpec("disk radius must be positive".into()));
                }
            }
            DomainKind::Channel | DomainKind::Torus => {
                if !(finite_pos(self.length_x) && finite_pos(self.length_y)) {
                    return Err(Error::InvalidSpec("lengths must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Exact area of the continuous domain (the Disk includes its pole).
    pub fn area(&self) -> f64 {
        match self.kind {
            DomainKind::Annulus => PI * (self.r_outer.powi(2) - self.r_inner.powi(2)),
            DomainKind::Disk => PI * self.r_outer.powi(2),
            DomainKind::Channel | DomainKind::Torus => self.length_x * self.length_y,
        }
    }
}

/// One logical grid direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub h: f64,
    pub origin: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    /// True if `i` is the first or last node of a bounded axis.
    pub fn is_end(&self, i: usize) -> bool {
        !self.periodic && (i == 0 || i + 1 == self.n)
    }

    /// Index offset by `d`, wrapping on periodic axes. `None` when the
    /// offset leaves a bounded axis.
    #[inline]
    pub fn step(&self, i: usize, d: isize) -> Option<usize> {
        let n = self.n as isize;
        let t = i as isize + d;
        if self.periodic {
            Some(t.rem_euclid(n) as usize)
        } else if t < 0 || t >= n {
            None
        } else {
            Some(t as usize)
        }
    }
}

/// A structured grid over a [`DomainSpec`]. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: DomainSpec,
    pub n1: usize,
    pub n2: usize,
    pub axis1: Axis,
    pub axis2: Axis,
    /// Trapezoid volume weights including the Jacobian, one per node.
    weights: Vec<f64>,
    /// Scale factor `s(xi1)` per index of axis 1.
    scale: Vec<f64>,
}

pub fn build_grid(spec: DomainSpec, n1: usize, n2: usize) -> Result<Arc<Grid>> {
    Grid::new(spec, n1, n2).map(Arc::new)
}

impl Grid {
    pub fn new(spec: DomainSpec, n1: usize, n2: usize) -> Result<Self> {
        spec.validate()?;
        if n1 < 8 || n2 < 8 {
            return Err(Error::ResolutionTooLow { n1, n2 });
        }
        let (axis1, axis2) = match spec.kind {
            DomainKind::Annulus => {
                let h1 = (spec.r_outer - spec.r_inner) / (n1 - 1) as f64;
                (
                    Axis { n: n1, h: h1, origin: spec.r_inner, periodic: false },
                    Axis { n: n2, h: 2.0 * PI / n2 as f64, origin: 0.0, periodic: true },
                )
            }
            DomainKind::Disk => {
                // Pole patch of radius 2*h1 cut out; r runs from 2*h1 to R.
                let h1 = spec.r_outer / (n1 + 1) as f64;
                (
                    Axis { n: n1, h: h1, origin: 2.0 * h1, periodic: false },
                    Axis { n: n2, h: 2.0 * PI / n2 as f64, origin: 0.0, periodic: true },
                )
            }
            DomainKind::Channel => (
                Axis { n: n1, h: spec.length_x / n1 as f64, origin: 0.0, periodic: true },
                Axis { n: n2, h: spec.length_y / (n2 - 1) as f64, origin: 0.0, periodic: false },
            ),
            DomainKind::Torus => (
                Axis { n: n1, h: spec.length_x / n1 as f64, origin: 0.0, periodic: true },
                Axis { n: n2, h: spec.length_y / n2 as f64, origin: 0.0, periodic: true },
            ),
        };
        let scale: Vec<f64> = (0..n1)
            .map(|i| if spec.kind.is_polar() { axis1.coord(i) } else { 1.0 })
            .collect();
        let mut weights = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let mut w = axis1.h * axis2.h * scale[i];
                if axis1.is_end(i) {
                    w *= 0.5;
                }
                if axis2.is_end(j) {
                    w *= 0.5;
                }
                weights.push(w);
            }
        }
        Ok(Self { spec, n1, n2, axis1, axis2, weights, scale })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k / self.n2, k % self.n2)
    }

    pub fn is_polar(&self) -> bool {
        self.spec.kind.is_polar()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Scale factor of coordinate 2 at axis-1 index `i`.
    #[inline]
    pub fn scale(&self, i: usize) -> f64 {
        self.scale[i]
    }

    /// Scale factor halfway between axis-1 indices `i` and `i + 1`.
    #[inline]
    pub fn scale_half(&self, i: usize, offset: f64) -> f64 {
        if self.is_polar() {
            self.axis1.coord(i) + offset * self.axis1.h
        } else {
            1.0
        }
    }

    /// d s / d xi1.
    #[inline]
    pub fn scale_slope(&self) -> f64 {
        if self.is_polar() {
            1.0
        } else {
            0.0
        }
    }

    /// Cartesian position of node `k`.
    pub fn position(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.ij(k);
        let a = self.axis1.coord(i);
        let b = self.axis2.coord(j);
        if self.is_polar() {
            [a * b.cos(), a * b.sin()]
        } else {
            [a, b]
        }
    }

    /// Local orthonormal basis at node `k`, as Cartesian vectors.
    pub fn basis(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        if self.is_polar() {
            let (_, j) = self.ij(k);
            let th = self.axis2.coord(j);
            let (s, c) = th.sin_cos();
            ([c, s], [-s, c])
        } else {
            ([1.0, 0.0], [0.0, 1.0])
        }
    }

    pub fn to_cartesian(&self, k: usize, local: [f64; 2]) -> [f64; 2] {
        let (e1, e2) = self.basis(k);
        [
            local[0] * e1[0] + local[1] * e2[0],
            local[0] * e1[1] + local[1] * e2[1],
        ]
    }

    pub fn to_local(&self, k: usize, cart: [f64; 2]) -> [f64; 2] {
        let (e1, e2) = self.basis(k);
        [
            cart[0] * e1[0] + cart[1] * e1[1],
            cart[0] * e2[0] + cart[1] * e2[1],
        ]
    }

    /// Index of the bounded axis (1 or 2), if any.
    pub fn bounded_axis(&self) -> Option<usize> {
        if !self.axis1.periodic {
            Some(1)
        } else if !self.axis2.periodic {
            Some(2)
        } else {
            None
        }
    }

    /// Whether node `k` lies on the (bounded) edge of the grid.
    pub fn on_boundary(&self, k: usize) -> bool {
        let (i, j) = self.ij(k);
        self.axis1.is_end(i) || self.axis2.is_end(j)
    }

    /// Distance in cells from node `k` to the nearest boundary layer;
    /// `usize::MAX` on the torus.
    pub fn boundary_depth(&self, k: usize) -> usize {
        let (i, j) = self.ij(k);
        match self.bounded_axis() {
            Some(1) => i.min(self.n1 - 1 - i),
            Some(_) => j.min(self.n2 - 1 - j),
            None => usize::MAX,
        }
    }

    /// Smallest physical node spacing.
    pub fn min_spacing(&self) -> f64 {
        if self.is_polar() {
            self.axis1.h.min(self.scale[0] * self.axis2.h)
        } else {
            self.axis1.h.min(self.axis2.h)
        }
    }

    /// Characteristic spacing `sqrt(area / nodes)`, used for noise floors.
    pub fn spacing(&self) -> f64 {
        (self.weights.iter().sum::<f64>() / self.len() as f64).sqrt()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Geometry of one boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    /// Grid index of the node.
    pub node: usize,
    /// Outward unit normal, Cartesian.
    pub normal: [f64; 2],
    /// Unit tangent, the normal rotated by +90 degrees, Cartesian.
    pub tangent: [f64; 2],
    /// Curvature `h = <d nu / ds, tau>`; also the mean curvature in 2D.
    pub curvature: f64,
    /// Arc-length weight.
    pub ds: f64,
}

/// One closed boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    pub name: &'static str,
    /// Offset of this component's nodes in the flat node list.
    pub start: usize,
    pub len: usize,
    /// +1 when increasing node order runs along the tangent, -1 otherwise.
    pub orientation: f64,
    /// Arc length between successive nodes.
    pub arc_step: f64,
    /// The pole cut-out of the Disk: carries homogeneous absolute BCs and is
    /// excluded from [`BoundaryFrame::surface_integrate`].
    pub artificial: bool,
    /// 0 for the lower end of the bounded axis, 1 for the upper end.
    pub side: usize,
}

/// Boundary frame of a grid: normals, tangents, curvature and arc weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame {
    pub nodes: Vec<BoundaryNode>,
    pub components: Vec<BoundaryComponent>,
}

pub fn boundary_frame(grid: &Grid) -> Result<BoundaryFrame> {
    BoundaryFrame::new(grid)
}

impl BoundaryFrame {
    pub fn new(grid: &Grid) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut components = Vec::new();
        match grid.spec.kind {
            DomainKind::Torus => return Err(Error::NoBoundary),
            DomainKind::Annulus | DomainKind::Disk => {
                let h2 = grid.axis2.h;
                for side in 0..2 {
                    let i = if side == 0 { 0 } else { grid.n1 - 1 };
                    let r = grid.axis1.coord(i);
                    let sign = if side == 0 { -1.0 } else { 1.0 };
                    let start = nodes.len();
                    for j in 0..grid.n2 {
                        let (s, c) = grid.axis2.coord(j).sin_cos();
                        let normal = [sign * c, sign * s];
                        nodes.push(BoundaryNode {
                            node: grid.index(i, j),
                            normal,
                            tangent: [-normal[1], normal[0]],
                            curvature: sign / r,
                            ds: r * h2,
                        });
                    }
                    components.push(BoundaryComponent {
                        name: if side == 0 { "inner" } else { "outer" },
                        start,
                        len: grid.n2,
                        orientation: sign,
                        arc_step: r * h2,
                        artificial: side == 0 && grid.spec.kind == DomainKind::Disk,
                        side,
                    });
                }
            }
            DomainKind::Channel => {
                let hx = grid.axis1.h;
                for side in 0..2 {
                    let j = if side == 0 { 0 } else { grid.n2 - 1 };
                    let sign = if side == 0 { -1.0 } else { 1.0 };
                    let start = nodes.len();
                    for i in 0..grid.n1 {
                        let normal = [0.0, sign];
                        nodes.push(BoundaryNode {
                            node: grid.index(i, j),
                            normal,
                            tangent: [-normal[1], normal[0]],
                            curvature: 0.0,
                            ds: hx,
                        });
                    }
                    components.push(BoundaryComponent {
                        name: if side == 0 { "bottom" } else { "top" },
                        start,
                        len: grid.n1,
                        orientation: -sign,
                        arc_step: hx,
                        artificial: false,
                        side,
                    });
                }
            }
        }
        Ok(Self { nodes, components })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the component that owns flat boundary index `b`.
    pub fn component_of(&self, b: usize) -> usize {
        self.components
            .iter()
            .position(|c| b >= c.start && b < c.start + c.len)
            .expect("boundary index out of range")
    }

    /// `sum f dS` over the physical components.
    pub fn surface_integrate(&self, f: &[f64]) -> f64 {
        self.integrate_where(f, |c| !c.artificial)
    }

    /// `sum f dS` over every component, including the Disk pole cut-out.
    pub fn surface_integrate_all(&self, f: &[f64]) -> f64 {
        self.integrate_where(f, |_| true)
    }

    fn integrate_where(&self, f: &[f64], keep: impl Fn(&BoundaryComponent) -> bool) -> f64 {
        assert_eq!(f.len(), self.len(), "boundary values do not match frame");
        let mut total = 0.0;
        for c in self.components.iter().filter(|c| keep(c)) {
            for b in c.start..c.start + c.len {
                total += f[b] * self.nodes[b].ds;
            }
        }
        total
    }

    /// Total arc length of all components.
    pub fn perimeter_all(&self) -> f64 {
        self.nodes.iter().map(|n| n.ds).sum()
    }

    /// Arc-length derivative along the tangent, periodic central differences
    /// on each closed component. Its boundary integral telescopes to zero.
    pub fn arc_derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len(), "boundary values do not match frame");
        let mut out = vec![0.0; f.len()];
        for c in &self.components {
            let n = c.len;
            for m in 0..n {
                let next = c.start + (m + 1) % n;
                let prev = c.start + (m + n - 1) % n;
                out[c.start + m] = c.orientation * (f[next] - f[prev]) / (2.0 * c.arc_step);
            }
        }
        out
    }

    pub fn normal_component(&self, u: &[[f64; 2]]) -> Vec<f64> {
        self.nodes.iter().zip(u).map(|(n, v)| dot(n.normal, *v)).collect()
    }

    pub fn tangential_component(&self, u: &[[f64; 2]]) -> Vec<f64> {
        self.nodes.iter().zip(u).map(|(n, v)| dot(n.tangent, *v)).collect()
    }

    /// Values of a Cartesian function at the boundary nodes.
    pub fn sample(&self, grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|n| {
                let p = grid.position(n.node);
                f(p[0], p[1])
            })
            .collect()
    }
}

/// `pi(u, w) = h <u, tau> <w, tau>` at each boundary node.
pub fn second_fundamental_form(frame: &BoundaryFrame, u: &[[f64; 2]], w: &[[f64; 2]]) -> Vec<f64> {
    frame
        .nodes
        .iter()
        .zip(u.iter().zip(w))
        .map(|(n, (a, b))| n.curvature * dot(n.tangent, *a) * dot(n.tangent, *b))
        .collect()
}

pub fn surface_integrate(frame: &BoundaryFrame, f: &[f64]) -> f64 {
    frame.surface_integrate(f)
}

#[inline]
pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_area_quadrature() {
        let g = Grid::new(DomainSpec::annulus(1.0, 2.0), 16, 32).unwrap();
        assert_eq!(g.len(), 16 * 32);
        assert!((g.area() - 3.0 * PI).abs() / (3.0 * PI) < 0.01);
        assert!((g.axis1.coord(0) - 1.0).abs() < 1e-15);
        assert!((g.axis1.coord(15) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn torus_area_is_exact() {
        let g = Grid::new(DomainSpec::torus(2.0 * PI, 2.0 * PI), 32, 32).unwrap();
        assert!((g.area() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            Grid::new(DomainSpec::annulus(2.0, 1.0), 16, 16),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            Grid::new(DomainSpec::disk(-1.0), 16, 16),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            Grid::new(DomainSpec::annulus(1.0, 2.0), 4, 16),
            Err(Error::ResolutionTooLow { .. })
        ));
    }

    #[test]
    fn disk_pole_patch_is_two_cells() {
        let g = Grid::new(DomainSpec::disk(1.0), 20, 32).unwrap();
        assert!((g.axis1.coord(0) - 2.0 * g.axis1.h).abs() < 1e-15);
        assert!((g.axis1.coord(19) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn torus_has_no_boundary() {
        let g = Grid::new(DomainSpec::torus(1.0, 1.0), 8, 8).unwrap();
        assert_eq!(BoundaryFrame::new(&g), Err(Error::NoBoundary));
    }

    #[test]
    fn frame_curvature_signs() {
        let g = Grid::new(DomainSpec::disk(1.0), 16, 32).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let outer = &f.components[1];
        for b in outer.start..outer.start + outer.len {
            assert!((f.nodes[b].curvature - 1.0).abs() < 1e-15);
        }
        let g = Grid::new(DomainSpec::annulus(0.5, 1.0), 16, 32).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let inner = &f.components[0];
        for b in inner.start..inner.start + inner.len {
            assert!((f.nodes[b].curvature + 2.0).abs() < 1e-15);
        }
        let g = Grid::new(DomainSpec::channel(1.0, 1.0), 16, 16).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        assert!(f.nodes.iter().all(|n| n.curvature == 0.0));
    }

    #[test]
    fn frame_is_orthonormal_and_positively_oriented() {
        for spec in [DomainSpec::annulus(1.0, 2.0), DomainSpec::channel(2.0, 1.0)] {
            let g = Grid::new(spec, 12, 24).unwrap();
            let f = BoundaryFrame::new(&g).unwrap();
            for n in &f.nodes {
                assert!((dot(n.normal, n.normal) - 1.0).abs() < 1e-14);
                assert!((dot(n.tangent, n.tangent) - 1.0).abs() < 1e-14);
                assert!(dot(n.normal, n.tangent).abs() < 1e-14);
            }
            // Walking along the node order with the given orientation moves
            // along the tangent.
            for c in &f.components {
                let p0 = g.position(f.nodes[c.start].node);
                let p1 = g.position(f.nodes[c.start + 1].node);
                let step = [p1[0] - p0[0], p1[1] - p0[1]];
                assert!(c.orientation * dot(step, f.nodes[c.start].tangent) > 0.0);
            }
        }
    }

    #[test]
    fn perimeter_and_gauss_sums() {
        let g = Grid::new(DomainSpec::annulus(0.5, 1.0), 16, 64).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let ones = vec![1.0; f.len()];
        assert!((f.surface_integrate(&ones) - 3.0 * PI).abs() < 1e-12);
        let h: Vec<f64> = f.nodes.iter().map(|n| n.curvature).collect();
        assert!(f.surface_integrate(&h).abs() < 1e-12);

        let g = Grid::new(DomainSpec::disk(1.0), 16, 64).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let h: Vec<f64> = f.nodes.iter().map(|n| n.curvature).collect();
        assert!((f.surface_integrate(&h) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn odd_harmonic_integrates_to_zero() {
        let g = Grid::new(DomainSpec::disk(1.0), 16, 64).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let cos = f.sample(&g, |x, y| x / (x * x + y * y).sqrt());
        assert!(f.surface_integrate(&cos).abs() < 1e-12);
    }

    #[test]
    fn second_fundamental_form_examples() {
        let g = Grid::new(DomainSpec::annulus(1.0, 2.0), 8, 16).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let outer = f.components[1].clone();
        let tau: Vec<[f64; 2]> = f.nodes.iter().map(|n| [3.0 * n.tangent[0], 3.0 * n.tangent[1]]).collect();
        let nu: Vec<[f64; 2]> = f.nodes.iter().map(|n| n.normal).collect();
        let pi = second_fundamental_form(&f, &tau, &tau);
        for b in outer.start..outer.start + outer.len {
            assert!((pi[b] - 4.5).abs() < 1e-13);
        }
        let pi = second_fundamental_form(&f, &nu, &nu);
        assert!(pi.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn arc_derivative_telescopes() {
        let g = Grid::new(DomainSpec::annulus(0.7, 1.9), 10, 40).unwrap();
        let f = BoundaryFrame::new(&g).unwrap();
        let a: Vec<f64> = (0..f.len()).map(|b| ((b * 7919) % 97) as f64 / 13.0).collect();
        let da = f.arc_derivative(&a);
        assert!(f.surface_integrate_all(&da).abs() < 1e-12);
    }
}
