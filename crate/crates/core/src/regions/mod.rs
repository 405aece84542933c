//! Regions Ω with oriented, piecewise-smooth boundaries and their quadrature.
//!
//! Orientation convention: the region lies to the left of travel, so outer
//! boundaries run counter-clockwise and holes clockwise.

mod kernel;
mod moebius;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::matrix::C64;
use crate::quadrature::gauss_legendre;

pub use kernel::{
    abs_mu_integral, abs_mu_integral_by_piece, abs_mu_quadrature, c1_estimate, cauchy_transform_g,
    cauchy_transform_g_with, gauss_integral, mu_at_node, mu_scalar, C1Estimate,
};
pub use moebius::{moebius_to_annulus, Moebius};

/// Which part of the boundary a piece belongs to: Γ₁ (outer) or Γ₂ (hole).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Outer,
    Hole,
}

/// One smooth boundary piece, parametrized by t ∈ [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Piece {
    Circle {
        center: C64,
        radius: f64,
        clockwise: bool,
    },
    /// Arc from angle `start` through the signed angle `sweep` (negative is clockwise).
    Arc {
        center: C64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
    Segment {
        from: C64,
        to: C64,
    },
    /// Image under exp of the log-plane segment [from, to].
    ExpSegment {
        from: C64,
        to: C64,
    },
}

impl Piece {
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Piece::Circle { center, radius, clockwise } => {
                let phi = if clockwise { -TAU * t } else { TAU * t };
                center + C64::from_polar(radius, phi)
            }
            Piece::Arc { center, radius, start, sweep } => center + C64::from_polar(radius, start + sweep * t),
            Piece::Segment { from, to } => from + (to - from) * t,
            Piece::ExpSegment { from, to } => (from + (to - from) * t).exp(),
        }
    }

    /// dσ/dt.
    pub fn derivative(&self, t: f64) -> C64 {
        let i = C64::new(0.0, 1.0);
        match *self {
            Piece::Circle { center, clockwise, .. } => {
                let w = if clockwise { -TAU } else { TAU };
                (self.point(t) - center) * i * w
            }
            Piece::Arc { center, sweep, .. } => (self.point(t) - center) * i * sweep,
            Piece::Segment { from, to } => to - from,
            Piece::ExpSegment { from, to } => (to - from) * self.point(t),
        }
    }

    /// Unit tangent σ′ (derivative with respect to arclength).
    pub fn tangent(&self, t: f64) -> C64 {
        let d = self.derivative(t);
        d / d.norm()
    }

    /// Signed curvature; positive where the boundary turns left.
    pub fn curvature(&self, t: f64) -> f64 {
        match *self {
            Piece::Circle { radius, clockwise, .. } => {
                if clockwise {
                    -1.0 / radius
                } else {
                    1.0 / radius
                }
            }
            Piece::Arc { radius, sweep, .. } => sweep.signum() / radius,
            Piece::Segment { .. } => 0.0,
            Piece::ExpSegment { from, to } => {
                let d = to - from;
                d.im / (d.norm() * self.point(t).norm())
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Circle { radius, .. } => TAU * radius,
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
            Piece::Segment { from, to } => (to - from).norm(),
            Piece::ExpSegment { from, to } => {
                let d = to - from;
                let (a, b) = (from.re.exp(), to.re.exp());
                if d.re.abs() < 1e-12 * d.norm() {
                    d.norm() * a
                } else {
                    d.norm() * (b - a) / d.re
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Piece::Circle { .. })
    }

    /// Distance from z to the piece (exact for circles, arcs and segments).
    pub fn distance(&self, z: C64) -> f64 {
        match *self {
            Piece::Circle { center, radius, .. } => ((z - center).norm() - radius).abs(),
            Piece::Arc { center, radius, start, sweep } => {
                let rel = (z - center).arg() - start;
                let frac = if sweep >= 0.0 { rel.rem_euclid(TAU) / sweep } else { (-rel).rem_euclid(TAU) / -sweep };
                if frac <= 1.0 {
                    ((z - center).norm() - radius).abs()
                } else {
                    (z - self.point(0.0)).norm().min((z - self.point(1.0)).norm())
                }
            }
            Piece::Segment { from, to } => {
                let d = to - from;
                let t = (((z - from) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (z - self.point(t)).norm()
            }
            Piece::ExpSegment { .. } => {
                let m = 512;
                let (mut best, mut best_t) = (f64::INFINITY, 0.0);
                for k in 0..=m {
                    let t = k as f64 / m as f64;
                    let d = (z - self.point(t)).norm();
                    if d < best {
                        best = d;
                        best_t = t;
                    }
                }
                let h = 1.0 / m as f64;
                let (mut lo, mut hi) = ((best_t - h).max(0.0), (best_t + h).min(1.0));
                for _ in 0..60 {
                    let a = lo + (hi - lo) / 3.0;
                    let b = hi - (hi - lo) / 3.0;
                    if (z - self.point(a)).norm() < (z - self.point(b)).norm() {
                        hi = b;
                    } else {
                        lo = a;
                    }
                }
                best.min((z - self.point(0.5 * (lo + hi))).norm())
            }
        }
    }
}

/// A boundary quadrature node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub point: C64,
    /// Unit tangent σ′(s).
    pub tangent: C64,
    /// Arclength weight.
    pub weight: f64,
    pub curvature: f64,
    pub piece: usize,
    pub t: f64,
}

/// Node-count controls. `density` multiplies every count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Trapezoid nodes on a full circle.
    pub circle_nodes: usize,
    /// Gauss–Legendre nodes per panel on arcs and exp-segments.
    pub panel_nodes: usize,
    /// Largest angle covered by one arc panel.
    pub panel_angle: f64,
    /// Gauss–Legendre nodes on a straight segment, interpolated by length
    /// between these bounds.
    pub segment_nodes_min: usize,
    pub segment_nodes_max: usize,
    /// Geometric refinement levels toward arc endpoints and their ratio.
    pub grading_levels: usize,
    pub grading_ratio: f64,
    pub density: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            circle_nodes: 512,
            panel_nodes: 64,
            panel_angle: PI / 2.0,
            segment_nodes_min: 4,
            segment_nodes_max: 64,
            grading_levels: 3,
            grading_ratio: 0.25,
            density: 1,
        }
    }
}

impl QuadratureSpec {
    pub fn with_density(mut self, density: usize) -> Self {
        self.density = density.max(1);
        self
    }
}

/// Bounded convex part of a cutout region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvexOuter {
    Polygon { polygon: ConvexPolygon },
    Disk { center: C64, radius: f64 },
}

impl ConvexOuter {
    pub fn contains(&self, z: C64) -> bool {
        match self {
            ConvexOuter::Polygon { polygon } => polygon.contains(z),
            ConvexOuter::Disk { center, radius } => (z - center).norm() < *radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexOuter::Polygon { polygon } => polygon.diameter(),
            ConvexOuter::Disk { radius, .. } => 2.0 * radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Disk {
        center: C64,
        radius: f64,
    },
    /// {|z − center| > radius}; unbounded, used as a hole description.
    ExteriorDisk {
        center: C64,
        radius: f64,
    },
    Annulus {
        center: C64,
        inner: f64,
        outer: f64,
    },
    Convex {
        polygon: ConvexPolygon,
    },
    /// Ω₁ ∩ {|z − hole_center| > hole_radius} with Ω₁ convex.
    Cutout {
        outer: ConvexOuter,
        hole_center: C64,
        hole_radius: f64,
    },
    /// exp of a convex log-plane polygon of height below 2π.
    ExpImage {
        log_polygon: ConvexPolygon,
    },
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Disk { .. } => "disk",
            Shape::ExteriorDisk { .. } => "exterior-disk",
            Shape::Annulus { .. } => "annulus",
            Shape::Convex { .. } => "convex",
            Shape::Cutout { .. } => "cutout",
            Shape::ExpImage { .. } => "exp-image",
        }
    }
}

/// A region with its labelled boundary pieces and quadrature nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region {
    shape: Shape,
    pieces: Vec<(Piece, Label)>,
    spec: QuadratureSpec,
    #[serde(skip)]
    nodes: Vec<Node>,
    #[serde(skip)]
    diameter: f64,
}

/// Nodes and the diameter are derived data, so equality is on the shape,
/// the pieces and the quadrature settings.
impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.pieces == other.pieces && self.spec == other.spec
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(r))
    }
}

impl Region {
    fn build(shape: Shape, pieces: Vec<(Piece, Label)>, spec: QuadratureSpec) -> Region {
        let mut region = Region { shape, pieces, spec, nodes: Vec::new(), diameter: 0.0 };
        region.nodes = region.make_nodes();
        region.diameter = region.compute_diameter();
        region
    }

    pub fn disk(center: C64, radius: f64) -> Result<Region> {
        check_radius(radius)?;
        Ok(Self::build(
            Shape::Disk { center, radius },
            vec![(Piece::Circle { center, radius, clockwise: false }, Label::Outer)],
            QuadratureSpec::default(),
        ))
    }

    pub fn exterior_disk(center: C64, radius: f64) -> Result<Region> {
        check_radius(radius)?;
        Ok(Self::build(
            Shape::ExteriorDisk { center, radius },
            vec![(Piece::Circle { center, radius, clockwise: true }, Label::Hole)],
            QuadratureSpec::default(),
        ))
    }

    /// The annulus 1/R < |z| < R.
    pub fn annulus(r_outer: f64) -> Result<Region> {
        if !(r_outer > 1.0) || !r_outer.is_finite() {
            return Err(Error::InvalidRadius(r_outer));
        }
        Self::annulus_about(C64::new(0.0, 0.0), 1.0 / r_outer, r_outer)
    }

    pub fn annulus_about(center: C64, inner: f64, outer: f64) -> Result<Region> {
        check_radius(inner)?;
        check_radius(outer)?;
        if inner >= outer {
            return Err(Error::InvalidRadius(inner));
        }
        Ok(Self::build(
            Shape::Annulus { center, inner, outer },
            vec![
                (Piece::Circle { center, radius: outer, clockwise: false }, Label::Outer),
                (Piece::Circle { center, radius: inner, clockwise: true }, Label::Hole),
            ],
            QuadratureSpec::default(),
        ))
    }

    pub fn convex(polygon: ConvexPolygon) -> Region {
        let pieces = polygon_pieces(&polygon);
        Self::build(Shape::Convex { polygon }, pieces, QuadratureSpec::default())
    }

    /// exp(P) for a convex log-plane polygon P whose imaginary extent is below 2π.
    pub fn exp_image(log_polygon: ConvexPolygon) -> Result<Region> {
        let (lo, hi) = log_polygon
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.im), hi.max(v.im)));
        if hi - lo >= TAU {
            return Err(Error::InvalidRegion(format!(
                "log-plane polygon has height {} ≥ 2π, exp is not one-to-one on it",
                hi - lo
            )));
        }
        let pieces = (0..log_polygon.len())
            .filter_map(|k| {
                let (a, b) = log_polygon.edge(k);
                ((b - a).norm() > 0.0).then_some((Piece::ExpSegment { from: a, to: b }, Label::Outer))
            })
            .collect();
        Ok(Self::build(Shape::ExpImage { log_polygon }, pieces, QuadratureSpec::default()))
    }

    /// Ω₁ ∩ {|z − c| > ρ}. The hole circle may lie inside Ω₁ or cross ∂Ω₁ at
    /// finitely many points; tangency is rejected.
    pub fn cutout(outer: ConvexOuter, hole_center: C64, hole_radius: f64) -> Result<Region> {
        check_radius(hole_radius)?;
        let pieces = cutout_pieces(&outer, hole_center, hole_radius)?;
        Ok(Self::build(Shape::Cutout { outer, hole_center, hole_radius }, pieces, QuadratureSpec::default()))
    }

    /// D₁ ∩ D₂ for a disk D₁ = {|z − ω₁| < R₁} and an exterior disk
    /// D₂ = {|z − ω₂| > ρ₂}.
    pub fn two_disks(w1: C64, r1: f64, w2: C64, rho2: f64) -> Result<Region> {
        check_radius(r1)?;
        Self::cutout(ConvexOuter::Disk { center: w1, radius: r1 }, w2, rho2)
    }

    /// Same region with a different quadrature.
    pub fn with_spec(&self, spec: QuadratureSpec) -> Region {
        Self::build(self.shape.clone(), self.pieces.clone(), spec)
    }

    /// Same region with every node count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Region {
        let density = self.spec.density * factor.max(1);
        self.with_spec(self.spec.with_density(density))
    }

    /// Builds the region for a shape, validating it like the constructors.
    pub fn from_shape(shape: Shape, spec: QuadratureSpec) -> Result<Region> {
        let region = match shape {
            Shape::Disk { center, radius } => Self::disk(center, radius)?,
            Shape::ExteriorDisk { center, radius } => Self::exterior_disk(center, radius)?,
            Shape::Annulus { center, inner, outer } => Self::annulus_about(center, inner, outer)?,
            Shape::Convex { polygon } => Self::convex(ConvexPolygon::new(polygon.vertices)?),
            Shape::Cutout { outer, hole_center, hole_radius } => Self::cutout(outer, hole_center, hole_radius)?,
            Shape::ExpImage { log_polygon } => Self::exp_image(ConvexPolygon::new(log_polygon.vertices)?)?,
        };
        Ok(region.with_spec(spec))
    }

    /// Accepts a full region (as written by [`Region::to_json`]) or a bare
    /// shape such as `{"kind": "disk", "center": [0, 0], "radius": 1}`.
    /// Boundary pieces are always recomputed from the shape.
    pub fn from_json(text: &str) -> Result<Region> {
        #[derive(Deserialize)]
        struct Stored {
            shape: Shape,
            #[serde(default)]
            spec: QuadratureSpec,
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("shape").is_some() {
            let stored: Stored = serde_json::from_value(value)?;
            Self::from_shape(stored.shape, stored.spec)
        } else {
            Self::from_shape(serde_json::from_value(value)?, QuadratureSpec::default())
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn pieces(&self) -> &[(Piece, Label)] {
        &self.pieces
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.shape, Shape::ExteriorDisk { .. })
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|(p, _)| p.length()).sum()
    }

    pub fn label_length(&self, label: Label) -> f64 {
        self.pieces.iter().filter(|(_, l)| *l == label).map(|(p, _)| p.length()).sum()
    }

    /// Open-set membership.
    pub fn contains(&self, z: C64) -> bool {
        match &self.shape {
            Shape::Disk { center, radius } => (z - center).norm() < *radius,
            Shape::ExteriorDisk { center, radius } => (z - center).norm() > *radius,
            Shape::Annulus { center, inner, outer } => {
                let d = (z - center).norm();
                *inner < d && d < *outer
            }
            Shape::Convex { polygon } => polygon.contains(z),
            Shape::Cutout { outer, hole_center, hole_radius } => {
                outer.contains(z) && (z - hole_center).norm() > *hole_radius
            }
            Shape::ExpImage { log_polygon } => {
                if z.norm() == 0.0 {
                    return false;
                }
                let w = z.ln();
                (-2..=2).any(|k| log_polygon.contains(w + C64::new(0.0, TAU * k as f64)))
            }
        }
    }

    pub fn distance_to_boundary(&self, z: C64) -> f64 {
        self.pieces.iter().map(|(p, _)| p.distance(z)).fold(f64::INFINITY, f64::min)
    }

    /// Membership with a margin: inside and at least `margin` from ∂Ω.
    pub fn contains_with_margin(&self, z: C64, margin: f64) -> bool {
        self.contains(z) && self.distance_to_boundary(z) >= margin
    }

    /// Diameter of the boundary point set (for scaling tolerances).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn compute_diameter(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } | Shape::ExteriorDisk { radius, .. } => 2.0 * radius,
            Shape::Annulus { outer, .. } => 2.0 * outer,
            Shape::Convex { polygon } => polygon.diameter(),
            Shape::Cutout { outer, .. } => outer.diameter(),
            Shape::ExpImage { .. } => {
                let pts = self.sample_boundary(8);
                let mut d: f64 = 0.0;
                for a in pts.iter().flatten() {
                    for b in pts.iter().flatten() {
                        d = d.max((a - b).norm());
                    }
                }
                d
            }
        }
    }

    /// Each piece sampled at `per_piece` + 1 equispaced parameters (for plots).
    pub fn sample_boundary(&self, per_piece: usize) -> Vec<Vec<C64>> {
        self.pieces
            .iter()
            .map(|(p, _)| (0..=per_piece).map(|k| p.point(k as f64 / per_piece as f64)).collect())
            .collect()
    }

    fn make_nodes(&self) -> Vec<Node> {
        let spec = &self.spec;
        let d = spec.density.max(1);
        let segment_scale = self.segment_scale();
        let mut nodes = Vec::new();
        for (index, (piece, _)) in self.pieces.iter().enumerate() {
            let mut push = |t: f64, w_t: f64| {
                let der = piece.derivative(t);
                nodes.push(Node {
                    point: piece.point(t),
                    tangent: der / der.norm(),
                    weight: w_t * der.norm(),
                    curvature: piece.curvature(t),
                    piece: index,
                    t,
                });
            };
            match piece {
                Piece::Circle { .. } => {
                    let m = spec.circle_nodes * d;
                    for k in 0..m {
                        push(k as f64 / m as f64, 1.0 / m as f64);
                    }
                }
                Piece::Arc { sweep, .. } => {
                    let panels = (sweep.abs() / spec.panel_angle).ceil().max(1.0) as usize * d;
                    let breaks = graded_breaks(panels, spec.grading_levels, spec.grading_ratio);
                    gauss_panels(&breaks, spec.panel_nodes, &mut push);
                }
                Piece::Segment { .. } | Piece::ExpSegment { .. } => {
                    // Exp segments are sized by their log-plane length.
                    let len = match piece {
                        Piece::ExpSegment { from, to } => (to - from).norm(),
                        _ => piece.length(),
                    };
                    let raw = (spec.segment_nodes_max as f64 * len / segment_scale).ceil() as usize;
                    let total = raw.clamp(spec.segment_nodes_min, spec.segment_nodes_max) * d;
                    let panels = total.div_ceil(spec.segment_nodes_max);
                    let per = total.div_ceil(panels);
                    let breaks: Vec<f64> = (0..=panels).map(|k| k as f64 / panels as f64).collect();
                    gauss_panels(&breaks, per, &mut push);
                }
            }
        }
        nodes
    }

    /// Quarter of the straight-edge perimeter: an edge this long gets the
    /// maximum segment node count.
    fn segment_scale(&self) -> f64 {
        let perimeter = match &self.shape {
            Shape::Convex { polygon } => polygon.perimeter(),
            Shape::Cutout { outer: ConvexOuter::Polygon { polygon }, .. } => polygon.perimeter(),
            Shape::ExpImage { log_polygon } => log_polygon.perimeter(),
            _ => self.pieces.iter().filter(|(p, _)| matches!(p, Piece::Segment { .. })).map(|(p, _)| p.length()).sum(),
        };
        (perimeter / 4.0).max(f64::MIN_POSITIVE)
    }
}

/// Panel breakpoints on [0, 1]: `panels` uniform panels with the first and
/// last split geometrically toward the endpoints.
fn graded_breaks(panels: usize, levels: usize, ratio: f64) -> Vec<f64> {
    let h = 1.0 / panels as f64;
    let mut breaks = vec![0.0];
    for l in (1..=levels).rev() {
        breaks.push(h * ratio.powi(l as i32));
    }
    for k in 1..panels {
        breaks.push(k as f64 * h);
    }
    for l in 1..=levels {
        breaks.push(1.0 - h * ratio.powi(l as i32));
    }
    breaks.push(1.0);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    breaks
}

fn gauss_panels(breaks: &[f64], n: usize, push: &mut impl FnMut(f64, f64)) {
    let (x, w) = gauss_legendre(n);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            push(a + half * (xi + 1.0), half * wi);
        }
    }
}

fn polygon_pieces(polygon: &ConvexPolygon) -> Vec<(Piece, Label)> {
    let tiny = 1e-14 * polygon.diameter();
    (0..polygon.len())
        .filter_map(|k| {
            let (a, b) = polygon.edge(k);
            ((b - a).norm() > tiny).then_some((Piece::Segment { from: a, to: b }, Label::Outer))
        })
        .collect()
}

/// A point where ∂Ω₁ crosses the hole circle.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    /// Position along ∂Ω₁: edge index plus fraction, or a circle angle.
    position: f64,
    /// Angle on the hole circle.
    angle: f64,
}

fn cutout_pieces(outer: &ConvexOuter, c: C64, rho: f64) -> Result<Vec<(Piece, Label)>> {
    let scale = outer.diameter().max(rho);
    let tol = 1e-10 * scale;
    let crossings = match outer {
        ConvexOuter::Polygon { polygon } => polygon_circle_crossings(polygon, c, rho, tol)?,
        ConvexOuter::Disk { center, radius } => circle_circle_crossings(*center, *radius, c, rho, tol)?,
    };
    let mut pieces = Vec::new();

    if crossings.is_empty() {
        let inside = match outer {
            ConvexOuter::Polygon { polygon } => polygon.signed_distance(c) > rho,
            ConvexOuter::Disk { center, radius } => (c - center).norm() + rho < *radius,
        };
        if !inside {
            return Err(Error::InvalidRegion(
                "hole circle neither lies inside the convex region nor crosses its boundary".into(),
            ));
        }
        match outer {
            ConvexOuter::Polygon { polygon } => pieces.extend(polygon_pieces(polygon)),
            ConvexOuter::Disk { center, radius } => {
                pieces.push((Piece::Circle { center: *center, radius: *radius, clockwise: false }, Label::Outer))
            }
        }
        pieces.push((Piece::Circle { center: c, radius: rho, clockwise: true }, Label::Hole));
        return Ok(pieces);
    }
    if crossings.len() % 2 == 1 {
        return Err(Error::DegenerateIntersection(format!("odd number ({}) of boundary crossings", crossings.len())));
    }

    // Γ₁: parts of ∂Ω₁ outside the hole, walked counter-clockwise.
    let mut by_position = crossings.clone();
    by_position.sort_by(|a, b| a.position.total_cmp(&b.position));
    let m = by_position.len();
    for k in 0..m {
        let start = by_position[k].position;
        let mut end = by_position[(k + 1) % m].position;
        match outer {
            ConvexOuter::Polygon { polygon } => {
                let n = polygon.len() as f64;
                if end <= start {
                    end += n;
                }
                let mid = polygon_point(polygon, 0.5 * (start + end));
                if (mid - c).norm() <= rho {
                    continue;
                }
                let mut cuts = vec![start];
                let mut v = start.floor() + 1.0;
                while v < end {
                    cuts.push(v);
                    v += 1.0;
                }
                cuts.push(end);
                for pair in cuts.windows(2) {
                    let (a, b) = (polygon_point(polygon, pair[0]), polygon_point(polygon, pair[1]));
                    if (b - a).norm() > 1e-14 * scale {
                        pieces.push((Piece::Segment { from: a, to: b }, Label::Outer));
                    }
                }
            }
            ConvexOuter::Disk { center, radius } => {
                if end <= start {
                    end += TAU;
                }
                let mid = center + C64::from_polar(*radius, 0.5 * (start + end));
                if (mid - c).norm() <= rho {
                    continue;
                }
                pieces.push((Piece::Arc { center: *center, radius: *radius, start, sweep: end - start }, Label::Outer));
            }
        }
    }

    // Γ₂: arcs of the hole circle inside Ω₁, traversed clockwise.
    let mut by_angle = crossings;
    by_angle.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    for k in 0..m {
        let a0 = by_angle[k].angle;
        let mut a1 = by_angle[(k + 1) % m].angle;
        if a1 <= a0 {
            a1 += TAU;
        }
        let mid = c + C64::from_polar(rho, 0.5 * (a0 + a1));
        if !outer.contains(mid) {
            continue;
        }
        pieces.push((Piece::Arc { center: c, radius: rho, start: a1, sweep: -(a1 - a0) }, Label::Hole));
    }
    Ok(pieces)
}

/// Point at position `p` (edge index + fraction) along the polygon boundary.
fn polygon_point(polygon: &ConvexPolygon, p: f64) -> C64 {
    let n = polygon.len();
    let k = (p.floor() as usize) % n;
    let f = p - p.floor();
    let (a, b) = polygon.edge(k);
    a + (b - a) * f
}

fn polygon_circle_crossings(polygon: &ConvexPolygon, c: C64, rho: f64, tol: f64) -> Result<Vec<Crossing>> {
    let mut out = Vec::new();
    for k in 0..polygon.len() {
        let (a, b) = polygon.edge(k);
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let u = d / len;
        let f = a - c;
        // |f + s u|² = ρ² with s ∈ [0, len]
        let half_b = (f * u.conj()).re;
        let perp = (f * u.conj()).im;
        let disc = rho * rho - perp * perp;
        if (perp.abs() - rho).abs() <= tol {
            let s = -half_b;
            if s > -tol && s < len + tol {
                return Err(Error::DegenerateIntersection(format!("hole circle is tangent to edge {k}")));
            }
            continue;
        }
        if disc < 0.0 {
            continue;
        }
        let root = disc.sqrt();
        for s in [-half_b - root, -half_b + root] {
            if s.abs() <= tol || (s - len).abs() <= tol {
                return Err(Error::DegenerateIntersection(format!("hole circle passes through a vertex of edge {k}")));
            }
            if s > 0.0 && s < len {
                let z = a + u * s;
                out.push(Crossing { position: k as f64 + s / len, angle: (z - c).arg() });
            }
        }
    }
    Ok(out)
}

fn circle_circle_crossings(c1: C64, r1: f64, c2: C64, r2: f64, tol: f64) -> Result<Vec<Crossing>> {
    let d = (c2 - c1).norm();
    if (d - (r1 + r2)).abs() <= tol || (d - (r1 - r2).abs()).abs() <= tol {
        return Err(Error::DegenerateIntersection("circles are tangent".into()));
    }
    if d > r1 + r2 || d < (r1 - r2).abs() {
        return Ok(Vec::new());
    }
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) / d;
    let base = c1 + u * a;
    let perp = u * C64::new(0.0, 1.0);
    Ok([base + perp * h, base - perp * h]
        .into_iter()
        .map(|z| Crossing { position: (z - c1).arg().rem_euclid(TAU), angle: (z - c2).arg() })
        .collect())
}
