//! Upper half-plane geometry: points, geodesics, isometries.
//!
//! A [`Motion`] is a real 2x2 matrix together with an orientation flag.
//! Direct motions act by `z -> (az+b)/(cz+d)` with determinant +1,
//! reversing motions act on the conjugate, `z -> (a z̄ + b)/(c z̄ + d)`,
//! with determinant -1. Because the entries are real, composition is the
//! plain matrix product in both cases.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// `|trace| - 2` within this counts as parabolic or identity.
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Entries below this are treated as zero when fixing the matrix sign.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UhpPoint {
    pub x: f64,
    pub y: f64,
}

impl UhpPoint {
    pub const I: UhpPoint = UhpPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(y > 0.0, "point below the real axis: ({x}, {y})");
        UhpPoint { x, y }
    }

    /// The point `i * e^s` on the imaginary axis.
    pub fn on_axis(s: f64) -> Self {
        UhpPoint::new(0.0, s.exp())
    }

    /// Reflection across the imaginary axis, `z -> -z̄`.
    pub fn mirror(self) -> Self {
        UhpPoint::new(-self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    Finite(f64),
    Infinity,
}

impl Boundary {
    fn approx_eq(self, other: Boundary, tol: f64) -> bool {
        match (self, other) {
            (Boundary::Infinity, Boundary::Infinity) => true,
            (Boundary::Finite(a), Boundary::Finite(b)) => (a - b).abs() <= tol * (1.0 + a.abs()),
            _ => false,
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Finite(v) => write!(f, "{v}"),
            Boundary::Infinity => write!(f, "inf"),
        }
    }
}

/// A complete geodesic, stored by its (unordered) boundary endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    a: Boundary,
    b: Boundary,
}

/// Concrete shape of a geodesic in the half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeodesicShape {
    Vertical { x: f64 },
    Circle { center: f64, radius: f64 },
}

impl Geodesic {
    pub fn new(a: Boundary, b: Boundary) -> Result<Self> {
        if a.approx_eq(b, 1e-15) {
            return Err(Error::DegenerateGeodesic);
        }
        // normalize: infinity last, otherwise ascending
        let (a, b) = match (a, b) {
            (Boundary::Infinity, f) => (f, Boundary::Infinity),
            (Boundary::Finite(u), Boundary::Finite(v)) if v < u => {
                (Boundary::Finite(v), Boundary::Finite(u))
            }
            other => other,
        };
        Ok(Geodesic { a, b })
    }

    pub fn vertical(x: f64) -> Self {
        Geodesic {
            a: Boundary::Finite(x),
            b: Boundary::Infinity,
        }
    }

    pub fn circle(center: f64, radius: f64) -> Self {
        assert!(radius > 0.0);
        Geodesic {
            a: Boundary::Finite(center - radius),
            b: Boundary::Finite(center + radius),
        }
    }

    /// The geodesic through two distinct points.
    pub fn through(z1: UhpPoint, z2: UhpPoint) -> Result<Self> {
        let dx = z2.x - z1.x;
        let scale = 1.0 + z1.x.abs().max(z2.x.abs());
        if dx.abs() <= 1e-14 * scale {
            if (z1.y - z2.y).abs() <= 1e-15 * z1.y {
                return Err(Error::DegenerateGeodesic);
            }
            return Ok(Geodesic::vertical(0.5 * (z1.x + z2.x)));
        }
        let n1 = z1.x * z1.x + z1.y * z1.y;
        let n2 = z2.x * z2.x + z2.y * z2.y;
        let m = (n2 - n1) / (2.0 * dx);
        let radius = ((z1.x - m).powi(2) + z1.y * z1.y).sqrt();
        Ok(Geodesic::circle(m, radius))
    }

    pub fn endpoints(&self) -> (Boundary, Boundary) {
        (self.a, self.b)
    }

    pub fn shape(&self) -> GeodesicShape {
        match (self.a, self.b) {
            (Boundary::Finite(x), Boundary::Infinity)
            | (Boundary::Infinity, Boundary::Finite(x)) => GeodesicShape::Vertical { x },
            (Boundary::Finite(u), Boundary::Finite(v)) => GeodesicShape::Circle {
                center: 0.5 * (u + v),
                radius: 0.5 * (v - u).abs(),
            },
            (Boundary::Infinity, Boundary::Infinity) => unreachable!("normalized geodesic"),
        }
    }

    /// Signed side of `z`: negative on one side, positive on the other,
    /// zero on the geodesic. For circles negative means inside.
    pub fn side(&self, z: UhpPoint) -> f64 {
        match self.shape() {
            GeodesicShape::Vertical { x } => z.x - x,
            GeodesicShape::Circle { center, radius } => {
                ((z.x - center).powi(2) + z.y * z.y - radius * radius) / (2.0 * radius)
            }
        }
    }

    /// Hyperbolic distance from `z` to the geodesic.
    pub fn distance_to(&self, z: UhpPoint) -> f64 {
        // map the geodesic to the imaginary axis, then sinh d = |x|/y
        let m = self.to_imaginary_axis();
        let w = m.apply(z);
        (w.x.abs() / w.y).asinh()
    }

    /// A direct motion sending this geodesic onto the imaginary axis.
    pub fn to_imaginary_axis(&self) -> Motion {
        match (self.a, self.b) {
            (Boundary::Finite(u), Boundary::Infinity) => Motion::direct_raw(1.0, -u, 0.0, 1.0),
            (Boundary::Finite(u), Boundary::Finite(v)) => {
                // z -> (z - u)/(v - z) sends u to 0 and v to infinity
                Motion::direct_raw(1.0, -u, -1.0, v)
            }
            _ => unreachable!("normalized geodesic"),
        }
    }

    pub fn approx_eq(&self, other: &Geodesic, tol: f64) -> bool {
        self.a.approx_eq(other.a, tol) && self.b.approx_eq(other.b, tol)
    }

    /// The orientation-reversing involution fixing this geodesic pointwise.
    pub fn reflect(&self) -> Motion {
        reflect(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Direct,
    Reversing,
}

impl Orientation {
    fn compose(self, other: Orientation) -> Orientation {
        if self == other {
            Orientation::Direct
        } else {
            Orientation::Reversing
        }
    }
}

/// An isometry of the half-plane, stored projectively with |det| = 1 and
/// the first significant entry positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    m: [f64; 4],
    orientation: Orientation,
}

impl Motion {
    pub fn identity() -> Self {
        Motion {
            m: [1.0, 0.0, 0.0, 1.0],
            orientation: Orientation::Direct,
        }
    }

    /// Builds a motion from raw entries, normalizing the determinant
    /// magnitude to 1. The determinant sign must match the orientation.
    pub fn new(a: f64, b: f64, c: f64, d: f64, orientation: Orientation) -> Result<Self> {
        let det = a * d - b * c;
        let ok_sign = match orientation {
            Orientation::Direct => det > 0.0,
            Orientation::Reversing => det < 0.0,
        };
        if !det.is_finite() || det.abs() < 1e-300 || !ok_sign {
            return Err(Error::Degenerate(det));
        }
        let s = det.abs().sqrt();
        Ok(Motion {
            m: [a / s, b / s, c / s, d / s],
            orientation,
        }
        .canonical())
    }

    pub(crate) fn direct_raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Motion::new(a, b, c, d, Orientation::Direct)
            .expect("direct matrix with positive determinant")
    }

    pub fn entries(&self) -> [f64; 4] {
        self.m
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_direct(&self) -> bool {
        self.orientation == Orientation::Direct
    }

    pub fn det(&self) -> f64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    fn canonical(mut self) -> Self {
        let first = self
            .m
            .iter()
            .copied()
            .find(|v| v.abs() > SIGN_TOL)
            .unwrap_or(1.0);
        if first < 0.0 {
            for v in &mut self.m {
                *v = -*v;
            }
        }
        self
    }

    /// Matrix product `self * other`: apply `other` first.
    pub fn compose(&self, other: &Motion) -> Motion {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = other.m;
        Motion {
            m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
            orientation: self.orientation.compose(other.orientation),
        }
        .canonical()
    }

    pub fn inverse(&self) -> Motion {
        let [a, b, c, d] = self.m;
        let det = self.det();
        Motion {
            m: [d / det, -b / det, -c / det, a / det],
            orientation: self.orientation,
        }
        .canonical()
    }

    /// `w * self * w^-1`.
    pub fn conjugate_by(&self, w: &Motion) -> Motion {
        w.compose(self).compose(&w.inverse())
    }

    pub fn negated(&self) -> Motion {
        let [a, b, c, d] = self.m;
        Motion {
            m: [-a, -b, -c, -d],
            orientation: self.orientation,
        }
    }

    pub fn apply(&self, z: UhpPoint) -> UhpPoint {
        apply(self, z)
    }

    pub fn apply_boundary(&self, t: Boundary) -> Boundary {
        let [a, b, c, d] = self.m;
        match t {
            Boundary::Infinity => {
                if c == 0.0 {
                    Boundary::Infinity
                } else {
                    Boundary::Finite(a / c)
                }
            }
            Boundary::Finite(x) => {
                let den = c * x + d;
                if den == 0.0 {
                    Boundary::Infinity
                } else {
                    Boundary::Finite((a * x + b) / den)
                }
            }
        }
    }

    /// Projective closeness: entries match up to a global sign.
    pub fn approx_eq(&self, other: &Motion, tol: f64) -> bool {
        if self.orientation != other.orientation {
            return false;
        }
        let close = |s: f64| {
            self.m
                .iter()
                .zip(other.m.iter())
                .all(|(x, y)| (x - s * y).abs() <= tol * (1.0 + x.abs()))
        };
        close(1.0) || close(-1.0)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Motion::identity(), tol)
    }

    /// Counterclockwise rotation by `theta` about `center`.
    pub fn rotation(center: UhpPoint, theta: f64) -> Motion {
        let (s, c) = (0.5 * theta).sin_cos();
        let rot = Motion {
            m: [c, s, -s, c],
            orientation: Orientation::Direct,
        };
        let sy = center.y.sqrt();
        let to_center = Motion::direct_raw(sy, center.x / sy, 0.0, 1.0 / sy);
        to_center.compose(&rot).compose(&to_center.inverse())
    }

    /// Hyperbolic translation of length `t` along the imaginary axis.
    pub fn axis_translation(t: f64) -> Motion {
        Motion::direct_raw((0.5 * t).exp(), 0.0, 0.0, (-0.5 * t).exp())
    }

    /// Largest absolute entry; a rough size measure for tolerances.
    pub fn norm_max(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

impl Mul for Motion {
    type Output = Motion;
    fn mul(self, rhs: Motion) -> Motion {
        self.compose(&rhs)
    }
}

impl Mul for &Motion {
    type Output = Motion;
    fn mul(self, rhs: &Motion) -> Motion {
        self.compose(rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MotionClass {
    Identity,
    Elliptic { angle: f64 },
    Parabolic,
    Hyperbolic { length: f64 },
}

impl MotionClass {
    pub fn length(&self) -> Option<f64> {
        match self {
            MotionClass::Hyperbolic { length } => Some(*length),
            _ => None,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, MotionClass::Hyperbolic { .. })
    }
}

pub fn apply(m: &Motion, z: UhpPoint) -> UhpPoint {
    let [a, b, c, d] = m.m;
    let (x, y) = match m.orientation {
        Orientation::Direct => (z.x, z.y),
        Orientation::Reversing => (z.x, -z.y),
    };
    // (a w + b)/(c w + d) with w = x + i y
    let nr = a * x + b;
    let ni = a * y;
    let dr = c * x + d;
    let di = c * y;
    let den = dr * dr + di * di;
    let re = (nr * dr + ni * di) / den;
    let im = (ni * dr - nr * di) / den;
    UhpPoint { x: re, y: im.abs() }
}

/// cosh of the hyperbolic distance.
pub fn cosh_dist(z1: UhpPoint, z2: UhpPoint) -> f64 {
    1.0 + ((z1.x - z2.x).powi(2) + (z1.y - z2.y).powi(2)) / (2.0 * z1.y * z2.y)
}

pub fn dist(z1: UhpPoint, z2: UhpPoint) -> f64 {
    // 2 asinh(|z1 - z2| / (2 sqrt(y1 y2))) is accurate for nearby points
    let e = ((z1.x - z2.x).powi(2) + (z1.y - z2.y).powi(2)).sqrt();
    2.0 * (e / (2.0 * (z1.y * z2.y).sqrt())).asinh()
}

pub fn classify(m: &Motion) -> Result<MotionClass> {
    if !m.is_direct() {
        return Err(Error::ReversingMotion);
    }
    let t = m.trace();
    let at = t.abs();
    if at > 2.0 + CLASSIFY_TOL {
        return Ok(MotionClass::Hyperbolic {
            length: 2.0 * (0.5 * at).acosh(),
        });
    }
    if at >= 2.0 - CLASSIFY_TOL {
        if m.is_identity(CLASSIFY_TOL) {
            return Ok(MotionClass::Identity);
        }
        return Ok(MotionClass::Parabolic);
    }
    // sign fixed so that the lower-left entry is negative: then the
    // counterclockwise angle is 2 arccos(trace/2)
    let [_, b, c, _] = m.m;
    let s = if c.abs() > SIGN_TOL {
        -c.signum()
    } else {
        b.signum()
    };
    let angle = 2.0 * (0.5 * s * t).clamp(-1.0, 1.0).acos();
    Ok(MotionClass::Elliptic { angle })
}

pub fn reflect(g: &Geodesic) -> Motion {
    match g.shape() {
        GeodesicShape::Vertical { x } => Motion {
            m: [-1.0, 2.0 * x, 0.0, 1.0],
            orientation: Orientation::Reversing,
        }
        .canonical(),
        GeodesicShape::Circle { center, radius } => Motion {
            m: [
                center / radius,
                (radius * radius - center * center) / radius,
                1.0 / radius,
                -center / radius,
            ],
            orientation: Orientation::Reversing,
        }
        .canonical(),
    }
}

/// δ for two geodesics crossing a transversal segment of length `t` at
/// angles `theta1`, `theta2`. Values above 1 mean disjoint geodesics with
/// cosh of their distance equal to δ.
pub fn delta_config(t: f64, theta1: f64, theta2: f64) -> f64 {
    (theta1.sin() * theta2.sin() * t.cosh() - theta1.cos() * theta2.cos()).abs()
}

/// Real fixed points of a direct motion with |trace| > 2.
pub fn fixed_points(m: &Motion) -> Result<(Boundary, Boundary)> {
    let [a, b, c, d] = m.m;
    let tr = a + d;
    if tr.abs() <= 2.0 + CLASSIFY_TOL {
        return Err(Error::NotHyperbolicMotion);
    }
    let disc = (tr * tr - 4.0).sqrt();
    if c.abs() <= 1e-15 * m.norm_max() {
        // fixes infinity; the other point solves (a - d) x + b = 0
        return Ok((Boundary::Finite(b / (d - a)), Boundary::Infinity));
    }
    // c x^2 + (d - a) x - b = 0, stable form of the quadratic formula
    let bq = d - a;
    let sq = bq.signum() * disc;
    let sq = if sq == 0.0 { disc } else { sq };
    let q = -0.5 * (bq + sq);
    let x1 = q / c;
    let x2 = -b / q;
    Ok((Boundary::Finite(x1), Boundary::Finite(x2)))
}

pub fn axis(m: &Motion) -> Result<Geodesic> {
    if !m.is_direct() {
        return Err(Error::ReversingMotion);
    }
    let (u, v) = fixed_points(m)?;
    Geodesic::new(u, v)
}

/// The common perpendicular of two disjoint, non-asymptotic geodesics and
/// the distance between them.
pub fn common_perpendicular(a1: &Geodesic, a2: &Geodesic) -> Result<(Geodesic, f64)> {
    let h = reflect(a1).compose(&reflect(a2));
    match classify(&h)? {
        MotionClass::Hyperbolic { length } => Ok((axis(&h)?, 0.5 * length)),
        _ => Err(Error::NoCommonPerpendicular),
    }
}
