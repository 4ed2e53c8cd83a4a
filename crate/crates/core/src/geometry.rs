//! Constraint domains, intrinsic coordinates and the projection/retraction
//! primitives used by the optimizer.
//!
//! Points carry intrinsic coordinates (a unit vector on the sphere, an angle
//! pair on the torus, a free vector in 3-space). All metric quantities are
//! taken in the ambient embedding, so distances on the sphere and torus are
//! chordal.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Largest step the torus nearest-point retraction accepts. The minor radius
/// is 1, so any ambient point closer than 1 to the core circle has a unique
/// nearest torus point.
pub const TORUS_MAX_STEP: f64 = 0.5;

/// Tolerance on |x| - 1 for points handed to the sphere.
const SPHERE_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    /// Unit 2-sphere in R^3.
    Sphere2,
    /// Torus of revolution with minor radius 1 and major radius `aspect_ratio`.
    Torus2 { aspect_ratio: f64 },
    /// Unconstrained 3-space.
    Free3,
}

impl DomainSpec {
    pub fn torus(aspect_ratio: f64) -> Result<Self> {
        if !(aspect_ratio.is_finite() && aspect_ratio > 1.0) {
            return Err(Error::InvalidDomain(format!(
                "torus aspect ratio must be a finite number > 1, got {aspect_ratio}"
            )));
        }
        Ok(DomainSpec::Torus2 { aspect_ratio })
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, DomainSpec::Free3)
    }

    pub fn aspect_ratio(&self) -> Option<f64> {
        match self {
            DomainSpec::Torus2 { aspect_ratio } => Some(*aspect_ratio),
            _ => None,
        }
    }

    /// Checks that `p` uses the coordinate chart of this domain.
    pub fn validate_point(&self, p: &Point) -> Result<()> {
        let bad = |reason: String| Error::InvalidPoint {
            domain: self.to_string(),
            reason,
        };
        match (self, p) {
            (DomainSpec::Sphere2, Point::Vector(v)) => {
                let norm = v.norm();
                if !norm.is_finite() || (norm - 1.0).abs() > SPHERE_NORM_TOLERANCE {
                    return Err(bad(format!("norm {norm} is not 1")));
                }
                Ok(())
            }
            (DomainSpec::Free3, Point::Vector(v)) => {
                if v.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(bad("non-finite coordinate".into()))
                }
            }
            (DomainSpec::Torus2 { .. }, Point::Angles { theta, phi }) => {
                let ok = |a: f64| (0.0..TAU).contains(&a);
                if ok(*theta) && ok(*phi) {
                    Ok(())
                } else {
                    Err(bad(format!("angles ({theta}, {phi}) not in [0, 2pi)")))
                }
            }
            (_, Point::Vector(_)) => Err(bad("expected an angle pair".into())),
            (_, Point::Angles { .. }) => Err(bad("expected a 3-vector".into())),
        }
    }

    /// Outward unit normal of the embedded surface at `p`; `None` for free space.
    pub fn normal(&self, p: &Point) -> Option<Vec3> {
        match (self, p) {
            (DomainSpec::Sphere2, Point::Vector(v)) => Some(*v),
            (DomainSpec::Torus2 { .. }, Point::Angles { theta, phi }) => Some(Vec3::new(
                theta.cos() * phi.cos(),
                theta.cos() * phi.sin(),
                theta.sin(),
            )),
            _ => None,
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Sphere2 => f.write_str("sphere"),
            DomainSpec::Torus2 { aspect_ratio } => write!(f, "torus:{aspect_ratio}"),
            DomainSpec::Free3 => f.write_str("free3"),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    /// Accepts `sphere`, `torus:<ratio>` and `free3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sphere" => Ok(DomainSpec::Sphere2),
            "free3" => Ok(DomainSpec::Free3),
            _ => match s.strip_prefix("torus:") {
                Some(ratio) => {
                    let r: f64 = ratio.parse().map_err(|_| {
                        Error::InvalidDomain(format!("bad torus aspect ratio `{ratio}`"))
                    })?;
                    DomainSpec::torus(r)
                }
                None => Err(Error::InvalidDomain(format!(
                    "unknown domain `{s}`; valid values: sphere, torus:<ratio>, free3"
                ))),
            },
        }
    }
}

/// Intrinsic coordinates of one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Unit vector (sphere) or free position (3-space).
    Vector(Vec3),
    /// Torus angles: `theta` around the tube, `phi` around the symmetry axis.
    Angles { theta: f64, phi: f64 },
}

impl Point {
    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Point::Vector(Vec3::new(x, y, z))
    }

    /// Normalizes `v` onto the unit sphere.
    pub fn on_sphere(v: Vec3) -> Self {
        Point::Vector(v.normalize())
    }

    /// Torus point with both angles reduced to [0, 2pi).
    pub fn angles(theta: f64, phi: f64) -> Self {
        Point::Angles {
            theta: reduce_angle(theta),
            phi: reduce_angle(phi),
        }
    }
}

pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// An ordered list of points on one domain. Coincident points are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    domain: DomainSpec,
    points: Vec<Point>,
}

impl Configuration {
    pub fn new(domain: DomainSpec, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints {
                required: 1,
                got: 0,
            });
        }
        for p in &points {
            domain.validate_point(p)?;
        }
        Ok(Self { domain, points })
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn embedded(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| embed(p, &self.domain)).collect()
    }

    /// Applies `f` to every point. The caller is responsible for producing
    /// valid points; this is checked.
    pub fn map_points<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&Point) -> Result<Point>,
    {
        let points = self.points.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.domain, points)
    }
}

/// Ambient coordinates of `p`.
pub fn embed(p: &Point, d: &DomainSpec) -> Vec3 {
    match (d, p) {
        (DomainSpec::Torus2 { aspect_ratio }, Point::Angles { theta, phi }) => {
            let rho = aspect_ratio + theta.cos();
            Vec3::new(rho * phi.cos(), rho * phi.sin(), theta.sin())
        }
        (_, Point::Vector(v)) => *v,
        // a validated point never has angles off the torus
        (_, Point::Angles { .. }) => panic!("angle coordinates used on domain {d}"),
    }
}

pub fn chordal_distance(p: &Point, q: &Point, d: &DomainSpec) -> f64 {
    (embed(p, d) - embed(q, d)).norm()
}

/// Draws `n` points from the uniform surface (or cube) measure.
pub fn random_configuration(d: DomainSpec, n: usize, seed: u64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::TooFewPoints {
            required: 1,
            got: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| sample_point(&d, n, &mut rng))
        .collect::<Vec<_>>();
    Configuration::new(d, points)
}

fn sample_point<R: Rng>(d: &DomainSpec, n: usize, rng: &mut R) -> Point {
    match d {
        DomainSpec::Sphere2 => loop {
            let v = Vec3::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            let norm = v.norm();
            if norm > 1e-8 {
                break Point::Vector(v / norm);
            }
        },
        DomainSpec::Torus2 { aspect_ratio } => {
            // area element is proportional to (R + cos theta)
            let theta = loop {
                let theta = rng.random::<f64>() * TAU;
                let accept = (aspect_ratio + theta.cos()) / (aspect_ratio + 1.0);
                if rng.random::<f64>() < accept {
                    break theta;
                }
            };
            let phi = rng.random::<f64>() * TAU;
            Point::angles(theta, phi)
        }
        DomainSpec::Free3 => {
            let half = (n as f64).cbrt();
            Point::Vector(Vec3::new(
                rng.random_range(-half..half),
                rng.random_range(-half..half),
                rng.random_range(-half..half),
            ))
        }
    }
}

/// Orthogonal projection of `v` onto the tangent plane at `p`.
pub fn tangent_project(p: &Point, v: &Vec3, d: &DomainSpec) -> Vec3 {
    match d.normal(p) {
        Some(n) => v - n * n.dot(v),
        None => *v,
    }
}

/// Maps `embed(p) + step` back onto the domain.
pub fn retract(p: &Point, step: &Vec3, d: &DomainSpec) -> Result<Point> {
    if step.iter().all(|&c| c == 0.0) {
        return Ok(*p);
    }
    match d {
        DomainSpec::Sphere2 | DomainSpec::Free3 => {
            let moved = embed(p, d) + step;
            if matches!(d, DomainSpec::Sphere2) {
                Ok(Point::Vector(moved.normalize()))
            } else {
                Ok(Point::Vector(moved))
            }
        }
        DomainSpec::Torus2 { aspect_ratio } => {
            let length = step.norm();
            if length >= TORUS_MAX_STEP {
                return Err(Error::StepTooLarge {
                    length,
                    limit: TORUS_MAX_STEP,
                });
            }
            let x = embed(p, d) + step;
            let phi = x.y.atan2(x.x);
            let rho = x.x.hypot(x.y) - aspect_ratio;
            let theta = x.z.atan2(rho);
            Ok(Point::angles(theta, phi))
        }
    }
}

/// Angle between two unit vectors, accurate for tiny and near-antipodal angles.
pub fn great_circle_angle(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Convenience for tests and examples: a point at spherical angles.
pub fn sphere_point(polar: f64, azimuth: f64) -> Point {
    Point::Vector(Vec3::new(
        polar.sin() * azimuth.cos(),
        polar.sin() * azimuth.sin(),
        polar.cos(),
    ))
}
