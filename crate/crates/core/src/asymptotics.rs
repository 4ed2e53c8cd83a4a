//! Large-N expansions of ground-state energies on the sphere.
//!
//! Logarithmic kernel: `E(N) = a N^2 + b N ln N + c N + d ln N + ...` with
//! `a = ln(e/4)/4` and `b = -1/4`.
//!
//! Inverse-distance kernel: `E(N) = a N^2 + b N^(3/2) + c N + d N^(1/2) + e`
//! with `a = 1/2`, `c = e = 0` and
//! `b = 3 (sqrt(3)/(8 pi))^(1/2) zeta(1/2) L`, where
//! `L = sum_k (1/sqrt(3k+1) - 1/sqrt(3k+2))`.

use std::f64::consts::PI;
use std::fmt;

use crate::audit::pair_count;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::potentials::PotentialSpec;
use crate::sum::CompensatedSum;
use crate::table::EnergyTable;

/// Terms of the accelerated eta series; the error falls like `5.83^-n`.
const ETA_TERMS: usize = 30;

/// Tail tolerance used when a Thomson model is built without one.
pub const DEFAULT_B_TOLERANCE: f64 = 1e-12;

/// Dirichlet eta `sum_{k>=1} (-1)^(k-1) k^-s` by the Cohen-Rodriguez
/// Villegas-Zagier acceleration of alternating series.
pub fn dirichlet_eta(s: f64) -> f64 {
    let n = ETA_TERMS;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        c = b - c;
        sum += c * ((k + 1) as f64).powf(-s);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// Riemann zeta for real `s > 0`, `s != 1`, via `zeta = eta / (1 - 2^(1-s))`.
pub fn zeta(s: f64) -> f64 {
    dirichlet_eta(s) / (1.0 - 2f64.powf(1.0 - s))
}

pub fn zeta_half() -> f64 {
    zeta(0.5)
}

/// `1/sqrt(3k+1) - 1/sqrt(3k+2)` without cancellation.
fn lattice_term(k: f64) -> f64 {
    let a = (3.0 * k + 1.0).sqrt();
    let b = (3.0 * k + 2.0).sqrt();
    1.0 / ((a + b) * a * b)
}

/// `|d/dk lattice_term(k)|`.
fn lattice_term_slope(k: f64) -> f64 {
    1.5 * ((3.0 * k + 1.0).powf(-1.5) - (3.0 * k + 2.0).powf(-1.5))
}

/// `integral_K^inf lattice_term(k) dk = (2/3)(sqrt(3K+2) - sqrt(3K+1))`.
fn lattice_tail_integral(k: f64) -> f64 {
    (2.0 / 3.0) / ((3.0 * k + 2.0).sqrt() + (3.0 * k + 1.0).sqrt())
}

fn b_prefactor() -> f64 {
    3.0 * (3f64.sqrt() / (8.0 * PI)).sqrt() * zeta_half()
}

/// The Thomson `N^(3/2)` coefficient with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BCoefficient {
    pub value: f64,
    /// The exact coefficient lies in `[value - tail_bound, value]`.
    pub tail_bound: f64,
    /// Terms of the lattice sum added explicitly.
    pub terms: usize,
}

/// Evaluates the lattice sum directly for the first K terms and replaces the
/// rest by `integral + g(K)/2`. The summand is positive, decreasing and
/// convex, so that replacement undershoots the tail by at most `|g'(K)|/8`;
/// K is the smallest value for which this bound, carried into `b`, is within
/// `tail_tolerance`.
pub fn b_coefficient(tail_tolerance: f64) -> Result<BCoefficient> {
    if !(tail_tolerance > 0.0 && tail_tolerance <= 1e-3) {
        return Err(Error::InvalidTolerance(format!(
            "tail tolerance must lie in (0, 1e-3], got {tail_tolerance}"
        )));
    }
    let prefactor = b_prefactor();
    let bound_at = |k: usize| prefactor.abs() * lattice_term_slope(k as f64) / 8.0;

    let mut hi = 1usize;
    while bound_at(hi) > tail_tolerance {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound_at(mid) > tail_tolerance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let terms = hi;

    let mut sum: CompensatedSum = (0..terms).map(|k| lattice_term(k as f64)).collect();
    sum.add(lattice_tail_integral(terms as f64));
    sum.add(0.5 * lattice_term(terms as f64));

    Ok(BCoefficient {
        value: prefactor * sum.value(),
        tail_bound: bound_at(terms),
        terms,
    })
}

pub fn compute_b_coefficient(tail_tolerance: f64) -> Result<f64> {
    Ok(b_coefficient(tail_tolerance)?.value)
}

pub fn log_sphere_a() -> f64 {
    0.25 * (std::f64::consts::E / 4.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    LogSphere,
    ThomsonSphere,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::LogSphere => "log-sphere",
            ModelFamily::ThomsonSphere => "thomson-sphere",
        })
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-sphere" => Ok(ModelFamily::LogSphere),
            "thomson-sphere" => Ok(ModelFamily::ThomsonSphere),
            other => Err(Error::InvalidPotential(format!(
                "unknown model `{other}`; valid values: log-sphere, thomson-sphere"
            ))),
        }
    }
}

impl ModelFamily {
    pub fn matches(&self, domain: &DomainSpec, potential: &PotentialSpec) -> bool {
        *domain == DomainSpec::Sphere2
            && match self {
                ModelFamily::LogSphere => *potential == PotentialSpec::LogCoulomb,
                ModelFamily::ThomsonSphere => potential.is_inverse_distance(),
            }
    }
}

/// Expansion coefficients; `a` and `b` are required, the rest default to 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub e: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticModel {
    pub family: ModelFamily,
    pub coefficients: Coefficients,
}

impl AsymptoticModel {
    /// Two-term logarithmic model; `c` and `d` unset.
    pub fn log_sphere() -> Self {
        Self {
            family: ModelFamily::LogSphere,
            coefficients: Coefficients {
                a: Some(log_sphere_a()),
                b: Some(-0.25),
                ..Coefficients::default()
            },
        }
    }

    /// Thomson model with computed `b`, `c = e = 0` and `d = 0`.
    pub fn thomson_sphere() -> Self {
        let b = compute_b_coefficient(DEFAULT_B_TOLERANCE).expect("default tolerance is in range");
        Self {
            family: ModelFamily::ThomsonSphere,
            coefficients: Coefficients {
                a: Some(0.5),
                b: Some(b),
                c: Some(0.0),
                d: Some(0.0),
                e: Some(0.0),
            },
        }
    }

    pub fn for_family(family: ModelFamily) -> Self {
        match family {
            ModelFamily::LogSphere => Self::log_sphere(),
            ModelFamily::ThomsonSphere => Self::thomson_sphere(),
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.coefficients.c = Some(c);
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.coefficients.d = Some(d);
        self
    }
}

/// Model estimate of `E_g(N)`.
pub fn model_energy(m: &AsymptoticModel, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            got: n,
        });
    }
    let k = &m.coefficients;
    let a = k.a.ok_or(Error::UnresolvedCoefficient("a"))?;
    let b = k.b.ok_or(Error::UnresolvedCoefficient("b"))?;
    let c = k.c.unwrap_or(0.0);
    let d = k.d.unwrap_or(0.0);
    let nf = n as f64;
    Ok(match m.family {
        ModelFamily::LogSphere => a * nf * nf + b * nf * nf.ln() + c * nf + d * nf.ln(),
        ModelFamily::ThomsonSphere => {
            let e = k.e.unwrap_or(0.0);
            let root = nf.sqrt();
            a * nf * nf + b * nf * root + c * nf + d * root + e
        }
    })
}

/// Model estimate of the pair-specific energy `E_g(N) / (N(N-1))`.
pub fn pair_specific_model(m: &AsymptoticModel, n: usize) -> Result<f64> {
    Ok(model_energy(m, n)? / pair_count(n))
}

/// `(N, eps^x(N) - model eps(N))` for every table row, in increasing N.
pub fn residuals(t: &EnergyTable, m: &AsymptoticModel) -> Result<Vec<(usize, f64)>> {
    let meta = t.metadata();
    if !m.family.matches(&meta.domain, &meta.potential) {
        return Err(Error::FamilyMismatch {
            model: m.family.to_string(),
            domain: meta.domain.to_string(),
            potential: meta.potential.to_string(),
        });
    }
    t.iter()
        .map(|(n, e)| Ok((n, e.energy / pair_count(n) - pair_specific_model(m, n)?)))
        .collect()
}
