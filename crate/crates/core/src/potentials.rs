//! Pair interactions, total configuration energy and its tangent gradient.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{tangent_project, Configuration, DomainSpec, Vec3};
use crate::sum::CompensatedSum;

/// Below this many points the pair loops run on the calling thread.
const PARALLEL_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `-ln r`, the two-dimensional Coulomb interaction.
    LogCoulomb,
    /// `-sign(s) r^s` for real `s < 2`, `s != 0`.
    Riesz(f64),
    /// `r^(2-D)`, the D-dimensional Coulomb interaction (`D >= 3`).
    CoulombDim(u32),
    /// `r^-12 - r^-6`, only on free 3-space.
    LennardJones,
}

/// Radial kernel with the Coulomb spelling folded into the Riesz one.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    Log,
    Power(f64),
    LennardJones,
}

impl PotentialSpec {
    pub fn riesz(s: f64) -> Result<Self> {
        let p = PotentialSpec::Riesz(s);
        p.validate()?;
        Ok(p)
    }

    pub fn coulomb_dim(d: u32) -> Result<Self> {
        let p = PotentialSpec::CoulombDim(d);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Riesz(s) if !s.is_finite() || s >= 2.0 => Err(Error::InvalidPotential(
                format!("Riesz exponent must satisfy s < 2, got {s}"),
            )),
            PotentialSpec::Riesz(0.0) => Err(Error::InvalidPotential(
                "Riesz exponent 0 is the logarithmic kernel; use `log`".into(),
            )),
            PotentialSpec::CoulombDim(d) if d < 3 => Err(Error::InvalidPotential(format!(
                "Coulomb dimension must be at least 3, got {d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Lennard-Jones clusters live in free space only.
    pub fn check_domain(&self, domain: &DomainSpec) -> Result<()> {
        self.validate()?;
        if matches!(self, PotentialSpec::LennardJones) && domain.is_compact() {
            return Err(Error::IncompatibleDomain {
                potential: self.to_string(),
                domain: domain.to_string(),
            });
        }
        Ok(())
    }

    /// Riesz exponent this kernel is equivalent to, if any.
    pub fn riesz_exponent(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Riesz(s) => Some(s),
            PotentialSpec::CoulombDim(d) => Some(2.0 - d as f64),
            _ => None,
        }
    }

    /// True for the three-dimensional Coulomb kernel `1/r` in either spelling.
    pub fn is_inverse_distance(&self) -> bool {
        self.riesz_exponent() == Some(-1.0)
    }

    fn kernel(&self) -> Kernel {
        match *self {
            PotentialSpec::LogCoulomb => Kernel::Log,
            PotentialSpec::LennardJones => Kernel::LennardJones,
            PotentialSpec::Riesz(_) | PotentialSpec::CoulombDim(_) => {
                Kernel::Power(self.riesz_exponent().expect("power kernel"))
            }
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::LogCoulomb => f.write_str("log"),
            PotentialSpec::Riesz(s) => write!(f, "riesz:{s}"),
            PotentialSpec::CoulombDim(d) => write!(f, "coulomb:{d}"),
            PotentialSpec::LennardJones => f.write_str("lj"),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// Accepts `log`, `riesz:<s>`, `coulomb:<D>` and `lj`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || {
            Error::InvalidPotential(format!(
                "unknown potential `{s}`; valid values: log, riesz:<s>, coulomb:<D>, lj"
            ))
        };
        match s {
            "log" => Ok(PotentialSpec::LogCoulomb),
            "lj" => Ok(PotentialSpec::LennardJones),
            _ => {
                let (kind, arg) = s.split_once(':').ok_or_else(unknown)?;
                match kind {
                    "riesz" => {
                        let e: f64 = arg.parse().map_err(|_| {
                            Error::InvalidPotential(format!("bad Riesz exponent `{arg}`"))
                        })?;
                        PotentialSpec::riesz(e)
                    }
                    "coulomb" => {
                        let d: u32 = arg.parse().map_err(|_| {
                            Error::InvalidPotential(format!("bad Coulomb dimension `{arg}`"))
                        })?;
                        PotentialSpec::coulomb_dim(d)
                    }
                    _ => Err(unknown()),
                }
            }
        }
    }
}

/// Interaction energy of one pair at distance `r >= 0`.
///
/// Coincident points give `+inf` for every repulsive kernel; the attractive
/// Riesz kernels with `0 < s < 2` extend continuously to 0.
pub fn pair_energy(pot: &PotentialSpec, r: f64) -> f64 {
    kernel_energy(pot.kernel(), r)
}

/// Radial derivative `dU/dr` at `r > 0`.
pub fn pair_energy_derivative(pot: &PotentialSpec, r: f64) -> f64 {
    kernel_derivative(pot.kernel(), r)
}

fn kernel_energy(k: Kernel, r: f64) -> f64 {
    if r == 0.0 {
        return match k {
            Kernel::Power(s) if s > 0.0 => 0.0,
            _ => f64::INFINITY,
        };
    }
    match k {
        Kernel::Log => -r.ln(),
        Kernel::Power(s) if s < 0.0 => r.powf(s),
        Kernel::Power(s) => -r.powf(s),
        Kernel::LennardJones => {
            let r6 = r.powi(-6);
            r6 * r6 - r6
        }
    }
}

fn kernel_derivative(k: Kernel, r: f64) -> f64 {
    match k {
        Kernel::Log => -1.0 / r,
        Kernel::Power(s) => -s.abs() * r.powf(s - 1.0),
        Kernel::LennardJones => {
            let r6 = r.powi(-6);
            (-12.0 * r6 * r6 + 6.0 * r6) / r
        }
    }
}

fn require_pairs(c: &Configuration, pot: &PotentialSpec) -> Result<()> {
    pot.check_domain(&c.domain())?;
    if c.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            got: c.len(),
        });
    }
    Ok(())
}

/// Sum of the pair energy over all unordered pairs, using chordal distances.
/// May be `+inf` when points coincide.
pub fn total_energy(c: &Configuration, pot: &PotentialSpec) -> Result<f64> {
    require_pairs(c, pot)?;
    Ok(embedded_energy(&c.embedded(), pot.kernel()))
}

fn embedded_energy(x: &[Vec3], k: Kernel) -> f64 {
    let row = |i: usize| -> f64 {
        let mut acc = CompensatedSum::new();
        for xj in &x[i + 1..] {
            acc.add(kernel_energy(k, (x[i] - xj).norm()));
        }
        acc.value()
    };
    // Rows are summed in index order either way, so the result does not
    // depend on how rayon splits the work.
    let rows: Vec<f64> = if x.len() >= PARALLEL_THRESHOLD {
        (0..x.len()).into_par_iter().map(row).collect()
    } else {
        (0..x.len()).map(row).collect()
    };
    rows.into_iter().collect::<CompensatedSum>().value()
}

/// Tangent gradient of the total energy at every point.
pub fn energy_gradient(c: &Configuration, pot: &PotentialSpec) -> Result<Vec<Vec3>> {
    require_pairs(c, pot)?;
    let x = c.embedded();
    let k = pot.kernel();
    let domain = c.domain();
    let row = |i: usize| -> Result<Vec3> {
        let mut g = Vec3::zeros();
        for (j, xj) in x.iter().enumerate() {
            if j == i {
                continue;
            }
            let diff = x[i] - xj;
            let r = diff.norm();
            if r == 0.0 {
                return Err(Error::CoincidentPoints(i.min(j), i.max(j)));
            }
            g += diff * (kernel_derivative(k, r) / r);
        }
        Ok(tangent_project(&c.points()[i], &g, &domain))
    };
    if x.len() >= PARALLEL_THRESHOLD {
        (0..x.len()).into_par_iter().map(row).collect()
    } else {
        (0..x.len()).map(row).collect()
    }
}

/// Largest per-point gradient norm.
pub fn max_norm(gradient: &[Vec3]) -> f64 {
    gradient.iter().map(|g| g.norm()).fold(0.0, f64::max)
}
