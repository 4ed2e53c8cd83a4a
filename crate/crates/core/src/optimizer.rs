//! Multistart Riemannian gradient descent for candidate ground states.

use std::fmt::Write as _;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    random_configuration, retract, Configuration, DomainSpec, Vec3, TORUS_MAX_STEP,
};
use crate::potentials::{energy_gradient, max_norm, total_energy, PotentialSpec};
use crate::table::{EnergyTable, TableMetadata};

/// Consecutive step halvings after which a line search gives up.
const MAX_HALVINGS: usize = 60;

/// Step growth after an accepted iteration.
const STEP_GROWTH: f64 = 1.2;

/// Restarts whose energies differ by less than this are considered tied.
const TIE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub restarts: usize,
    /// Iteration cap per local search; `None` means `50 * N`.
    pub max_iterations: Option<usize>,
    /// Convergence when every point's tangent gradient is shorter than this.
    pub gradient_tolerance: f64,
    /// First step length multiplier; `None` means `0.1 / N`.
    pub initial_step: Option<f64>,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iterations: None,
            gradient_tolerance: 1e-10,
            initial_step: None,
            seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSettings(msg));
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return bad(format!(
                "gradient tolerance must be positive, got {}",
                self.gradient_tolerance
            ));
        }
        if let Some(step) = self.initial_step {
            if !(step.is_finite() && step > 0.0) {
                return bad(format!("initial step must be positive, got {step}"));
            }
        }
        if self.max_iterations == Some(0) {
            return bad("max iterations must be at least 1".into());
        }
        Ok(())
    }

    pub fn max_iterations_for(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(50 * n)
    }

    pub fn initial_step_for(&self, n: usize) -> f64 {
        self.initial_step.unwrap_or(0.1 / n as f64)
    }

    /// Short content hash identifying these settings in table labels.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        let _ = write!(
            text,
            "restarts={};max_iterations={:?};gradient_tolerance={};initial_step={:?};seed={}",
            self.restarts,
            self.max_iterations,
            self.gradient_tolerance,
            self.initial_step,
            self.seed
        );
        hex::encode(&Sha256::digest(text.as_bytes())[..6])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub configuration: Configuration,
    pub energy: f64,
    /// Largest per-point tangent gradient norm at `configuration`.
    pub gradient_norm: f64,
    pub converged: bool,
    pub restart_index: usize,
    pub iterations: usize,
}

/// SplitMix64 finalizer over `seed` and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Projected gradient descent from `c0` with backtracking.
pub fn local_minimize(
    c0: &Configuration,
    pot: &PotentialSpec,
    s: &OptimizerSettings,
) -> Result<RunResult> {
    local_minimize_observed(c0, pot, s, |_| {})
}

/// Like [`local_minimize`], calling `observe` with the starting energy and
/// then with every accepted energy.
pub fn local_minimize_observed<F>(
    c0: &Configuration,
    pot: &PotentialSpec,
    s: &OptimizerSettings,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(f64),
{
    s.validate()?;
    let n = c0.len();
    let domain = c0.domain();
    // rejects coincident starts and incompatible potentials
    let mut gradient = energy_gradient(c0, pot)?;
    let mut energy = total_energy(c0, pot)?;
    let mut gnorm = max_norm(&gradient);
    let mut current = c0.clone();
    let mut step = s.initial_step_for(n);
    let max_iterations = s.max_iterations_for(n);
    let mut iterations = 0;
    observe(energy);

    while iterations < max_iterations && gnorm >= s.gradient_tolerance {
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Some(trial) = trial_point(&current, &gradient, step, &domain) {
                let trial_energy = total_energy(&trial, pot)?;
                if trial_energy <= energy {
                    if let Ok(trial_gradient) = energy_gradient(&trial, pot) {
                        let trial_gnorm = max_norm(&trial_gradient);
                        // Strict decrease is the rule; once energy differences
                        // drop below rounding, an energy-neutral step that
                        // shrinks the gradient is also taken.
                        if trial_energy < energy || trial_gnorm < gnorm {
                            accepted = Some((trial, trial_energy, trial_gradient, trial_gnorm));
                            break;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        let Some((next, next_energy, next_gradient, next_gnorm)) = accepted else {
            break;
        };
        current = next;
        energy = next_energy;
        gradient = next_gradient;
        gnorm = next_gnorm;
        step *= STEP_GROWTH;
        iterations += 1;
        observe(energy);
    }

    Ok(RunResult {
        configuration: current,
        energy,
        gradient_norm: gnorm,
        converged: gnorm < s.gradient_tolerance,
        restart_index: 0,
        iterations,
    })
}

/// Moves every point by `-step * gradient` and retracts. `None` when a torus
/// step exceeds the retraction's range.
fn trial_point(
    c: &Configuration,
    gradient: &[Vec3],
    step: f64,
    domain: &DomainSpec,
) -> Option<Configuration> {
    let mut points = Vec::with_capacity(c.len());
    for (p, g) in c.points().iter().zip(gradient) {
        let delta = g * -step;
        if matches!(domain, DomainSpec::Torus2 { .. }) && delta.norm() >= TORUS_MAX_STEP {
            return None;
        }
        points.push(retract(p, &delta, domain).ok()?);
    }
    Configuration::new(*domain, points).ok()
}

/// Best of `s.restarts` local searches from random starts. Restart `r` draws
/// its start from `derive_seed(s.seed, r)`, so the outcome does not depend on
/// scheduling.
pub fn multistart(
    d: DomainSpec,
    pot: PotentialSpec,
    n: usize,
    s: &OptimizerSettings,
) -> Result<RunResult> {
    s.validate()?;
    pot.check_domain(&d)?;
    if n < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            got: n,
        });
    }
    let runs: Vec<Result<RunResult>> = (0..s.restarts)
        .into_par_iter()
        .map(|r| {
            let start = random_configuration(d, n, derive_seed(s.seed, r as u64))?;
            let mut run = local_minimize(&start, &pot, s)?;
            run.restart_index = r;
            Ok(run)
        })
        .collect();

    let mut best: Option<RunResult> = None;
    for run in runs {
        let run = run?;
        match &best {
            Some(b) if run.energy >= b.energy - TIE_TOLERANCE => {}
            _ => best = Some(run),
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Rounds to 15 significant digits so table files stay short.
fn round_to_table_precision(e: f64) -> f64 {
    format!("{e:.14e}").parse().expect("formatted float parses")
}

/// One multistart result per N.
pub fn build_table(
    d: DomainSpec,
    pot: PotentialSpec,
    sizes: &[usize],
    s: &OptimizerSettings,
) -> Result<EnergyTable> {
    s.validate()?;
    let metadata = TableMetadata::new(d, pot, "groundstate multistart")?;
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::TooFewPoints {
            required: 2,
            got: n,
        });
    }
    let results = sizes
        .par_iter()
        .map(|&n| {
            let settings = OptimizerSettings {
                seed: derive_seed(s.seed, n as u64),
                ..s.clone()
            };
            multistart(d, pot, n, &settings).map(|r| (n, r))
        })
        .collect::<Result<Vec<_>>>()?;

    let label = format!(
        "multistart restarts={} seed={} settings={}",
        s.restarts,
        s.seed,
        s.digest()
    );
    let mut table = EnergyTable::new(metadata);
    for (n, run) in results {
        table.insert(n, round_to_table_precision(run.energy), label.clone())?;
    }
    Ok(table)
}
