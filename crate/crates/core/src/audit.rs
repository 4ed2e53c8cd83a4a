//! Pair-specific monotonicity tests on tables of putative ground-state
//! energies.
//!
//! The true pair-specific ground-state energy `E_g(N) / (N(N-1))` never
//! decreases in N. So whenever a table has `eps(N+n) < eps(N)`, its entry at
//! N cannot be a ground-state energy, and the later entry rescaled by
//! `N(N-1) / ((N+n)(N+n-1))` is a strictly better upper bound for it.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::optimizer::{derive_seed, multistart, OptimizerSettings};
use crate::potentials::PotentialSpec;
use crate::table::EnergyTable;

/// Relative slack allowed in the per-step inequality
/// `E(N+1) >= (N+1)/(N-1) E(N)` when the energies are numerical estimates.
pub const PROOF_CHAIN_SLACK: f64 = 1e-7;

/// Largest N the brute-force check will attempt.
pub const PROP1_MAX_N: usize = 8;

/// Minimum restarts per point demanded by the brute-force check.
pub const PROP1_RESTARTS_PER_POINT: usize = 100;

/// Number of ordered pairs, `N(N-1)`, exact up to N ~ 9.4e7.
pub fn pair_count(n: usize) -> f64 {
    let n = n as u64;
    (n * (n - 1)) as f64
}

/// Energy per ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PairSpecificEnergy(f64);

impl PairSpecificEnergy {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PairSpecificEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn pair_specific(n: usize, energy: f64) -> Result<PairSpecificEnergy> {
    if n < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            got: n,
        });
    }
    Ok(PairSpecificEnergy(energy / pair_count(n)))
}

fn eps_unchecked(n: usize, energy: f64) -> f64 {
    energy / pair_count(n)
}

/// `N(N-1) * eps(M)`: the entry at M rescaled into an upper bound at N.
pub fn scaled_bound(n: usize, m: usize, energy_m: f64) -> f64 {
    pair_count(n) * eps_unchecked(m, energy_m)
}

/// How far below `eps(N)` a later value must fall to count as a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `tau = factor * max(1, |eps(N)|)`.
    Relative(f64),
    /// Fixed `tau`.
    Absolute(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Relative(1e-9)
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        let (Tolerance::Relative(v) | Tolerance::Absolute(v)) = *self;
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidTolerance(format!(
                "tolerance must be a finite non-negative number, got {v}"
            )))
        }
    }

    pub fn threshold(&self, eps_n: f64) -> f64 {
        match *self {
            Tolerance::Relative(f) => f * eps_n.abs().max(1.0),
            Tolerance::Absolute(t) => t,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Relative(v) => write!(f, "{v}*max(1,|eps(N)|)"),
            Tolerance::Absolute(v) => write!(f, "{v}"),
        }
    }
}

/// A failed order-`order` test at `n`: `eps(n + order) - eps(n) < -tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub n: usize,
    pub order: usize,
    pub delta_eps: f64,
}

impl Violation {
    pub fn comparison_n(&self) -> usize {
        self.n + self.order
    }

    /// The strict inequality the violation certifies.
    pub fn verdict(&self) -> String {
        format!("E^x({}) > E_g({})", self.n, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovedBound {
    pub bound: f64,
    pub witness_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Every violating `(N, n)` pair, sorted by `(N, n)`.
    pub violations: Vec<Violation>,
    pub improved_bounds: BTreeMap<usize, ImprovedBound>,
    pub tolerance: Tolerance,
    pub table_digest: String,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs every order-n test present in the table.
pub fn monotonicity_audit(t: &EnergyTable, tolerance: Tolerance) -> Result<AuditReport> {
    tolerance.validate()?;
    if t.is_empty() {
        return Err(Error::EmptyTable);
    }
    let rows: Vec<(usize, f64)> = t
        .iter()
        .map(|(n, e)| (n, eps_unchecked(n, e.energy)))
        .collect();

    let violations: Vec<Violation> = (0..rows.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (n, eps_n) = rows[i];
            let tau = tolerance.threshold(eps_n);
            rows[i + 1..].iter().filter_map(move |&(m, eps_m)| {
                let delta_eps = eps_m - eps_n;
                (delta_eps < -tau).then_some(Violation {
                    n,
                    order: m - n,
                    delta_eps,
                })
            })
        })
        .collect();

    let mut improved_bounds = BTreeMap::new();
    for v in &violations {
        if improved_bounds.contains_key(&v.n) {
            continue;
        }
        let bound = improved_upper_bound(t, v.n)?
            .expect("a violating entry always admits a lower rescaled bound");
        improved_bounds.insert(v.n, bound);
    }

    Ok(AuditReport {
        violations,
        improved_bounds,
        tolerance,
        table_digest: t.digest(),
    })
}

/// Best rescaled bound on `E_g(n)` from the later entries, reported only when
/// it is strictly below the table's own entry at `n`. Ties go to the smallest
/// order.
pub fn improved_upper_bound(t: &EnergyTable, n: usize) -> Result<Option<ImprovedBound>> {
    let own = t.energy(n).ok_or(Error::MissingEntry(n))?;
    let mut best: Option<ImprovedBound> = None;
    for (m, entry) in t.iter().filter(|(m, _)| *m > n) {
        let bound = scaled_bound(n, m, entry.energy);
        if best.is_none_or(|b| bound < b.bound) {
            best = Some(ImprovedBound {
                bound,
                witness_order: m - n,
            });
        }
    }
    Ok(best.filter(|b| b.bound < own))
}

/// One N of the brute-force check.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Row {
    pub n: usize,
    pub energy: f64,
    pub eps: f64,
    pub converged: bool,
}

/// Comparison of consecutive rows N and N+1.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Step {
    pub n: usize,
    /// `eps(N+1) > eps(N)`.
    pub eps_increasing: bool,
    /// `(N+1)/(N-1) * E(N)`.
    pub required_min: f64,
    /// `E(N+1) >= required_min` up to [`PROOF_CHAIN_SLACK`].
    pub chain_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    pub rows: Vec<Prop1Row>,
    pub steps: Vec<Prop1Step>,
}

impl Prop1Report {
    pub fn eps_monotone(&self) -> bool {
        self.steps.iter().all(|s| s.eps_increasing)
    }

    pub fn proof_chain_holds(&self) -> bool {
        self.steps.iter().all(|s| s.chain_holds)
    }

    pub fn passed(&self) -> bool {
        self.eps_monotone() && self.proof_chain_holds()
    }
}

/// Estimates `E_g(N)` for `N = 2..=n_max` by heavy multistart search and
/// checks both the monotonicity of `eps` and the sharper inequality
/// `E(N+1) >= (N+1)/(N-1) E(N)` at each step.
pub fn brute_force_prop1_check(
    domain: DomainSpec,
    pot: PotentialSpec,
    n_max: usize,
    budget: &OptimizerSettings,
) -> Result<Prop1Report> {
    if !(2..=PROP1_MAX_N).contains(&n_max) {
        return Err(Error::NMaxOutOfRange(n_max));
    }
    let required = PROP1_RESTARTS_PER_POINT * n_max;
    if budget.restarts < required {
        return Err(Error::BudgetTooSmall {
            restarts: budget.restarts,
            required,
        });
    }
    pot.check_domain(&domain)?;

    let rows = (2..=n_max)
        .map(|n| {
            let settings = OptimizerSettings {
                seed: derive_seed(budget.seed, n as u64),
                ..budget.clone()
            };
            let best = multistart(domain, pot, n, &settings)?;
            Ok(Prop1Row {
                n,
                energy: best.energy,
                eps: eps_unchecked(n, best.energy),
                converged: best.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let steps = rows
        .windows(2)
        .map(|w| {
            let (cur, next) = (&w[0], &w[1]);
            let factor = (cur.n + 1) as f64 / (cur.n - 1) as f64;
            let required_min = factor * cur.energy;
            let slack = PROOF_CHAIN_SLACK * required_min.abs().max(f64::MIN_POSITIVE);
            Prop1Step {
                n: cur.n,
                eps_increasing: next.eps > cur.eps,
                required_min,
                chain_holds: next.energy >= required_min - slack,
            }
        })
        .collect();

    Ok(Prop1Report { rows, steps })
}
