//! Synthetic known-frontier experiments.
//!
//! The objective set is a grid over `[0, 1]²` lifted to three objectives
//! `(x, y, g1(x)·g2(y))` with decreasing `g`, so the full frontier and its
//! hypervolume are known exactly. Each trial draws a weight vector, picks
//! the scalarized maximizer over the whole grid, and records how much
//! hypervolume is still missing.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hypervolume::{CumulativeHypervolume, HvMode};
use crate::pareto::{ObjectiveSet, ReferencePoint};
use crate::scalarize::{argmax_scalarized, ScalarizerSpec, WeightSampler};

pub const DEFAULT_GRID_N: usize = 30;
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// One-dimensional decreasing profile on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// `exp(−x)`
    NegExp,
    /// `3 − exp(x)`
    ThreeMinusExp,
    /// `cos(πx) + 1`
    CosPlusOne,
}

impl Profile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::NegExp => (-x).exp(),
            Self::ThreeMinusExp => 3.0 - x.exp(),
            Self::CosPlusOne => (std::f64::consts::PI * x).cos() + 1.0,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NegExp => "neg-exp",
            Self::ThreeMinusExp => "three-minus-exp",
            Self::CosPlusOne => "cos-plus-one",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neg-exp" => Ok(Self::NegExp),
            "three-minus-exp" => Ok(Self::ThreeMinusExp),
            "cos-plus-one" => Ok(Self::CosPlusOne),
            other => Err(Error::InvalidParameter(format!(
                "unknown frontier profile '{other}' \
                 (expected neg-exp, three-minus-exp or cos-plus-one)"
            ))),
        }
    }
}

/// Height of the third objective over the `(x, y)` grid.
#[derive(Clone)]
pub enum Surface {
    Product(Profile, Profile),
    /// Arbitrary `h(x, y)`; must be finite on `[0, 1]²`.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Product(a, b) => write!(f, "Product({a}, {b})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Surface {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Product(g1, g2) => g1.eval(x) * g2.eval(y),
            Self::Custom(h) => h(x, y),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrontierSpec {
    pub surface: Surface,
    pub grid_n: usize,
    pub epsilon: f64,
}

impl FrontierSpec {
    pub fn product(g1: Profile, g2: Profile) -> Self {
        Self {
            surface: Surface::Product(g1, g2),
            grid_n: DEFAULT_GRID_N,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid_n must be >= 2, got {}",
                self.grid_n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// The reference point `−ε·1`.
    pub fn reference(&self) -> ReferencePoint {
        ReferencePoint::uniform(3, -self.epsilon).expect("validated epsilon")
    }
}

/// All `grid_n²` points `(x, y, h(x, y))`, `x` major, endpoints included.
pub fn build_frontier(spec: &FrontierSpec) -> Result<ObjectiveSet> {
    spec.validate()?;
    let n = spec.grid_n;
    let step = 1.0 / (n - 1) as f64;
    let coords: Vec<f64> = (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 * step }).collect();
    let mut set = ObjectiveSet::empty(3)?;
    for &x in &coords {
        for &y in &coords {
            set.push(&[x, y, spec.surface.eval(x, y)])?;
        }
    }
    Ok(set)
}

/// Hypervolume-regret values per trial for one method and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub method: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// Everything a single white-box run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteboxRun {
    /// Grid indices selected at each trial, repeats allowed.
    pub selected: Vec<usize>,
    pub hypervolume: Vec<f64>,
    pub regret: Vec<f64>,
    pub total_hypervolume: f64,
}

impl WhiteboxRun {
    pub fn regret_curve(&self, method: impl Into<String>, seed: u64) -> RegretCurve {
        RegretCurve {
            method: method.into(),
            seed,
            values: self.regret.clone(),
        }
    }
}

/// Runs `trials` scalarized selections over the full grid.
///
/// The argmax runs over every grid point, not a precomputed frontier.
/// Regret is `HV(grid) − HV(selected so far)` at reference `−ε·1`, clamped
/// at zero against rounding.
pub fn run_whitebox<R: Rng + ?Sized>(
    spec: &FrontierSpec,
    scalarizer: &ScalarizerSpec,
    sampler: &WeightSampler,
    trials: usize,
    mode: HvMode,
    rng: &mut R,
) -> Result<WhiteboxRun> {
    run_whitebox_observed(spec, scalarizer, sampler, trials, mode, rng, |_| {})
}

/// [`run_whitebox`] calling `observe(t)` once trial `t` is recorded.
pub fn run_whitebox_observed<R, F>(
    spec: &FrontierSpec,
    scalarizer: &ScalarizerSpec,
    sampler: &WeightSampler,
    trials: usize,
    mode: HvMode,
    rng: &mut R,
    mut observe: F,
) -> Result<WhiteboxRun>
where
    R: Rng + ?Sized,
    F: FnMut(usize),
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let points = build_frontier(spec)?;
    let z = spec.reference();
    let mut tracker = CumulativeHypervolume::new(mode, &z, rng)?;
    let total = tracker.evaluate(&points)?;

    let mut selected = Vec::with_capacity(trials);
    let mut hypervolume = Vec::with_capacity(trials);
    let mut regret = Vec::with_capacity(trials);
    for t in 0..trials {
        let weights = sampler.sample(points.dim(), rng);
        let index = argmax_scalarized(&points, scalarizer, &weights, &z)?;
        let hv = tracker.push(points.point(index))?;
        selected.push(index);
        hypervolume.push(hv);
        regret.push((total - hv).max(0.0));
        observe(t);
    }
    Ok(WhiteboxRun {
        selected,
        hypervolume,
        regret,
        total_hypervolume: total,
    })
}
