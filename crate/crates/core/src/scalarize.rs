//! Scalarization functions, weight samplers and scalarized selection.
//!
//! A scalarization `s(λ, y)` folds a `k`-objective vector into one number.
//! All three families here are monotone in `y`, so their maximizers over a
//! finite set are Pareto-optimal:
//!
//! - linear: `λᵀy`
//! - Chebyshev: `minᵢ λᵢ yᵢ`
//! - hypervolume: `(minᵢ yᵢ / λᵢ)^k`, or the plain `minᵢ yᵢ / λᵢ` form used
//!   by the experiments ([`HvExponent::Altered`]).

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pareto::ObjectiveSet;

/// Strictly positive, finite weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("weight vector must have k >= 1".into()));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(Self(values))
    }

    /// `direction / ‖direction‖₂`; every entry must be positive.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self::new(direction.iter().map(|v| v / norm).collect())
    }

    /// The weights `(b, a)` for `(a, b)`; only meaningful for `k = 2`.
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarizerFamily {
    Linear,
    Chebyshev,
    Hypervolume,
}

/// Exponent convention of the hypervolume scalarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HvExponent {
    /// `(minᵢ yᵢ/λᵢ)^k`, the form whose expectation gives the hypervolume.
    PowK,
    /// `minᵢ yᵢ/λᵢ`; a monotone transform of `PowK` with the same argmax.
    #[default]
    Altered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarizerSpec {
    pub family: ScalarizerFamily,
    /// Only read when `family` is [`ScalarizerFamily::Hypervolume`].
    pub hv_exponent: HvExponent,
}

impl ScalarizerSpec {
    pub const LINEAR: Self = Self {
        family: ScalarizerFamily::Linear,
        hv_exponent: HvExponent::Altered,
    };
    pub const CHEBYSHEV: Self = Self {
        family: ScalarizerFamily::Chebyshev,
        hv_exponent: HvExponent::Altered,
    };
    pub const HYPERVOLUME: Self = Self {
        family: ScalarizerFamily::Hypervolume,
        hv_exponent: HvExponent::Altered,
    };
    pub const HYPERVOLUME_POWK: Self = Self {
        family: ScalarizerFamily::Hypervolume,
        hv_exponent: HvExponent::PowK,
    };

    pub fn new(family: ScalarizerFamily, hv_exponent: HvExponent) -> Self {
        Self {
            family,
            hv_exponent,
        }
    }

    fn requires_positive_input(&self) -> bool {
        self.family == ScalarizerFamily::Hypervolume && self.hv_exponent == HvExponent::PowK
    }

    /// `s(λ, y)` with dimension and weight checks.
    pub fn evaluate(&self, weights: &WeightVector, y: &[f64]) -> Result<f64> {
        check_dims(weights, y)?;
        Ok(self.value_shifted(weights, y, None))
    }

    /// `s(λ, y − shift)` without validation; callers check dimensions.
    pub(crate) fn value_shifted(&self, weights: &[f64], y: &[f64], shift: Option<&[f64]>) -> f64 {
        let at = |i: usize| match shift {
            Some(z) => y[i] - z[i],
            None => y[i],
        };
        let k = y.len();
        match self.family {
            ScalarizerFamily::Linear => (0..k).map(|i| weights[i] * at(i)).sum(),
            ScalarizerFamily::Chebyshev => (0..k)
                .map(|i| weights[i] * at(i))
                .fold(f64::INFINITY, f64::min),
            ScalarizerFamily::Hypervolume => {
                let m = (0..k).map(|i| at(i) / weights[i]).fold(f64::INFINITY, f64::min);
                match self.hv_exponent {
                    HvExponent::Altered => m,
                    HvExponent::PowK => signed_pow(m, k),
                }
            }
        }
    }
}

/// `sign(m)·|m|^k`, order-preserving for every `k`.
fn signed_pow(m: f64, k: usize) -> f64 {
    let p = m.abs().powi(k as i32);
    if m < 0.0 {
        -p
    } else {
        p
    }
}

impl fmt::Display for ScalarizerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Chebyshev => "chebyshev",
            Self::Hypervolume => "hypervolume",
        })
    }
}

impl FromStr for ScalarizerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Self::Linear),
            "chebyshev" | "cheby" => Ok(Self::Chebyshev),
            "hypervolume" | "hv" => Ok(Self::Hypervolume),
            other => Err(Error::InvalidParameter(format!(
                "unknown scalarizer '{other}' (expected linear, chebyshev or hypervolume)"
            ))),
        }
    }
}

impl fmt::Display for HvExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PowK => "pow-k",
            Self::Altered => "altered",
        })
    }
}

impl FromStr for HvExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pow-k" | "powk" => Ok(Self::PowK),
            "altered" => Ok(Self::Altered),
            other => Err(Error::InvalidParameter(format!(
                "unknown hypervolume exponent '{other}' (expected pow-k or altered)"
            ))),
        }
    }
}

fn check_dims(weights: &[f64], y: &[f64]) -> Result<()> {
    if weights.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// `λᵀy`.
pub fn linear(weights: &WeightVector, y: &[f64]) -> Result<f64> {
    ScalarizerSpec::LINEAR.evaluate(weights, y)
}

/// `minᵢ λᵢ yᵢ`.
pub fn chebyshev(weights: &WeightVector, y: &[f64]) -> Result<f64> {
    ScalarizerSpec::CHEBYSHEV.evaluate(weights, y)
}

/// `(minᵢ yᵢ/λᵢ)^k` with sign preserved, or `minᵢ yᵢ/λᵢ` for
/// [`HvExponent::Altered`].
pub fn hypervolume(weights: &WeightVector, y: &[f64], exponent: HvExponent) -> Result<f64> {
    ScalarizerSpec::new(ScalarizerFamily::Hypervolume, exponent).evaluate(weights, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    /// `|N(0, I)|` normalized to the unit sphere.
    UniformSpherePositive,
    /// `Uniform[low, high]^k` normalized to unit L1 norm.
    BoxedLinear,
    /// Componentwise inverse of a boxed-linear draw, renormalized in L1.
    BoxedChebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSampler {
    kind: SamplerKind,
    box_low: f64,
    box_high: f64,
}

impl WeightSampler {
    pub const DEFAULT_BOX: (f64, f64) = (1.0, 3.0);

    pub fn new(kind: SamplerKind, box_low: f64, box_high: f64) -> Result<Self> {
        if !(box_low > 0.0 && box_high > box_low && box_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight box must satisfy 0 < low < high, got [{box_low}, {box_high}]"
            )));
        }
        Ok(Self {
            kind,
            box_low,
            box_high,
        })
    }

    pub fn with_default_box(kind: SamplerKind) -> Self {
        let (low, high) = Self::DEFAULT_BOX;
        Self {
            kind,
            box_low: low,
            box_high: high,
        }
    }

    pub fn uniform() -> Self {
        Self::with_default_box(SamplerKind::UniformSpherePositive)
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.box_low, self.box_high)
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> WeightVector {
        assert!(k >= 1, "weight dimension must be >= 1");
        let values = match self.kind {
            SamplerKind::UniformSpherePositive => sample_positive_sphere(k, rng),
            SamplerKind::BoxedLinear => self.sample_box(k, rng),
            SamplerKind::BoxedChebyshev => {
                let inv: Vec<f64> = self.sample_box(k, rng).iter().map(|v| 1.0 / v).collect();
                l1_normalized(inv)
            }
        };
        WeightVector(values)
    }

    fn sample_box<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<f64> {
        let raw = (0..k)
            .map(|_| rng.random_range(self.box_low..=self.box_high))
            .collect();
        l1_normalized(raw)
    }
}

fn l1_normalized(v: Vec<f64>) -> Vec<f64> {
    let norm: f64 = v.iter().sum();
    v.into_iter().map(|x| x / norm).collect()
}

/// Uniform draw from the open positive orthant of the unit sphere.
pub fn sample_positive_sphere<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..k)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        // A zero coordinate has probability zero but would break positivity.
        if raw.iter().all(|&v| v > 0.0) {
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            return raw.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Index of the point maximizing `s(λ, y − shift)`, lowest index on ties.
///
/// The `PowK` hypervolume scalarization requires every shifted coordinate to
/// be strictly positive; a violation reports the first offending point.
pub fn argmax_scalarized(
    set: &ObjectiveSet,
    spec: &ScalarizerSpec,
    weights: &WeightVector,
    shift: &[f64],
) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    check_dims(weights, shift)?;
    check_dims(weights, set.point(0))?;
    if spec.requires_positive_input() {
        for (index, y) in set.iter().enumerate() {
            if let Some(coordinate) = (0..y.len()).find(|&i| y[i] - shift[i] <= 0.0) {
                return Err(Error::NonPositiveShift {
                    index,
                    coordinate,
                    value: y[coordinate] - shift[coordinate],
                });
            }
        }
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, y) in set.iter().enumerate() {
        let v = spec.value_shifted(weights, y, Some(shift));
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    Ok(best)
}

/// Sampling domain for [`empirical_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzDomain {
    /// `(B_l, B_u)` bounds on objective coordinates for the hypervolume
    /// family. Linear and Chebyshev use `‖y‖∞ ≤ 1` and `‖λ‖₂ ≤ 1`.
    pub bounds: (f64, f64),
    /// Norm used for the `y`-argument difference quotients.
    pub p_norm: f64,
}

impl Default for LipschitzDomain {
    fn default() -> Self {
        Self {
            bounds: (1.0, 2.0),
            p_norm: 2.0,
        }
    }
}

/// Lipschitz constants in the objective argument (`y`, in the configured
/// p-norm) and the weight argument (`λ`, Euclidean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzPair {
    pub y: f64,
    pub lambda: f64,
}

/// Largest observed difference quotients over random pairs in the domain.
///
/// Half the pairs are independent draws; the other half are local
/// perturbations with a log-uniform step, which probe the gradient norm.
pub fn empirical_lipschitz<R: Rng + ?Sized>(
    spec: &ScalarizerSpec,
    k: usize,
    domain: LipschitzDomain,
    trials: usize,
    rng: &mut R,
) -> LipschitzPair {
    let hv = spec.family == ScalarizerFamily::Hypervolume;
    let (lo, hi) = if hv { domain.bounds } else { (-1.0, 1.0) };
    let sample_y = |rng: &mut R| -> Vec<f64> { (0..k).map(|_| rng.random_range(lo..=hi)).collect() };
    let sample_weight = |rng: &mut R| -> Vec<f64> {
        let dir = sample_positive_sphere(k, rng);
        if hv {
            dir
        } else {
            let r: f64 = rng.random_range(0.0..1.0);
            dir.into_iter().map(|v| v * r.max(1e-3)).collect()
        }
    };
    let step = |rng: &mut R| -> f64 { 10f64.powf(rng.random_range(-5.0..0.0)) };

    let mut best = LipschitzPair { y: 0.0, lambda: 0.0 };
    for trial in 0..trials {
        let local = trial % 2 == 1;

        let weights = sample_weight(rng);
        let y1 = sample_y(rng);
        let y2 = if local {
            let h = step(rng);
            y1.iter()
                .map(|v| (v + h * rng.random_range(-1.0..1.0)).clamp(lo, hi))
                .collect()
        } else {
            sample_y(rng)
        };
        let dy = p_norm_distance(&y1, &y2, domain.p_norm);
        if dy > 0.0 {
            let ds = (spec.value_shifted(&weights, &y1, None)
                - spec.value_shifted(&weights, &y2, None))
            .abs();
            best.y = best.y.max(ds / dy);
        }

        let y = sample_y(rng);
        let w1 = sample_weight(rng);
        let w2 = if local {
            let h = step(rng);
            let moved: Vec<f64> = w1
                .iter()
                .map(|v| (v + h * rng.random_range(-1.0..1.0)).max(1e-9))
                .collect();
            if hv {
                let norm = moved.iter().map(|v| v * v).sum::<f64>().sqrt();
                moved.into_iter().map(|v| v / norm).collect()
            } else {
                let norm = moved.iter().map(|v| v * v).sum::<f64>().sqrt();
                moved.into_iter().map(|v| v / norm.max(1.0)).collect()
            }
        } else {
            sample_weight(rng)
        };
        let dw = p_norm_distance(&w1, &w2, 2.0);
        if dw > 0.0 {
            let ds = (spec.value_shifted(&w1, &y, None) - spec.value_shifted(&w2, &y, None)).abs();
            best.lambda = best.lambda.max(ds / dw);
        }
    }
    best
}

fn p_norm_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Closed-form Lipschitz bounds on the domains sampled by
/// [`empirical_lipschitz`].
///
/// Linear: `L_p ≤ max(1, k^(1/2 − 1/p))`, `L_λ ≤ √k`. Chebyshev: both ≤ 1.
///
/// Hypervolume with exponent `e` (`k` or 1): the gradient has a single
/// non-zero coordinate, of size `e·m^e/(λ_{i*}·y_{i*})` in `y` and
/// `e·m^e/λ_{i*}` in `λ`, where `m = minᵢ yᵢ/λᵢ ≤ B_u/maxᵢ λᵢ` and
/// `1/λ_{i*} ≤ m/B_l`. On the sphere `maxᵢ λᵢ ≥ 1/√k`; along a chord between
/// two positive unit vectors the norm stays ≥ 1/√2, so `maxᵢ λᵢ ≥ 1/√(2k)`.
/// Hence `L_p ≤ e·(B_u√k)^e/B_l` and `L_λ ≤ e·(B_u√(2k))^(e+1)/B_l`.
pub fn lipschitz_bounds(spec: &ScalarizerSpec, k: usize, domain: LipschitzDomain) -> LipschitzPair {
    let kf = k as f64;
    match spec.family {
        ScalarizerFamily::Linear => LipschitzPair {
            y: 1f64.max(kf.powf(0.5 - 1.0 / domain.p_norm)),
            lambda: kf.sqrt(),
        },
        ScalarizerFamily::Chebyshev => LipschitzPair { y: 1.0, lambda: 1.0 },
        ScalarizerFamily::Hypervolume => {
            let (b_lo, b_hi) = domain.bounds;
            let e = match spec.hv_exponent {
                HvExponent::PowK => kf,
                HvExponent::Altered => 1.0,
            };
            let m_sphere = b_hi * kf.sqrt();
            let m_chord = b_hi * (2.0 * kf).sqrt();
            LipschitzPair {
                y: e * m_sphere.powf(e) / b_lo,
                lambda: e * m_chord.powf(e + 1.0) / b_lo,
            }
        }
    }
}
