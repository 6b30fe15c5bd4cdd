//! Dominated hypervolume: exact computation, the random-scalarization
//! Monte-Carlo estimator, and cumulative curves over insertion order.
//!
//! Points are clipped at the reference point: a point with any coordinate
//! at or below `zᵢ` spans a degenerate box and contributes no volume.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pareto::{dominates_unchecked, nondominated_unique, weakly_dominates, ObjectiveSet};
use crate::scalarize::sample_positive_sphere;

/// Default number of weight vectors for Monte-Carlo estimates.
pub const DEFAULT_NUM_WEIGHTS: usize = 10_000;

/// `c_k = π^(k/2) / (2^k Γ(k/2 + 1))`, the volume of the unit `k`-ball
/// divided by `2^k`.
pub fn c_k(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("c_k needs k >= 1".into()));
    }
    // Γ(k/2 + 1) by the recurrence Γ(x + 1) = xΓ(x) from Γ(1) or Γ(1/2).
    let (mut gamma, mut x) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while x <= target + 1e-9 {
        gamma *= x;
        x += 1.0;
    }
    let k = k as i32;
    Ok(std::f64::consts::PI.powf(f64::from(k) / 2.0) / (2f64.powi(k) * gamma))
}

/// Monte-Carlo hypervolume estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvEstimate {
    pub value: f64,
    pub std_error: f64,
    pub num_weights: usize,
}

/// How hypervolume curves are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvMode {
    Exact,
    MonteCarlo { num_weights: usize },
}

fn check_reference(set: &ObjectiveSet, z: &[f64]) -> Result<()> {
    if set.dim() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: z.len(),
        });
    }
    Ok(())
}

/// `y − z` if every coordinate is strictly positive.
fn shifted(y: &[f64], z: &[f64]) -> Option<Vec<f64>> {
    let s: Vec<f64> = y.iter().zip(z).map(|(a, b)| a - b).collect();
    s.iter().all(|&v| v > 0.0).then_some(s)
}

/// Exact volume of the union of boxes `[z, max(y, z)]` over `y ∈ set`.
///
/// Dimension sweep: points are sorted by the last objective and processed
/// in ascending order. Intersecting a point's box with the boxes of all
/// later points pins their last coordinate to the point's own, so the
/// point's exclusive slab is its height times a `(k−1)`-dimensional
/// exclusive volume, computed recursively. Two dimensions use a direct
/// sweep.
pub fn hv_exact(set: &ObjectiveSet, z: &[f64]) -> Result<f64> {
    check_reference(set, z)?;
    let points: Vec<Vec<f64>> = set.iter().filter_map(|y| shifted(y, z)).collect();
    Ok(union_volume(points))
}

/// Volume dominated by positive points with respect to the origin.
fn union_volume(points: Vec<Vec<f64>>) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let k = points[0].len();
    let data: Vec<f64> = points.into_iter().flatten().collect();
    flat_union_volume(k, data)
}

/// Same as [`union_volume`] on row-major points of dimension `k`.
fn flat_union_volume(k: usize, data: Vec<f64>) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    match k {
        1 => data.iter().copied().fold(0.0, f64::max),
        2 => sweep_2d(data),
        _ => sweep_slices(k, nondominated_unique(k, data)),
    }
}

fn sweep_2d(data: Vec<f64>) -> f64 {
    let mut points: Vec<[f64; 2]> = data.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    points.sort_by(|a, b| b[0].total_cmp(&a[0]));
    let mut area = 0.0;
    let mut top = 0.0;
    for p in &points {
        if p[1] > top {
            area += p[0] * (p[1] - top);
            top = p[1];
        }
    }
    area
}

fn sweep_slices(k: usize, data: Vec<f64>) -> f64 {
    let last = k - 1;
    let mut rows: Vec<&[f64]> = data.chunks_exact(k).collect();
    rows.sort_by(|a, b| a[last].total_cmp(&b[last]));
    let mut total = 0.0;
    let mut limited = Vec::new();
    for (i, p) in rows.iter().enumerate() {
        let base = &p[..last];
        let later = &rows[i + 1..];
        // A later point covering the whole base leaves no exclusive slab.
        if later.iter().any(|q| weakly_dominates(&q[..last], base)) {
            continue;
        }
        limited.clear();
        for q in later {
            limited.extend(base.iter().zip(q.iter()).map(|(a, b)| a.min(*b)));
        }
        let exclusive = box_volume(base) - flat_union_volume(last, std::mem::take(&mut limited));
        total += p[last] * exclusive.max(0.0);
    }
    total
}

fn box_volume(p: &[f64]) -> f64 {
    p.iter().product()
}

/// Volume that `point` adds to a mutually non-dominated `front` (both
/// shifted to the origin).
fn exclusive_volume(point: &[f64], front: &[Vec<f64>]) -> f64 {
    let mut limited = Vec::with_capacity(front.len() * point.len());
    for q in front {
        limited.extend(point.iter().zip(q).map(|(a, b)| a.min(*b)));
    }
    (box_volume(point) - flat_union_volume(point.len(), limited)).max(0.0)
}

/// Monte-Carlo estimate `c_k · mean_λ max_y s^HV_λ(y − z)` with `λ`
/// uniform on the positive unit sphere and the `k`-th power form.
pub fn hv_mc<R: Rng + ?Sized>(
    set: &ObjectiveSet,
    z: &[f64],
    num_weights: usize,
    rng: &mut R,
) -> Result<HvEstimate> {
    check_reference(set, z)?;
    if num_weights == 0 {
        return Err(Error::InvalidParameter("num_weights must be >= 1".into()));
    }
    let mut acc = McAccumulator::new(set.dim(), z.to_vec(), num_weights, rng)?;
    for y in set.iter() {
        acc.push(y);
    }
    Ok(acc.estimate())
}

/// Running maxima of the hypervolume scalarization over a fixed weight set.
#[derive(Debug, Clone)]
struct McAccumulator {
    k: usize,
    z: Vec<f64>,
    c_k: f64,
    /// Reciprocal weights, row-major `num_weights × k`.
    inv_weights: Vec<f64>,
    best: Vec<f64>,
}

impl McAccumulator {
    fn new<R: Rng + ?Sized>(k: usize, z: Vec<f64>, num_weights: usize, rng: &mut R) -> Result<Self> {
        let mut inv_weights = Vec::with_capacity(num_weights * k);
        for _ in 0..num_weights {
            inv_weights.extend(sample_positive_sphere(k, rng).into_iter().map(|v| 1.0 / v));
        }
        Ok(Self {
            k,
            z,
            c_k: c_k(k)?,
            inv_weights,
            best: vec![0.0; num_weights],
        })
    }

    fn scalarized(&self, w: usize, shifted: &[f64]) -> f64 {
        let inv = &self.inv_weights[w * self.k..(w + 1) * self.k];
        let m = shifted
            .iter()
            .zip(inv)
            .map(|(s, i)| s * i)
            .fold(f64::INFINITY, f64::min);
        m.powi(self.k as i32)
    }

    fn clipped(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.z).map(|(a, b)| (a - b).max(0.0)).collect()
    }

    fn push(&mut self, y: &[f64]) {
        let s = self.clipped(y);
        for w in 0..self.best.len() {
            let v = self.scalarized(w, &s);
            if v > self.best[w] {
                self.best[w] = v;
            }
        }
    }

    /// Estimate for an arbitrary set under the same weights.
    fn estimate_for(&self, set: &ObjectiveSet) -> f64 {
        let shifted: Vec<Vec<f64>> = set.iter().map(|y| self.clipped(y)).collect();
        let total: f64 = (0..self.best.len())
            .map(|w| {
                shifted
                    .iter()
                    .map(|s| self.scalarized(w, s))
                    .fold(0.0, f64::max)
            })
            .sum();
        self.c_k * total / self.best.len() as f64
    }

    fn estimate(&self) -> HvEstimate {
        let m = self.best.len();
        let mean = self.best.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            self.best.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        HvEstimate {
            value: self.c_k * mean,
            std_error: self.c_k * var.sqrt() / (m as f64).sqrt(),
            num_weights: m,
        }
    }
}

/// Hypervolume of a growing point set, updated one point at a time.
///
/// In exact mode each new point adds its exclusive volume with respect to
/// the current non-dominated front. In Monte-Carlo mode a single weight set
/// is drawn up front and shared across all prefixes, so the curve is
/// non-decreasing by construction.
#[derive(Debug, Clone)]
pub struct CumulativeHypervolume {
    z: Vec<f64>,
    value: f64,
    tracker: Tracker,
}

#[derive(Debug, Clone)]
enum Tracker {
    Exact { front: Vec<Vec<f64>> },
    MonteCarlo(McAccumulator),
}

impl CumulativeHypervolume {
    pub fn new<R: Rng + ?Sized>(mode: HvMode, z: &[f64], rng: &mut R) -> Result<Self> {
        if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reference point"));
        }
        let tracker = match mode {
            HvMode::Exact => Tracker::Exact { front: Vec::new() },
            HvMode::MonteCarlo { num_weights } => {
                if num_weights == 0 {
                    return Err(Error::InvalidParameter("num_weights must be >= 1".into()));
                }
                Tracker::MonteCarlo(McAccumulator::new(z.len(), z.to_vec(), num_weights, rng)?)
            }
        };
        Ok(Self {
            z: z.to_vec(),
            value: 0.0,
            tracker,
        })
    }

    /// Adds a point and returns the updated hypervolume.
    pub fn push(&mut self, y: &[f64]) -> Result<f64> {
        if y.len() != self.z.len() {
            return Err(Error::DimensionMismatch {
                expected: self.z.len(),
                found: y.len(),
            });
        }
        match &mut self.tracker {
            Tracker::Exact { front } => {
                let Some(p) = shifted(y, &self.z) else {
                    return Ok(self.value);
                };
                if front.iter().any(|q| q.iter().zip(&p).all(|(a, b)| a >= b)) {
                    return Ok(self.value);
                }
                self.value += exclusive_volume(&p, front);
                front.retain(|q| !dominates_unchecked(&p, q));
                front.push(p);
            }
            Tracker::MonteCarlo(acc) => {
                acc.push(y);
                self.value = acc.estimate().value;
            }
        }
        Ok(self.value)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Hypervolume of an arbitrary set under this tracker's mode; Monte-Carlo
    /// mode reuses the shared weights so the result is comparable with the
    /// running value.
    pub fn evaluate(&self, set: &ObjectiveSet) -> Result<f64> {
        check_reference(set, &self.z)?;
        match &self.tracker {
            Tracker::Exact { .. } => hv_exact(set, &self.z),
            Tracker::MonteCarlo(acc) => Ok(acc.estimate_for(set)),
        }
    }
}

/// Entry `t` is the hypervolume of the first `t + 1` points of `set`.
pub fn cumulative_hv<R: Rng + ?Sized>(
    set: &ObjectiveSet,
    z: &[f64],
    mode: HvMode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_reference(set, z)?;
    let mut acc = CumulativeHypervolume::new(mode, z, rng)?;
    set.iter().map(|y| acc.push(y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Inclusion–exclusion over all non-empty subsets: the intersection of
    /// boxes `[z, y]` is the box `[z, min y]`.
    fn inclusion_exclusion(points: &[Vec<f64>], z: &[f64]) -> f64 {
        let n = points.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let mut corner = vec![f64::INFINITY; z.len()];
            for (i, p) in points.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    for (c, v) in corner.iter_mut().zip(p) {
                        *c = c.min(*v);
                    }
                }
            }
            let vol: f64 = corner.iter().zip(z).map(|(c, r)| (c - r).max(0.0)).product();
            if mask.count_ones() % 2 == 1 {
                total += vol;
            } else {
                total -= vol;
            }
        }
        total
    }

    fn set(rows: &[&[f64]]) -> ObjectiveSet {
        ObjectiveSet::from_rows(rows.iter().copied()).unwrap()
    }

    #[test]
    fn c_k_values() {
        assert_abs_diff_eq!(c_k(1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c_k(2).unwrap(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(c_k(3).unwrap(), std::f64::consts::PI / 6.0, epsilon = 1e-15);
        assert!(c_k(0).is_err());
    }

    #[test]
    fn c_k_matches_ball_volume_recurrence() {
        // V_k = 2π/k · V_{k−2} with V_0 = 1, V_1 = 2.
        let mut v = vec![1.0, 2.0];
        for k in 2..=12 {
            v.push(2.0 * std::f64::consts::PI / k as f64 * v[k - 2]);
        }
        for (k, vk) in v.iter().enumerate().skip(1) {
            let expected = vk / 2f64.powi(k as i32);
            assert!((c_k(k).unwrap() - expected).abs() <= 1e-14 * expected, "k={k}");
        }
    }

    #[test]
    fn exact_examples() {
        assert_eq!(hv_exact(&set(&[&[1.0, 1.0]]), &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(hv_exact(&set(&[&[1.0, 2.0], &[2.0, 1.0]]), &[0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(hv_exact(&ObjectiveSet::empty(3).unwrap(), &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(hv_exact(&set(&[&[2.0], &[3.0]]), &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn points_below_reference_are_clipped() {
        let s = set(&[&[1.0, -1.0], &[-0.5, 3.0], &[2.0, 2.0]]);
        assert_eq!(hv_exact(&s, &[0.0, 0.0]).unwrap(), 4.0);
        let s = set(&[&[0.0, 5.0, 5.0]]);
        assert_eq!(hv_exact(&s, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn exact_reference_dimension_mismatch() {
        assert!(matches!(
            hv_exact(&set(&[&[1.0, 1.0]]), &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exact_matches_inclusion_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let k = rng.random_range(1..=4);
            let n = rng.random_range(1..=5);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.random_range(-0.2..1.0)).collect())
                .collect();
            let z = vec![0.0; k];
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let got = hv_exact(&s, &z).unwrap();
            assert!((got - inclusion_exclusion(&points, &z)).abs() < 1e-12, "{points:?}");
        }
    }

    #[test]
    fn exact_matches_inclusion_exclusion_in_higher_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let k = rng.random_range(5..=8);
            let n = rng.random_range(1..=10);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.random_range(0.0..2.0)).collect())
                .collect();
            let z = vec![0.0; k];
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let got = hv_exact(&s, &z).unwrap();
            let oracle = inclusion_exclusion(&points, &z);
            assert!((got - oracle).abs() < 1e-10 * oracle.max(1.0));
        }
    }

    #[test]
    fn mc_unit_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let est = hv_mc(&set(&[&[1.0, 1.0]]), &[0.0, 0.0], 100_000, &mut rng).unwrap();
        assert!((est.value - 1.0).abs() < 0.02, "{est:?}");
        assert_eq!(est.num_weights, 100_000);
    }

    #[test]
    fn mc_two_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let est = hv_mc(&set(&[&[1.0, 2.0], &[2.0, 1.0]]), &[0.0, 0.0], 100_000, &mut rng).unwrap();
        assert!((est.value - 3.0).abs() <= 3.0 * est.std_error, "{est:?}");
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn mc_empty_set_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let est = hv_mc(&ObjectiveSet::empty(2).unwrap(), &[0.0, 0.0], 10, &mut rng).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert!(hv_mc(&set(&[&[1.0]]), &[0.0], 0, &mut rng).is_err());
    }

    #[test]
    fn mc_agrees_with_exact_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let runs = 40;
        let mut within = 0;
        for _ in 0..runs {
            let k = rng.random_range(2..=4);
            let n = rng.random_range(1..=20);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.random_range(0.05..1.0)).collect())
                .collect();
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let z = vec![0.0; k];
            let exact = hv_exact(&s, &z).unwrap();
            let est = hv_mc(&s, &z, 20_000, &mut rng).unwrap();
            if (est.value - exact).abs() <= 4.0 * est.std_error {
                within += 1;
            }
        }
        assert!(within as f64 >= 0.95 * runs as f64, "{within}/{runs}");
    }

    #[test]
    fn cumulative_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let dup = set(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(cumulative_hv(&dup, &[0.0, 0.0], HvMode::Exact, &mut rng).unwrap(), vec![1.0, 1.0]);
        let two = set(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(cumulative_hv(&two, &[0.0, 0.0], HvMode::Exact, &mut rng).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn cumulative_mc_shares_weights_between_running_and_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let s = set(&[&[1.0, 2.0, 0.5], &[2.0, 1.0, 0.5], &[0.5, 0.5, 2.0]]);
        let mut acc = CumulativeHypervolume::new(HvMode::MonteCarlo { num_weights: 500 }, &[0.0; 3], &mut rng).unwrap();
        for y in s.iter() {
            acc.push(y).unwrap();
        }
        assert_abs_diff_eq!(acc.value(), acc.evaluate(&s).unwrap(), epsilon = 1e-12);
    }

    fn small_set() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..=4).prop_flat_map(|k| {
            prop::collection::vec(prop::collection::vec(-0.25f64..1.0, k), 1..20)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cumulative_exact_is_monotone_and_ends_at_total(points in small_set()) {
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let z = vec![0.0; s.dim()];
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let curve = cumulative_hv(&s, &z, HvMode::Exact, &mut rng).unwrap();
            prop_assert!(curve.windows(2).all(|w| w[1] >= w[0]));
            let total = hv_exact(&s, &z).unwrap();
            prop_assert!((curve[curve.len() - 1] - total).abs() <= 1e-12 * total.max(1.0));
        }

        #[test]
        fn cumulative_mc_is_monotone(points in small_set(), seed in any::<u64>()) {
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let z = vec![0.0; s.dim()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let curve = cumulative_hv(&s, &z, HvMode::MonteCarlo { num_weights: 200 }, &mut rng).unwrap();
            prop_assert!(curve.windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn front_carries_all_volume(points in small_set()) {
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let z = vec![0.0; s.dim()];
            let front = crate::pareto::pareto_front(&s).unwrap();
            let a = hv_exact(&s, &z).unwrap();
            let b = hv_exact(&s.select(&front), &z).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn translation_covariance(points in small_set(), offset in -5.0f64..5.0) {
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let z = vec![0.0; s.dim()];
            let moved: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|v| v + offset).collect()).collect();
            let zm = vec![offset; s.dim()];
            let a = hv_exact(&s, &z).unwrap();
            let b = hv_exact(&ObjectiveSet::from_rows(&moved).unwrap(), &zm).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn strict_pareto_compliance(points in small_set(), extra_seed in any::<u64>()) {
            let s = ObjectiveSet::from_rows(&points).unwrap();
            let k = s.dim();
            let z = vec![0.0; k];
            let base = hv_exact(&s, &z).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(extra_seed);
            let extra: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.2)).collect();
            let dominated_by_set = s.iter().any(|p| p.iter().zip(&extra).all(|(a, b)| a >= b));
            let mut grown = s.clone();
            grown.push(&extra).unwrap();
            let after = hv_exact(&grown, &z).unwrap();
            if dominated_by_set {
                prop_assert!((after - base).abs() <= 1e-12 * base.max(1.0));
            } else {
                prop_assert!(after > base);
            }
        }
    }
}
