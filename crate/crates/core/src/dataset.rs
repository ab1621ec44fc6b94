//! Seeded two-moons data, per-coordinate unit scaling and stratified splits.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::mv::UnitValue;
use crate::training::Sample;

/// splitmix64 generator. Uniforms use the top 53 bits; Gaussians come from
/// Box–Muller, consuming two uniforms per pair of normals.
#[derive(Debug, Clone)]
pub struct Prng {
    state: u64,
    spare: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng {
            state: seed,
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (`bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Lemire's multiply-shift with rejection, unbiased.
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            let low = m as u64;
            if low >= bound.wrapping_neg() % bound {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }

    /// Fisher–Yates.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    LengthMismatch { features: usize, labels: usize },
    DegenerateCoordinate(usize),
    InvalidFraction(f64),
    EmptySplit,
    InvalidLabel(u8),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::LengthMismatch { features, labels } => {
                write!(f, "{features} feature rows but {labels} labels")
            }
            DatasetError::DegenerateCoordinate(c) => {
                write!(f, "coordinate {c} has zero range and cannot be scaled")
            }
            DatasetError::InvalidFraction(x) => {
                write!(f, "train fraction {x} must lie strictly between 0 and 1")
            }
            DatasetError::EmptySplit => f.write_str("split would leave one side empty"),
            DatasetError::InvalidLabel(l) => write!(f, "label {l} is not 0 or 1"),
        }
    }
}

impl core::error::Error for DatasetError {}

/// Two-dimensional points with binary labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub features: Vec<[f64; 2]>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(features: Vec<[f64; 2]>, labels: Vec<u8>) -> Result<Self, DatasetError> {
        if features.len() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                features: features.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(DatasetError::InvalidLabel(bad));
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Training samples; coordinates are clamped into `[0,1]`.
    pub fn to_samples(&self) -> Vec<Sample> {
        self.features
            .iter()
            .zip(&self.labels)
            .map(|(p, &l)| Sample {
                input: p.iter().map(|&x| UnitValue::saturating(x)).collect(),
                target: if l == 1 { UnitValue::ONE } else { UnitValue::ZERO },
            })
            .collect()
    }
}

/// Class 0 on the upper moon `(cos t, sin t)`, class 1 on the lower moon
/// `(1 − cos t, 0.5 − sin t)`, with `t = πi/(n−1)` and Gaussian noise on both
/// coordinates. All class-0 points come first.
pub fn gen_two_moons(n_per_class: usize, noise_sd: f64, seed: u64) -> Dataset {
    let mut rng = Prng::new(seed);
    let n = n_per_class.max(1);
    let step = if n == 1 { 0.0 } else { PI / (n - 1) as f64 };
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for label in 0..2u8 {
        for i in 0..n {
            let t = step * i as f64;
            let (c, s) = (libm::cos(t), libm::sin(t));
            let (x, y) = if label == 0 { (c, s) } else { (1.0 - c, 0.5 - s) };
            let nx = noise_sd * rng.next_gaussian();
            let ny = noise_sd * rng.next_gaussian();
            features.push([x + nx, y + ny]);
            labels.push(label);
        }
    }
    Dataset { features, labels }
}

/// Per-coordinate min–max transform, reusable on held-out data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub min: [f64; 2],
    pub range: [f64; 2],
}

impl Scaling {
    /// Maps into `[0,1]`, clamping points beyond the fitted range.
    pub fn apply(&self, ds: &Dataset) -> Dataset {
        Dataset {
            features: ds
                .features
                .iter()
                .map(|p| {
                    [0, 1].map(|c| ((p[c] - self.min[c]) / self.range[c]).clamp(0.0, 1.0))
                })
                .collect(),
            labels: ds.labels.clone(),
        }
    }

    pub fn invert(&self, ds: &Dataset) -> Dataset {
        Dataset {
            features: ds
                .features
                .iter()
                .map(|p| [0, 1].map(|c| p[c] * self.range[c] + self.min[c]))
                .collect(),
            labels: ds.labels.clone(),
        }
    }
}

pub fn scale_unit(ds: &Dataset) -> Result<(Dataset, Scaling), DatasetError> {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in &ds.features {
        for c in 0..2 {
            min[c] = min[c].min(p[c]);
            max[c] = max[c].max(p[c]);
        }
    }
    let mut range = [0.0; 2];
    for c in 0..2 {
        range[c] = max[c] - min[c];
        if !(range[c] > 0.0) || !range[c].is_finite() {
            return Err(DatasetError::DegenerateCoordinate(c));
        }
    }
    let scaling = Scaling { min, range };
    Ok((scaling.apply(ds), scaling))
}

/// Stratified shuffle-and-split.
///
/// Each class is shuffled on its own, the classes are merged so that every
/// prefix keeps the class proportions to within one sample, and the first
/// `round(train_fraction · n)` rows become the training side. Both sides are
/// shuffled again afterwards.
pub fn split(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let n = ds.len();
    let n_train = libm::round(train_fraction * n as f64) as usize;
    if n_train == 0 || n_train >= n {
        return Err(DatasetError::EmptySplit);
    }
    let mut rng = Prng::new(seed);
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in ds.labels.iter().enumerate() {
        classes[l as usize].push(i);
    }
    for class in classes.iter_mut() {
        rng.shuffle(class);
    }
    // Merge by fractional rank (k + 0.5) / count; ties go to class 0.
    let mut order = Vec::with_capacity(n);
    let (mut i0, mut i1) = (0usize, 0usize);
    let (n0, n1) = (classes[0].len(), classes[1].len());
    while i0 < n0 || i1 < n1 {
        let take0 = if i0 == n0 {
            false
        } else if i1 == n1 {
            true
        } else {
            // (i0 + 0.5)/n0 <= (i1 + 0.5)/n1, in integers
            (2 * i0 + 1) * n1 <= (2 * i1 + 1) * n0
        };
        if take0 {
            order.push(classes[0][i0]);
            i0 += 1;
        } else {
            order.push(classes[1][i1]);
            i1 += 1;
        }
    }
    let (train_idx, test_idx) = order.split_at_mut(n_train);
    rng.shuffle(train_idx);
    rng.shuffle(test_idx);
    Ok((ds.select(train_idx), ds.select(test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of splitmix64 seeded with 0 (reference implementation).
        let mut rng = Prng::new(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(rng.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(rng.next_u64(), 0x06c45d188009454f);
    }

    #[test]
    fn uniforms_and_gaussians_are_sane() {
        let mut rng = Prng::new(7);
        let n = 20_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
            let g = rng.next_gaussian();
            s += g;
            s2 += g * g;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.05, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = Prng::new(3);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            seen[rng.below(5) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn moon_endpoints() {
        let ds = gen_two_moons(1, 0.0, 99);
        assert_eq!(ds.features, vec![[1.0, 0.0], [0.0, 0.5]]);
        assert_eq!(ds.labels, vec![0, 1]);
        let ds = gen_two_moons(2, 0.0, 1);
        assert_eq!(ds.features[0], [1.0, 0.0]);
        assert!((ds.features[1][0] + 1.0).abs() < 1e-15);
        assert!(ds.features[1][1].abs() < 1e-15);
    }

    #[test]
    fn moon_counts_and_determinism() {
        let a = gen_two_moons(3000, 0.1, 42);
        assert_eq!(a.len(), 6000);
        assert_eq!(a.count_label(0), 3000);
        assert_eq!(a.count_label(1), 3000);
        let b = gen_two_moons(3000, 0.1, 42);
        assert_eq!(a, b);
        assert_ne!(a, gen_two_moons(3000, 0.1, 43));
    }

    #[test]
    fn scaling_examples() {
        let ds = Dataset::new(vec![[0.0, 0.0], [2.0, 4.0]], vec![0, 1]).unwrap();
        let (scaled, rec) = scale_unit(&ds).unwrap();
        assert_eq!(scaled.features, vec![[0.0, 0.0], [1.0, 1.0]]);
        let unit = Dataset::new(vec![[0.0, 1.0], [1.0, 0.0], [0.5, 0.25]], vec![0, 1, 0]).unwrap();
        assert_eq!(scale_unit(&unit).unwrap().0, unit);
        // a test point beyond the fitted range is clamped
        let outside = Dataset::new(vec![[3.0, -1.0]], vec![1]).unwrap();
        assert_eq!(rec.apply(&outside).features, vec![[1.0, 0.0]]);
        let flat = Dataset::new(vec![[1.0, 0.0], [1.0, 1.0]], vec![0, 1]).unwrap();
        assert_eq!(scale_unit(&flat), Err(DatasetError::DegenerateCoordinate(0)));
    }

    #[test]
    fn scaling_inverts() {
        let ds = gen_two_moons(200, 0.1, 5);
        let (scaled, rec) = scale_unit(&ds).unwrap();
        let back = rec.invert(&scaled);
        for (p, q) in ds.features.iter().zip(&back.features) {
            assert!((p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn split_counts_and_stratification() {
        let ds = gen_two_moons(4000, 0.1, 42);
        let (train, test) = split(&ds, 0.75, 42).unwrap();
        assert_eq!((train.len(), test.len()), (6000, 2000));
        for side in [&train, &test] {
            assert!(side.count_label(0).abs_diff(side.count_label(1)) <= 1);
        }
        let (train2, test2) = split(&ds, 0.75, 42).unwrap();
        assert_eq!((train, test), (train2, test2));

        let two = Dataset::new(vec![[0.0, 0.0], [1.0, 1.0]], vec![0, 1]).unwrap();
        let (a, b) = split(&two, 0.5, 0).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
        assert_eq!(split(&two, 0.1, 0), Err(DatasetError::EmptySplit));
        assert_eq!(split(&two, 1.0, 0), Err(DatasetError::InvalidFraction(1.0)));
    }

    #[test]
    fn odd_sizes_stay_stratified() {
        for (n0, n1, frac) in [(7usize, 6usize, 0.5), (10, 11, 0.3), (5, 5, 0.9)] {
            let labels: Vec<u8> = (0..n0).map(|_| 0).chain((0..n1).map(|_| 1)).collect();
            let feats = (0..n0 + n1).map(|i| [i as f64, 0.0]).collect();
            let ds = Dataset::new(feats, labels).unwrap();
            let (train, test) = split(&ds, frac, 11).unwrap();
            let expect0 = frac * n0 as f64;
            assert!((train.count_label(0) as f64 - expect0).abs() <= 1.0);
            assert_eq!(train.len() + test.len(), n0 + n1);
        }
    }
}
