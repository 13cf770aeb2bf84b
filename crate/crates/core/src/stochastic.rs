//! Reproducible samplers: counter-based RNG streams (ChaCha8 keyed by
//! master seed and stream index), Brownian paths with Brownian-bridge
//! refinement, isotropic alpha-stable vectors by subordination, and
//! N-parameter additive stable fields on product grids.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use crate::math::FloatExt as _;

use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleError {
    UnsortedTimes,
    TimesOutsideInterval,
    UnknownEndpoint(f64),
    GridTooLarge { vertices: u128, cap: u128 },
    BadParameter(&'static str),
}

impl core::fmt::Display for SampleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SampleError::UnsortedTimes => write!(f, "times must be sorted and distinct"),
            SampleError::TimesOutsideInterval => {
                write!(f, "refinement times must lie inside the interval")
            }
            SampleError::UnknownEndpoint(t) => {
                write!(f, "interval endpoint {t} is not a grid time")
            }
            SampleError::GridTooLarge { vertices, cap } => {
                write!(f, "field grid has {vertices} vertices, cap {cap}")
            }
            SampleError::BadParameter(msg) => write!(f, "{msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SampleError {}

/// Maximum number of vertices in an additive-field product grid.
pub const FIELD_VERTEX_CAP: u128 = 1_000_000;

/// A reproducible random stream: `(master seed, stream index)` determines
/// the draw sequence bit-exactly, and distinct indices give statistically
/// independent streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            seed,
            stream,
            spare_normal: None,
        }
    }

    pub fn provenance(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard normal draw (Box-Muller, one spare cached).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let mag = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare_normal = Some(mag * theta.sin());
        mag * theta.cos()
    }

    /// Unit-rate exponential draw.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }
}

/// A sampled Brownian trajectory on a sorted time grid, `d` coordinates per
/// time stored flat.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    times: Vec<f64>,
    values: Vec<f64>,
    d: usize,
    seed: u64,
    stream: u64,
}

impl BrownianPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn provenance(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }
}

/// Sample `W` at the given sorted, distinct times with exact Gaussian
/// increments; `W(0) = 0`, and a positive first time draws `N(0, t_0 I)`.
pub fn sample_brownian(
    times: &[f64],
    d: usize,
    stream: &mut RngStream,
) -> Result<BrownianPath, SampleError> {
    if times.windows(2).any(|w| w[0] >= w[1]) || times.first().map(|&t| t < 0.0).unwrap_or(false) {
        return Err(SampleError::UnsortedTimes);
    }
    let (seed, sid) = stream.provenance();
    let n = times.len();
    let mut values = Vec::with_capacity(n * d);
    let mut prev_t = 0.0;
    let mut prev = alloc::vec![0.0; d];
    for &t in times {
        let sd = (t - prev_t).sqrt();
        for item in prev.iter_mut() {
            *item += sd * stream.normal();
        }
        values.extend_from_slice(&prev);
        prev_t = t;
    }
    Ok(BrownianPath {
        times: times.to_vec(),
        values,
        d,
        seed,
        stream: sid,
    })
}

/// Refine a path inside `[a, b]` (both must be existing grid times) with new
/// interior times, drawn from the Brownian-bridge conditional law. Existing
/// values are unchanged.
pub fn refine_bridge(
    path: &BrownianPath,
    interval: (f64, f64),
    new_times: &[f64],
    stream: &mut RngStream,
) -> Result<BrownianPath, SampleError> {
    let (a, b) = interval;
    if new_times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SampleError::UnsortedTimes);
    }
    if new_times.iter().any(|&t| t <= a || t >= b) {
        return Err(SampleError::TimesOutsideInterval);
    }
    let d = path.d;
    let find = |t: f64| -> Option<usize> { path.times.iter().position(|&u| u == t) };
    let ia = find(a).ok_or(SampleError::UnknownEndpoint(a))?;
    let ib = find(b).ok_or(SampleError::UnknownEndpoint(b))?;
    // sequential conditioning: each new point against (last fixed, right end)
    let mut add_times: Vec<f64> = Vec::with_capacity(new_times.len());
    let mut add_vals: Vec<f64> = Vec::with_capacity(new_times.len() * d);
    let mut left_t = a;
    let mut left_v: Vec<f64> = path.value(ia).to_vec();
    let right_t = b;
    let right_v: Vec<f64> = path.value(ib).to_vec();
    for &t in new_times {
        // skip times already on the grid (refinement idempotence)
        if find(t).is_some() {
            continue;
        }
        let span = right_t - left_t;
        let frac = (t - left_t) / span;
        let var = (t - left_t) * (right_t - t) / span;
        let sd = var.sqrt();
        let mut v = Vec::with_capacity(d);
        for k in 0..d {
            let mean = left_v[k] + frac * (right_v[k] - left_v[k]);
            v.push(mean + sd * stream.normal());
        }
        add_times.push(t);
        add_vals.extend_from_slice(&v);
        left_t = t;
        left_v = v;
    }
    // merge sorted grids
    let n = path.len() + add_times.len();
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * d);
    let (mut i, mut j) = (0usize, 0usize);
    while i < path.len() || j < add_times.len() {
        let take_old = j >= add_times.len() || (i < path.len() && path.times[i] < add_times[j]);
        if take_old {
            times.push(path.times[i]);
            values.extend_from_slice(path.value(i));
            i += 1;
        } else {
            times.push(add_times[j]);
            values.extend_from_slice(&add_vals[j * d..(j + 1) * d]);
            j += 1;
        }
    }
    Ok(BrownianPath {
        times,
        values,
        d,
        seed: path.seed,
        stream: path.stream,
    })
}

/// One-sided positive stable draw with Laplace transform `exp(-lambda^beta)`
/// (Kanter's representation), `beta` in `(0, 1)`.
pub fn sample_positive_stable(beta: f64, stream: &mut RngStream) -> f64 {
    debug_assert!(beta > 0.0 && beta < 1.0);
    let u = PI * stream.uniform_open();
    let e = stream.exponential();
    let a = (beta * u).sin().powf(beta) * ((1.0 - beta) * u).sin().powf(1.0 - beta)
        / u.sin();
    let a = a.powf(1.0 / (1.0 - beta));
    (a / e).powf((1.0 - beta) / beta)
}

/// The subordination scale `c` such that `X = sqrt(c * S0) * Z` has
/// characteristic function `exp(-||xi||^alpha / 2)` at `t_total = 1`, where
/// `S0` is Kanter's `exp(-lambda^{alpha/2})` draw. Derived from
/// `E exp(-S ||xi||^2 / 2) = exp(-c^{alpha/2} (||xi||^2/2)^{alpha/2})`.
pub fn subordination_scale(alpha: f64) -> f64 {
    2.0_f64.powf(1.0 - 2.0 / alpha)
}

/// Isotropic stable vector in `R^d` with CF `exp(-t_total ||xi||^alpha / 2)`.
/// `alpha = 2` degenerates to the exact Gaussian.
pub fn sample_isotropic_stable(
    alpha: f64,
    d: usize,
    t_total: f64,
    stream: &mut RngStream,
) -> Vec<f64> {
    debug_assert!(alpha > 0.0 && alpha <= 2.0);
    let s = if alpha >= 2.0 {
        1.0
    } else {
        subordination_scale(alpha) * sample_positive_stable(alpha / 2.0, stream)
    };
    let scale = t_total.powf(1.0 / alpha) * s.sqrt();
    (0..d).map(|_| scale * stream.normal()).collect()
}

/// An additive stable field `X(u) = sum_k X^(k)(u_k)` sampled on a product
/// grid: per-axis paths with independent stable increments, summed at every
/// vertex.
#[derive(Debug, Clone)]
pub struct AdditiveStableField {
    alpha: f64,
    d: usize,
    grids: Vec<Vec<f64>>,
    /// marginal path values per axis, stride d
    marginals: Vec<Vec<f64>>,
    seed: u64,
    stream: u64,
}

impl AdditiveStableField {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_axes(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[Vec<f64>] {
        &self.grids
    }

    pub fn marginal(&self, axis: usize, idx: usize) -> &[f64] {
        &self.marginals[axis][idx * self.d..(idx + 1) * self.d]
    }

    pub fn provenance(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }

    /// Field value at a multi-index, by summing the axis marginals.
    pub fn value_at(&self, index: &[usize]) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.d];
        for (axis, &i) in index.iter().enumerate() {
            for (a, b) in v.iter_mut().zip(self.marginal(axis, i)) {
                *a += b;
            }
        }
        v
    }

    /// Number of product-grid vertices.
    pub fn vertex_count(&self) -> u128 {
        self.grids.iter().map(|g| g.len() as u128).product()
    }

    /// All vertex values, flat with stride `d`, odometer order over axes.
    pub fn vertex_values(&self) -> Vec<f64> {
        let total = self.vertex_count() as usize;
        let mut out = Vec::with_capacity(total * self.d);
        let n_axes = self.n_axes();
        let mut idx = alloc::vec![0usize; n_axes];
        loop {
            let v = self.value_at(&idx);
            out.extend_from_slice(&v);
            let mut k = 0;
            loop {
                if k == n_axes {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < self.grids[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// Sample an additive stable field on per-axis sorted grids.
pub fn sample_additive_field(
    alpha: f64,
    d: usize,
    grids: &[Vec<f64>],
    stream: &mut RngStream,
) -> Result<AdditiveStableField, SampleError> {
    if grids.is_empty() {
        return Err(SampleError::BadParameter("need at least one axis grid"));
    }
    let vertices: u128 = grids.iter().map(|g| g.len() as u128).product();
    if vertices > FIELD_VERTEX_CAP {
        return Err(SampleError::GridTooLarge {
            vertices,
            cap: FIELD_VERTEX_CAP,
        });
    }
    let (seed, sid) = stream.provenance();
    let mut marginals = Vec::with_capacity(grids.len());
    for grid in grids {
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid.first().map(|&t| t < 0.0).unwrap_or(true)
        {
            return Err(SampleError::UnsortedTimes);
        }
        let mut vals = Vec::with_capacity(grid.len() * d);
        let mut prev = alloc::vec![0.0; d];
        let mut prev_t = 0.0;
        for &t in grid {
            let inc = sample_isotropic_stable(alpha, d, t - prev_t, stream);
            for (p, dv) in prev.iter_mut().zip(inc) {
                *p += dv;
            }
            vals.extend_from_slice(&prev);
            prev_t = t;
        }
        marginals.push(vals);
    }
    Ok(AdditiveStableField {
        alpha,
        d,
        grids: grids.to_vec(),
        marginals,
        seed,
        stream: sid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_bit_exact() {
        let times: Vec<f64> = (1..50).map(|i| i as f64 * 0.02).collect();
        let p1 = sample_brownian(&times, 2, &mut RngStream::new(42, 7)).unwrap();
        let p2 = sample_brownian(&times, 2, &mut RngStream::new(42, 7)).unwrap();
        assert_eq!(p1.values(), p2.values());
        let p3 = sample_brownian(&times, 2, &mut RngStream::new(42, 8)).unwrap();
        assert_ne!(p1.values(), p3.values());
    }

    #[test]
    fn brownian_increment_moments() {
        let mut stream = RngStream::new(1, 0);
        let times = alloc::vec![1.0, 2.0];
        let n = 20000;
        let mut mean = 0.0;
        let mut var = 0.0;
        for _ in 0..n {
            let p = sample_brownian(&times, 1, &mut stream).unwrap();
            let inc = p.values()[1] - p.values()[0];
            mean += inc;
            var += inc * inc;
        }
        mean /= n as f64;
        var = var / n as f64 - mean * mean;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt() * 1.5, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn bridge_midpoint_moments() {
        let mut stream = RngStream::new(3, 1);
        let times = alloc::vec![1.0, 2.0];
        let n = 20000;
        let mut mean_dev = 0.0;
        let mut var = 0.0;
        for _ in 0..n {
            let p = sample_brownian(&times, 1, &mut stream).unwrap();
            let r = refine_bridge(&p, (1.0, 2.0), &[1.5], &mut stream).unwrap();
            let mid = r.values()[1];
            let dev = mid - 0.5 * (p.values()[0] + p.values()[1]);
            mean_dev += dev;
            var += dev * dev;
        }
        mean_dev /= n as f64;
        var = var / n as f64 - mean_dev * mean_dev;
        assert!(mean_dev.abs() < 0.02, "{mean_dev}");
        // bridge variance (t-s)/4 = 0.25
        assert!((var - 0.25).abs() < 0.02, "{var}");
    }

    #[test]
    fn bridge_idempotent_on_existing_times() {
        let mut stream = RngStream::new(5, 2);
        let times = alloc::vec![1.0, 1.5, 2.0];
        let p = sample_brownian(&times, 1, &mut stream).unwrap();
        let r = refine_bridge(&p, (1.0, 2.0), &[1.5], &mut stream).unwrap();
        assert_eq!(p.times(), r.times());
        assert_eq!(p.values(), r.values());
    }

    #[test]
    fn stable_alpha_two_is_gaussian() {
        let mut stream = RngStream::new(9, 0);
        let x = sample_isotropic_stable(2.0, 3, 1.0, &mut stream);
        assert_eq!(x.len(), 3);
        // same draws as three normals from the same stream state
        let mut s2 = RngStream::new(9, 0);
        let z: Vec<f64> = (0..3).map(|_| s2.normal()).collect();
        assert_eq!(x, z);
    }

    #[test]
    fn empirical_cf_of_stable() {
        // |mean exp(i xi X) - exp(-|xi|^alpha/2)| <= 3/sqrt(n)
        let n = 60000;
        for alpha in [0.5, 1.0, 1.5] {
            let mut stream = RngStream::new(11, 3);
            for xi in [0.5, 1.0, 2.0] {
                let mut re = 0.0;
                for _ in 0..n {
                    let x = sample_isotropic_stable(alpha, 1, 1.0, &mut stream);
                    re += (xi * x[0]).cos();
                }
                re /= n as f64;
                let target = (-0.5 * xi.powf(alpha)).exp();
                assert!(
                    (re - target).abs() <= 3.0 / (n as f64).sqrt(),
                    "alpha={alpha} xi={xi}: {re} vs {target}"
                );
            }
        }
    }

    #[test]
    fn additive_field_additivity() {
        let mut stream = RngStream::new(21, 4);
        let grids = alloc::vec![
            alloc::vec![1.0, 1.25, 1.5],
            alloc::vec![1.0, 1.1, 1.2, 1.3],
        ];
        let f = sample_additive_field(0.7, 2, &grids, &mut stream).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let v = f.value_at(&[i, j]);
                for k in 0..2 {
                    let expect = f.marginal(0, i)[k] + f.marginal(1, j)[k];
                    assert_eq!(v[k], expect);
                }
            }
        }
        assert_eq!(f.vertex_values().len(), 3 * 4 * 2);
    }

    #[test]
    fn field_grid_cap() {
        let g = alloc::vec![alloc::vec![0.5; 2000], alloc::vec![0.5; 2000]];
        // unsorted grids error out first; build sorted big grids instead
        let mk = |n: usize| -> Vec<f64> { (1..=n).map(|i| 1.0 + i as f64 * 1e-6).collect() };
        let g2 = alloc::vec![mk(2000), mk(2000)];
        let _ = g;
        let mut stream = RngStream::new(1, 1);
        assert!(matches!(
            sample_additive_field(0.5, 1, &g2, &mut stream),
            Err(SampleError::GridTooLarge { .. })
        ));
    }
}
