//! The parabolic space-time metric and box-counting dimension estimators:
//! anisotropic (time side `r^2`, space side `r`) counts for space-time sets,
//! isotropic counts for point clouds, exact-cover counts for product specs,
//! and the shared log-log regression report.

use alloc::vec::Vec;

use crate::fractal::ProductSetSpec;

#[allow(unused_imports)]
use crate::math::FloatExt as _;

/// A point of space time `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Parabolic metric `rho((s,x),(t,y)) = max(|t-s|^{1/2}, ||x-y||)`.
pub fn rho(s: f64, x: &[f64], t: f64, y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let dt = (t - s).abs().sqrt();
    let mut r2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        r2 += (a - b) * (a - b);
    }
    dt.max(r2.sqrt())
}

/// Occupied-cell count of the anisotropic grid (time side `r^2`, space side
/// `r`, anchored at the origin) over a space-time point cloud. Points are
/// `(times[i], coords[i*d..(i+1)*d])`.
pub fn parabolic_box_count(times: &[f64], coords: &[f64], d: usize, r: f64) -> u64 {
    assert!(r > 0.0, "scale must be positive");
    if times.is_empty() {
        return 0;
    }
    let mut keys: Vec<[i64; 4]> = Vec::with_capacity(times.len());
    let r2 = r * r;
    for (i, &t) in times.iter().enumerate() {
        let mut key = [0i64; 4];
        key[0] = (t / r2).floor() as i64;
        for k in 0..d {
            key[1 + k] = (coords[i * d + k] / r).floor() as i64;
        }
        keys.push(key);
    }
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// Occupied-cell count of the isotropic grid of side `r` over a point cloud
/// in `R^d` (`points` flat with stride `d`).
pub fn euclid_box_count(points: &[f64], d: usize, r: f64) -> u64 {
    assert!(r > 0.0, "scale must be positive");
    if points.is_empty() {
        return 0;
    }
    let n = points.len() / d;
    let mut keys: Vec<[i64; 3]> = Vec::with_capacity(n);
    for i in 0..n {
        let mut key = [0i64; 3];
        for k in 0..d {
            key[k] = (points[i * d + k] / r).floor() as i64;
        }
        keys.push(key);
    }
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// Box-count regression: counts per scale and the least-squares slope of
/// `log N` against `log(1/r)` over a trimmed fit window.
#[derive(Debug, Clone)]
pub struct BoxCountReport {
    /// decreasing scales
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    /// index range `[lo, hi)` used in the fit
    pub fit_window: (usize, usize),
    /// largest absolute regression residual inside the window
    pub max_residual: f64,
    /// set when the cloud/scales were too degenerate to fit (slope forced 0)
    pub degenerate: bool,
}

impl BoxCountReport {
    /// Fit a report from per-scale counts, dropping `drop` scales at each end
    /// and any zero counts.
    pub fn from_counts(scales: Vec<f64>, counts: Vec<u64>, drop: usize) -> Self {
        assert_eq!(scales.len(), counts.len());
        let n = scales.len();
        let (mut lo, mut hi) = (drop.min(n), n.saturating_sub(drop));
        if hi <= lo {
            lo = 0;
            hi = n;
        }
        // shrink the window past zero counts
        while lo < hi && counts[lo] == 0 {
            lo += 1;
        }
        while hi > lo && counts[hi - 1] == 0 {
            hi -= 1;
        }
        let usable: Vec<usize> = (lo..hi).filter(|&i| counts[i] > 0).collect();
        let distinct = {
            let mut c: Vec<u64> = usable.iter().map(|&i| counts[i]).collect();
            c.dedup();
            c.len()
        };
        if usable.len() < 2 || distinct < 2 {
            return Self {
                scales,
                counts,
                slope: 0.0,
                intercept: 0.0,
                fit_window: (lo, hi),
                max_residual: 0.0,
                degenerate: true,
            };
        }
        let xs: Vec<f64> = usable.iter().map(|&i| (1.0 / scales[i]).ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|&i| (counts[i] as f64).ln()).collect();
        let n_f = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let denom = n_f * sxx - sx * sx;
        let slope = if denom.abs() < 1e-12 {
            0.0
        } else {
            (n_f * sxy - sx * sy) / denom
        };
        let intercept = (sy - slope * sx) / n_f;
        let max_residual = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - (slope * x + intercept)).abs())
            .fold(0.0, f64::max);
        Self {
            scales,
            counts,
            slope,
            intercept,
            fit_window: (lo, hi),
            max_residual,
            degenerate: false,
        }
    }
}

/// Default trim: drop the two coarsest and two finest scales.
pub const FIT_DROP: usize = 2;

/// Box-count dimension of a point cloud in `R^d` over the given decreasing
/// scales.
pub fn euclid_box_count_dim(points: &[f64], d: usize, scales: &[f64]) -> BoxCountReport {
    let counts: Vec<u64> = scales.iter().map(|&r| euclid_box_count(points, d, r)).collect();
    BoxCountReport::from_counts(scales.to_vec(), counts, FIT_DROP)
}

/// Box-count dimension of a cloud of 1-D points (convenience for hit-time
/// sets).
pub fn euclid_box_count_dim_1d(points: &[f64], scales: &[f64]) -> BoxCountReport {
    euclid_box_count_dim(points, 1, scales)
}

/// Parabolic box-counting of a space-time product spec from exact symbolic
/// covers: for scale `r`, the count is the product of the per-axis occupied
/// grid-cell counts (time grid `r^2` against the spec's refinement with
/// cells no longer than `r^2`; each space grid `r` likewise).
pub fn estimate_dim_rho(product: &ProductSetSpec, scales: &[f64]) -> BoxCountReport {
    let counts: Vec<u64> = scales
        .iter()
        .map(|&r| {
            let r2 = r * r;
            let tl = product.time().level_for_cell_len(r2);
            let mut n = product.time().occupied_cells(r2, tl);
            for ax in product.space() {
                let sl = ax.level_for_cell_len(r);
                n = n.saturating_mul(ax.occupied_cells(r, sl));
            }
            n
        })
        .collect();
    BoxCountReport::from_counts(scales.to_vec(), counts, FIT_DROP)
}

/// Geometric scale ladder `r_0 * factor^{-k}`, `k = 0..count`, decreasing.
pub fn geometric_scales(r0: f64, factor: f64, count: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(count);
    let mut r = r0;
    for _ in 0..count {
        v.push(r);
        r /= factor;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::SelfSimilarSpec;
    use alloc::vec;

    #[test]
    fn rho_examples() {
        assert!((rho(0.0, &[0.0], 1.0, &[0.0]) - 1.0).abs() < 1e-15);
        assert!((rho(0.0, &[0.0], 0.25, &[0.6]) - 0.6).abs() < 1e-15);
        assert_eq!(rho(2.0, &[1.0, 3.0], 2.0, &[1.0, 3.0]), 0.0);
    }

    #[test]
    fn parabolic_count_examples() {
        assert_eq!(parabolic_box_count(&[0.5], &[0.3], 1, 0.1), 1);
        let r = 0.1;
        let times = vec![0.0, r * r * 1.5];
        let coords = vec![0.0, 0.0];
        assert_eq!(parabolic_box_count(&times, &coords, 1, r), 2);
        assert_eq!(parabolic_box_count(&[], &[], 1, 0.5), 0);
    }

    #[test]
    fn euclid_dim_of_interval_grid() {
        // uniform grid on [0,1] at fine spacing: slope ~ 1
        let pts: Vec<f64> = (0..20001).map(|i| i as f64 / 20000.0).collect();
        let scales = geometric_scales(0.25, 2.0, 9);
        let rep = euclid_box_count_dim(&pts, 1, &scales);
        assert!((rep.slope - 1.0).abs() < 0.05, "{}", rep.slope);
    }

    #[test]
    fn euclid_dim_single_point() {
        let rep = euclid_box_count_dim(&[0.3, 0.4], 2, &geometric_scales(0.5, 2.0, 8));
        assert!(rep.degenerate);
        assert_eq!(rep.slope, 0.0);
    }

    #[test]
    fn euclid_dim_cantor_cover_grid() {
        // midpoints of the level-8 middle-thirds cover, counted at 3^-k
        let s = SelfSimilarSpec::middle_thirds(0.0, 1.0);
        let pts = s.natural_midpoints(8).unwrap();
        let scales = geometric_scales(1.0 / 3.0, 3.0, 7);
        let rep = euclid_box_count_dim(&pts, 1, &scales);
        assert!(
            (rep.slope - 0.6309297535714574).abs() < 0.05,
            "slope {}",
            rep.slope
        );
    }

    #[test]
    fn dim_rho_interval_times_square() {
        // E=[1,2], F=[-1,1]^2: slope ~ 2 dim E + d = 4
        let p = ProductSetSpec::new(
            SelfSimilarSpec::interval(1.0, 2.0),
            vec![
                SelfSimilarSpec::interval(-1.0, 1.0),
                SelfSimilarSpec::interval(-1.0, 1.0),
            ],
        )
        .unwrap();
        let scales = geometric_scales(0.5, 2.0, 8);
        let rep = estimate_dim_rho(&p, &scales);
        assert!((rep.slope - 4.0).abs() < 0.15, "slope {}", rep.slope);
    }

    #[test]
    fn dim_rho_time_only() {
        // E=[1,2], F={0}: slope ~ 2
        let p = ProductSetSpec::new(
            SelfSimilarSpec::interval(1.0, 2.0),
            vec![SelfSimilarSpec::point(0.0)],
        )
        .unwrap();
        let scales = geometric_scales(0.5, 2.0, 8);
        let rep = estimate_dim_rho(&p, &scales);
        assert!((rep.slope - 2.0).abs() < 0.1, "slope {}", rep.slope);
    }

    #[test]
    fn dim_rho_cantor_product() {
        // E = F = middle-thirds (d=1): slope ~ 3 * log2/log3 = 1.8928
        let p = ProductSetSpec::new(
            SelfSimilarSpec::middle_thirds(1.0, 2.0),
            vec![SelfSimilarSpec::middle_thirds(0.0, 1.0)],
        )
        .unwrap();
        let scales = geometric_scales(1.0 / 3.0, 3.0, 8);
        let rep = estimate_dim_rho(&p, &scales);
        let expect = 3.0 * 0.6309297535714574;
        assert!((rep.slope - expect).abs() < 0.1, "slope {}", rep.slope);
    }

    #[test]
    fn counts_monotone_in_scale() {
        let pts: Vec<f64> = (0..500).map(|i| (i as f64 * 0.618).fract()).collect();
        let scales = geometric_scales(0.5, 2.0, 10);
        let counts: Vec<u64> = scales.iter().map(|&r| euclid_box_count(&pts, 1, r)).collect();
        for w in counts.windows(2) {
            assert!(w[1] >= w[0], "N(r) non-decreasing as r decreases");
        }
    }
}
