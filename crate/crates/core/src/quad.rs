//! 1-D quadrature: adaptive Gauss-Kronrod for smooth integrands and a
//! zero-segmented Gauss-Legendre summer with iterated averaging for
//! oscillatory Fourier-type integrals.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::math::FloatExt as _;

/// Quadrature failure, carrying the residual error estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// Subdivision limit reached before the tolerance was met.
    NoConvergence { estimate: f64, residual: f64 },
    /// The integrand produced a non-finite value.
    NonFinite { at: f64 },
}

impl core::fmt::Display for QuadError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QuadError::NoConvergence { estimate, residual } => write!(
                f,
                "quadrature did not converge (estimate {estimate:.6e}, residual {residual:.3e})"
            ),
            QuadError::NonFinite { at } => {
                write!(f, "integrand non-finite at {at:.6e}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QuadError {}

// 15-point Kronrod extension of 7-point Gauss on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7usize {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Adaptive GK15 on `[a, b]`. Bisects the worst interval until the summed
/// error estimate is below `abs_tol + rel_tol * |integral|`.
pub fn adaptive_gk15<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(f, a, b);
    if !v.is_finite() {
        return Err(QuadError::NonFinite { at: 0.5 * (a + b) });
    }
    // (error, a, b, value); refine the largest-error interval first
    let mut segs: Vec<(f64, f64, f64, f64)> = alloc::vec![(e, a, b, v)];
    let max_segs = 4096;
    loop {
        let total: f64 = segs.iter().map(|s| s.3).sum();
        let err: f64 = segs.iter().map(|s| s.0).sum();
        if err <= abs_tol + rel_tol * total.abs() {
            return Ok(total);
        }
        if segs.len() >= max_segs {
            return Err(QuadError::NoConvergence {
                estimate: total,
                residual: err,
            });
        }
        let (i, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("non-empty");
        let (_, sa, sb, _) = segs.swap_remove(i);
        let m = 0.5 * (sa + sb);
        for (lo, hi) in [(sa, m), (m, sb)] {
            let (v, e) = gk15(f, lo, hi);
            if !v.is_finite() {
                return Err(QuadError::NonFinite { at: 0.5 * (lo + hi) });
            }
            segs.push((e, lo, hi, v));
        }
    }
}

const XGL8: [f64; 4] = [
    0.960_289_856_497_536_2,
    0.796_666_477_413_626_7,
    0.525_532_409_916_329,
    0.183_434_642_495_649_8,
];
const WGL8: [f64; 4] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
];

/// Non-adaptive 8-point Gauss-Legendre on `[a, b]`.
pub fn gauss_legendre_8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in XGL8.iter().zip(WGL8.iter()) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// Integrate an oscillatory integrand over `[zero(0), inf)` by summing
/// Gauss-Legendre segments between consecutive sign-change abscissae
/// `zero(k)` and extrapolating the alternating partial sums by iterated
/// averaging (Euler transformation).
pub fn oscillatory_sum<F: Fn(f64) -> f64, Z: Fn(usize) -> f64>(
    f: &F,
    zero: &Z,
    rel_tol: f64,
    max_segments: usize,
) -> Result<f64, QuadError> {
    const NAVG: usize = 14;
    let mut partial: Vec<f64> = Vec::with_capacity(256);
    let mut sum = 0.0;
    let mut prev = zero(0);
    let mut last_est: Option<f64> = None;
    for k in 1..max_segments {
        let z = zero(k);
        sum += gauss_legendre_8(f, prev, z);
        prev = z;
        if !sum.is_finite() {
            return Err(QuadError::NonFinite { at: z });
        }
        partial.push(sum);
        if partial.len() > NAVG {
            let est = averaged(&partial[partial.len() - NAVG..]);
            let prev_est = averaged(&partial[partial.len() - NAVG - 1..partial.len() - 1]);
            if (est - prev_est).abs() <= rel_tol * (1.0 + est.abs()) {
                return Ok(est);
            }
            last_est = Some(est);
        }
    }
    match last_est {
        Some(est) => Ok(est),
        None => Err(QuadError::NoConvergence {
            estimate: sum,
            residual: f64::INFINITY,
        }),
    }
}

fn averaged(tail: &[f64]) -> f64 {
    let mut row: Vec<f64> = tail.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_polynomial_exact() {
        let v = adaptive_gk15(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn adaptive_handles_sqrt_singularity() {
        // integral of 1/sqrt(x) over (0,1] = 2; singular endpoint stresses bisection
        let v = adaptive_gk15(&|x: f64| x.sqrt().recip().min(1e12), 1e-300, 1.0, 1e-9, 1e-12);
        let v = v.unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn oscillatory_matches_known_integral() {
        // int_0^inf cos(r x) exp(-x) dx = 1/(1+r^2)
        for r in [5.0, 20.0, 80.0] {
            let f = move |x: f64| (r * x).cos() * (-x).exp();
            let head = adaptive_gk15(&f, 0.0, 0.5 * core::f64::consts::PI / r, 1e-13, 1e-15)
                .unwrap();
            let tail = oscillatory_sum(
                &f,
                &|k| (k as f64 + 0.5) * core::f64::consts::PI / r,
                1e-13,
                100_000,
            )
            .unwrap();
            let expect = 1.0 / (1.0 + r * r);
            assert!(
                (head + tail - expect).abs() < 1e-10 * (1.0 + expect),
                "r={r}: {} vs {expect}",
                head + tail
            );
        }
    }
}
