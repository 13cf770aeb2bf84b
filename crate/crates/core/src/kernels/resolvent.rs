//! Resolvent-type integrals of stable densities: the box resolvent
//! `kappa(z) = int_box g_u(z) du` of an N-parameter additive stable process,
//! and the 1-potential density `upsilon(x) = int_0^inf g_t(x) e^{-t} dt`.
//!
//! Both reduce to one-dimensional integrals against the time-1 radial
//! density through the scaling substitution `v = ||z|| u^{-1/alpha}`:
//!
//!   kappa(z)   = alpha z^{alpha-d} int V((z/v)^alpha) v^{d-alpha-1} g(v) dv
//!   upsilon(x) = alpha x^{alpha-1} int v^{-alpha} g(v) exp(-x^alpha v^{-alpha}) dv
//!
//! where `V(s)` is the volume density of `{u in box : |u| = s}` (an
//! Irwin-Hall-type piecewise polynomial). Near `z = 0` the resolvent follows
//! the fitted power law `A z^{-(d - alpha N)}`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::stable::StableDensity;
use crate::quad::{adaptive_gk15, QuadError};

#[allow(unused_imports)]
use crate::math::FloatExt as _;

/// Volume density of `{u in [0, b_1] x ... x [0, b_N] : u_1 + ... + u_N = s}`
/// (derivative of the sub-level volume; inclusion-exclusion over the box).
fn box_sum_volume_density(b: &[f64], s: f64) -> f64 {
    let n = b.len();
    if s <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    // signed sum over subsets: (-1)^{|S|} (s - b_S)_+^{n-1} / (n-1)!
    let mut fact = 1.0;
    for k in 1..n {
        fact *= k as f64;
    }
    for mask in 0u32..(1u32 << n) {
        let mut b_s = 0.0;
        let mut sign = 1.0;
        for (i, &bi) in b.iter().enumerate() {
            if mask & (1 << i) != 0 {
                b_s += bi;
                sign = -sign;
            }
        }
        let t = s - b_s;
        if t > 0.0 {
            total += sign * t.powi(n as i32 - 1);
        }
    }
    total / fact
}

/// `kappa(z) = int_{[0,b]} g_u(z) du` for an additive stable process with
/// `N` axes in `R^d`, evaluated through a shared density table.
#[derive(Debug, Clone)]
pub struct Kappa {
    table: Arc<StableDensity>,
    box_upper: Vec<f64>,
    /// fitted near-zero coefficient of `A z^{-(d - alpha N)}`
    near_coef: f64,
    near_cutoff: f64,
}

impl Kappa {
    /// The near-zero power law `A z^{-(d - alpha N)}` is fitted (and used
    /// below the cutoff) only in the `d > alpha N` regime; otherwise every
    /// evaluation goes through quadrature.
    pub fn new(table: Arc<StableDensity>, box_upper: Vec<f64>) -> Result<Self, QuadError> {
        assert!(!box_upper.is_empty());
        let alpha = table.alpha();
        let d = table.d() as f64;
        let n_axes = box_upper.len() as f64;
        let mut k = Self {
            table,
            box_upper,
            near_coef: 0.0,
            near_cutoff: 0.0,
        };
        if d > alpha * n_axes + 1e-9 {
            // fit A on [1e-4, 1e-2] with the exact exponent
            let expo = d - alpha * n_axes;
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for i in 0..12 {
                let z = 1e-4 * (100.0_f64).powf(i as f64 / 11.0);
                let v = k.eval_by_quadrature(z)?;
                acc += v * z.powf(expo);
                cnt += 1.0;
            }
            k.near_coef = acc / cnt;
            k.near_cutoff = 1e-4;
        }
        Ok(k)
    }

    pub fn alpha(&self) -> f64 {
        self.table.alpha()
    }

    pub fn n_axes(&self) -> usize {
        self.box_upper.len()
    }

    pub fn d(&self) -> usize {
        self.table.d()
    }

    pub fn near_coef(&self) -> f64 {
        self.near_coef
    }

    /// Direct quadrature in the substituted variable (log abscissa).
    pub fn eval_by_quadrature(&self, z: f64) -> Result<f64, QuadError> {
        let z = z.abs();
        if z == 0.0 {
            return Ok(f64::INFINITY);
        }
        let alpha = self.table.alpha();
        let d = self.table.d() as f64;
        let s_max: f64 = self.box_upper.iter().sum();
        let v_min = z * s_max.powf(-1.0 / alpha);
        // integrand in w = ln v: V((z/v)^alpha) v^{d-alpha} g(v)
        let table = &self.table;
        let b = &self.box_upper;
        let f = move |w: f64| -> f64 {
            let v = w.exp();
            let s = (z / v).powf(alpha);
            box_sum_volume_density(b, s) * v.powf(d - alpha) * table.eval(v)
        };
        // the integrand decays like exp(-2 alpha w) in w = ln v; run far
        // enough into the tail that the truncated mass is negligible
        let w_lo = v_min.ln();
        let w_hi = (self.table.grid_max().max(4.0 * v_min)).ln() + 24.0 / (2.0 * alpha);
        let val = adaptive_gk15(&f, w_lo, w_hi, 1e-9, 1e-300)?;
        Ok(alpha * z.powf(alpha - d) * val)
    }

    /// Resolvent value, switching to the fitted power law below the cutoff
    /// (when one exists).
    pub fn eval(&self, z: f64) -> f64 {
        let z = z.abs();
        if z == 0.0 {
            return f64::INFINITY;
        }
        if z < self.near_cutoff {
            let expo = self.table.d() as f64 - self.alpha() * self.n_axes() as f64;
            return self.near_coef * z.powf(-expo);
        }
        self.eval_by_quadrature(z).unwrap_or(f64::NAN)
    }
}

/// 1-potential density `upsilon(x) = int_0^inf g_t(x) e^{-t} dt` for the
/// symmetric stable process on the line (`d = 1`, `alpha` in `(0, 1)`).
#[derive(Debug, Clone)]
pub struct Upsilon {
    table: Arc<StableDensity>,
}

impl Upsilon {
    pub fn new(table: Arc<StableDensity>) -> Self {
        assert_eq!(table.d(), 1, "upsilon is a d = 1 object");
        assert!(
            table.alpha() > 0.0 && table.alpha() < 1.0,
            "upsilon requires alpha in (0, 1)"
        );
        Self { table }
    }

    pub fn alpha(&self) -> f64 {
        self.table.alpha()
    }

    /// `upsilon(x)`; `+inf` at `x = 0` by contract.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_checked(x).unwrap_or(f64::NAN)
    }

    pub fn eval_checked(&self, x: f64) -> Result<f64, QuadError> {
        let x = x.abs();
        if x == 0.0 {
            return Ok(f64::INFINITY);
        }
        let alpha = self.table.alpha();
        let table = &self.table;
        let xa = x.powf(alpha);
        // integrand in w = ln v: v^{1-alpha} g(v) exp(-x^alpha v^{-alpha})
        let f = move |w: f64| -> f64 {
            let v = w.exp();
            v.powf(1.0 - alpha) * table.eval(v) * (-xa * v.powf(-alpha)).exp()
        };
        // the double exponential kills v << x; in w = ln v the tail decays
        // like exp(-2 alpha w)
        let w_lo = (x * (1.0 / 32.0_f64).powf(1.0 / alpha)).ln();
        let w_hi = (self.table.grid_max().max(8.0 * x)).ln() + 24.0 / (2.0 * alpha);
        let val = adaptive_gk15(&f, w_lo, w_hi, 1e-9, 1e-300)?;
        Ok(alpha * x.powf(alpha - 1.0) * val)
    }
}
