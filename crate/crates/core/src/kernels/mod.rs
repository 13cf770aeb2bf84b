//! Deterministic kernels: the heat kernel with its time indicator, the
//! heat-Riesz energy kernel family, parabolic Bessel-Riesz kernels,
//! mollifiers (ball self-convolution and Gaussian) and their quadrature
//! smoothings, plus tabulated stable densities with resolvent (`kappa`) and
//! 1-potential (`upsilon`) integrals in the submodules.

mod resolvent;
mod stable;

pub use resolvent::{Kappa, Upsilon};
pub use stable::{stable_density_scaled, StableDensity, StableDensityOptions};

pub use crate::math::{bessel_j0, erf, normal_cdf};

use crate::parabolic::rho;
use crate::quad::{adaptive_gk15, QuadError};

#[allow(unused_imports)]
use crate::math::FloatExt as _;

use core::f64::consts::PI;

/// Squared Euclidean distance of two coordinate slices.
#[inline]
pub(crate) fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let d = a - b;
        s += d * d;
    }
    s
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // nu_d = pi^{d/2} / Gamma(d/2 + 1), computed by the half-integer recursion
    let mut g = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    // Gamma(d/2 + 1) from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)
    let mut z = if d % 2 == 0 { 1.0 } else { 0.5 };
    while z < d as f64 / 2.0 + 1.0 - 0.5 {
        g *= z;
        z += 1.0;
    }
    PI.powf(d as f64 / 2.0) / g
}

/// Heat kernel `p_t(x) = (2 pi t)^{-d/2} exp(-||x||^2/(2t))` for `t > 0`,
/// and `0` for `t <= 0` (the time indicator is part of the kernel).
pub fn heat_kernel(t: f64, x: &[f64]) -> f64 {
    heat_kernel_radial_sq(t, dist_sq(x, &alloc::vec![0.0; x.len()]), x.len())
}

/// Radial heat kernel taking the squared norm directly.
#[inline]
pub fn heat_kernel_radial_sq(t: f64, r_sq: f64, d: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (2.0 * PI * t).powf(-(d as f64) / 2.0) * (-r_sq / (2.0 * t)).exp()
}

/// The Theorem-1.3 energy kernel
/// `exp(-||x-y||^2 / (2|t-s|)) / (|t-s|^{d/2} ||x-y||^gamma)`.
///
/// Contract at singularities: `0` when `s = t, x != y` (continuous limit);
/// `+inf` at coincident points.
pub fn energy_kernel_gamma(s: f64, x: &[f64], t: f64, y: &[f64], gamma: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let d = x.len() as f64;
    let u = (t - s).abs();
    let r_sq = dist_sq(x, y);
    if u == 0.0 {
        return if r_sq == 0.0 { f64::INFINITY } else { 0.0 };
    }
    if r_sq == 0.0 {
        return if gamma > 0.0 {
            f64::INFINITY
        } else {
            u.powf(-d / 2.0)
        };
    }
    let riesz = if gamma == 0.0 {
        1.0
    } else {
        r_sq.powf(-0.5 * gamma)
    };
    (-r_sq / (2.0 * u)).exp() * u.powf(-d / 2.0) * riesz
}

/// `I_beta` kernel `exp(-||x-y||^2/(2|t-s|)) / |t-s|^{beta/2}` with the
/// `s != t` indicator.
pub fn i_beta_kernel(s: f64, x: &[f64], t: f64, y: &[f64], beta: f64) -> f64 {
    let u = (t - s).abs();
    if u == 0.0 {
        return 0.0;
    }
    (-dist_sq(x, y) / (2.0 * u)).exp() * u.powf(-0.5 * beta)
}

/// Space-time Bessel-Riesz kernel `rho((s,x),(t,y))^{-tau}`; `+inf` on the
/// diagonal.
pub fn bessel_riesz_kernel_rho(s: f64, x: &[f64], t: f64, y: &[f64], tau: f64) -> f64 {
    let r = rho(s, x, t, y);
    if r == 0.0 {
        return f64::INFINITY;
    }
    r.powf(-tau)
}

/// Mollifier family: normalized ball-indicator self-convolution or the
/// centered Gaussian of scale `eps`. Both integrate to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    Ball,
    Gaussian,
}

/// Normalized ball indicator `f_eps = 1_{B(0,eps)} / (nu_d eps^d)`.
pub fn ball_density(eps: f64, z: &[f64]) -> f64 {
    let d = z.len();
    if dist_sq(z, &alloc::vec![0.0; d]) <= eps * eps {
        1.0 / (unit_ball_volume(d) * eps.powi(d as i32))
    } else {
        0.0
    }
}

/// Mollifier value at `z`.
pub fn mollifier(kind: MollifierKind, eps: f64, z: &[f64]) -> f64 {
    let d = z.len();
    let r = dist_sq(z, &alloc::vec![0.0; d]).sqrt();
    match kind {
        MollifierKind::Gaussian => gaussian_mollifier_radial(eps, r, d),
        MollifierKind::Ball => ball_convolution_radial(eps, r, d),
    }
}

/// Gaussian mollifier `(2 pi eps^2)^{-d/2} exp(-r^2/(2 eps^2))`.
pub fn gaussian_mollifier_radial(eps: f64, r: f64, d: usize) -> f64 {
    (2.0 * PI * eps * eps).powf(-(d as f64) / 2.0) * (-r * r / (2.0 * eps * eps)).exp()
}

/// `(f_eps * f_eps)(z)` for the normalized ball indicator: the overlap
/// volume of two eps-balls at distance `r`, normalized by `(nu_d eps^d)^2`.
pub fn ball_convolution_radial(eps: f64, r: f64, d: usize) -> f64 {
    if r >= 2.0 * eps {
        return 0.0;
    }
    let overlap = match d {
        // two intervals [-eps, eps]: overlap length 2 eps - r
        1 => 2.0 * eps - r,
        // lens area of two discs of radius eps at distance r
        2 => {
            let h = 0.5 * r / eps;
            2.0 * eps * eps * h.acos() - 0.5 * r * (4.0 * eps * eps - r * r).sqrt()
        }
        // two spherical caps of height eps - r/2
        3 => {
            let h = eps - 0.5 * r;
            2.0 * PI * h * h * (eps - h / 3.0)
        }
        _ => panic!("ball mollifier implemented for d <= 3"),
    };
    let norm = unit_ball_volume(d) * eps.powi(d as i32);
    overlap / (norm * norm)
}

/// `(phi_eps * p_tau)(u)` for the Gaussian mollifier, by quadrature over the
/// mollifier's radial profile (d = 1 closed convolution domain; d <= 2 by
/// iterated 1-D quadrature). `tau <= 0` gives 0 (the heat kernel's indicator
/// survives space convolution).
pub fn gaussian_smoothed_heat(eps: f64, tau: f64, u: &[f64], tol: f64) -> Result<f64, QuadError> {
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let d = u.len();
    match d {
        1 => {
            let u0 = u[0];
            let f = move |w: f64| {
                gaussian_mollifier_radial(eps, w.abs(), 1) * heat_kernel_radial_sq(tau, (u0 - w) * (u0 - w), 1)
            };
            let span = 8.0 * eps.max(tau.sqrt());
            adaptive_gk15(&f, u0 - span, u0 + span, tol, tol * 1e-3)
        }
        2 => {
            let (u0, u1) = (u[0], u[1]);
            let span = 8.0 * eps.max(tau.sqrt());
            let outer = move |w0: f64| {
                let inner = move |w1: f64| {
                    gaussian_mollifier_radial(eps, (w0 * w0 + w1 * w1).sqrt(), 2)
                        * heat_kernel_radial_sq(
                            tau,
                            (u0 - w0) * (u0 - w0) + (u1 - w1) * (u1 - w1),
                            2,
                        )
                };
                adaptive_gk15(&inner, -span, span, tol * 10.0, tol * 1e-2).unwrap_or(f64::NAN)
            };
            adaptive_gk15(&outer, -span, span, tol, tol * 1e-3)
        }
        _ => panic!("smoothed heat kernel implemented for d <= 2"),
    }
}

/// `(phi_eps * kappa)(u)` for the Gaussian mollifier and a radial kernel
/// `kappa`, by quadrature.
pub fn gaussian_smoothed_radial<K: Fn(f64) -> f64>(
    eps: f64,
    kappa: K,
    u: &[f64],
    tol: f64,
) -> Result<f64, QuadError> {
    let d = u.len();
    match d {
        1 => {
            let u0 = u[0];
            let span = 10.0 * eps;
            let f = move |w: f64| gaussian_mollifier_radial(eps, w.abs(), 1) * kappa((u0 - w).abs());
            adaptive_gk15(&f, u0 - span, u0 + span, tol, tol * 1e-3)
        }
        2 => {
            let (u0, u1) = (u[0], u[1]);
            let span = 10.0 * eps;
            let outer = move |w0: f64| {
                let k = &kappa;
                let inner = move |w1: f64| {
                    gaussian_mollifier_radial(eps, (w0 * w0 + w1 * w1).sqrt(), 2)
                        * k(((u0 - w0) * (u0 - w0) + (u1 - w1) * (u1 - w1)).sqrt())
                };
                adaptive_gk15(&inner, -span, span, tol * 10.0, tol * 1e-2).unwrap_or(f64::NAN)
            };
            adaptive_gk15(&outer, -span, span, tol, tol * 1e-3)
        }
        _ => panic!("smoothed radial kernel implemented for d <= 2"),
    }
}
