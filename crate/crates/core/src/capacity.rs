//! Discrete thermal-capacity machinery: energies of weighted space-time
//! atoms under the heat-Riesz kernel family, quadratic-form minimization
//! over the probability simplex (Frank-Wolfe with away steps), natural
//! product-measure energies across refinement levels, and the Delta
//! (critical-exponent) estimator built on their growth.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fractal::{FractalError, ProductSetSpec};
use crate::kernels::{bessel_riesz_kernel_rho, energy_kernel_gamma, i_beta_kernel};

#[allow(unused_imports)]
use crate::math::FloatExt as _;

/// Dense kernel matrices are refused above this atom count.
pub const DENSE_ATOM_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    WeightSum(f64),
    NegativeWeight(usize),
    LengthMismatch,
    DuplicateAtom(usize, usize),
    NonPositiveTime(usize),
}

impl core::fmt::Display for MeasureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeasureError::WeightSum(s) => write!(f, "weights sum to {s}, expected 1"),
            MeasureError::NegativeWeight(i) => write!(f, "weight {i} is negative"),
            MeasureError::LengthMismatch => write!(f, "times/coords/weights lengths disagree"),
            MeasureError::DuplicateAtom(i, j) => write!(f, "atoms {i} and {j} coincide"),
            MeasureError::NonPositiveTime(i) => write!(f, "atom {i} has non-positive time"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MeasureError {}

/// Weighted atoms `(t_i, x_i)` on `(0, inf) x R^d` with weights on the
/// probability simplex. Coordinates are stored flat with stride `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    times: Vec<f64>,
    coords: Vec<f64>,
    d: usize,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(
        times: Vec<f64>,
        coords: Vec<f64>,
        d: usize,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if times.len() != weights.len() || coords.len() != times.len() * d {
            return Err(MeasureError::LengthMismatch);
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight(i));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MeasureError::WeightSum(sum));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0) {
                return Err(MeasureError::NonPositiveTime(i));
            }
        }
        Ok(Self {
            times,
            coords,
            d,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, MeasureError> {
        Self::new(self.times.clone(), self.coords.clone(), self.d, weights)
    }

    /// True iff all atom times are pairwise distinct (the diffuse proxy).
    pub fn diffuse_proxy(&self) -> bool {
        let mut ts = self.times.clone();
        ts.sort_by(f64::total_cmp);
        ts.windows(2).all(|w| w[0] != w[1])
    }

    /// Merge exactly coincident atoms, summing their weights.
    pub fn merge_duplicates(&self) -> Self {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            self.times[i]
                .total_cmp(&self.times[j])
                .then_with(|| {
                    for k in 0..self.d {
                        let c = self.coords[i * self.d + k].total_cmp(&self.coords[j * self.d + k]);
                        if c != core::cmp::Ordering::Equal {
                            return c;
                        }
                    }
                    core::cmp::Ordering::Equal
                })
        });
        let mut times = Vec::new();
        let mut coords = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for &i in &order {
            let same = !times.is_empty()
                && *times.last().unwrap() == self.times[i]
                && coords[coords.len() - self.d..] == self.coords[i * self.d..(i + 1) * self.d];
            if same {
                *weights.last_mut().unwrap() += self.weights[i];
            } else {
                times.push(self.times[i]);
                coords.extend_from_slice(self.coord(i));
                weights.push(self.weights[i]);
            }
        }
        Self {
            times,
            coords,
            d: self.d,
            weights,
        }
    }
}

/// Which kernel a report's value was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    /// Heat-Riesz kernel with exponent gamma.
    Gamma,
    /// Pure heat kernel in time with exponent beta/2 (`I_beta`).
    IBeta,
    /// Parabolic Bessel-Riesz `rho^{-tau}`.
    BesselRiesz,
}

/// Result of a discrete double-sum energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub kind: EnergyKind,
    pub exponent: f64,
    pub value: f64,
    pub atoms: usize,
    pub excluded_self_pairs: usize,
    pub degenerate_single_atom: bool,
}

fn double_sum<K: Fn(usize, usize) -> f64>(mu: &DiscreteMeasure, kernel: K) -> f64 {
    let n = mu.len();
    let w = mu.weights();
    let mut total = 0.0;
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        for j in (i + 1)..n {
            if w[j] == 0.0 {
                continue;
            }
            let k = kernel(i, j);
            if k == f64::INFINITY {
                return f64::INFINITY;
            }
            total += 2.0 * w[i] * w[j] * k;
        }
    }
    total
}

/// `E_gamma(mu)`: double sum of the heat-Riesz kernel over ordered pairs,
/// self-pairs excluded. `+inf` propagates.
pub fn energy(mu: &DiscreteMeasure, gamma: f64) -> EnergyReport {
    let value = double_sum(mu, |i, j| {
        energy_kernel_gamma(
            mu.times()[i],
            mu.coord(i),
            mu.times()[j],
            mu.coord(j),
            gamma,
        )
    });
    EnergyReport {
        kind: EnergyKind::Gamma,
        exponent: gamma,
        value,
        atoms: mu.len(),
        excluded_self_pairs: mu.len(),
        degenerate_single_atom: mu.len() == 1,
    }
}

/// `I_beta(mu)` (time-only heat kernel, `s != t` indicator).
pub fn i_beta_energy(mu: &DiscreteMeasure, beta: f64) -> EnergyReport {
    let value = double_sum(mu, |i, j| {
        i_beta_kernel(mu.times()[i], mu.coord(i), mu.times()[j], mu.coord(j), beta)
    });
    EnergyReport {
        kind: EnergyKind::IBeta,
        exponent: beta,
        value,
        atoms: mu.len(),
        excluded_self_pairs: mu.len(),
        degenerate_single_atom: mu.len() == 1,
    }
}

/// `Upsilon_tau(mu; rho)`: parabolic Bessel-Riesz energy.
pub fn upsilon_tau_energy(mu: &DiscreteMeasure, tau: f64) -> EnergyReport {
    let value = double_sum(mu, |i, j| {
        bessel_riesz_kernel_rho(mu.times()[i], mu.coord(i), mu.times()[j], mu.coord(j), tau)
    });
    EnergyReport {
        kind: EnergyKind::BesselRiesz,
        exponent: tau,
        value,
        atoms: mu.len(),
        excluded_self_pairs: mu.len(),
        degenerate_single_atom: mu.len() == 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapacityError {
    TooManyAtoms { atoms: usize, cap: usize },
    Fractal(FractalError),
    Measure(MeasureError),
    EmptyInput(&'static str),
}

impl core::fmt::Display for CapacityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CapacityError::TooManyAtoms { atoms, cap } => {
                write!(f, "dense kernel matrix refused: {atoms} atoms > cap {cap}")
            }
            CapacityError::Fractal(e) => write!(f, "{e}"),
            CapacityError::Measure(e) => write!(f, "{e}"),
            CapacityError::EmptyInput(what) => write!(f, "empty input: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CapacityError {}

impl From<FractalError> for CapacityError {
    fn from(e: FractalError) -> Self {
        CapacityError::Fractal(e)
    }
}

impl From<MeasureError> for CapacityError {
    fn from(e: MeasureError) -> Self {
        CapacityError::Measure(e)
    }
}

/// Frank-Wolfe stopping parameters.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            max_iters: 100_000,
        }
    }
}

/// Result of minimizing `w' K w` over the simplex.
#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub gamma: f64,
    pub minimal_energy: f64,
    /// `1 / minimal_energy`, `0` when the energy is `+inf`.
    pub capacity: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// Frank-Wolfe duality gap at termination.
    pub gap: f64,
    /// Atoms excluded because they participated in `+inf` kernel entries.
    pub excluded_atoms: Vec<usize>,
    pub degenerate_kernel: bool,
}

/// Dense symmetric kernel matrix with zero diagonal (self-pair exclusion).
pub fn kernel_matrix(mu: &DiscreteMeasure, gamma: f64) -> Result<Vec<f64>, CapacityError> {
    let n = mu.len();
    if n > DENSE_ATOM_CAP {
        return Err(CapacityError::TooManyAtoms {
            atoms: n,
            cap: DENSE_ATOM_CAP,
        });
    }
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = energy_kernel_gamma(
                mu.times()[i],
                mu.coord(i),
                mu.times()[j],
                mu.coord(j),
                gamma,
            );
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    Ok(k)
}

/// Minimize `w' K w` over the probability simplex by Frank-Wolfe with away
/// steps and exact line search. `K` is `n x n`, symmetric, zero diagonal.
///
/// Atoms touching `+inf` off-diagonal entries are greedily removed first
/// (the optimizer restricts to weights avoiding those pairs) and reported.
pub fn min_energy_from_matrix(
    k: &[f64],
    n: usize,
    gamma: f64,
    opts: SolverOptions,
) -> Result<CapacityReport, CapacityError> {
    if n == 0 {
        return Err(CapacityError::EmptyInput("atoms"));
    }
    // restrict away +inf pairs: repeatedly drop the atom in most infinite pairs
    let mut active: Vec<bool> = vec![true; n];
    let mut excluded: Vec<usize> = Vec::new();
    loop {
        let mut worst = (0usize, 0usize);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let cnt = (0..n)
                .filter(|&j| active[j] && j != i && k[i * n + j] == f64::INFINITY)
                .count();
            if cnt > worst.1 {
                worst = (i, cnt);
            }
        }
        if worst.1 == 0 {
            break;
        }
        active[worst.0] = false;
        excluded.push(worst.0);
    }
    let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
    let m = idx.len();
    let mut w = vec![0.0; n];
    let uniform = 1.0 / m as f64;
    for &i in &idx {
        w[i] = uniform;
    }

    let kw = |w: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.resize(n, 0.0);
        for &i in &idx {
            let wi = w[i];
            if wi == 0.0 {
                continue;
            }
            let row = &k[i * n..(i + 1) * n];
            for &j in &idx {
                out[j] += row[j] * wi;
            }
        }
    };

    let mut g = Vec::new();
    kw(&w, &mut g);
    let mut f: f64 = idx.iter().map(|&i| w[i] * g[i]).sum();
    let mut iters = 0;
    let mut gap = f64::INFINITY;
    while iters < opts.max_iters {
        iters += 1;
        // toward-vertex: smallest gradient component; away-vertex: largest on support
        let s = *idx
            .iter()
            .min_by(|&&a, &&b| g[a].total_cmp(&g[b]))
            .expect("nonempty");
        let a = *idx
            .iter()
            .filter(|&&i| w[i] > 0.0)
            .max_by(|&&x, &&y| g[x].total_cmp(&g[y]))
            .expect("nonempty support");
        gap = 2.0 * (f - g[s]);
        if gap <= opts.gap_tol * (1.0 + f.abs()) {
            break;
        }
        // choose between FW direction (e_s - w) and away direction (w - e_a)
        let fw_improve = f - g[s];
        let away_improve = g[a] - f;
        let use_away = away_improve > fw_improve && w[a] < 1.0;
        if use_away {
            // direction d = w - e_a, max step alpha/(1-alpha) form
            let gamma_max = w[a] / (1.0 - w[a]);
            // f(w + t d) = f + 2 t (f - g[a]) + t^2 (f - 2 g[a] + k_aa), k_aa = 0
            let b_lin = f - g[a];
            let c_quad = f - 2.0 * g[a];
            let t = optimal_step(b_lin, c_quad, gamma_max);
            if t == 0.0 {
                break;
            }
            for &i in &idx {
                w[i] *= 1.0 + t;
            }
            w[a] -= t;
            if w[a] < 1e-18 {
                w[a] = 0.0;
            }
        } else {
            // d = e_s - w: f(w + t d) = f + 2 t (g[s] - f) + t^2 (f - 2 g[s])
            let b_lin = g[s] - f;
            let c_quad = f - 2.0 * g[s];
            let t = optimal_step(b_lin, c_quad, 1.0);
            if t == 0.0 {
                break;
            }
            for &i in &idx {
                w[i] *= 1.0 - t;
            }
            w[s] += t;
        }
        kw(&w, &mut g);
        f = idx.iter().map(|&i| w[i] * g[i]).sum();
    }
    let minimal = f.max(0.0);
    let degenerate = minimal == 0.0 || m <= 1;
    Ok(CapacityReport {
        gamma,
        minimal_energy: minimal,
        capacity: if minimal > 0.0 { 1.0 / minimal } else { f64::INFINITY },
        weights: w,
        iterations: iters,
        gap: gap.max(0.0),
        excluded_atoms: excluded,
        degenerate_kernel: degenerate,
    })
}

/// Exact minimizer of `2 b t + c t^2` over `[0, t_max]`.
fn optimal_step(b: f64, c: f64, t_max: f64) -> f64 {
    if c > 0.0 {
        let t = -b / c;
        if t <= 0.0 {
            // increasing at 0; check endpoint anyway
            if 2.0 * b * t_max + c * t_max * t_max < 0.0 {
                t_max
            } else {
                0.0
            }
        } else {
            t.min(t_max)
        }
    } else {
        // concave (or linear): best at an endpoint
        if 2.0 * b * t_max + c * t_max * t_max < 0.0 {
            t_max
        } else {
            0.0
        }
    }
}

/// `min_energy` over the simplex on the atoms of `mu` (weights re-optimized).
pub fn min_energy(
    mu: &DiscreteMeasure,
    gamma: f64,
    opts: SolverOptions,
) -> Result<CapacityReport, CapacityError> {
    let k = kernel_matrix(mu, gamma)?;
    min_energy_from_matrix(&k, mu.len(), gamma, opts)
}

/// Level-`n` natural-measure energy of a product spec, factorized through
/// pairwise-difference multisets. Zero space distances between distinct
/// atoms are evaluated at the level-`n` space-cell diameter (cell-averaged
/// kernel); degenerate point specs keep the genuine singularity.
#[derive(Debug, Clone)]
pub struct ProductLevelEnergy {
    level: u32,
    d: usize,
    /// positive time differences with ordered-pair multiplicities
    time_diffs: Vec<(f64, f64)>,
    /// squared space distances (regularized) with multiplicities; empty for point sets
    radial_sq: Vec<(f64, f64)>,
    /// weight of exactly-zero space distance among ordered pairs (point sets)
    point_set: bool,
    atom_count: f64,
    cell_diameter: f64,
}

impl ProductLevelEnergy {
    pub fn build(product: &ProductSetSpec, level: u32) -> Result<Self, CapacityError> {
        let d = product.d();
        let tdiff = product.time().diff_multiset(level)?;
        let time_diffs: Vec<(f64, f64)> = tdiff
            .iter()
            .filter(|&&(v, _)| v > 0.0)
            .map(|&(v, w)| (v, w))
            .collect();
        let n_time = product.time().cell_count(level) as f64;
        let point_set = product.space_is_point();
        let cell = product.space_cell_diameter(level);
        let mut radial_sq: Vec<(f64, f64)> = Vec::new();
        let mut n_space = 1.0;
        if !point_set {
            // combine per-axis folded difference multisets into squared radii
            let mut acc: Vec<(f64, f64)> = vec![(0.0, 1.0)];
            for ax in product.space() {
                let diffs = ax.diff_multiset(level)?;
                n_space *= ax.cell_count(level) as f64;
                let mut next: Vec<(f64, f64)> = Vec::with_capacity(acc.len() * diffs.len());
                for &(r2, w) in &acc {
                    for &(v, wv) in &diffs {
                        // the folded multiset already counts ordered pairs
                        next.push((r2 + v * v, w * wv));
                    }
                }
                if next.len() as u128 > crate::fractal::ATOM_CAP {
                    return Err(CapacityError::TooManyAtoms {
                        atoms: next.len(),
                        cap: crate::fractal::ATOM_CAP as usize,
                    });
                }
                next.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
                let tol = 1e-14;
                for (v, w) in next {
                    match merged.last_mut() {
                        Some(last) if (v - last.0).abs() <= tol * (1.0 + v) => last.1 += w,
                        _ => merged.push((v, w)),
                    }
                }
                acc = merged;
            }
            // regularize the zero-distance bucket at the cell diameter
            for e in acc.iter_mut() {
                if e.0 == 0.0 {
                    e.0 = cell * cell;
                }
            }
            acc.sort_by(|x, y| x.0.total_cmp(&y.0));
            radial_sq = acc;
        } else {
            for ax in product.space() {
                n_space *= ax.cell_count(level) as f64;
            }
        }
        Ok(Self {
            level,
            d,
            time_diffs,
            radial_sq,
            point_set,
            atom_count: n_time * n_space,
            cell_diameter: cell,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn atom_count(&self) -> f64 {
        self.atom_count
    }

    pub fn cell_diameter(&self) -> f64 {
        self.cell_diameter
    }

    /// Evaluate `e_n(gamma)` for every gamma in one pass: the heat factor
    /// `B(a) = sum_dt mult exp(-a^2/(2 dt)) dt^{-d/2}` is gamma-independent.
    pub fn eval(&self, gammas: &[f64]) -> Vec<f64> {
        let norm = 1.0 / (self.atom_count * self.atom_count);
        if self.point_set {
            // all pairs have zero space distance: +inf for gamma > 0,
            // pure time sums for gamma = 0
            let e0: f64 = self
                .time_diffs
                .iter()
                .map(|&(dt, m)| m * dt.powf(-(self.d as f64) / 2.0))
                .sum::<f64>()
                * norm;
            return gammas
                .iter()
                .map(|&g| if g > 0.0 { f64::INFINITY } else { e0 })
                .collect();
        }
        let mut heat = vec![0.0_f64; self.radial_sq.len()];
        let half_d = -(self.d as f64) / 2.0;
        for &(dt, m) in &self.time_diffs {
            let pref = m * dt.powf(half_d);
            let inv = -0.5 / dt;
            for (h, &(r2, _)) in heat.iter_mut().zip(self.radial_sq.iter()) {
                *h += pref * (r2 * inv).exp();
            }
        }
        gammas
            .iter()
            .map(|&g| {
                let mut total = 0.0;
                for (&(r2, w), &h) in self.radial_sq.iter().zip(heat.iter()) {
                    let riesz = if g == 0.0 { 1.0 } else { r2.powf(-0.5 * g) };
                    total += w * h * riesz;
                }
                total * norm
            })
            .collect()
    }
}

fn median_sorted(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-gamma classification in a `DeltaEstimate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Finite,
    Infinite,
}

/// Critical-exponent estimate for `sup { gamma : inf E_gamma < inf }`.
#[derive(Debug, Clone)]
pub struct DeltaEstimate {
    pub gammas: Vec<f64>,
    pub levels: Vec<u32>,
    /// energies\[i\]\[j\] = e_{levels\[i\]}(gammas\[j\])
    pub energies: Vec<Vec<f64>>,
    pub classes: Vec<GrowthClass>,
    pub delta: f64,
    pub boundary_low: bool,
    pub boundary_high: bool,
    pub monotone: bool,
    pub notes: Vec<String>,
}

/// Classification rule parameters (see module docs): a gamma is FINITE when
/// the median of the top-half increment ratios, deflated by the d=2
/// heat-kernel log factor, stays below 1.
#[derive(Debug, Clone, Copy)]
pub struct DeltaRule {
    pub converged_rel: f64,
    pub ratio_threshold: f64,
}

impl Default for DeltaRule {
    fn default() -> Self {
        Self {
            converged_rel: 1e-3,
            ratio_threshold: 1.0,
        }
    }
}

fn classify_growth(levels: &[u32], energies: &[f64], d: usize, rule: DeltaRule) -> GrowthClass {
    if energies.iter().any(|e| !e.is_finite()) {
        return GrowthClass::Infinite;
    }
    let n = energies.len();
    if n < 3 {
        return GrowthClass::Finite;
    }
    let inc: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let last = energies[n - 1].abs().max(1e-300);
    if inc[inc.len() - 1].abs() <= rule.converged_rel * last
        && inc[inc.len() - 2].abs() <= rule.converged_rel * last
    {
        return GrowthClass::Finite;
    }
    let mut ratios: Vec<f64> = Vec::with_capacity(inc.len() - 1);
    for i in 1..inc.len() {
        if inc[i - 1] <= 0.0 {
            continue;
        }
        let mut r = inc[i] / inc[i - 1];
        if d == 2 {
            // divergent d=2 increments grow like n * lambda^n (the heat
            // kernel's time integral is logarithmic); deflate accordingly
            let upper = levels[i + 1] as f64;
            r *= (upper - 1.0) / upper;
        }
        ratios.push(r);
    }
    if ratios.is_empty() {
        return GrowthClass::Finite;
    }
    let top = ratios[ratios.len() / 2..].to_vec();
    if median_sorted(top) < rule.ratio_threshold {
        GrowthClass::Finite
    } else {
        GrowthClass::Infinite
    }
}

/// Estimate Delta over a gamma grid from natural-measure energies across
/// refinement levels.
pub fn estimate_delta(
    product: &ProductSetSpec,
    gammas: &[f64],
    levels: &[u32],
    rule: DeltaRule,
) -> Result<DeltaEstimate, CapacityError> {
    if gammas.is_empty() {
        return Err(CapacityError::EmptyInput("gamma grid"));
    }
    if levels.len() < 4 {
        return Err(CapacityError::EmptyInput("need a level range of >= 4 levels"));
    }
    let mut energies = Vec::with_capacity(levels.len());
    for &lv in levels {
        let pe = ProductLevelEnergy::build(product, lv)?;
        energies.push(pe.eval(gammas));
    }
    let d = product.d();
    let mut classes = Vec::with_capacity(gammas.len());
    for j in 0..gammas.len() {
        let col: Vec<f64> = energies.iter().map(|row| row[j]).collect();
        classes.push(classify_growth(levels, &col, d, rule));
    }
    // find last FINITE and first INFINITE
    let mut last_fin: Option<usize> = None;
    let mut first_inf: Option<usize> = None;
    for (j, c) in classes.iter().enumerate() {
        match c {
            GrowthClass::Finite => last_fin = Some(j),
            GrowthClass::Infinite => {
                if first_inf.is_none() {
                    first_inf = Some(j);
                }
            }
        }
    }
    let monotone = match (last_fin, first_inf) {
        (Some(lf), Some(fi)) => lf + 1 == fi || lf < fi,
        _ => true,
    };
    let mut notes = Vec::new();
    let (delta, boundary_low, boundary_high) = match (last_fin, first_inf) {
        (None, _) => {
            // sup of the empty set is 0
            notes.push(String::from("no finite gamma on the grid; sup emptyset = 0"));
            (0.0, true, false)
        }
        (Some(_), None) => {
            notes.push(String::from("grid exhausted on the finite side"));
            (gammas[gammas.len() - 1], false, true)
        }
        (Some(lf), Some(fi)) => {
            if !monotone {
                notes.push(String::from(
                    "non-monotone classification; delta taken at the first transition",
                ));
                let first_trans = classes
                    .windows(2)
                    .position(|w| w[0] == GrowthClass::Finite && w[1] == GrowthClass::Infinite)
                    .map(|i| 0.5 * (gammas[i] + gammas[i + 1]))
                    .unwrap_or(0.5 * (gammas[lf] + gammas[fi]));
                (first_trans, false, false)
            } else {
                (0.5 * (gammas[lf] + gammas[fi]), false, false)
            }
        }
    };
    Ok(DeltaEstimate {
        gammas: gammas.to_vec(),
        levels: levels.to_vec(),
        energies,
        classes,
        delta,
        boundary_low,
        boundary_high,
        monotone,
        notes,
    })
}

/// Thermal-capacity positivity report.
#[derive(Debug, Clone)]
pub struct ThermalCapacityReport {
    pub positive: bool,
    pub levels: Vec<u32>,
    pub energies: Vec<f64>,
    pub increment_ratios: Vec<f64>,
    pub space_has_positive_length: bool,
}

/// Positivity of the thermal capacity of `E x F`: true iff `e_n(0)` stays
/// bounded across levels (increment ratios below 0.9; a logarithmically
/// divergent sequence has ratios near 1).
pub fn thermal_capacity_positive(
    product: &ProductSetSpec,
    levels: &[u32],
) -> Result<ThermalCapacityReport, CapacityError> {
    if levels.len() < 4 {
        return Err(CapacityError::EmptyInput("need a level range of >= 4 levels"));
    }
    let mut energies = Vec::with_capacity(levels.len());
    for &lv in levels {
        let pe = ProductLevelEnergy::build(product, lv)?;
        energies.push(pe.eval(&[0.0])[0]);
    }
    let inc: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = inc
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let last = energies.last().unwrap().abs().max(1e-300);
    let converged = inc.last().map(|v| v.abs() <= 1e-3 * last).unwrap_or(false);
    let positive = if energies.iter().any(|e| !e.is_finite()) {
        false
    } else if converged {
        true
    } else {
        median_sorted(ratios[ratios.len() / 2..].to_vec()) < 0.9
    };
    Ok(ThermalCapacityReport {
        positive,
        levels: levels.to_vec(),
        energies,
        increment_ratios: ratios,
        space_has_positive_length: !product.space_is_point(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::SelfSimilarSpec;

    fn two_atom_measure() -> DiscreteMeasure {
        DiscreteMeasure::new(
            vec![1.0, 2.0],
            vec![0.0, 1.0],
            1,
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn two_atom_energy_hand_value() {
        // 2 * (1/4) * exp(-1/2) = 0.3032653...
        let e = energy(&two_atom_measure(), 0.5);
        assert!((e.value - 0.3032653298563167).abs() < 1e-12, "{}", e.value);
    }

    #[test]
    fn single_atom_energy_zero() {
        let mu = DiscreteMeasure::new(vec![1.0], vec![0.3], 1, vec![1.0]).unwrap();
        let e = energy(&mu, 0.7);
        assert_eq!(e.value, 0.0);
        assert!(e.degenerate_single_atom);
    }

    #[test]
    fn equal_space_pairs_are_infinite() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.0, 0.0], 1, vec![0.5, 0.5]).unwrap();
        assert_eq!(energy(&mu, 0.5).value, f64::INFINITY);
        assert!(energy(&mu, 0.0).value.is_finite());
    }

    #[test]
    fn fw_two_atoms_symmetric_stays_uniform() {
        let mu = two_atom_measure();
        let rep = min_energy(&mu, 0.5, SolverOptions::default()).unwrap();
        assert!((rep.weights[0] - 0.5).abs() < 1e-12);
        assert!((rep.weights[1] - 0.5).abs() < 1e-12);
        assert!(rep.gap <= 1e-8 * (1.0 + rep.minimal_energy));
    }

    #[test]
    fn fw_zero_kernel_degenerate() {
        // gamma = 0, equal times, distinct space -> zero kernel
        let mu =
            DiscreteMeasure::new(vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0], 1, vec![1.0 / 3.0; 3])
                .unwrap();
        let rep = min_energy(&mu, 0.0, SolverOptions::default()).unwrap();
        assert_eq!(rep.minimal_energy, 0.0);
        assert_eq!(rep.capacity, f64::INFINITY);
        assert!(rep.degenerate_kernel);
    }

    #[test]
    fn fw_certificate_holds() {
        // random-ish fixed instance
        let mu = DiscreteMeasure::new(
            vec![1.0, 1.3, 1.7, 2.1],
            vec![0.1, 0.9, 0.4, 0.6],
            1,
            vec![0.25; 4],
        )
        .unwrap();
        let k = kernel_matrix(&mu, 0.5).unwrap();
        let rep = min_energy_from_matrix(&k, 4, 0.5, SolverOptions::default()).unwrap();
        // min_i (Kw)_i >= w'Kw - gap
        let n = 4;
        let kw: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| k[i * n + j] * rep.weights[j]).sum())
            .collect();
        let f: f64 = (0..n).map(|i| rep.weights[i] * kw[i]).sum();
        let min_kw = kw.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_kw >= f - rep.gap - 1e-12);
    }

    #[test]
    fn product_energy_matches_direct_sum() {
        // small level where the direct O(M^2) sum is feasible; the kernel's
        // zero-space-distance pairs are regularized at the cell diameter, so
        // the direct sum below uses the same convention
        let p = ProductSetSpec::new(
            SelfSimilarSpec::interval(1.0, 2.0),
            vec![SelfSimilarSpec::middle_thirds(0.0, 1.0)],
        )
        .unwrap();
        let level = 3;
        let pe = ProductLevelEnergy::build(&p, level).unwrap();
        let gammas = [0.0, 0.4, 0.8];
        let fast = pe.eval(&gammas);
        let mu = p.natural_measure(level).unwrap();
        let cell = p.space_cell_diameter(level);
        for (g, fv) in gammas.iter().zip(fast.iter()) {
            let mut slow = 0.0;
            for i in 0..mu.len() {
                for j in 0..mu.len() {
                    if i == j {
                        continue;
                    }
                    let dt = (mu.times()[i] - mu.times()[j]).abs();
                    if dt == 0.0 {
                        continue;
                    }
                    let mut r = (mu.coords()[i] - mu.coords()[j]).abs();
                    if r == 0.0 {
                        r = cell;
                    }
                    slow += mu.weights()[i]
                        * mu.weights()[j]
                        * (-r * r / (2.0 * dt)).exp()
                        * dt.powf(-0.5)
                        * r.powf(-g);
                }
            }
            assert!(
                (slow - fv).abs() < 1e-9 * (1.0 + slow.abs()),
                "gamma={g}: fast {fv} vs slow {slow}"
            );
        }
    }

    #[test]
    fn point_set_energies() {
        let p = ProductSetSpec::new(
            SelfSimilarSpec::interval(0.5, 1.0),
            vec![SelfSimilarSpec::point(0.0)],
        )
        .unwrap();
        let pe = ProductLevelEnergy::build(&p, 4).unwrap();
        let vals = pe.eval(&[0.0, 0.3]);
        assert!(vals[0].is_finite() && vals[0] > 0.0);
        assert_eq!(vals[1], f64::INFINITY);
    }
}
