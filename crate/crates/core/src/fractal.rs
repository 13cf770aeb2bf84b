//! Self-similar 1-D test sets and their products.
//!
//! A set is kept symbolically as (ambient interval, contraction ratio, copy
//! count); level-n covers, natural (uniform self-similar) measures, distances
//! and pairwise-difference multisets are all resolved lazily from the digits.

use alloc::vec;
use alloc::vec::Vec;

use crate::capacity::DiscreteMeasure;

#[allow(unused_imports)]
use crate::math::FloatExt as _;

/// Construction or evaluation error for self-similar specs.
#[derive(Debug, Clone, PartialEq)]
pub enum FractalError {
    BadSpec(&'static str),
    LevelCapExceeded { level: u32, cap: u32 },
    TooManyAtoms { requested: u128, cap: u128 },
}

impl core::fmt::Display for FractalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FractalError::BadSpec(msg) => write!(f, "invalid spec: {msg}"),
            FractalError::LevelCapExceeded { level, cap } => {
                write!(f, "level {level} exceeds cap {cap}")
            }
            FractalError::TooManyAtoms { requested, cap } => {
                write!(f, "atom count {requested} exceeds cap {cap}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FractalError {}

/// Hard cap on enumerated atoms (natural measures, covers).
pub const ATOM_CAP: u128 = 10_000_000;

/// A compact self-similar subset of a closed interval: `copies` children,
/// each scaled by `ratio`, left child anchored at the left endpoint and right
/// child at the right endpoint, equally spaced in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarSpec {
    ambient: (f64, f64),
    ratio: f64,
    copies: u32,
    level_cap: u32,
}

impl SelfSimilarSpec {
    pub fn new(ambient: (f64, f64), ratio: f64, copies: u32) -> Result<Self, FractalError> {
        Self::with_level_cap(ambient, ratio, copies, 40)
    }

    pub fn with_level_cap(
        ambient: (f64, f64),
        ratio: f64,
        copies: u32,
        level_cap: u32,
    ) -> Result<Self, FractalError> {
        let (a, b) = ambient;
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(FractalError::BadSpec("ambient must be a finite interval [a, b]"));
        }
        if !(ratio > 0.0 && ratio <= 0.5) {
            return Err(FractalError::BadSpec("ratio must lie in (0, 1/2]"));
        }
        if copies == 0 {
            return Err(FractalError::BadSpec("copies must be >= 1"));
        }
        if copies as f64 * ratio > 1.0 + 1e-12 {
            return Err(FractalError::BadSpec("copies * ratio must be <= 1"));
        }
        Ok(Self {
            ambient,
            ratio,
            copies,
            level_cap,
        })
    }

    /// Middle-thirds Cantor set on `[a, b]`.
    pub fn middle_thirds(a: f64, b: f64) -> Self {
        Self::new((a, b), 1.0 / 3.0, 2).expect("valid middle-thirds spec")
    }

    /// The full interval `[a, b]` (two half-size copies tile it).
    pub fn interval(a: f64, b: f64) -> Self {
        Self::new((a, b), 0.5, 2).expect("valid interval spec")
    }

    /// Degenerate single point `{x}` (one copy, zero-length ambient).
    pub fn point(x: f64) -> Self {
        Self::new((x, x), 0.5, 1).expect("valid point spec")
    }

    pub fn ambient(&self) -> (f64, f64) {
        self.ambient
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn level_cap(&self) -> u32 {
        self.level_cap
    }

    pub fn ambient_len(&self) -> f64 {
        self.ambient.1 - self.ambient.0
    }

    pub fn is_point(&self) -> bool {
        self.copies == 1 && self.ambient_len() == 0.0
    }

    /// True when the children tile the ambient interval exactly.
    pub fn is_full_interval(&self) -> bool {
        (self.copies as f64 * self.ratio - 1.0).abs() < 1e-12 && self.ambient_len() > 0.0
    }

    /// Similarity dimension `log m / log(1/r)`.
    pub fn dimension(&self) -> f64 {
        if self.copies == 1 {
            return 0.0;
        }
        (self.copies as f64).ln() / (1.0 / self.ratio).ln()
    }

    /// Length of a level-`n` cell.
    pub fn cell_len(&self, level: u32) -> f64 {
        self.ambient_len() * self.ratio.powi(level as i32)
    }

    /// Number of level-`n` cells (`m^n`).
    pub fn cell_count(&self, level: u32) -> u128 {
        (self.copies as u128).pow(level)
    }

    /// Spacing between consecutive child anchors within a parent of length `len`.
    fn child_step(&self, len: f64) -> f64 {
        if self.copies <= 1 {
            0.0
        } else {
            len * (1.0 - self.ratio) / (self.copies as f64 - 1.0)
        }
    }

    fn check_level(&self, level: u32) -> Result<(), FractalError> {
        if level > self.level_cap {
            return Err(FractalError::LevelCapExceeded {
                level,
                cap: self.level_cap,
            });
        }
        if self.cell_count(level) > ATOM_CAP {
            return Err(FractalError::TooManyAtoms {
                requested: self.cell_count(level),
                cap: ATOM_CAP,
            });
        }
        Ok(())
    }

    /// Left endpoints of the level-`n` cells, in increasing order.
    pub fn cell_lefts(&self, level: u32) -> Result<Vec<f64>, FractalError> {
        self.check_level(level)?;
        let mut lefts = vec![self.ambient.0];
        let mut len = self.ambient_len();
        for _ in 0..level {
            let step = self.child_step(len);
            let mut next = Vec::with_capacity(lefts.len() * self.copies as usize);
            for &l in &lefts {
                for k in 0..self.copies {
                    next.push(l + k as f64 * step);
                }
            }
            lefts = next;
            len *= self.ratio;
        }
        Ok(lefts)
    }

    /// The level-`n` cover as closed intervals, ordered left to right.
    pub fn cover(&self, level: u32) -> Result<Vec<(f64, f64)>, FractalError> {
        let len = self.cell_len(level);
        Ok(self
            .cell_lefts(level)?
            .into_iter()
            .map(|l| (l, l + len))
            .collect())
    }

    /// Midpoints of the level-`n` cells (atoms of the natural measure).
    pub fn natural_midpoints(&self, level: u32) -> Result<Vec<f64>, FractalError> {
        let half = 0.5 * self.cell_len(level);
        Ok(self
            .cell_lefts(level)?
            .into_iter()
            .map(|l| l + half)
            .collect())
    }

    /// Exact distance from `x` to the level-`n` cover (branch-and-bound on the
    /// cell tree; `O(level)` in practice).
    pub fn distance_to_cover(&self, x: f64, level: u32) -> f64 {
        fn interval_dist(x: f64, lo: f64, hi: f64) -> f64 {
            (lo - x).max(x - hi).max(0.0)
        }
        fn go(
            spec: &SelfSimilarSpec,
            x: f64,
            left: f64,
            len: f64,
            depth: u32,
            best: &mut f64,
        ) {
            let d0 = interval_dist(x, left, left + len);
            if d0 >= *best {
                return;
            }
            if depth == 0 {
                *best = d0;
                return;
            }
            let step = spec.child_step(len);
            let clen = len * spec.ratio;
            // visit the child nearest to x first for tighter pruning
            let mut order: Vec<u32> = (0..spec.copies).collect();
            order.sort_by(|&i, &j| {
                let di = interval_dist(x, left + i as f64 * step, left + i as f64 * step + clen);
                let dj = interval_dist(x, left + j as f64 * step, left + j as f64 * step + clen);
                di.total_cmp(&dj)
            });
            for k in order {
                go(spec, x, left + k as f64 * step, clen, depth - 1, best);
            }
        }
        let level = level.min(self.level_cap);
        let mut best = f64::INFINITY;
        go(self, x, self.ambient.0, self.ambient_len(), level, &mut best);
        best
    }

    /// Smallest level whose cells are no longer than `h` (capped).
    pub fn level_for_cell_len(&self, h: f64) -> u32 {
        if self.ambient_len() <= h || self.copies == 1 {
            return 0;
        }
        let n = ((h / self.ambient_len()).ln() / self.ratio.ln()).ceil();
        (n.max(0.0) as u32).min(self.level_cap)
    }

    /// Number of closed grid cells `[k h, (k+1) h]` (grid anchored at 0) that
    /// intersect the level-`n` cover. Left-to-right traversal with run
    /// merging; full-interval subtrees are counted arithmetically.
    pub fn occupied_cells(&self, h: f64, level: u32) -> u64 {
        fn index_range(lo: f64, hi: f64, h: f64) -> (i64, i64) {
            // closed cell k intersects [lo, hi] iff k <= hi/h and k+1 >= lo/h
            ((lo / h).ceil() as i64 - 1, (hi / h).floor() as i64)
        }
        fn add_range(count: &mut u64, last: &mut i64, lo: i64, hi: i64) {
            let lo = lo.max(*last + 1);
            if hi >= lo {
                *count += (hi - lo + 1) as u64;
                *last = hi;
            }
        }
        fn go(
            spec: &SelfSimilarSpec,
            left: f64,
            len: f64,
            depth: u32,
            h: f64,
            count: &mut u64,
            last: &mut i64,
        ) {
            let (lo, hi) = index_range(left, left + len, h);
            // leaf, solid interval, or a subtree whose hull spans <= 2 cells
            // (its extreme points are in the set, so both cells are occupied)
            if depth == 0 || hi - lo <= 1 || spec.is_full_interval() {
                add_range(count, last, lo, hi);
                return;
            }
            let step = spec.child_step(len);
            let clen = len * spec.ratio;
            for k in 0..spec.copies {
                go(spec, left + k as f64 * step, clen, depth - 1, h, count, last);
            }
        }
        let mut count = 0u64;
        let mut last = i64::MIN;
        go(
            self,
            self.ambient.0,
            self.ambient_len(),
            level,
            h,
            &mut count,
            &mut last,
        );
        count
    }

    /// Multiset of pairwise midpoint differences at level `n`, folded to
    /// absolute values: returns `(|difference|, multiplicity)` sorted by
    /// value, counting ordered pairs from both signs (multiplicities sum to
    /// `m^{2n}`; the zero entry carries the `m^n` self-pairs).
    pub fn diff_multiset(&self, level: u32) -> Result<Vec<(f64, f64)>, FractalError> {
        self.check_level(level)?;
        let m = self.copies as i64;
        let mut diffs: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        let mut len = self.ambient_len();
        let merge_tol = 1e-12 * (1.0 + self.ambient_len());
        for _ in 0..level {
            let step = self.child_step(len);
            let mut next: Vec<(f64, f64)> = Vec::with_capacity(diffs.len() * (2 * m as usize - 1));
            for delta in -(m - 1)..=(m - 1) {
                let mult = (m - delta.abs()) as f64;
                let shift = delta as f64 * step;
                for &(v, w) in &diffs {
                    next.push((v + shift, w * mult));
                }
            }
            next.sort_by(|x, y| x.0.total_cmp(&y.0));
            // merge values equal up to tolerance
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
            for (v, w) in next {
                match merged.last_mut() {
                    Some(last) if (v - last.0).abs() <= merge_tol => last.1 += w,
                    _ => merged.push((v, w)),
                }
            }
            if merged.len() as u128 > ATOM_CAP {
                return Err(FractalError::TooManyAtoms {
                    requested: merged.len() as u128,
                    cap: ATOM_CAP,
                });
            }
            diffs = merged;
            len *= self.ratio;
        }
        // fold to |v|
        let mut folded: Vec<(f64, f64)> = diffs
            .into_iter()
            .map(|(v, w)| (v.abs(), w))
            .collect();
        folded.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(folded.len());
        for (v, w) in folded {
            match out.last_mut() {
                Some(last) if (v - last.0).abs() <= merge_tol => last.1 += w,
                _ => out.push((v, w)),
            }
        }
        Ok(out)
    }
}

/// A product set `E x F_1 x ... x F_d` in space time: one time spec on
/// `(0, inf)` and `d` space specs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSetSpec {
    time: SelfSimilarSpec,
    space: Vec<SelfSimilarSpec>,
}

impl ProductSetSpec {
    pub fn new(time: SelfSimilarSpec, space: Vec<SelfSimilarSpec>) -> Result<Self, FractalError> {
        if time.ambient().0 <= 0.0 {
            return Err(FractalError::BadSpec("time ambient must lie in (0, inf)"));
        }
        if space.is_empty() {
            return Err(FractalError::BadSpec("need at least one space axis"));
        }
        Ok(Self { time, space })
    }

    pub fn time(&self) -> &SelfSimilarSpec {
        &self.time
    }

    pub fn space(&self) -> &[SelfSimilarSpec] {
        &self.space
    }

    pub fn d(&self) -> usize {
        self.space.len()
    }

    /// True when every space axis is a degenerate point.
    pub fn space_is_point(&self) -> bool {
        self.space.iter().all(|s| s.is_point())
    }

    /// Euclidean diameter of the level-0 space box.
    pub fn space_diameter(&self) -> f64 {
        let mut s = 0.0;
        for ax in &self.space {
            s += ax.ambient_len() * ax.ambient_len();
        }
        s.sqrt()
    }

    /// Diameter of a level-`n` space cell.
    pub fn space_cell_diameter(&self, level: u32) -> f64 {
        let mut s = 0.0;
        for ax in &self.space {
            let l = ax.cell_len(level);
            s += l * l;
        }
        s.sqrt()
    }

    /// Parabolic-dimension prediction `2 dim E + sum_i dim F_i` from the
    /// similarity dimensions.
    pub fn dim_rho_similarity(&self) -> f64 {
        2.0 * self.time.dimension() + self.space.iter().map(|s| s.dimension()).sum::<f64>()
    }

    /// Number of natural-measure atoms at `level` (time cells x space grid).
    pub fn atom_count(&self, level: u32) -> u128 {
        let mut n = self.time.cell_count(level);
        for ax in &self.space {
            n = n.saturating_mul(ax.cell_count(level));
        }
        n
    }

    /// The natural (uniform self-similar) measure at `level`: atoms on the
    /// product grid of cell midpoints, uniform product weights.
    pub fn natural_measure(&self, level: u32) -> Result<DiscreteMeasure, FractalError> {
        let total = self.atom_count(level);
        if total > ATOM_CAP {
            return Err(FractalError::TooManyAtoms {
                requested: total,
                cap: ATOM_CAP,
            });
        }
        let tmid = self.time.natural_midpoints(level)?;
        let d = self.d();
        let mut grids = Vec::with_capacity(d);
        for ax in &self.space {
            grids.push(ax.natural_midpoints(level)?);
        }
        let total = total as usize;
        let mut times = Vec::with_capacity(total);
        let mut coords = Vec::with_capacity(total * d);
        let mut idx = vec![0usize; d];
        for &t in &tmid {
            loop {
                times.push(t);
                for (k, g) in grids.iter().enumerate() {
                    coords.push(g[idx[k]]);
                }
                // odometer over space axes
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < grids[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        let w = 1.0 / total as f64;
        DiscreteMeasure::new(times, coords, d, vec![w; total])
            .map_err(|_| FractalError::BadSpec("natural measure construction failed"))
    }
}
