//! Percolation on the mixed lattice: oriented vertical bonds
//! `(x, n) -> (x, n + 1)` open with probability `eps`, and unoriented
//! horizontal bonds `<(x, n), (x + i e_m, n)>` open with probability `p_|i|`.
//! Only `d = 2` is implemented.
//!
//! The block construction walks a staircase through `Z^2`. Consecutive
//! staircase points lie on a common lattice line, and `H(m, n)` is the event
//! that `stair(m)` and `stair(m + 1)` are joined at level `n` by open
//! horizontal bonds of that line. The infinite line is replaced by the
//! segment within distance `W` of `stair(m)`, so every estimate here is a
//! lower bound that grows with `W`.

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::bondfield::{BondField, BondId, BondLaws};
use crate::sequences::SequenceSpec;
use crate::stats::EstimateWithCI;
use crate::{Error, Result, Site};

#[derive(Debug, Clone, PartialEq)]
pub struct StarParams {
    pub eps: f64,
    pub k: u64,
    pub pseq: SequenceSpec,
    /// Half-length of the line segment used for each connection event.
    pub window: i64,
}

impl StarParams {
    pub fn new(eps: f64, pseq: SequenceSpec, k: u64, window: i64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::param("eps", format!("must be in (0, 1], got {eps}")));
        }
        if window < 1 {
            return Err(Error::param(
                "window",
                format!("must be at least 1, got {window}"),
            ));
        }
        Ok(StarParams {
            eps,
            k,
            pseq,
            window,
        })
    }

    pub fn with_k(&self, k: u64) -> Self {
        StarParams { k, ..self.clone() }
    }

    pub fn laws(&self) -> BondLaws {
        BondLaws::star(self.pseq.truncate(self.k), self.eps)
    }

    pub fn field(&self, seed: u64) -> BondField {
        BondField::new(seed, self.laws())
    }
}

/// Block width `N` and failure budget `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub width: i64,
    pub delta: f64,
}

impl BlockParams {
    /// Width from [`choose_n`].
    pub fn from_eps(eps: f64, delta: f64) -> Result<Self> {
        Ok(BlockParams {
            width: choose_n(eps, delta)?,
            delta,
        })
    }
}

/// Smallest `N >= 1` with `(1 - (1 - eps)^N)^2 > 1 - delta/2`.
pub fn choose_n(eps: f64, delta: f64) -> Result<i64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must be in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::param(
            "delta",
            format!("must be in (0, 2), got {delta}"),
        ));
    }
    let target = 1.0 - delta / 2.0;
    let mut miss = 1.0 - eps;
    let mut n = 1;
    while (1.0 - miss) * (1.0 - miss) <= target {
        miss *= 1.0 - eps;
        n += 1;
    }
    Ok(n)
}

/// Staircase through `Z^2`: `stair(0) = 0`, then alternately `+e1` (from even
/// `m`) and `-e2` (from odd `m`).
pub fn staircase(m: i64) -> Site {
    let half_up = -(-m).div_euclid(2);
    let half_down = m.div_euclid(2);
    [half_up, -half_down, 0, 0]
}

/// Axis of the line through `stair(m)` and `stair(m + 1)`, and the offset of
/// `stair(m + 1)` along it.
fn stair_step(m: i64) -> (usize, i64) {
    if m.rem_euclid(2) == 0 {
        (0, 1)
    } else {
        (1, -1)
    }
}

/// Horizontal bonds of the segment used for `H(m, n)`.
pub fn h_segment_bonds(m: i64, n: u64, params: &StarParams) -> Vec<BondId> {
    let (axis, _) = stair_step(m);
    let center = staircase(m);
    let w = params.window;
    let k = params.k as i64;
    let mut out = Vec::new();
    for i in -w..=w {
        for j in (i + 1)..=(i + k).min(w) {
            let mut u = center;
            let mut v = center;
            u[axis] += i;
            v[axis] += j;
            out.push(BondId::horizontal(u, v, n).expect("points on one line"));
        }
    }
    out
}

/// `H(m, n)` within the window: `stair(m)` and `stair(m + 1)` connected by
/// open horizontal bonds of their line, using only positions within
/// distance `W` of `stair(m)`.
pub fn check_h(field: &BondField, m: i64, n: u64, params: &StarParams) -> bool {
    let (axis, target) = stair_step(m);
    let center = staircase(m);
    let w = params.window;
    let k = params.k as i64;
    let len = (2 * w + 1) as usize;
    let pos = |i: i64| (i + w) as usize;

    let mut seen = vec![false; len];
    let mut stack = vec![0i64];
    seen[pos(0)] = true;
    while let Some(i) = stack.pop() {
        for j in (i - k).max(-w)..=(i + k).min(w) {
            if j == i || seen[pos(j)] {
                continue;
            }
            let mut u = center;
            let mut v = center;
            u[axis] += i;
            v[axis] += j;
            if field.is_open(&BondId::horizontal(u, v, n).expect("points on one line")) {
                if j == target {
                    return true;
                }
                seen[pos(j)] = true;
                stack.push(j);
            }
        }
    }
    false
}

/// Monte Carlo probability of `H(0, n)` over levels `n = 0..trials`, which
/// use disjoint bond sets.
pub fn estimate_h_prob(
    params: &StarParams,
    seed: u64,
    trials: u64,
    z: f64,
) -> Result<EstimateWithCI> {
    if trials == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let field = params.field(seed);
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&n| check_h(&field, 0, n, params))
        .count() as u64;
    Ok(EstimateWithCI::from_counts(hits, trials, z))
}

/// Vertical bond at the staircase point `stair(m)` from level `n`.
pub fn stair_vertical(m: i64, n: u64) -> BondId {
    BondId::Vertical { x: staircase(m), n }
}

/// Block event at `(a, n)` of the even sublattice: all `H(m, n)` for
/// `m` in `[aN, aN + 2N - 1]`, and an open vertical bond at some staircase
/// point of each half `[aN, aN + N - 1]`, `[aN + N, aN + 2N - 1]`.
pub fn check_zeta(
    field: &BondField,
    a: i64,
    n: i64,
    block: &BlockParams,
    params: &StarParams,
) -> Result<bool> {
    if (a + n).rem_euclid(2) != 0 || n < 0 {
        return Err(Error::OffParity { a, n });
    }
    let level = n as u64;
    let start = a * block.width;
    let half =
        |from: i64| (from..from + block.width).any(|m| field.is_open(&stair_vertical(m, level)));
    Ok(half(start)
        && half(start + block.width)
        && (start..start + 2 * block.width).all(|m| check_h(field, m, level, params)))
}

/// Bonds read by [`check_zeta`] at `(a, n)`.
pub fn zeta_bonds(a: i64, n: u64, block: &BlockParams, params: &StarParams) -> FxHashSet<BondId> {
    let start = a * block.width;
    let mut out = FxHashSet::default();
    for m in start..start + 2 * block.width {
        out.insert(stair_vertical(m, n));
        out.extend(h_segment_bonds(m, n, params));
    }
    out
}

/// Blocks reached at each level by sequences `a_0 = 0`, `|a_{i+1} - a_i| = 1`,
/// with every visited block good. Returns the sizes of the reached sets for
/// levels `0..=horizon`.
pub fn block_path_fronts(
    field: &BondField,
    block: &BlockParams,
    params: &StarParams,
    horizon: u64,
) -> Vec<u64> {
    let mut sizes = Vec::with_capacity(horizon as usize + 1);
    let good = |a: i64, n: i64| {
        check_zeta(field, a, n, block, params).expect("parity kept by construction")
    };
    let mut front: Vec<i64> = if good(0, 0) { vec![0] } else { Vec::new() };
    sizes.push(front.len() as u64);
    for n in 1..=horizon as i64 {
        let mut next: Vec<i64> = front.iter().flat_map(|&a| [a - 1, a + 1]).collect();
        next.sort_unstable();
        next.dedup();
        next.retain(|&a| good(a, n));
        front = next;
        sizes.push(front.len() as u64);
    }
    sizes
}

pub fn block_path_survival(
    block: &BlockParams,
    params: &StarParams,
    horizon: u64,
    seed: u64,
    reps: u64,
    z: f64,
) -> Result<EstimateWithCI> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let base = params.field(seed);
    let hits = (0..reps)
        .into_par_iter()
        .filter(|&r| {
            block_path_fronts(&base.derive_replica(r), block, params, horizon)[horizon as usize] > 0
        })
        .count() as u64;
    Ok(EstimateWithCI::from_counts(hits, reps, z))
}
