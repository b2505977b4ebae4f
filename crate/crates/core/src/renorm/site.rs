//! Oriented site percolation on the cone `{(m, n) : 0 <= m <= n}`.
//!
//! Site `(m, n)` is open iff its uniform is below `gamma`, and is reached when
//! it is open and one of `(m, n-1)`, `(m-1, n-1)` is reached. Because every
//! site keeps its uniform for all `gamma`, a single pass can also compute, for
//! each generation, the smallest `gamma` at which the cluster still reaches it.

use rayon::prelude::*;

use crate::bondfield::{BondField, BondId};

/// How the origin's own site variable is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OriginRule {
    /// The cluster of the origin: the origin is occupied regardless.
    #[default]
    AlwaysOccupied,
    /// The origin is occupied only if its site is open.
    SiteVariable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeCluster {
    pub horizon: u64,
    /// `open[n][m]` for `0 <= m <= n <= horizon`.
    pub open: Vec<Vec<bool>>,
    /// `reached[n][m]`, same shape.
    pub reached: Vec<Vec<bool>>,
}

impl ConeCluster {
    pub fn generation_size(&self, n: u64) -> usize {
        self.reached[n as usize].iter().filter(|&&r| r).count()
    }

    pub fn survived(&self) -> bool {
        self.generation_size(self.horizon) > 0
    }

    pub fn size(&self) -> usize {
        self.reached.iter().flatten().filter(|&&r| r).count()
    }
}

fn site_uniform(field: &BondField, m: i64, n: u64) -> f64 {
    field.uniform(&BondId::Site { m, n })
}

pub fn site_perc_cone(
    gamma: f64,
    horizon: u64,
    field: &BondField,
    rule: OriginRule,
) -> ConeCluster {
    let mut open = Vec::with_capacity(horizon as usize + 1);
    let mut reached: Vec<Vec<bool>> = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        let row_open: Vec<bool> = (0..=n as i64)
            .map(|m| site_uniform(field, m, n) < gamma)
            .collect();
        let row_reached: Vec<bool> = if n == 0 {
            vec![rule == OriginRule::AlwaysOccupied || row_open[0]]
        } else {
            let prev = &reached[n as usize - 1];
            (0..=n as usize)
                .map(|m| {
                    let from_above = m < prev.len() && prev[m];
                    let from_left = m > 0 && prev[m - 1];
                    row_open[m] && (from_above || from_left)
                })
                .collect()
        };
        open.push(row_open);
        reached.push(row_reached);
    }
    ConeCluster {
        horizon,
        open,
        reached,
    }
}

/// `thresholds[n]`: the cluster reaches generation `n` at parameter `gamma`
/// iff `thresholds[n] < gamma`.
pub fn cone_thresholds(field: &BondField, horizon: u64, rule: OriginRule) -> Vec<f64> {
    let mut out = Vec::with_capacity(horizon as usize + 1);
    let origin = match rule {
        OriginRule::AlwaysOccupied => f64::NEG_INFINITY,
        OriginRule::SiteVariable => site_uniform(field, 0, 0),
    };
    let mut row = vec![origin];
    out.push(origin);
    for n in 1..=horizon {
        let next: Vec<f64> = (0..=n as usize)
            .map(|m| {
                let above = row.get(m).copied().unwrap_or(f64::INFINITY);
                let left = if m > 0 { row[m - 1] } else { f64::INFINITY };
                above.min(left).max(site_uniform(field, m as i64, n))
            })
            .collect();
        out.push(next.iter().copied().fold(f64::INFINITY, f64::min));
        row = next;
    }
    out
}

/// Survival counts on a grid of parameters and horizons, from coupled replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteScan {
    pub gammas: Vec<f64>,
    pub horizons: Vec<u64>,
    pub replicas: u64,
    /// `survivors[g][h]`.
    pub survivors: Vec<Vec<u64>>,
}

pub fn site_survival_scan(
    field: &BondField,
    gammas: &[f64],
    horizons: &[u64],
    replicas: u64,
    rule: OriginRule,
) -> SiteScan {
    let tmax = horizons.iter().copied().max().unwrap_or(0);
    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let th = cone_thresholds(&field.derive_replica(r), tmax, rule);
            horizons.iter().map(|&t| th[t as usize]).collect()
        })
        .collect();
    let survivors = gammas
        .iter()
        .map(|&g| {
            (0..horizons.len())
                .map(|h| per_replica.iter().filter(|th| th[h] < g).count() as u64)
                .collect()
        })
        .collect();
    SiteScan {
        gammas: gammas.to_vec(),
        horizons: horizons.to_vec(),
        replicas,
        survivors,
    }
}

impl SiteScan {
    pub fn survival(&self, g: usize, h: usize) -> f64 {
        self.survivors[g][h] as f64 / self.replicas as f64
    }

    /// `P(T_{h+1}) / P(T_h)` at grid point `g`; zero when nobody reaches `T_h`.
    pub fn ratio(&self, g: usize, h: usize) -> f64 {
        let below = self.survivors[g][h];
        if below == 0 {
            0.0
        } else {
            self.survivors[g][h + 1] as f64 / below as f64
        }
    }

    /// Crossing of the successive survival ratios `P(T2)/P(T1)` and
    /// `P(T3)/P(T2)` for the first three horizons.
    ///
    /// Below the critical point the ratio falls with the horizon, above it
    /// the ratio rises toward one, so their difference changes sign at the
    /// threshold. Returns the linear interpolation at the first upward sign
    /// change along the grid.
    pub fn ratio_crossing(&self) -> Option<f64> {
        if self.horizons.len() < 3 || self.gammas.len() < 2 {
            return None;
        }
        let diff: Vec<f64> = (0..self.gammas.len())
            .map(|g| self.ratio(g, 1) - self.ratio(g, 0))
            .collect();
        (0..diff.len() - 1).find_map(|g| {
            let (d0, d1) = (diff[g], diff[g + 1]);
            (d0 < 0.0 && d1 >= 0.0).then(|| {
                let (x0, x1) = (self.gammas[g], self.gammas[g + 1]);
                x0 + (x1 - x0) * d0 / (d0 - d1)
            })
        })
    }
}
