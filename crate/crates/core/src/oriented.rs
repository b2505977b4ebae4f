//! Cluster growth on the oriented lattice `Z^d x Z+`.
//!
//! Bonds go from `(x, n)` to `(x + i e_m, n + 1)` for every axis `m` and every
//! nonzero displacement `i`. Axis 1 uses the law `p`, all other axes use `q`.
//! Survival to a finite horizon inside a finite absorbing box stands in for
//! the infinite-path event; both restrictions can only lower the estimate.

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::bondfield::{BondField, BondLaws};
use crate::sequences::SequenceSpec;
use crate::stats::EstimateWithCI;
use crate::{Error, Result, Site, MAX_DIM};

/// Vertex `(x, n)` of the oriented lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GVertex {
    pub x: Site,
    pub n: u64,
}

impl GVertex {
    pub const ORIGIN: GVertex = GVertex {
        x: [0; MAX_DIM],
        n: 0,
    };

    pub fn new(x: Site, n: u64) -> Self {
        GVertex { x, n }
    }

    /// `(x + disp * e_axis, n + 1)`.
    pub fn step(&self, axis: usize, disp: i64) -> GVertex {
        let mut x = self.x;
        x[axis] += disp;
        GVertex { x, n: self.n + 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationParams {
    pub dim: usize,
    pub k: u64,
    pub horizon: u64,
    /// Half-width of the absorbing box `[-L, L]^d`.
    pub window: i64,
    pub pseq: SequenceSpec,
    pub qseq: SequenceSpec,
}

impl ExplorationParams {
    pub fn new(
        dim: usize,
        k: u64,
        horizon: u64,
        window: i64,
        pseq: SequenceSpec,
        qseq: SequenceSpec,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param(
                "dim",
                format!("must be in 1..={MAX_DIM}, got {dim}"),
            ));
        }
        if window < 0 {
            return Err(Error::param(
                "window",
                format!("must be nonnegative, got {window}"),
            ));
        }
        Ok(ExplorationParams {
            dim,
            k,
            horizon,
            window,
            pseq,
            qseq,
        })
    }

    pub fn with_k(&self, k: u64) -> Self {
        ExplorationParams { k, ..self.clone() }
    }

    pub fn laws(&self) -> BondLaws {
        BondLaws::oriented(self.pseq.truncate(self.k), self.qseq.truncate(self.k))
    }

    pub fn field(&self, seed: u64) -> BondField {
        BondField::new(seed, self.laws())
    }

    pub fn in_window(&self, x: &Site) -> bool {
        x[..self.dim].iter().all(|c| c.abs() <= self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationResult {
    /// Front nonempty at the horizon.
    pub survived: bool,
    /// Front size at generations `0..=horizon`.
    pub front_sizes: Vec<u64>,
    pub total_visited: u64,
}

/// Open out-neighbours of `v` inside the window.
pub fn out_neighbors(field: &BondField, v: &GVertex, params: &ExplorationParams) -> Vec<GVertex> {
    let mut out = Vec::new();
    push_out_neighbors(field, v, params, |w| out.push(w));
    out
}

#[inline]
fn push_out_neighbors(
    field: &BondField,
    v: &GVertex,
    params: &ExplorationParams,
    mut push: impl FnMut(GVertex),
) {
    let src = field.oriented_from(&v.x, v.n);
    let k = params.k as i64;
    for axis in 0..params.dim {
        for i in 1..=k {
            for disp in [i, -i] {
                if (v.x[axis] + disp).abs() > params.window {
                    continue;
                }
                if src.is_open(axis, disp) {
                    push(v.step(axis, disp));
                }
            }
        }
    }
}

/// Generation sweep from the origin.
pub fn explore(field: &BondField, params: &ExplorationParams) -> ExplorationResult {
    explore_visit(field, params, |_, _| {})
}

/// [`explore`], calling `visit(n, front)` for every nonempty front.
pub fn explore_visit(
    field: &BondField,
    params: &ExplorationParams,
    mut visit: impl FnMut(u64, &FxHashSet<Site>),
) -> ExplorationResult {
    let horizon = params.horizon;
    let mut front_sizes = Vec::with_capacity(horizon as usize + 1);
    let mut front: FxHashSet<Site> = FxHashSet::default();
    front.insert([0; MAX_DIM]);
    let mut next: FxHashSet<Site> = FxHashSet::default();
    let mut total = 0u64;

    for n in 0..=horizon {
        front_sizes.push(front.len() as u64);
        total += front.len() as u64;
        if front.is_empty() {
            break;
        }
        visit(n, &front);
        if n == horizon {
            break;
        }
        next.clear();
        for x in &front {
            push_out_neighbors(field, &GVertex::new(*x, n), params, |w| {
                next.insert(w.x);
            });
        }
        std::mem::swap(&mut front, &mut next);
    }
    front_sizes.resize(horizon as usize + 1, 0);

    ExplorationResult {
        survived: front_sizes[horizon as usize] > 0,
        front_sizes,
        total_visited: total,
    }
}

/// Survival indicator of each replica, in replica order.
pub fn survival_indicators(params: &ExplorationParams, seed: u64, replicas: u64) -> Vec<bool> {
    let field = params.field(seed);
    (0..replicas)
        .into_par_iter()
        .map(|r| explore(&field.derive_replica(r), params).survived)
        .collect()
}

/// Fraction of surviving replicas with a Wilson interval at the given `z`.
pub fn estimate_survival(
    params: &ExplorationParams,
    seed: u64,
    replicas: u64,
    z: f64,
) -> Result<EstimateWithCI> {
    if replicas == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let hits = survival_indicators(params, seed, replicas)
        .into_iter()
        .filter(|&s| s)
        .count() as u64;
    Ok(EstimateWithCI::from_counts(hits, replicas, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bondfield::BondId;

    fn params(k: u64, horizon: u64, window: i64, p: &str, q: &str) -> ExplorationParams {
        ExplorationParams::new(
            2,
            k,
            horizon,
            window,
            p.parse().unwrap(),
            q.parse().unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn no_neighbors_at_range_zero() {
        let p = params(0, 5, 10, "const:1", "const:1");
        let f = p.field(1);
        assert!(out_neighbors(&f, &GVertex::ORIGIN, &p).is_empty());
    }

    #[test]
    fn full_cone_nearest_neighbors() {
        let p = params(1, 5, 10, "const:1", "const:1");
        let f = p.field(1);
        let mut got = out_neighbors(&f, &GVertex::new([3, -2, 0, 0], 4), &p);
        got.sort();
        let mut want = vec![
            GVertex::new([4, -2, 0, 0], 5),
            GVertex::new([2, -2, 0, 0], 5),
            GVertex::new([3, -1, 0, 0], 5),
            GVertex::new([3, -3, 0, 0], 5),
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_match_direct_bond_queries() {
        let p = params(2, 5, 3, "harmonic", "powerlaw:1,0.4");
        let f = p.field(77).derive_replica(3);
        for x0 in -3..=3 {
            for x1 in -3..=3 {
                let v = GVertex::new([x0, x1, 0, 0], 2);
                let mut got = out_neighbors(&f, &v, &p);
                got.sort();
                let mut want = Vec::new();
                for axis in 0..2 {
                    for disp in -2i64..=2 {
                        let b = BondId::Oriented {
                            tail: v.x,
                            n: 2,
                            axis,
                            disp,
                        };
                        let w = v.step(axis, disp);
                        if disp != 0 && w.x[axis].abs() <= 3 && f.is_open(&b) {
                            want.push(w);
                        }
                    }
                }
                want.sort();
                assert_eq!(got, want);
                assert!(got.len() <= 8);
            }
        }
    }

    #[test]
    fn dead_laws_die_at_once() {
        let p = params(5, 10, 50, "const:0", "const:0");
        let r = explore(&p.field(3), &p);
        assert!(!r.survived);
        assert_eq!(r.front_sizes, {
            let mut v = vec![0; 11];
            v[0] = 1;
            v
        });
        assert_eq!(r.total_visited, 1);
    }

    #[test]
    fn certain_laws_fill_the_cone() {
        let p = params(1, 6, 10, "const:1", "const:1");
        let r = explore(&p.field(3), &p);
        assert!(r.survived);
        // generation n of the nearest-neighbour full cone: points with |x|_1 <= n and parity n
        let expected: Vec<u64> = (0..=6u64).map(|n| (n + 1) * (n + 1)).collect();
        assert_eq!(r.front_sizes, expected);
    }

    #[test]
    fn window_zero_allows_only_origin() {
        let p = params(3, 4, 0, "const:1", "const:1");
        let r = explore(&p.field(3), &p);
        assert_eq!(r.front_sizes, vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn estimate_for_trivial_laws() {
        let p = params(1, 10, 20, "const:1", "const:1");
        let e = estimate_survival(&p, 5, 30, 1.96).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.hi, 1.0);
        let z = params(4, 10, 20, "const:0", "const:0");
        assert_eq!(estimate_survival(&z, 5, 30, 1.96).unwrap().estimate, 0.0);
        assert!(estimate_survival(&z, 5, 0, 1.96).is_err());
    }

    #[test]
    fn shorter_horizon_never_kills_a_survivor() {
        let p = params(6, 30, 25, "powerlaw:1,0.2", "powerlaw:1,0.2");
        let base = p.field(12);
        for r in 0..40 {
            let f = base.derive_replica(r);
            let long = explore(&f, &p);
            for t in [0, 5, 17, 29] {
                let short = explore(
                    &f,
                    &ExplorationParams {
                        horizon: t,
                        ..p.clone()
                    },
                );
                assert_eq!(&short.front_sizes[..], &long.front_sizes[..=t as usize]);
                if long.survived {
                    assert!(short.survived);
                }
            }
        }
    }

    #[test]
    fn front_sizes_stay_zero_after_extinction() {
        let p = params(3, 40, 30, "powerlaw:1,0.15", "powerlaw:1,0.15");
        let base = p.field(1);
        for r in 0..50 {
            let res = explore(&base.derive_replica(r), &p);
            assert_eq!(res.front_sizes[0], 1);
            assert_eq!(res.front_sizes.len(), 41);
            if let Some(first_zero) = res.front_sizes.iter().position(|&s| s == 0) {
                assert!(res.front_sizes[first_zero..].iter().all(|&s| s == 0));
            }
            assert_eq!(res.survived, res.front_sizes[40] > 0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let h = SequenceSpec::Harmonic;
        assert!(ExplorationParams::new(0, 1, 1, 1, h.clone(), h.clone()).is_err());
        assert!(ExplorationParams::new(MAX_DIM + 1, 1, 1, 1, h.clone(), h.clone()).is_err());
        assert!(ExplorationParams::new(2, 1, 1, -1, h.clone(), h).is_err());
    }
}
