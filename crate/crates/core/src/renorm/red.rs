//! The red-vertex exploration.
//!
//! Starting from `x_0 = (0, 0)`, each step examines the `<`-minimal cell of
//! `boundary(A) \ B`, moves it to `A` when red and to `B` otherwise, and stops
//! once no candidate is left. Reachability of the original-lattice points is
//! certified by the exploration itself: a point is known to be reachable only
//! if it is the origin or a landing point of a previously observed
//! bifurcation. Redness is decided over those certified points only, which can
//! only make red cells rarer.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::bondfield::{BondField, BondId};
use crate::oriented::GVertex;
use crate::stats::{binomial_sigma, EstimateWithCI};
use crate::{Error, Result};

use super::{check_bifurcation, gamma_k, BifurcationParams, Cell};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;

/// Exploration state: accepted cells `A`, rejected cells `B`, the next cell
/// to examine, and the number of cells examined so far.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RedState {
    pub accepted: BTreeSet<Cell>,
    pub rejected: BTreeSet<Cell>,
    pub current: Option<Cell>,
    pub step: u64,
}

/// `child` was reached from `parent` through `via` by two open bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub parent: GVertex,
    pub via: GVertex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub cell: Cell,
    pub red: bool,
    /// Certified point where the bifurcation started, with its witness `(a, a')`.
    pub bifurcation: Option<(GVertex, (i64, i64))>,
}

#[derive(Debug, Clone)]
pub struct RedRun {
    pub state: RedState,
    /// `max_steps` was reached with candidates left.
    pub truncated: bool,
    pub trace: Vec<StepRecord>,
    /// Every certified point; the origin maps to `None`.
    pub certified: FxHashMap<GVertex, Option<Certificate>>,
}

impl RedRun {
    /// The red cluster, the union of all `A_i`.
    pub fn cluster(&self) -> &BTreeSet<Cell> {
        &self.state.accepted
    }
}

fn line_point(cell: Cell, a: i64, beta: i64) -> GVertex {
    GVertex::new([a, cell.m * beta, 0, 0], 2 * cell.n as u64)
}

/// Runs the exploration for at most `max_steps` examinations.
pub fn explore_red_cluster(
    field: &BondField,
    params: &BifurcationParams,
    max_steps: u64,
) -> RedRun {
    let beta = params.beta;
    let mut state = RedState {
        current: Some(Cell::ORIGIN),
        ..RedState::default()
    };
    let mut trace = Vec::new();
    let mut certified = FxHashMap::default();
    certified.insert(GVertex::ORIGIN, None);
    // certified first coordinates `a` on the line of each cell
    let mut witnesses: BTreeMap<Cell, BTreeSet<i64>> = BTreeMap::new();
    witnesses.entry(Cell::ORIGIN).or_default().insert(0);
    let mut candidates: BTreeSet<Cell> = BTreeSet::new();
    let mut truncated = false;

    while let Some(cell) = state.current {
        if state.step == max_steps {
            truncated = true;
            break;
        }
        let mut found = None;
        if let Some(points) = witnesses.remove(&cell) {
            for a in points {
                let start = line_point(cell, a, beta);
                if let Some(w) = check_bifurcation(field, &start, params).witness {
                    found = Some((start, w));
                    break;
                }
            }
        }

        if let Some((start, (a1, a2))) = found {
            let via = start.step(0, a1);
            let [same_line, next_line] = cell.children();
            for (child_cell, child) in
                [(same_line, via.step(0, a2)), (next_line, via.step(1, beta))]
            {
                certified
                    .entry(child)
                    .or_insert(Some(Certificate { parent: start, via }));
                witnesses.entry(child_cell).or_default().insert(child.x[0]);
                candidates.insert(child_cell);
            }
            state.accepted.insert(cell);
        } else {
            state.rejected.insert(cell);
        }
        trace.push(StepRecord {
            cell,
            red: found.is_some(),
            bifurcation: found,
        });
        state.step += 1;
        state.current = candidates.pop_first();
    }

    RedRun {
        state,
        truncated,
        trace,
        certified,
    }
}

/// Path from the origin to `v` recorded by the certificates, if `v` is certified.
pub fn certified_path(run: &RedRun, v: &GVertex) -> Option<Vec<GVertex>> {
    let mut path = vec![*v];
    let mut cur = *v;
    loop {
        match run.certified.get(&cur)? {
            None => break,
            Some(c) => {
                path.push(c.via);
                path.push(c.parent);
                cur = c.parent;
            }
        }
    }
    path.reverse();
    Some(path)
}

/// Every consecutive pair is an open oriented bond of `field`.
pub fn verify_path(field: &BondField, path: &[GVertex]) -> bool {
    path.windows(2).all(|w| {
        let (u, v) = (w[0], w[1]);
        if v.n != u.n + 1 {
            return false;
        }
        let diff: Vec<(usize, i64)> = (0..u.x.len())
            .filter(|&j| u.x[j] != v.x[j])
            .map(|j| (j, v.x[j] - u.x[j]))
            .collect();
        match diff.as_slice() {
            [(axis, disp)] => field.is_open(&BondId::Oriented {
                tail: u.x,
                n: u.n,
                axis: *axis,
                disp: *disp,
            }),
            _ => false,
        }
    })
}

/// Pooled conditional red frequency over many runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub gamma: f64,
    pub runs: u64,
    /// Pooled red count over examined cells.
    pub estimate: EstimateWithCI,
    /// `sqrt(gamma (1 - gamma) / examined)`.
    pub sigma: f64,
    /// Frequency below `gamma - 3 sigma`.
    pub violation: bool,
    /// Runs stopped by `max_steps`; counted as surviving.
    pub truncated_runs: u64,
    pub mean_cluster_size: f64,
}

/// Runs `samples` independent red explorations and pools every examination.
pub fn domination_check(
    field: &BondField,
    params: &BifurcationParams,
    samples: u64,
    max_steps: u64,
    z: f64,
) -> Result<DominationReport> {
    if samples == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let per_run: Vec<(u64, u64, bool)> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let run = explore_red_cluster(&field.derive_replica(r), params, max_steps);
            (
                run.state.step,
                run.state.accepted.len() as u64,
                run.truncated,
            )
        })
        .collect();

    let examined: u64 = per_run.iter().map(|r| r.0).sum();
    let red: u64 = per_run.iter().map(|r| r.1).sum();
    let truncated_runs = per_run.iter().filter(|r| r.2).count() as u64;
    let gamma = gamma_k(params);
    if examined == 0 {
        return Err(Error::param(
            "steps",
            "no cell was examined; max_steps must be positive",
        ));
    }
    let estimate = EstimateWithCI::from_counts(red, examined, z);
    let sigma = binomial_sigma(gamma, examined);
    Ok(DominationReport {
        gamma,
        runs: samples,
        violation: estimate.estimate < gamma - 3.0 * sigma,
        estimate,
        sigma,
        truncated_runs,
        mean_cluster_size: red as f64 / samples as f64,
    })
}
