//! Renormalization of the two-sequence oriented model onto oriented site
//! percolation on `Z^2_+`.
//!
//! A renormalized cell `(m, n)` stands for the line `{((a, m*beta), 2n) : a in Z}`
//! of the original lattice. The cell is red when some point of that line is
//! reachable from the origin and a bifurcation event starts there. Red cells
//! are explored in the order `(m1, n1) < (m2, n2)` iff `n1 < n2`, or `n1 = n2`
//! and `m1 < m2`, and the resulting cluster is compared with oriented site
//! percolation at parameter `gamma_k`.

mod bifurcation;
mod red;
mod site;

pub use bifurcation::{check_bifurcation, BifurcationOutcome};
pub use red::{
    certified_path, domination_check, explore_red_cluster, verify_path, Certificate,
    DominationReport, RedRun, RedState, StepRecord, DEFAULT_MAX_STEPS,
};
pub use site::{
    cone_thresholds, site_perc_cone, site_survival_scan, ConeCluster, OriginRule, SiteScan,
};

use std::collections::BTreeSet;

use crate::bondfield::{BondField, BondLaws};
use crate::sequences::{SequenceSpec, TruncatedSequence};
use crate::{Error, Result};

/// Point `(m, n)` of `Z^2_+`.
///
/// Field order makes the derived `Ord` coincide with [`prec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub n: i64,
    pub m: i64,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { n: 0, m: 0 };

    pub fn new(m: i64, n: i64) -> Self {
        Cell { n, m }
    }

    /// `(m, n + 1)` and `(m + 1, n + 1)`.
    pub fn children(&self) -> [Cell; 2] {
        [
            Cell::new(self.m, self.n + 1),
            Cell::new(self.m + 1, self.n + 1),
        ]
    }

    pub fn in_quadrant(&self) -> bool {
        self.m >= 0 && self.n >= 0
    }
}

/// `a < b` in the exploration order.
pub fn prec(a: Cell, b: Cell) -> bool {
    a.n < b.n || (a.n == b.n && a.m < b.m)
}

/// Points outside `set` whose parent `(m, n-1)` or `(m-1, n-1)` lies in `set`.
pub fn exterior_boundary(set: &BTreeSet<Cell>) -> BTreeSet<Cell> {
    set.iter()
        .flat_map(|c| c.children())
        .filter(|c| c.in_quadrant() && !set.contains(c))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationParams {
    pub k: u64,
    /// Axis-2 displacement of the branching bond.
    pub beta: i64,
    pub p: TruncatedSequence,
    pub q: TruncatedSequence,
}

impl BifurcationParams {
    /// Requires `beta >= 1` and `q_beta > 0` for the untruncated law.
    pub fn new(pseq: &SequenceSpec, qseq: &SequenceSpec, k: u64, beta: i64) -> Result<Self> {
        if beta < 1 {
            return Err(Error::param(
                "beta",
                format!("must be at least 1, got {beta}"),
            ));
        }
        if qseq.eval(beta as u64)? <= 0.0 {
            return Err(Error::param(
                "beta",
                format!("q_{beta} must be positive for {qseq}"),
            ));
        }
        Ok(BifurcationParams {
            k,
            beta,
            p: pseq.truncate(k),
            q: qseq.truncate(k),
        })
    }

    pub fn with_k(&self, k: u64) -> Self {
        BifurcationParams {
            k,
            beta: self.beta,
            p: self.p.base().truncate(k),
            q: self.q.base().truncate(k),
        }
    }

    pub fn laws(&self) -> BondLaws {
        BondLaws::oriented(self.p.clone(), self.q.clone())
    }

    pub fn field(&self, seed: u64) -> BondField {
        BondField::new(seed, self.laws())
    }
}

/// Probability of a bifurcation event under the `k`-truncated measure:
///
/// `1 - prod_{1<=|a|<=k} (1 - p_|a| * q_beta * (1 - prod_{1<=|a'|<=k} (1 - p_|a'|)))`.
///
/// Range 0 contributes a factor of one.
pub fn gamma_k(params: &BifurcationParams) -> f64 {
    let terms = params.p.terms();
    let none_open: f64 = terms.iter().map(|&p| (1.0 - p) * (1.0 - p)).product();
    let branch = params.q.term_signed(params.beta) * (1.0 - none_open);
    let no_event: f64 = terms
        .iter()
        .map(|&p| {
            let f = 1.0 - p * branch;
            f * f
        })
        .product();
    1.0 - no_event
}

/// Smallest `k <= kmax` with `gamma_k > threshold`.
pub fn min_k_exceeding(
    pseq: &SequenceSpec,
    qseq: &SequenceSpec,
    beta: i64,
    threshold: f64,
    kmax: u64,
) -> Result<Option<u64>> {
    let base = BifurcationParams::new(pseq, qseq, 0, beta)?;
    Ok((1..=kmax).find(|&k| gamma_k(&base.with_k(k)) > threshold))
}
