//! Lazily evaluated random configurations.
//!
//! A [`BondField`] never stores a configuration. Every bond (or site, or
//! Poisson process) is named by an injective sequence of 64-bit words, the
//! words are absorbed into a keyed 64-bit mixing chain, and the resulting word
//! is mapped to a uniform variate in `[0, 1)`. A bond is open iff its uniform
//! is strictly below its probability. Because the uniform of a bond does not
//! depend on the law, fields built from the same seed with different
//! truncations are coupled: raising `k` can only open more bonds.
//!
//! # Id encoding
//!
//! Each id is the word sequence below (coordinates always written as four
//! words, unused trailing coordinates zero; axes are written 1-based):
//!
//! | id                  | words                                        |
//! |---------------------|----------------------------------------------|
//! | oriented bond       | `1, n, x1, x2, x3, x4, m, i`                 |
//! | horizontal bond     | `2, n, x1, x2, x3, x4, m, i` (tail = smaller endpoint, `i > 0`) |
//! | vertical bond       | `3, n, x1, x2, x3, x4`                       |
//! | site                | `4, n, m`                                    |
//! | death process       | `5, x1, x2, x3, x4`                          |
//! | arrow process       | `6, x1, x2, x3, x4, m, i`                    |
//!
//! The chain starts from `key = mix(seed ^ SEED_SALT)` and absorbs each word
//! as `h = mix(h ^ (w * GOLDEN))`; the output is `mix(h + FINAL_SALT)`, where
//! `mix` is the SplitMix64 finalizer. A uniform is `(out >> 11) * 2^-53`.
//! Replica `r` of a field with key `key` has key `mix(key ^ mix(r + REPLICA_SALT))`.

use std::sync::Arc;

use crate::sequences::TruncatedSequence;
use crate::Site;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_SALT: u64 = 0x5851_F42D_4C95_7F2D;
const REPLICA_SALT: u64 = 0x2545_F491_4F6C_DD1D;
const FINAL_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline(always)]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline(always)]
fn absorb(h: u64, w: i64) -> u64 {
    mix64(h ^ (w as u64).wrapping_mul(GOLDEN))
}

#[inline(always)]
fn absorb_site(mut h: u64, x: &Site) -> u64 {
    for &c in x {
        h = absorb(h, c);
    }
    h
}

#[inline(always)]
fn finish(h: u64) -> u64 {
    mix64(h.wrapping_add(FINAL_SALT))
}

/// High 53 bits of `w` as a uniform in `[0, 1)`.
#[inline(always)]
pub fn unit_f64(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Identifier of a bond or site.
///
/// `axis` is 0-based in code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondId {
    /// `<(x, n), (x + disp * e_axis, n + 1)>` on the oriented lattice.
    Oriented {
        tail: Site,
        n: u64,
        axis: usize,
        disp: i64,
    },
    /// Unoriented horizontal bond at level `n`; build with [`BondId::horizontal`].
    Horizontal {
        tail: Site,
        n: u64,
        axis: usize,
        disp: i64,
    },
    /// Oriented vertical bond `<(x, n), (x, n + 1)>`.
    Vertical { x: Site, n: u64 },
    /// Site `(m, n)` of the two-dimensional site percolation cone.
    Site { m: i64, n: u64 },
}

impl BondId {
    /// Canonical horizontal bond between `u` and `v` at level `n`. Returns
    /// `None` unless the endpoints differ in exactly one coordinate.
    pub fn horizontal(u: Site, v: Site, n: u64) -> Option<BondId> {
        let mut axis = None;
        for j in 0..u.len() {
            if u[j] != v[j] {
                if axis.is_some() {
                    return None;
                }
                axis = Some(j);
            }
        }
        let axis = axis?;
        let (tail, head) = if u < v { (u, v) } else { (v, u) };
        Some(BondId::Horizontal {
            tail,
            n,
            axis,
            disp: head[axis] - tail[axis],
        })
    }

    /// Range `|i|` of the bond; vertical bonds and sites have range 1 and 0.
    pub fn range(&self) -> u64 {
        match self {
            BondId::Oriented { disp, .. } | BondId::Horizontal { disp, .. } => disp.unsigned_abs(),
            BondId::Vertical { .. } => 1,
            BondId::Site { .. } => 0,
        }
    }

    fn absorb(&self, key: u64) -> u64 {
        match *self {
            BondId::Oriented {
                tail,
                n,
                axis,
                disp,
            } => {
                let h = absorb_site(absorb(absorb(key, 1), n as i64), &tail);
                absorb(absorb(h, axis as i64 + 1), disp)
            }
            BondId::Horizontal {
                tail,
                n,
                axis,
                disp,
            } => {
                let h = absorb_site(absorb(absorb(key, 2), n as i64), &tail);
                absorb(absorb(h, axis as i64 + 1), disp)
            }
            BondId::Vertical { x, n } => absorb_site(absorb(absorb(key, 3), n as i64), &x),
            BondId::Site { m, n } => absorb(absorb(absorb(key, 4), n as i64), m),
        }
    }
}

/// Identifier of a Poisson process of the contact process graphical construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessId {
    /// Death marks at `x`.
    Death { x: Site },
    /// Infection arrows from `tail` to `tail + disp * e_axis`.
    Arrow { tail: Site, axis: usize, disp: i64 },
}

impl ProcessId {
    fn absorb(&self, key: u64) -> u64 {
        match *self {
            ProcessId::Death { x } => absorb_site(absorb(key, 5), &x),
            ProcessId::Arrow { tail, axis, disp } => {
                let h = absorb_site(absorb(key, 6), &tail);
                absorb(absorb(h, axis as i64 + 1), disp)
            }
        }
    }
}

/// Sequential uniforms keyed by an id: SplitMix64 started from the id's hash.
#[derive(Debug, Clone)]
pub struct CounterStream {
    base: u64,
    counter: u64,
}

impl CounterStream {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Exponential variate with the given rate.
    #[inline]
    pub fn next_exp(&mut self, rate: f64) -> f64 {
        -(1.0 - self.next_f64()).ln() / rate
    }
}

/// Probabilities attached to each bond class.
#[derive(Debug, Clone)]
pub struct BondLaws {
    /// Oriented bonds along axis 1, and all horizontal bonds.
    pub primary: TruncatedSequence,
    /// Oriented bonds along every other axis.
    pub secondary: TruncatedSequence,
    /// Vertical bonds.
    pub vertical: f64,
    /// Sites.
    pub site: f64,
}

impl BondLaws {
    pub fn oriented(primary: TruncatedSequence, secondary: TruncatedSequence) -> Self {
        BondLaws {
            primary,
            secondary,
            vertical: 0.0,
            site: 0.0,
        }
    }

    pub fn star(horizontal: TruncatedSequence, vertical: f64) -> Self {
        BondLaws {
            primary: horizontal,
            secondary: TruncatedSequence::zero(),
            vertical,
            site: 0.0,
        }
    }

    pub fn site(site: f64) -> Self {
        BondLaws {
            primary: TruncatedSequence::zero(),
            secondary: TruncatedSequence::zero(),
            vertical: 0.0,
            site,
        }
    }

    #[inline]
    pub fn axis_law(&self, axis: usize) -> &TruncatedSequence {
        if axis == 0 {
            &self.primary
        } else {
            &self.secondary
        }
    }

    pub fn probability(&self, bond: &BondId) -> f64 {
        match bond {
            BondId::Oriented { axis, disp, .. } => self.axis_law(*axis).term_signed(*disp),
            BondId::Horizontal { disp, .. } => self.primary.term_signed(*disp),
            BondId::Vertical { .. } => self.vertical,
            BondId::Site { .. } => self.site,
        }
    }
}

/// A reproducible random configuration over an infinite bond set.
#[derive(Debug, Clone)]
pub struct BondField {
    key: u64,
    laws: Arc<BondLaws>,
}

impl BondField {
    pub fn new(seed: u64, laws: BondLaws) -> Self {
        BondField {
            key: mix64(seed ^ SEED_SALT),
            laws: Arc::new(laws),
        }
    }

    /// Independent field for replica `replica`; deterministic in `(seed, replica)`.
    pub fn derive_replica(&self, replica: u64) -> BondField {
        BondField {
            key: mix64(self.key ^ mix64(replica.wrapping_add(REPLICA_SALT))),
            laws: Arc::clone(&self.laws),
        }
    }

    /// Same randomness, different probabilities.
    pub fn with_laws(&self, laws: BondLaws) -> BondField {
        BondField {
            key: self.key,
            laws: Arc::new(laws),
        }
    }

    pub fn laws(&self) -> &BondLaws {
        &self.laws
    }

    #[inline]
    pub fn uniform(&self, bond: &BondId) -> f64 {
        unit_f64(finish(bond.absorb(self.key)))
    }

    #[inline]
    pub fn probability(&self, bond: &BondId) -> f64 {
        self.laws.probability(bond)
    }

    #[inline]
    pub fn is_open(&self, bond: &BondId) -> bool {
        self.uniform(bond) < self.probability(bond)
    }

    /// Uniform stream for a Poisson process.
    pub fn stream(&self, process: &ProcessId) -> CounterStream {
        CounterStream {
            base: process.absorb(self.key),
            counter: 0,
        }
    }

    /// Precomputed chain prefix for the oriented bonds leaving `(tail, n)`.
    #[inline]
    pub fn oriented_from(&self, tail: &Site, n: u64) -> OrientedSource<'_> {
        OrientedSource {
            prefix: absorb_site(absorb(absorb(self.key, 1), n as i64), tail),
            laws: &self.laws,
        }
    }
}

/// Oriented bonds sharing a tail vertex; agrees exactly with [`BondField::is_open`].
pub struct OrientedSource<'a> {
    prefix: u64,
    laws: &'a BondLaws,
}

impl OrientedSource<'_> {
    #[inline]
    pub fn uniform(&self, axis: usize, disp: i64) -> f64 {
        unit_f64(finish(absorb(absorb(self.prefix, axis as i64 + 1), disp)))
    }

    #[inline]
    pub fn is_open(&self, axis: usize, disp: i64) -> bool {
        let p = self.laws.axis_law(axis).term_signed(disp);
        p > 0.0 && self.uniform(axis, disp) < p
    }
}
