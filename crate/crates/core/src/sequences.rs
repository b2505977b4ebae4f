//! Bond probability laws `(p_i)_{i>=1}` and their range-`k` truncations.
//!
//! Textual grammar (used by the CLI and config files):
//!
//! ```text
//! harmonic               p_i = min(1, 1/i)
//! powerlaw:<alpha>,<c>   p_i = min(1, c * i^-alpha)
//! const:<v>              p_i = v
//! list:<v1>,<v2>,...     p_i = v_i for i <= len, 0 beyond
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::{Error, Result};

/// A law for the bond probabilities, indexed by range `i >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    Harmonic,
    PowerLaw { alpha: f64, scale: f64 },
    Constant(f64),
    List(Vec<f64>),
}

impl SequenceSpec {
    /// Value at range `i`. Range 0 is not part of the law and is rejected.
    pub fn eval(&self, i: u64) -> Result<f64> {
        if i == 0 {
            return Err(Error::ZeroIndex(i));
        }
        Ok(self.term(i))
    }

    fn term(&self, i: u64) -> f64 {
        debug_assert!(i >= 1);
        match self {
            SequenceSpec::Harmonic => (1.0 / i as f64).min(1.0),
            SequenceSpec::PowerLaw { alpha, scale } => (scale * (i as f64).powf(-alpha)).min(1.0),
            SequenceSpec::Constant(v) => *v,
            SequenceSpec::List(values) => values.get(i as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// `sum_{i=1}^{n} p_i`.
    pub fn partial_sum(&self, n: u64) -> f64 {
        (1..=n).map(|i| self.term(i)).sum()
    }

    /// Smallest `n <= limit` with `partial_sum(n) > bound`, if any.
    pub fn divergence_witness(&self, bound: f64, limit: u64) -> Option<u64> {
        let mut acc = 0.0;
        for i in 1..=limit {
            acc += self.term(i);
            if acc > bound {
                return Some(i);
            }
        }
        None
    }

    /// True when every term vanishes.
    pub fn is_zero(&self) -> bool {
        match self {
            SequenceSpec::Harmonic | SequenceSpec::PowerLaw { .. } => false,
            SequenceSpec::Constant(v) => *v == 0.0,
            SequenceSpec::List(values) => values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn truncate(&self, k: u64) -> TruncatedSequence {
        TruncatedSequence::new(self.clone(), k)
    }
}

/// Sequence truncated at range `k`: `p^k_i = p_i` for `1 <= i <= k`, zero
/// otherwise. Range 0 is pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    base: SequenceSpec,
    k: u64,
    // values[i] = p^k_i for 0 <= i <= k
    values: Arc<[f64]>,
}

impl TruncatedSequence {
    pub fn new(base: SequenceSpec, k: u64) -> Self {
        let values: Arc<[f64]> = std::iter::once(0.0)
            .chain((1..=k).map(|i| base.term(i)))
            .collect();
        TruncatedSequence { base, k, values }
    }

    /// The identically zero law.
    pub fn zero() -> Self {
        TruncatedSequence::new(SequenceSpec::Constant(0.0), 0)
    }

    pub fn base(&self) -> &SequenceSpec {
        &self.base
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    #[inline]
    pub fn term(&self, i: u64) -> f64 {
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Term at a signed displacement, `p^k_{|i|}`.
    #[inline]
    pub fn term_signed(&self, i: i64) -> f64 {
        self.term(i.unsigned_abs())
    }

    /// Truncate again at `k2`; ranges above `min(k, k2)` vanish.
    pub fn truncate(&self, k2: u64) -> TruncatedSequence {
        if k2 >= self.k {
            self.clone()
        } else {
            TruncatedSequence::new(self.base.clone(), k2)
        }
    }

    /// Terms `p^k_1, ..., p^k_k`.
    pub fn terms(&self) -> &[f64] {
        &self.values[1..]
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Harmonic => write!(f, "harmonic"),
            SequenceSpec::PowerLaw { alpha, scale } => write!(f, "powerlaw:{alpha},{scale}"),
            SequenceSpec::Constant(v) => write!(f, "const:{v}"),
            SequenceSpec::List(values) => {
                write!(f, "list:")?;
                for (j, v) in values.iter().enumerate() {
                    if j > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |token: &str, reason: &str| Error::SequenceSyntax {
            spec: s.to_string(),
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let number = |token: &str| -> Result<f64> {
            let v: f64 = token.parse().map_err(|_| fail(token, "not a number"))?;
            if !v.is_finite() {
                return Err(fail(token, "not finite"));
            }
            Ok(v)
        };
        let probability = |token: &str| -> Result<f64> {
            let v = number(token)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(fail(token, "probability outside [0,1]"));
            }
            Ok(v)
        };

        let (kind, args) = match s.split_once(':') {
            Some((kind, args)) => (kind, Some(args)),
            None => (s, None),
        };
        match (kind, args) {
            ("harmonic", None) => Ok(SequenceSpec::Harmonic),
            ("harmonic", Some(args)) => Err(fail(args, "harmonic takes no parameters")),
            ("powerlaw", Some(args)) => {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() != 2 {
                    return Err(fail(args, "expected <alpha>,<c>"));
                }
                let alpha = number(parts[0])?;
                let scale = number(parts[1])?;
                if alpha <= 0.0 {
                    return Err(fail(parts[0], "exponent must be positive"));
                }
                if scale <= 0.0 {
                    return Err(fail(parts[1], "scale must be positive"));
                }
                Ok(SequenceSpec::PowerLaw { alpha, scale })
            }
            ("const", Some(args)) => {
                if args.contains(',') {
                    return Err(fail(args, "const takes a single value"));
                }
                Ok(SequenceSpec::Constant(probability(args)?))
            }
            ("list", Some(args)) => {
                let values = args
                    .split(',')
                    .map(probability)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SequenceSpec::List(values))
            }
            ("powerlaw" | "const" | "list", None) => Err(fail(kind, "missing parameters")),
            _ => Err(fail(kind, "unknown sequence kind")),
        }
    }
}
