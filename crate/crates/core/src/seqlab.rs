//! Suprema and characteristic ranks of real sequences converging to zero.
//!
//! A finite array `u_0..u_{n-1}` stands for the sequence padded with zeros,
//! which keeps every quantity exactly computable. For a sequence `u`:
//!
//! * `k_geq` / `k_gt` are the first ranks with `u_k >= 0` / `u_k > 0`;
//! * `K_geq` / `K_gt` are the first ranks `k` with `sup_{l<=k} u_l >= sup_{l>k} u_l`
//!   (resp. `>`);
//! * the argmax set is the set of ranks attaining `sup_k u_k`.
//!
//! A rank that only exists in the zero padding is reported as
//! [`Rank::BeyondPrefix`]; an empty index set gives [`Rank::Infinite`].

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteC0Sequence {
    terms: Vec<f64>,
}

impl FiniteC0Sequence {
    pub fn new(terms: Vec<f64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInstance("sequence prefix is empty".into()));
        }
        if terms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("sequence has non-finite terms".into()));
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    /// Term `k` of the zero-padded sequence.
    pub fn get(&self, k: usize) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    At(usize),
    /// The rank exists only in the zero padding (it equals the prefix length).
    BeyondPrefix,
    Infinite,
}

impl Rank {
    /// Value of the rank in the padded sequence of length `n`; `None` for infinity.
    pub fn padded(self, n: usize) -> Option<usize> {
        match self {
            Rank::At(k) => Some(k),
            Rank::BeyondPrefix => Some(n),
            Rank::Infinite => None,
        }
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Rank::At(k) => Some(k),
            _ => None,
        }
    }

    fn from_padded(r: Option<usize>, n: usize) -> Rank {
        match r {
            Some(k) if k < n => Rank::At(k),
            Some(_) => Rank::BeyondPrefix,
            None => Rank::Infinite,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::At(k) => write!(f, "{k}"),
            Rank::BeyondPrefix => f.write_str("beyond-prefix"),
            Rank::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::At(k) => s.serialize_u64(*k as u64),
            Rank::BeyondPrefix => s.serialize_str("beyond-prefix"),
            Rank::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RankVisitor;
        impl Visitor<'_> for RankVisitor {
            type Value = Rank;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a natural number, \"beyond-prefix\" or \"infinite\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rank, E> {
                Ok(Rank::At(v as usize))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rank, E> {
                match v {
                    "beyond-prefix" => Ok(Rank::BeyondPrefix),
                    "infinite" => Ok(Rank::Infinite),
                    other => Err(E::unknown_variant(other, &["beyond-prefix", "infinite"])),
                }
            }
        }
        d.deserialize_any(RankVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub k_geq: Rank,
    pub k_gt: Rank,
    #[serde(rename = "K_geq")]
    pub big_k_geq: Rank,
    #[serde(rename = "K_gt")]
    pub big_k_gt: Rank,
    pub sup_value: f64,
    /// Attaining ranks below the prefix length, ascending.
    pub argmax_set: Vec<usize>,
    pub prefix_len: usize,
}

/// `sup_{n <= k <= m} u_k` of the zero-padded sequence; `m = None` means infinity.
///
/// Panics if `m < n`.
pub fn partial_sup(u: &FiniteC0Sequence, n: usize, m: Option<usize>) -> f64 {
    if let Some(m) = m {
        assert!(n <= m, "partial_sup needs n <= m (got n={n}, m={m})");
    }
    let len = u.len();
    let stored_end = match m {
        Some(m) => (m + 1).min(len),
        None => len,
    };
    let stored = if n < stored_end {
        u.terms[n..stored_end].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        f64::NEG_INFINITY
    };
    let reaches_padding = match m {
        Some(m) => m >= len,
        None => true,
    };
    if reaches_padding {
        stored.max(0.0)
    } else {
        stored
    }
}

pub fn rank_profile(u: &FiniteC0Sequence) -> RankProfile {
    let t = u.terms();
    let n = t.len();

    // tail[k] = sup_{l >= k} u_l of the padded sequence, for k = 0..=n.
    let mut tail = vec![0.0f64; n + 1];
    for k in (0..n).rev() {
        tail[k] = t[k].max(tail[k + 1]);
    }
    let sup_value = tail[0];

    let k_geq = t.iter().position(|&x| x >= 0.0).or(Some(n));
    let k_gt = t.iter().position(|&x| x > 0.0);

    // Past the prefix the tail sup is 0 and the prefix sup is >= 0, so rank n
    // always satisfies the `>=` test and never satisfies a `>` test that every
    // stored rank failed.
    let mut big_k_geq = None;
    let mut big_k_gt = None;
    let mut prefix = f64::NEG_INFINITY;
    for k in 0..n {
        prefix = prefix.max(t[k]);
        let after = tail[k + 1];
        if big_k_geq.is_none() && prefix >= after {
            big_k_geq = Some(k);
        }
        if big_k_gt.is_none() && prefix > after {
            big_k_gt = Some(k);
        }
    }
    if big_k_geq.is_none() {
        big_k_geq = Some(n);
    }

    let argmax_set = (0..n).filter(|&k| t[k] == sup_value).collect();

    RankProfile {
        k_geq: Rank::from_padded(k_geq, n),
        k_gt: Rank::from_padded(k_gt, n),
        big_k_geq: Rank::from_padded(big_k_geq, n),
        big_k_gt: Rank::from_padded(big_k_gt, n),
        sup_value,
        argmax_set,
        prefix_len: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> FiniteC0Sequence {
        FiniteC0Sequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partial_sup_examples() {
        assert_eq!(partial_sup(&seq(&[-1.0, -2.0, -3.0]), 1, None), 0.0);
        assert_eq!(partial_sup(&seq(&[2.0, 1.21, 1.0]), 0, Some(0)), 2.0);
        assert_eq!(partial_sup(&seq(&[0.0, 5.0, 3.0]), 0, Some(2)), 5.0);
        assert_eq!(partial_sup(&seq(&[-1.0, -2.0]), 0, Some(1)), -1.0);
        assert_eq!(partial_sup(&seq(&[-1.0, -2.0]), 0, Some(2)), 0.0);
        assert_eq!(partial_sup(&seq(&[-1.0, -2.0]), 5, Some(9)), 0.0);
    }

    #[test]
    fn single_zero() {
        let p = rank_profile(&seq(&[0.0]));
        assert_eq!(p.sup_value, 0.0);
        assert_eq!(p.argmax_set, vec![0]);
        assert_eq!(p.k_geq, Rank::At(0));
        assert_eq!(p.big_k_geq, Rank::At(0));
        assert_eq!(p.k_gt, Rank::Infinite);
        assert_eq!(p.big_k_gt, Rank::Infinite);
    }

    #[test]
    fn all_negative_prefix() {
        let p = rank_profile(&seq(&[-1.0, -0.5, -0.25]));
        assert_eq!(p.k_geq, Rank::BeyondPrefix);
        assert_eq!(p.big_k_geq, Rank::BeyondPrefix);
        assert_eq!(p.k_gt, Rank::Infinite);
        assert_eq!(p.big_k_gt, Rank::Infinite);
        assert_eq!(p.sup_value, 0.0);
        assert!(p.argmax_set.is_empty());
    }

    #[test]
    fn positive_plateau() {
        let p = rank_profile(&seq(&[-1.0, 0.0, 2.0, 2.0, 1.0]));
        assert_eq!(p.k_geq, Rank::At(1));
        assert_eq!(p.k_gt, Rank::At(2));
        assert_eq!(p.big_k_geq, Rank::At(2));
        assert_eq!(p.big_k_gt, Rank::At(3));
        assert_eq!(p.argmax_set, vec![2, 3]);
    }

    #[test]
    fn empty_prefix_rejected() {
        assert!(FiniteC0Sequence::new(vec![]).is_err());
        assert!(FiniteC0Sequence::new(vec![f64::NAN]).is_err());
    }
}
