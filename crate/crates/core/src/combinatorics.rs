//! Types (compositions of `n` into `q` counts), type classes and their
//! lexicographic ranking, the type count `N` and the mixed-radix map used by
//! multi-block codes.
//!
//! Symbols are `0..q`. Types are ordered by lexicographically decreasing
//! count vector, so for `n = 3, q = 2` the order is
//! `(3,0), (2,1), (1,2), (0,3)`. Vectors inside a type class are ranked by
//! the lexicographic order of the raw vector.

use crate::error::{invalid, Error, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Symbol = u8;

/// Largest type count we are willing to materialise.
pub const ENUMERATION_LIMIT: usize = 1 << 24;

fn check_nq(n: usize, q: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid!("block length n must be ≥ 1"));
    }
    if !(2..=256).contains(&q) {
        return Err(invalid!("alphabet size q must be in 2..=256, got {q}"));
    }
    Ok(())
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Composition of `n` into `q` nonnegative counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct TypeVector {
    counts: Vec<u32>,
}

impl TryFrom<Vec<u32>> for TypeVector {
    type Error = Error;

    fn try_from(counts: Vec<u32>) -> Result<Self> {
        TypeVector::new(counts)
    }
}

impl From<TypeVector> for Vec<u32> {
    fn from(t: TypeVector) -> Self {
        t.counts
    }
}

impl TypeVector {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        check_nq(1, counts.len())?;
        let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if n == 0 {
            return Err(invalid!("type counts must sum to n ≥ 1"));
        }
        Ok(TypeVector { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// Multinomial coefficient `n! / Π counts!`.
    pub fn class_size(&self) -> BigUint {
        let mut acc = BigUint::one();
        let mut placed = 0u64;
        for &c in &self.counts {
            for i in 1..=u64::from(c) {
                placed += 1;
                acc *= placed;
                acc /= i;
            }
        }
        acc
    }

    /// Lexicographically smallest member of the class.
    pub fn representative(&self) -> Vec<Symbol> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat(s as Symbol).take(c as usize))
            .collect()
    }

    /// Position of `x` in the lexicographic order of the class.
    pub fn rank_of(&self, x: &[Symbol]) -> Result<BigUint> {
        if type_of(x, self.q())? != *self {
            return Err(Error::DimensionMismatch(
                "vector is not a member of this type class".into(),
            ));
        }
        let mut rem: Vec<u64> = self.counts.iter().map(|&c| u64::from(c)).collect();
        let mut len = x.len() as u64;
        let mut block = self.class_size();
        let mut rank = BigUint::zero();
        for &sym in x {
            let sym = sym as usize;
            for &r in rem.iter().take(sym) {
                if r > 0 {
                    rank += &block * r / len;
                }
            }
            block = block * rem[sym] / len;
            rem[sym] -= 1;
            len -= 1;
        }
        Ok(rank)
    }

    /// Inverse of [`TypeVector::rank_of`].
    pub fn unrank(&self, rank: &BigUint) -> Result<Vec<Symbol>> {
        let mut block = self.class_size();
        if *rank >= block {
            return Err(invalid!("rank {rank} outside class of size {block}"));
        }
        let mut rank = rank.clone();
        let mut rem: Vec<u64> = self.counts.iter().map(|&c| u64::from(c)).collect();
        let mut len = self.n() as u64;
        let mut out = Vec::with_capacity(self.n());
        while len > 0 {
            for s in 0..rem.len() {
                if rem[s] == 0 {
                    continue;
                }
                let sub = &block * rem[s] / len;
                if rank < sub {
                    out.push(s as Symbol);
                    block = sub;
                    rem[s] -= 1;
                    len -= 1;
                    break;
                }
                rank -= sub;
            }
        }
        Ok(out)
    }

    /// Index of this type in the canonical order, without enumerating.
    pub fn index(&self) -> BigUint {
        let q = self.q();
        let mut remaining = self.n() as u64;
        let mut idx = BigUint::zero();
        for (p, &c) in self.counts.iter().enumerate().take(q - 1) {
            let parts_after = (q - p - 1) as u64;
            for v in (u64::from(c) + 1)..=remaining {
                idx += binomial(remaining - v + parts_after - 1, parts_after - 1);
            }
            remaining -= u64::from(c);
        }
        idx
    }
}

/// Counts symbol occurrences of `x` over the alphabet `0..q`.
pub fn type_of(x: &[Symbol], q: usize) -> Result<TypeVector> {
    if x.is_empty() {
        return Err(invalid!("empty vector has no type"));
    }
    check_nq(x.len(), q)?;
    let mut counts = vec![0u32; q];
    for &s in x {
        if s as usize >= q {
            return Err(Error::SymbolOutOfRange { symbol: s, q });
        }
        counts[s as usize] += 1;
    }
    Ok(TypeVector { counts })
}

/// `N = C(n+q-1, q-1)`, exact.
pub fn count_types(n: usize, q: usize) -> Result<BigUint> {
    check_nq(n, q)?;
    Ok(binomial((n + q - 1) as u64, (q - 1) as u64))
}

fn compositions(n: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<TypeVector>) {
    if parts == 1 {
        prefix.push(n);
        out.push(TypeVector {
            counts: prefix.clone(),
        });
        prefix.pop();
        return;
    }
    for first in (0..=n).rev() {
        prefix.push(first);
        compositions(n - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// All types of length `n` over `q` symbols, in canonical order.
pub fn enumerate_types(n: usize, q: usize) -> Result<Vec<TypeVector>> {
    let count = count_types(n, q)?;
    let count = count
        .to_usize()
        .filter(|&c| c <= ENUMERATION_LIMIT)
        .ok_or_else(|| {
            Error::Overflow(format!(
                "N = {count} types for n={n}, q={q} exceeds the enumeration limit"
            ))
        })?;
    let n32 = u32::try_from(n).map_err(|_| Error::Overflow(format!("n = {n}")))?;
    let mut out = Vec::with_capacity(count);
    compositions(n32, q, &mut Vec::with_capacity(q), &mut out);
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// Truth values of the three bounds on `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NBounds {
    /// `n^(q-1)/(q-1)! ≤ N`
    pub lower: bool,
    /// `N ≤ n^(q-1)/(q-1)!·(1+(q-1)/n)^(q-1)`
    pub upper: bool,
    /// `N ≤ (2n)^(q-1)`; only meaningful for `n ≥ q-1`.
    pub coarse: Option<bool>,
}

impl NBounds {
    pub fn all_hold(&self) -> bool {
        self.lower && self.upper && self.coarse.unwrap_or(true)
    }
}

pub fn check_n_bounds(n: usize, q: usize) -> Result<NBounds> {
    let count = count_types(n, q)?;
    let e = (q - 1) as u32;
    let fact = factorial((q - 1) as u64);
    let lower = BigUint::from(n).pow(e) <= &count * &fact;
    // (n^(q-1)/(q-1)!)·((n+q-1)/n)^(q-1) = (n+q-1)^(q-1)/(q-1)!
    let upper = &count * &fact <= BigUint::from(n + q - 1).pow(e);
    let coarse = (n + 1 >= q).then(|| count <= BigUint::from(2 * n).pow(e));
    Ok(NBounds {
        lower,
        upper,
        coarse,
    })
}

/// Enumerated type space with constant-time index lookup.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    n: usize,
    q: usize,
    types: Vec<TypeVector>,
    sizes: Vec<BigUint>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl TypeSpace {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        let types = enumerate_types(n, q)?;
        let sizes = types.iter().map(TypeVector::class_size).collect();
        let lookup = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.counts.clone(), i))
            .collect();
        Ok(TypeSpace {
            n,
            q,
            types,
            sizes,
            lookup,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// The type count `N`.
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn type_at(&self, index: usize) -> &TypeVector {
        &self.types[index]
    }

    pub fn class_size(&self, index: usize) -> &BigUint {
        &self.sizes[index]
    }

    pub fn index_of(&self, t: &TypeVector) -> Option<usize> {
        self.lookup.get(&t.counts).copied()
    }

    /// Index of the type of a length-`n` vector.
    pub fn index_of_vector(&self, x: &[Symbol]) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in type space of length {}",
                x.len(),
                self.n
            )));
        }
        let t = type_of(x, self.q)?;
        Ok(self.lookup[&t.counts])
    }

    pub fn representative(&self, index: usize) -> Vec<Symbol> {
        self.types[index].representative()
    }
}

/// Positional base-`N` bijection between `[N]^l` and `[N^l]`, most
/// significant digit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixedRadix {
    base: usize,
    digits: usize,
    total: usize,
}

impl MixedRadix {
    pub fn new(base: usize, digits: usize) -> Result<Self> {
        if base == 0 || digits == 0 {
            return Err(invalid!("mixed radix needs base ≥ 1 and l ≥ 1"));
        }
        let total = u32::try_from(digits)
            .ok()
            .and_then(|d| base.checked_pow(d))
            .ok_or_else(|| Error::Overflow(format!("{base}^{digits} does not fit in usize")))?;
        Ok(MixedRadix {
            base,
            digits,
            total,
        })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    /// `N^l`.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn encode(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.digits {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} digits",
                tuple.len(),
                self.digits
            )));
        }
        tuple.iter().try_fold(0usize, |acc, &d| {
            if d >= self.base {
                Err(invalid!("digit {d} outside base {}", self.base))
            } else {
                Ok(acc * self.base + d)
            }
        })
    }

    pub fn decode(&self, mut value: usize) -> Result<Vec<usize>> {
        if value >= self.total {
            return Err(invalid!("value {value} outside [0, {})", self.total));
        }
        let mut out = vec![0; self.digits];
        for slot in out.iter_mut().rev() {
            *slot = value % self.base;
            value /= self.base;
        }
        Ok(out)
    }
}
