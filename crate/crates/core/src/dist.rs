//! Exact probability distributions over `[N]` and over q-ary words.

use crate::combinatorics::Symbol;
use crate::error::{invalid, Error, Result};
use crate::rational::{format_ratio, Prob};
use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

fn check_mass(p: &Prob) -> Result<()> {
    if p.is_negative() || *p > Prob::one() {
        return Err(invalid!("probability {} outside [0,1]", format_ratio(p)));
    }
    Ok(())
}

/// Distribution over the index set `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    probs: Vec<Prob>,
}

impl Dist {
    /// Validates that entries lie in `[0,1]` and sum to exactly one.
    pub fn new(probs: Vec<Prob>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid!("distribution over an empty set"));
        }
        for p in &probs {
            check_mass(p)?;
        }
        let total: Prob = probs.iter().sum();
        if !total.is_one() {
            return Err(invalid!("distribution sums to {}", format_ratio(&total)));
        }
        Ok(Dist { probs })
    }

    pub fn point(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return Err(invalid!("point mass at {at} outside [0,{len})"));
        }
        let mut probs = vec![Prob::zero(); len];
        probs[at] = Prob::one();
        Ok(Dist { probs })
    }

    /// Uniform over `support` (duplicates ignored).
    pub fn uniform_on(len: usize, support: &[usize]) -> Result<Self> {
        let mut s = support.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(invalid!("uniform distribution on an empty set"));
        }
        if let Some(&bad) = s.iter().find(|&&k| k >= len) {
            return Err(invalid!("support element {bad} outside [0,{len})"));
        }
        let mass = Prob::new(BigInt::one(), BigInt::from(s.len()));
        let mut probs = vec![Prob::zero(); len];
        for k in s {
            probs[k] = mass.clone();
        }
        Ok(Dist { probs })
    }

    /// Normalises nonnegative integer weights.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        let total: u128 = weights.iter().map(|&w| u128::from(w)).sum();
        if total == 0 {
            return Err(invalid!("all weights are zero"));
        }
        let total = BigInt::from(total);
        Ok(Dist {
            probs: weights
                .iter()
                .map(|&w| Prob::new(BigInt::from(w), total.clone()))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[Prob] {
        &self.probs
    }

    pub fn get(&self, k: usize) -> &Prob {
        &self.probs[k]
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(k, _)| k)
            .collect()
    }

    /// Uniform on its support.
    pub fn is_uniform(&self) -> bool {
        let mut nz = self.probs.iter().filter(|p| !p.is_zero());
        match nz.next() {
            Some(first) => nz.all(|p| p == first),
            None => false,
        }
    }

    pub fn mass_of(&self, set: &[usize]) -> Prob {
        set.iter().map(|&k| &self.probs[k]).sum()
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.probs.iter().enumerate().map(|(k, p)| (k, p)))
    }
}

/// Unnormalised L1 distance `Σ |p - r|`, in `[0, 2]`.
pub fn tv_distance(p: &Dist, r: &Dist) -> Result<Prob> {
    if p.len() != r.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions over {} and {} points",
            p.len(),
            r.len()
        )));
    }
    Ok(p.probs
        .iter()
        .zip(&r.probs)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Sparse distribution over q-ary words of a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordDist {
    entries: Vec<(Vec<Symbol>, Prob)>,
}

impl WordDist {
    /// Merges repeated words, drops zero entries, checks the total is one.
    pub fn new(entries: Vec<(Vec<Symbol>, Prob)>) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<Vec<Symbol>, Prob> = Default::default();
        for (w, p) in entries {
            check_mass(&p)?;
            *merged.entry(w).or_insert_with(Prob::zero) += p;
        }
        merged.retain(|_, p| !p.is_zero());
        let entries: Vec<_> = merged.into_iter().collect();
        if entries.is_empty() {
            return Err(invalid!("word distribution with empty support"));
        }
        let len = entries[0].0.len();
        if entries.iter().any(|(w, _)| w.len() != len) {
            return Err(Error::DimensionMismatch("words of unequal length".into()));
        }
        let total: Prob = entries.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(invalid!("word distribution sums to {}", format_ratio(&total)));
        }
        Ok(WordDist { entries })
    }

    pub fn point(word: Vec<Symbol>) -> Result<Self> {
        WordDist::new(vec![(word, Prob::one())])
    }

    pub fn uniform(words: Vec<Vec<Symbol>>) -> Result<Self> {
        let m = Prob::new(BigInt::one(), BigInt::from(words.len().max(1)));
        WordDist::new(words.into_iter().map(|w| (w, m.clone())).collect())
    }

    pub fn entries(&self) -> &[(Vec<Symbol>, Prob)] {
        &self.entries
    }

    pub fn word_len(&self) -> usize {
        self.entries[0].0.len()
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.entries.iter().enumerate().map(|(k, (_, p))| (k, p)))
    }
}

/// Exact sampler: outcomes carry integer weights over a common denominator.
#[derive(Debug, Clone)]
pub struct Sampler {
    outcomes: Vec<usize>,
    repr: SamplerRepr,
}

#[derive(Debug, Clone)]
enum SamplerRepr {
    Small { cumulative: Vec<u64>, total: u64 },
    Big { cumulative: Vec<BigUint>, total: BigUint },
}

impl Sampler {
    fn new<'a>(items: impl Iterator<Item = (usize, &'a Prob)>) -> Self {
        let items: Vec<(usize, &Prob)> = items.filter(|(_, p)| !p.is_zero()).collect();
        let denom = items
            .iter()
            .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        let weights: Vec<BigUint> = items
            .iter()
            .map(|(_, p)| {
                let w: BigRational = *p * BigRational::from_integer(denom.clone());
                w.to_integer().magnitude().clone()
            })
            .collect();
        let outcomes = items.iter().map(|(k, _)| *k).collect();
        let mut acc = BigUint::zero();
        let cumulative: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        let repr = match u64::try_from(&acc) {
            Ok(total) => SamplerRepr::Small {
                cumulative: cumulative
                    .iter()
                    .map(|c| u64::try_from(c).expect("bounded by total"))
                    .collect(),
                total,
            },
            Err(_) => SamplerRepr::Big {
                cumulative,
                total: acc,
            },
        };
        Sampler { outcomes, repr }
    }

    /// Draws an outcome index (position in the originating distribution).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let slot = match &self.repr {
            SamplerRepr::Small { cumulative, total } => {
                let u = rng.gen_range(0..*total);
                cumulative.partition_point(|&c| c <= u)
            }
            SamplerRepr::Big { cumulative, total } => {
                let u = rng.gen_biguint_below(total);
                cumulative.partition_point(|c| *c <= u)
            }
        };
        self.outcomes[slot]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::rng::Stream;

    #[test]
    fn validation() {
        assert!(Dist::new(vec![rat(1, 2), rat(1, 2)]).is_ok());
        assert!(Dist::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(Dist::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(WordDist::new(vec![(vec![0, 1], rat(1, 2)), (vec![0, 1], rat(1, 2))]).is_ok());
        assert!(WordDist::new(vec![(vec![0, 1], rat(1, 2)), (vec![0], rat(1, 2))]).is_err());
    }

    #[test]
    fn distance_examples() {
        let p = Dist::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let a = Dist::point(2, 0).unwrap();
        let b = Dist::point(2, 1).unwrap();
        assert_eq!(tv_distance(&p, &p).unwrap(), rat(0, 1));
        assert_eq!(tv_distance(&a, &b).unwrap(), rat(2, 1));
        assert_eq!(tv_distance(&p, &a).unwrap(), rat(1, 1));
        assert!(tv_distance(&p, &Dist::point(3, 0).unwrap()).is_err());
    }

    #[test]
    fn sampler_frequencies() {
        let d = Dist::new(vec![rat(1, 4), rat(0, 1), rat(3, 4)]).unwrap();
        let s = d.sampler();
        let mut rng = Stream::derive(3, "sampler");
        let mut hits = [0usize; 3];
        let trials = 40_000;
        for _ in 0..trials {
            hits[s.sample(&mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        let p = hits[0] as f64 / trials as f64;
        let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
        assert!((p - 0.25).abs() < 4.0 * sigma);
    }
}
