//! The n-block q-ary uniform permutation channel.
//!
//! The output of the channel is uniform on the type class of its input, so
//! the law is computed from class sizes and sampling draws a uniform rank in
//! the class and unranks it.

use crate::combinatorics::{type_of, Symbol, TypeSpace};
use crate::dist::{Dist, WordDist};
use crate::error::{invalid, Error, Result};
use crate::rational::{from_biguint_ratio, Prob};
use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;

/// Multinomial coefficient as a product of binomials, when it fits in u128.
fn small_multinomial(counts: &[u32]) -> Option<u128> {
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for &c in counts {
        // C(placed + c, c), built up one factor at a time; each prefix is exact
        let mut b: u128 = 1;
        for k in 1..=u128::from(c) {
            b = b.checked_mul(placed + k)? / k;
        }
        total = total.checked_mul(b)?;
        placed += u128::from(c);
    }
    Some(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationChannel {
    n: usize,
    q: usize,
}

impl PermutationChannel {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if n == 0 || !(2..=256).contains(&q) {
            return Err(invalid!("permutation channel needs n ≥ 1 and 2 ≤ q ≤ 256"));
        }
        Ok(PermutationChannel { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    fn check(&self, x: &[Symbol]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} on a channel with n = {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `Π(y|x)`: `1/|T_x|` when `y` and `x` share a type, zero otherwise.
    pub fn transition_prob(&self, x: &[Symbol], y: &[Symbol]) -> Result<Prob> {
        self.check(x)?;
        self.check(y)?;
        let mut counts = vec![0u32; self.q];
        let mut diff = vec![0i64; self.q];
        for (&a, &b) in x.iter().zip(y) {
            for s in [a, b] {
                if usize::from(s) >= self.q {
                    return Err(Error::SymbolOutOfRange { symbol: s, q: self.q });
                }
            }
            counts[usize::from(a)] += 1;
            diff[usize::from(a)] += 1;
            diff[usize::from(b)] -= 1;
        }
        if diff.iter().any(|&d| d != 0) {
            return Ok(Prob::zero());
        }
        let size = match small_multinomial(&counts) {
            Some(v) => BigUint::from(v),
            None => type_of(x, self.q)?.class_size(),
        };
        Ok(from_biguint_ratio(&BigUint::from(1u32), &size))
    }

    /// One channel use: a uniform member of the type class of `x`.
    pub fn sample_output<R: Rng + ?Sized>(&self, x: &[Symbol], rng: &mut R) -> Result<Vec<Symbol>> {
        self.check(x)?;
        let t = type_of(x, self.q)?;
        let rank = rng.gen_biguint_below(&t.class_size());
        t.unrank(&rank)
    }

    /// Law of the output type under an input distribution: the mass of type
    /// `j` is the input mass on class `j`.
    pub fn output_type_dist(&self, space: &TypeSpace, encoder: &WordDist) -> Result<Dist> {
        if space.n() != self.n || space.q() != self.q {
            return Err(Error::DimensionMismatch("type space of another channel".into()));
        }
        let mut probs = vec![Prob::zero(); space.len()];
        for (x, p) in encoder.entries() {
            probs[space.index_of_vector(x)?] += p;
        }
        Dist::new(probs)
    }
}

/// The noiseless channel on `[N]`: the output equals the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiselessChannel {
    pub size: usize,
}

impl NoiselessChannel {
    pub fn transition_prob(&self, x: usize, y: usize) -> Prob {
        if x == y && x < self.size {
            Prob::from_integer(1.into())
        } else {
            Prob::zero()
        }
    }
}
