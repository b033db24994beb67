//! Oracles and random instances shared by the integration tests. Nothing in
//! here calls the library's evaluators.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use permid::combinatorics::Symbol;
use permid::dist::{Dist, WordDist};
use permid::idcode::{Decoders, NoiselessIdCode, PermIdCode};
use permid::rng::Stream;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashSet;

pub type Q = BigRational;

pub fn q(p: i64, r: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(r))
}

pub fn stream(label: &str) -> Stream {
    Stream::derive(0x5eed, label)
}

/// `m[i][j] = Σ_k Q_i(k)·P_j(1|k)`, straight from the definitions.
pub fn noiseless_matrix(code: &NoiselessIdCode) -> Vec<Vec<Q>> {
    let m = code.m();
    let accept = |j: usize, k: usize| -> Q {
        match code.decoders() {
            Decoders::Deterministic(sets) => {
                if sets[j].contains(&k) {
                    Q::one()
                } else {
                    Q::zero()
                }
            }
            Decoders::Stochastic(p) => p[j][k].clone(),
        }
    };
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let enc = &code.encoders()[i];
                    let hit: Q = (0..code.ground()).map(|k| enc.get(k) * accept(j, k)).sum();
                    if i == j {
                        Q::one() - hit
                    } else {
                        hit
                    }
                })
                .collect()
        })
        .collect()
}

/// `(λ1, λ2)` of a matrix with misses on the diagonal.
pub fn lambdas(m: &[Vec<Q>]) -> (Q, Q) {
    let mut l1 = Q::zero();
    let mut l2 = Q::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let slot = if i == j { &mut l1 } else { &mut l2 };
            if v > slot {
                *slot = v.clone();
            }
        }
    }
    (l1, l2)
}

pub fn tv(p: &Dist, r: &Dist) -> Q {
    p.probs().iter().zip(r.probs()).map(|(a, b)| (a - b).abs()).sum()
}

fn random_dist<R: Rng>(rng: &mut R, ground: usize, support: usize) -> Dist {
    let mut w = vec![0u64; ground];
    let mut idx: Vec<usize> = (0..ground).collect();
    idx.shuffle(rng);
    for &k in idx.iter().take(support.max(1)) {
        w[k] = rng.gen_range(1..6);
    }
    Dist::from_weights(&w).unwrap()
}

/// Uniform on a random support.
pub fn random_uniform<R: Rng>(rng: &mut R, ground: usize, support: usize) -> Dist {
    let mut idx: Vec<usize> = (0..ground).collect();
    idx.shuffle(rng);
    let mut s = idx[..support.clamp(1, ground)].to_vec();
    s.sort_unstable();
    Dist::uniform_on(ground, &s).unwrap()
}

fn random_set<R: Rng>(rng: &mut R, ground: usize) -> Vec<usize> {
    let p = [0.0, 0.3, 0.5, 0.7, 1.0][rng.gen_range(0..5)];
    (0..ground).filter(|_| rng.gen_bool(p)).collect()
}

/// Random code on `[ground]`; stochastic decoders use denominators up to 8
/// and include squares so thresholds land on exact ties.
pub fn random_noiseless<R: Rng>(rng: &mut R, ground: usize, m: usize, stochastic: bool, uniform: bool) -> NoiselessIdCode {
    let enc = (0..m)
        .map(|_| {
            let s = rng.gen_range(1..=ground);
            if uniform {
                random_uniform(rng, ground, s)
            } else {
                random_dist(rng, ground, s)
            }
        })
        .collect();
    let dec = if stochastic {
        Decoders::Stochastic(
            (0..m)
                .map(|_| {
                    (0..ground)
                        .map(|_| {
                            let d = [1, 2, 4, 8, 9][rng.gen_range(0..5)];
                            q(rng.gen_range(0..=d), d)
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        Decoders::Deterministic((0..m).map(|_| random_set(rng, ground)).collect())
    };
    NoiselessIdCode::new(ground, enc, dec).unwrap()
}

pub fn all_words(len: usize, q: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..q as Symbol).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// A permutation-channel code with explicit decoder sets, kept alongside so
/// oracles can work on the sets themselves.
pub struct ExplicitPerm {
    pub code: PermIdCode,
    pub sets: Vec<HashSet<Vec<Symbol>>>,
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize, q: usize, blocks: usize, m: usize) -> ExplicitPerm {
    let words = all_words(n * blocks, q);
    let enc: Vec<WordDist> = (0..m)
        .map(|_| {
            let s = rng.gen_range(1..=3);
            let entries = (0..s)
                .map(|_| (words[rng.gen_range(0..words.len())].clone(), q_int(rng.gen_range(1..5))))
                .collect::<Vec<_>>();
            // merge repeats, then normalise
            let mut merged: Vec<(Vec<Symbol>, Q)> = Vec::new();
            for (w, p) in entries {
                match merged.iter_mut().find(|(v, _)| *v == w) {
                    Some(e) => e.1 += p,
                    None => merged.push((w, p)),
                }
            }
            let total: Q = merged.iter().map(|e| e.1.clone()).sum();
            WordDist::new(merged.into_iter().map(|(w, p)| (w, p / &total)).collect()).unwrap()
        })
        .collect();
    let sets: Vec<HashSet<Vec<Symbol>>> = (0..m)
        .map(|_| {
            let p = [0.0, 0.2, 0.5, 0.8, 1.0][rng.gen_range(0..5)];
            words.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
        })
        .collect();
    let listed: Vec<Vec<Vec<Symbol>>> = sets.iter().map(|s| s.iter().cloned().collect()).collect();
    let code = PermIdCode::from_decoder_sets(n, q, blocks, enc, &listed).unwrap();
    ExplicitPerm { code, sets }
}

fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Error matrix by averaging over every blockwise permutation of every
/// codeword: the channel's definition, with no type arithmetic.
pub fn perm_matrix(e: &ExplicitPerm, n: usize, blocks: usize) -> Vec<Vec<Q>> {
    let perms = permutations(n);
    let m = e.sets.len();
    // fraction of permuted copies of `x` landing in each decoder set
    let landing = |x: &[Symbol]| -> Vec<Q> {
        let mut hits = vec![0u64; m];
        let mut choice = vec![0usize; blocks];
        let total = perms.len().pow(blocks as u32) as u64;
        for _ in 0..total {
            let y: Vec<Symbol> = (0..blocks)
                .flat_map(|b| perms[choice[b]].iter().map(move |&s| x[b * n + s]))
                .collect();
            for (j, s) in e.sets.iter().enumerate() {
                if s.contains(&y) {
                    hits[j] += 1;
                }
            }
            for c in choice.iter_mut() {
                *c += 1;
                if *c < perms.len() {
                    break;
                }
                *c = 0;
            }
        }
        hits.iter().map(|&h| q(h as i64, total as i64)).collect()
    };
    let mut out = vec![vec![Q::zero(); m]; m];
    for (i, enc) in e.code.encoders().iter().enumerate() {
        for (x, p) in enc.entries() {
            for (j, f) in landing(x).into_iter().enumerate() {
                out[i][j] += p * f;
            }
        }
        out[i][i] = Q::one() - &out[i][i];
    }
    out
}

pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Inverse of `h2` on `[0, 1/2]` by plain bisection.
pub fn h2_inv(v: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn binom(n: u64, k: u64) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn max_pair_intersection(sets: &[Vec<usize>]) -> usize {
    let mut best = 0;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            best = best.max(sets[a].iter().filter(|x| sets[b].contains(x)).count());
        }
    }
    best
}

/// [`random_noiseless`] with ground size and message count drawn too.
pub fn random_code<R: Rng>(
    rng: &mut R,
    grounds: std::ops::RangeInclusive<usize>,
    ms: std::ops::RangeInclusive<usize>,
    stochastic: bool,
    uniform: bool,
) -> NoiselessIdCode {
    let ground = rng.gen_range(grounds);
    let m = rng.gen_range(ms);
    random_noiseless(rng, ground, m, stochastic, uniform)
}
