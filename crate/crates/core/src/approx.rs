//! Approximating distributions on `[N]` by push-forwards of a uniform
//! variable on `K` atoms, and the pigeonhole argument built on them.

use crate::combinatorics::binomial;
use crate::dist::{tv_distance, Dist};
use crate::error::{invalid, Error, Result};
use crate::idcode::{eval_noiseless, EvalOptions, NoiselessIdCode};
use crate::rational::{format_ratio, Prob};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// `m_y` atoms mapped to outcome `y`, with `Σ m_y = K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApproxMap {
    atoms: u64,
    counts: Vec<u64>,
}

impl ApproxMap {
    pub fn new(atoms: u64, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(invalid!("map onto an empty set"));
        }
        let total: u128 = counts.iter().map(|&c| u128::from(c)).sum();
        if total != u128::from(atoms) || atoms == 0 {
            return Err(invalid!("atom counts sum to {total}, expected K = {atoms} ≥ 1"));
        }
        Ok(ApproxMap { atoms, counts })
    }

    pub fn atoms(&self) -> u64 {
        self.atoms
    }

    pub fn ground(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `(m_y/K)_y`.
    pub fn induced(&self) -> Dist {
        Dist::from_weights(&self.counts).expect("K ≥ 1")
    }
}

/// Largest-remainder allocation: `⌊K·p_y⌋` atoms each, then one more to the
/// outcomes with the largest remainders (smallest index first on ties).
/// The distance bound `d ≤ N/K` is checked on every call.
pub fn build_approx(target: &Dist, atoms: u64) -> Result<ApproxMap> {
    if atoms == 0 {
        return Err(invalid!("K must be ≥ 1"));
    }
    let k = Prob::from_integer(BigInt::from(atoms));
    let mut counts = Vec::with_capacity(target.len());
    let mut remainders = Vec::with_capacity(target.len());
    for p in target.probs() {
        let scaled = p * &k;
        let whole = scaled.floor();
        counts.push(whole.to_integer().to_u64().expect("at most K"));
        remainders.push(scaled - whole);
    }
    let placed: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..target.len()).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &y in order.iter().take((atoms - placed) as usize) {
        counts[y] += 1;
    }
    let map = ApproxMap::new(atoms, counts)?;
    let d = approx_distance(&map, target)?;
    if d * &k > Prob::from_integer(target.len().into()) {
        return Err(Error::BoundViolation(format!(
            "approximation at K = {atoms} is farther than N/K"
        )));
    }
    Ok(map)
}

/// `Σ_y |p_y − m_y/K|`.
pub fn approx_distance(map: &ApproxMap, target: &Dist) -> Result<Prob> {
    if map.ground() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "map onto {} points, target on {}",
            map.ground(),
            target.len()
        )));
    }
    tv_distance(&map.induced(), target)
}

/// `C(K+N−1, N−1)`, the number of distinct maps at resolution `K`.
pub fn count_resolution_types(ground: u64, atoms: u64) -> Result<BigUint> {
    if ground == 0 || atoms == 0 {
        return Err(invalid!("N and K must be ≥ 1"));
    }
    let top = atoms
        .checked_add(ground - 1)
        .ok_or_else(|| Error::Overflow("K + N − 1".into()))?;
    Ok(binomial(top, ground - 1))
}

/// Two messages whose encoders share an approximation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    /// `max(0, 1 − (d_j + d_k))`.
    pub floor: Prob,
}

#[derive(Debug, Clone)]
pub struct PigeonholeReport {
    pub atoms: u64,
    pub maps: Vec<ApproxMap>,
    pub distances: Vec<Prob>,
    pub resolution_types: BigUint,
    /// `M` exceeds the number of distinct maps.
    pub guaranteed: bool,
    /// Best pair of every group of identical maps.
    pub collisions: Vec<Collision>,
    /// `λ1 + λ2` of the code.
    pub lambda: Prob,
}

impl PigeonholeReport {
    pub fn best_floor(&self) -> Option<&Prob> {
        self.collisions.iter().map(|c| &c.floor).max()
    }
}

/// Approximates every encoder at resolution `K`, groups identical maps and
/// checks the implied floor on `λ1 + λ2` against the exact errors.
pub fn pigeonhole_collision_check(code: &NoiselessIdCode, atoms: u64) -> Result<PigeonholeReport> {
    if code.m() < 2 {
        return Err(invalid!("pigeonhole check needs at least two messages"));
    }
    let built: Vec<(ApproxMap, Prob)> = code
        .encoders()
        .par_iter()
        .map(|e| {
            let m = build_approx(e, atoms)?;
            let d = approx_distance(&m, e)?;
            Ok((m, d))
        })
        .collect::<Result<_>>()?;
    let (maps, distances): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    let resolution_types = count_resolution_types(code.ground() as u64, atoms)?;
    let guaranteed = BigUint::from(code.m()) > resolution_types;

    let mut groups: HashMap<&ApproxMap, Vec<usize>> = HashMap::new();
    for (i, m) in maps.iter().enumerate() {
        groups.entry(m).or_default().push(i);
    }
    let mut collisions: Vec<Collision> = groups
        .into_values()
        .filter(|g| g.len() >= 2)
        .map(|mut g| {
            g.sort_by(|&a, &b| distances[a].cmp(&distances[b]).then(a.cmp(&b)));
            let (j, k) = (g[0].min(g[1]), g[0].max(g[1]));
            let floor = Prob::one() - (&distances[j] + &distances[k]);
            Collision {
                first: j,
                second: k,
                floor: if floor.is_negative() { Prob::zero() } else { floor },
            }
        })
        .collect();
    collisions.sort_by_key(|c| (c.first, c.second));
    if guaranteed && collisions.is_empty() {
        return Err(Error::BoundViolation(format!(
            "{} messages but no shared map among {resolution_types} possible",
            code.m()
        )));
    }
    let lambda = eval_noiseless(code, EvalOptions::default()).lambda();
    let report = PigeonholeReport {
        atoms,
        maps,
        distances,
        resolution_types,
        guaranteed,
        collisions,
        lambda,
    };
    if let Some(f) = report.best_floor() {
        if *f > report.lambda {
            return Err(Error::BoundViolation(format!(
                "λ1 + λ2 = {} is below the collision floor {}",
                format_ratio(&report.lambda),
                format_ratio(f)
            )));
        }
    }
    Ok(report)
}
