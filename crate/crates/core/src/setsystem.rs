//! Constant-weight set systems over `[N]` with bounded pairwise
//! intersections: greedy construction, exact profiling, the complement
//! transform and the lower bounds that constrain them.

use crate::combinatorics::binomial;
use crate::entropy::h2_inv;
use crate::error::{invalid, Error, Result};
use crate::rational::{format_ratio, to_f64};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use std::collections::HashSet;

/// A family of distinct subsets of `0..ground`, each stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    ground: usize,
    sets: Vec<Vec<usize>>,
}

impl SetSystem {
    pub fn new(ground: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if ground == 0 {
            return Err(invalid!("empty ground set"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(sets.len());
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&e| e >= ground) {
                return Err(invalid!("element {bad} outside [0,{ground})"));
            }
            if !seen.insert(s.clone()) {
                return Err(invalid!("repeated set {s:?}"));
            }
            out.push(s);
        }
        Ok(SetSystem { ground, sets: out })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Common set size, if all sets have one.
    pub fn weight(&self) -> Option<usize> {
        let first = self.sets.first()?.len();
        self.sets.iter().all(|s| s.len() == first).then_some(first)
    }
}

/// Size of the intersection of two sorted sets.
pub fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// `Γ`, `Δ` and their ratios to `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntersectionProfile {
    pub ground: usize,
    pub m: usize,
    pub gamma: usize,
    /// Largest pairwise intersection; zero for a single set.
    pub delta: usize,
}

impl IntersectionProfile {
    pub fn epsilon(&self) -> BigRational {
        BigRational::new(self.gamma.into(), self.ground.into())
    }

    pub fn delta_ratio(&self) -> BigRational {
        BigRational::new(self.delta.into(), self.ground.into())
    }

    /// `Δ/Γ`, the sum error of the system used as an identification code.
    pub fn normalized(&self) -> BigRational {
        BigRational::new(self.delta.into(), self.gamma.into())
    }
}

pub fn verify_profile(system: &SetSystem) -> Result<IntersectionProfile> {
    let gamma = system
        .weight()
        .ok_or_else(|| invalid!("set system is empty or not constant-weight"))?;
    let sets = system.sets();
    let delta = (0..sets.len())
        .flat_map(|i| (i + 1..sets.len()).map(move |j| (i, j)))
        .map(|(i, j)| intersection_size(&sets[i], &sets[j]))
        .max()
        .unwrap_or(0);
    Ok(IntersectionProfile {
        ground: system.ground(),
        m: sets.len(),
        gamma,
        delta,
    })
}

/// Replaces every set by its complement; only meaningful when `Γ > N/2`.
pub fn complement_system(system: &SetSystem) -> Result<SetSystem> {
    let gamma = system
        .weight()
        .ok_or_else(|| invalid!("set system is empty or not constant-weight"))?;
    if 2 * gamma <= system.ground() {
        return Err(invalid!(
            "complement transform requires Γ > N/2 (Γ = {gamma}, N = {})",
            system.ground()
        ));
    }
    Ok(complement_unchecked(system))
}

fn complement_unchecked(system: &SetSystem) -> SetSystem {
    let sets = system
        .sets()
        .iter()
        .map(|s| {
            let mut member = vec![false; system.ground()];
            for &e in s {
                member[e] = true;
            }
            (0..system.ground()).filter(|&e| !member[e]).collect()
        })
        .collect();
    SetSystem {
        ground: system.ground(),
        sets,
    }
}

/// Result of a randomized greedy run.
#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub system: SetSystem,
    pub set_size: usize,
    pub cap: usize,
    pub target: usize,
    pub attempts: u64,
    /// The attempt budget ran out before the target was reached.
    pub exhausted: bool,
}

/// Rejection-sampling greedy: draws uniform `set_size`-subsets and keeps
/// one iff it meets every kept set in at most `cap` elements and is new.
pub fn greedy_packing<R: Rng + ?Sized>(
    ground: usize,
    set_size: usize,
    cap: usize,
    target: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<GreedyOutcome> {
    if set_size == 0 || set_size > ground {
        return Err(invalid!("set size {set_size} must lie in 1..={ground}"));
    }
    if target == 0 {
        return Err(invalid!("target count must be ≥ 1"));
    }
    let available = binomial(ground as u64, set_size as u64);
    if BigUint::from(target) > available {
        return Err(Error::Infeasible(format!(
            "{target} sets requested but only {available} subsets of size {set_size} exist in [{ground}]"
        )));
    }
    let mut kept: Vec<Vec<usize>> = Vec::new();
    let mut attempts = 0u64;
    while kept.len() < target && attempts < max_attempts {
        attempts += 1;
        let mut cand = rand::seq::index::sample(rng, ground, set_size).into_vec();
        cand.sort_unstable();
        let ok = kept.iter().all(|s| {
            let c = intersection_size(s, &cand);
            c <= cap && c < set_size
        });
        if ok {
            kept.push(cand);
        }
    }
    let exhausted = kept.len() < target;
    Ok(GreedyOutcome {
        system: SetSystem { ground, sets: kept },
        set_size,
        cap,
        target,
        attempts,
        exhausted,
    })
}

/// Parameters of the Gilbert-type existence statement.
#[derive(Debug, Clone)]
pub struct GilbertParams {
    pub epsilon: BigRational,
    pub lambda: BigRational,
    /// Base of the logarithm in `λ·log(1/ε − 1) > 2`.
    pub log_base: f64,
}

impl GilbertParams {
    pub fn new(epsilon: BigRational, lambda: BigRational) -> Self {
        GilbertParams {
            epsilon,
            lambda,
            log_base: 2.0,
        }
    }

    /// `ε < 1/6`, `λ ∈ (0, 1/2)` and `λ·log(1/ε − 1) > 2`.
    pub fn check(&self) -> Result<()> {
        let half = BigRational::new(1.into(), 2.into());
        let sixth = BigRational::new(1.into(), 6.into());
        if !self.epsilon.is_positive() || self.epsilon >= sixth {
            return Err(Error::Hypothesis(format!(
                "ε = {} must lie in (0, 1/6)",
                format_ratio(&self.epsilon)
            )));
        }
        if !self.lambda.is_positive() || self.lambda >= half {
            return Err(Error::Hypothesis(format!(
                "λ = {} must lie in (0, 1/2)",
                format_ratio(&self.lambda)
            )));
        }
        let eps = to_f64(&self.epsilon);
        let lhs = to_f64(&self.lambda) * (1.0 / eps - 1.0).log(self.log_base);
        if lhs <= 2.0 {
            return Err(Error::Hypothesis(format!(
                "λ·log(1/ε − 1) = {lhs:.6} must exceed 2"
            )));
        }
        Ok(())
    }
}

/// `⌈N^{-1}·2^{x−1}⌉` for real `x = εN`, saturating at `usize::MAX`.
pub fn gilbert_floor(ground: usize, eps_n: f64) -> usize {
    let v = (eps_n - 1.0 - (ground as f64).log2()).exp2().ceil();
    if v >= usize::MAX as f64 {
        usize::MAX
    } else {
        (v as usize).max(1)
    }
}

/// Greedy realisation of the Gilbert-type bound: sets of size `⌊εN⌋`,
/// intersections at most `⌊λεN⌋`, aiming for
/// `min(requested, ⌈N^{-1}2^{εN−1}⌉)` sets.
pub fn greedy_gilbert<R: Rng + ?Sized>(
    ground: usize,
    params: &GilbertParams,
    requested: Option<usize>,
    max_attempts: u64,
    rng: &mut R,
) -> Result<GreedyOutcome> {
    params.check()?;
    let eps_n = &params.epsilon * BigRational::from_integer(ground.into());
    let set_size = eps_n.floor().to_integer().to_usize().unwrap_or(0);
    if set_size == 0 {
        return Err(Error::Infeasible(format!(
            "⌊εN⌋ = 0 for ε = {}, N = {ground}",
            format_ratio(&params.epsilon)
        )));
    }
    let cap = (&params.lambda * &eps_n)
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0);
    let floor = gilbert_floor(ground, to_f64(&eps_n));
    let target = requested.map_or(floor, |r| r.min(floor));
    greedy_packing(ground, set_size, cap, target, max_attempts, rng)
}

fn log2_big(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits <= 1000 {
        m.to_f64().unwrap().log2()
    } else {
        let shift = bits - 64;
        (m >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

/// `M > 1 + N/α`, exactly.
pub fn exceeds_lemma6_threshold(ground: usize, m: &BigUint, alpha: &BigRational) -> bool {
    let threshold = BigRational::one() + BigRational::from_integer(ground.into()) / alpha;
    BigRational::from_integer(BigInt::from(m.clone())) > threshold
}

fn check_alpha(alpha: &BigRational) -> Result<()> {
    if !alpha.is_positive() || *alpha >= BigRational::one() {
        return Err(invalid!("α = {} must lie in (0,1)", format_ratio(alpha)));
    }
    Ok(())
}

/// `(1−α)·h2⁻¹(log2(M)/N)` with no hypothesis on `M`.
pub fn prop2_bound_value(ground: usize, m: &BigUint, alpha: &BigRational) -> Result<f64> {
    check_alpha(alpha)?;
    if m.is_zero() || ground == 0 {
        return Err(invalid!("M and N must be positive"));
    }
    let rate = log2_big(m) / ground as f64;
    if rate > 1.0 {
        return Err(invalid!("log2(M)/N = {rate} exceeds 1"));
    }
    Ok((1.0 - to_f64(alpha)) * h2_inv(rate)?)
}

/// Lower bound on `Δ/Γ` for any constant-weight system of `M > 1 + N/α` sets.
pub fn prop2_lower_bound(ground: usize, m: &BigUint, alpha: &BigRational) -> Result<f64> {
    check_alpha(alpha)?;
    if !exceeds_lemma6_threshold(ground, m, alpha) {
        return Err(Error::Hypothesis(format!(
            "M = {m} does not exceed 1 + N/α for N = {ground}, α = {}",
            format_ratio(alpha)
        )));
    }
    prop2_bound_value(ground, m, alpha)
}

/// `δ > (1−α)ε²` for a system satisfying `M > 1 + N/α`.
pub fn lemma6_check(system: &SetSystem, alpha: &BigRational) -> Result<bool> {
    check_alpha(alpha)?;
    let p = verify_profile(system)?;
    if !exceeds_lemma6_threshold(p.ground, &BigUint::from(p.m), alpha) {
        return Err(Error::Hypothesis(format!(
            "M = {} does not exceed 1 + N/α for N = {}, α = {}",
            p.m,
            p.ground,
            format_ratio(alpha)
        )));
    }
    Ok(lemma6_inequality(&p, alpha))
}

/// `δ > (1−α)ε²`, i.e. `Δ·N > (1−α)·Γ²`.
pub fn lemma6_inequality(p: &IntersectionProfile, alpha: &BigRational) -> bool {
    let lhs = BigRational::from_integer(BigInt::from(p.delta) * BigInt::from(p.ground));
    let rhs = (BigRational::one() - alpha) * BigRational::from_integer(BigInt::from(p.gamma).pow(2));
    lhs > rhs
}

/// Johnson bound `⌊Nd/(2w² − 2Nw + Nd)⌋` on constant-weight binary codes of
/// length `N`, weight `w` and minimum distance `d`.
pub fn johnson_bound_m(ground: u64, d: u64, w: u64) -> Result<u64> {
    let (n, d, w) = (i128::from(ground), i128::from(d), i128::from(w));
    let denom = 2 * w * w - 2 * n * w + n * d;
    if denom <= 0 {
        return Err(Error::Inapplicable(format!(
            "Johnson bound needs 2w² − 2Nw + Nd > 0, got {denom}"
        )));
    }
    u64::try_from(n * d / denom).map_err(|_| Error::Overflow("Johnson bound".into()))
}
