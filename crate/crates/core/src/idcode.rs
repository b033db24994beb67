//! Identification codes for the noiseless channel on `[N]` and for the
//! permutation channel, with exact and Monte Carlo error evaluation.
//!
//! Error matrices are indexed `[sender][decoder]`: the diagonal holds the
//! missed-detection probabilities `λ_{i↛i}` and the off-diagonal entries the
//! false alarms `λ_{i→j}`.

use crate::combinatorics::{MixedRadix, Symbol, TypeSpace};
use crate::dist::{tv_distance, Dist, Sampler, WordDist};
use crate::error::{invalid, Error, Result};
use crate::rational::{format_ratio, from_biguint_ratio, Prob};
use crate::rng::Stream;
use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

/// Largest `M` for which full error matrices are kept.
pub const DEFAULT_MATRIX_CAP: usize = 4096;

/// Decision rules of a code on `[N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoders {
    /// Acceptance sets `D_i`, sorted.
    Deterministic(Vec<Vec<usize>>),
    /// Acceptance probabilities `P_i(1|k)`.
    Stochastic(Vec<Vec<Prob>>),
}

impl Decoders {
    pub fn len(&self) -> usize {
        match self {
            Decoders::Deterministic(d) => d.len(),
            Decoders::Stochastic(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Identification code for the noiseless channel on `[N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiselessIdCode {
    ground: usize,
    encoders: Vec<Dist>,
    decoders: Decoders,
}

impl NoiselessIdCode {
    pub fn new(ground: usize, encoders: Vec<Dist>, decoders: Decoders) -> Result<Self> {
        if ground == 0 {
            return Err(invalid!("empty ground set"));
        }
        if encoders.is_empty() {
            return Err(Error::InvalidCode("code without messages".into()));
        }
        if encoders.len() != decoders.len() {
            return Err(Error::InvalidCode(format!(
                "{} encoders but {} decoders",
                encoders.len(),
                decoders.len()
            )));
        }
        if let Some(e) = encoders.iter().find(|e| e.len() != ground) {
            return Err(Error::InvalidCode(format!(
                "encoder over {} points, ground set has {ground}",
                e.len()
            )));
        }
        let decoders = match decoders {
            Decoders::Deterministic(sets) => {
                let mut out = Vec::with_capacity(sets.len());
                for mut s in sets {
                    s.sort_unstable();
                    s.dedup();
                    if let Some(&bad) = s.iter().find(|&&k| k >= ground) {
                        return Err(Error::InvalidCode(format!(
                            "decoder element {bad} outside [0,{ground})"
                        )));
                    }
                    out.push(s);
                }
                Decoders::Deterministic(out)
            }
            Decoders::Stochastic(tables) => {
                for t in &tables {
                    if t.len() != ground {
                        return Err(Error::InvalidCode("acceptance table of wrong length".into()));
                    }
                    if let Some(p) = t.iter().find(|p| p.is_negative() || **p > Prob::one()) {
                        return Err(Error::InvalidCode(format!(
                            "acceptance probability {} outside [0,1]",
                            format_ratio(p)
                        )));
                    }
                }
                Decoders::Stochastic(tables)
            }
        };
        Ok(NoiselessIdCode {
            ground,
            encoders,
            decoders,
        })
    }

    /// Code given by uniform encoders on `supports[i]` and decoders `sets[i]`.
    pub fn from_supports(ground: usize, supports: &[Vec<usize>], sets: Vec<Vec<usize>>) -> Result<Self> {
        let encoders = supports
            .iter()
            .map(|s| Dist::uniform_on(ground, s))
            .collect::<Result<Vec<_>>>()?;
        NoiselessIdCode::new(ground, encoders, Decoders::Deterministic(sets))
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn m(&self) -> usize {
        self.encoders.len()
    }

    pub fn encoders(&self) -> &[Dist] {
        &self.encoders
    }

    pub fn decoders(&self) -> &Decoders {
        &self.decoders
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.decoders, Decoders::Deterministic(_))
    }

    /// Acceptance probability of decoder `j` at output `k`.
    pub fn acceptance(&self, j: usize, k: usize) -> Prob {
        match &self.decoders {
            Decoders::Deterministic(sets) => {
                if sets[j].binary_search(&k).is_ok() {
                    Prob::one()
                } else {
                    Prob::zero()
                }
            }
            Decoders::Stochastic(tables) => tables[j][k].clone(),
        }
    }

    /// Acceptance tables, materialised for deterministic decoders too.
    pub fn acceptance_tables(&self) -> Vec<Vec<Prob>> {
        (0..self.m())
            .map(|j| (0..self.ground).map(|k| self.acceptance(j, k)).collect())
            .collect()
    }

    /// Keeps the messages listed in `keep`, in that order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let encoders = keep.iter().map(|&i| self.encoders[i].clone()).collect();
        let decoders = match &self.decoders {
            Decoders::Deterministic(s) => Decoders::Deterministic(keep.iter().map(|&i| s[i].clone()).collect()),
            Decoders::Stochastic(t) => Decoders::Stochastic(keep.iter().map(|&i| t[i].clone()).collect()),
        };
        NoiselessIdCode::new(self.ground, encoders, decoders)
    }
}

/// Identification code for `l` uses of the permutation channel.
///
/// Decoders are stored as acceptance counts `c[i][t] = |D_i ∩ T_t|` where
/// `t` indexes a block type profile `(t_1, …, t_l)` through the base-`N`
/// positional map and `T_t` is the product of the block type classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermIdCode {
    n: usize,
    q: usize,
    blocks: usize,
    encoders: Vec<WordDist>,
    counts: Vec<Vec<BigUint>>,
}

/// Type space plus the profile map of an `l`-block code.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    pub types: TypeSpace,
    pub radix: MixedRadix,
}

impl ProfileSpace {
    pub fn new(n: usize, q: usize, blocks: usize) -> Result<Self> {
        let types = TypeSpace::new(n, q)?;
        let radix = MixedRadix::new(types.len(), blocks)?;
        Ok(ProfileSpace { types, radix })
    }

    /// `N^l`.
    pub fn len(&self) -> usize {
        self.radix.total()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn profile_of(&self, word: &[Symbol]) -> Result<usize> {
        let n = self.types.n();
        if word.len() != n * self.radix.digits() {
            return Err(Error::DimensionMismatch(format!(
                "word of length {} for {} blocks of length {n}",
                word.len(),
                self.radix.digits()
            )));
        }
        let digits = word
            .chunks(n)
            .map(|b| self.types.index_of_vector(b))
            .collect::<Result<Vec<_>>>()?;
        self.radix.encode(&digits)
    }

    /// `|T_{t_1} × … × T_{t_l}|`.
    pub fn profile_size(&self, profile: usize) -> BigUint {
        self.radix
            .decode(profile)
            .expect("profile in range")
            .into_iter()
            .map(|t| self.types.class_size(t).clone())
            .product()
    }

    /// Concatenated lexicographically smallest representatives.
    pub fn representative(&self, profile: usize) -> Vec<Symbol> {
        self.radix
            .decode(profile)
            .expect("profile in range")
            .into_iter()
            .flat_map(|t| self.types.representative(t))
            .collect()
    }
}

impl PermIdCode {
    pub fn new(
        n: usize,
        q: usize,
        blocks: usize,
        encoders: Vec<WordDist>,
        counts: Vec<Vec<BigUint>>,
    ) -> Result<Self> {
        let space = ProfileSpace::new(n, q, blocks)?;
        Self::validated(&space, encoders, counts)
    }

    fn validated(space: &ProfileSpace, encoders: Vec<WordDist>, counts: Vec<Vec<BigUint>>) -> Result<Self> {
        let (n, q, blocks) = (space.types.n(), space.types.q(), space.radix.digits());
        if encoders.is_empty() {
            return Err(Error::InvalidCode("code without messages".into()));
        }
        if encoders.len() != counts.len() {
            return Err(Error::InvalidCode(format!(
                "{} encoders but {} decoders",
                encoders.len(),
                counts.len()
            )));
        }
        for e in &encoders {
            for (w, _) in e.entries() {
                space.profile_of(w)?;
            }
        }
        let sizes: Vec<BigUint> = (0..space.len()).map(|t| space.profile_size(t)).collect();
        for row in &counts {
            if row.len() != space.len() {
                return Err(Error::InvalidCode(format!(
                    "decoder count table of length {}, expected {}",
                    row.len(),
                    space.len()
                )));
            }
            if let Some((t, c)) = row.iter().enumerate().find(|(t, c)| **c > sizes[*t]) {
                return Err(Error::InvalidCode(format!(
                    "count {c} exceeds class size {} at profile {t}",
                    sizes[t]
                )));
            }
        }
        Ok(PermIdCode {
            n,
            q,
            blocks,
            encoders,
            counts,
        })
    }

    /// Builds the count tables from explicit decoder sets (tiny scale only).
    pub fn from_decoder_sets(
        n: usize,
        q: usize,
        blocks: usize,
        encoders: Vec<WordDist>,
        sets: &[Vec<Vec<Symbol>>],
    ) -> Result<Self> {
        let space = ProfileSpace::new(n, q, blocks)?;
        let mut counts = Vec::with_capacity(sets.len());
        for set in sets {
            let mut uniq = set.clone();
            uniq.sort();
            uniq.dedup();
            let mut row = vec![BigUint::zero(); space.len()];
            for w in &uniq {
                row[space.profile_of(w)?] += 1u32;
            }
            counts.push(row);
        }
        Self::validated(&space, encoders, counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn m(&self) -> usize {
        self.encoders.len()
    }

    pub fn encoders(&self) -> &[WordDist] {
        &self.encoders
    }

    pub fn counts(&self) -> &[Vec<BigUint>] {
        &self.counts
    }

    pub fn space(&self) -> ProfileSpace {
        ProfileSpace::new(self.n, self.q, self.blocks).expect("validated at construction")
    }
}

/// Exact error summary of a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorReport {
    pub m: usize,
    pub lambda1: Prob,
    pub lambda2: Prob,
    /// `[sender][decoder]`, present when `M` is at most the matrix cap.
    pub matrix: Option<Vec<Vec<Prob>>>,
}

impl ErrorReport {
    /// `λ = λ1 + λ2`.
    pub fn lambda(&self) -> Prob {
        &self.lambda1 + &self.lambda2
    }

    pub fn missed(&self, i: usize) -> Option<&Prob> {
        self.matrix.as_ref().map(|m| &m[i][i])
    }

    pub fn false_alarm(&self, i: usize, j: usize) -> Option<&Prob> {
        self.matrix.as_ref().map(|m| &m[i][j])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub matrix_cap: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            matrix_cap: DEFAULT_MATRIX_CAP,
        }
    }
}

fn assemble<F>(m: usize, opts: EvalOptions, entry: F) -> ErrorReport
where
    F: Fn(usize, usize) -> Prob + Sync,
{
    let keep = m <= opts.matrix_cap;
    let rows: Vec<(Prob, Prob, Option<Vec<Prob>>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let row: Vec<Prob> = (0..m).map(|j| entry(i, j)).collect();
            let miss = row[i].clone();
            let fa = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p)
                .max()
                .cloned()
                .unwrap_or_else(Prob::zero);
            (miss, fa, keep.then_some(row))
        })
        .collect();
    let lambda1 = rows.iter().map(|r| &r.0).max().cloned().unwrap_or_else(Prob::zero);
    let lambda2 = rows.iter().map(|r| &r.1).max().cloned().unwrap_or_else(Prob::zero);
    let matrix = keep.then(|| rows.into_iter().map(|r| r.2.expect("kept")).collect());
    ErrorReport {
        m,
        lambda1,
        lambda2,
        matrix,
    }
}

/// Exact errors of a code on `[N]`:
/// `λ_{i→j} = Σ_k Q_i(k)·P_j(1|k)` and `λ_{i↛i} = Σ_k Q_i(k)·P_i(0|k)`.
pub fn eval_noiseless(code: &NoiselessIdCode, opts: EvalOptions) -> ErrorReport {
    let supports: Vec<Vec<usize>> = code.encoders().iter().map(Dist::support).collect();
    assemble(code.m(), opts, |i, j| {
        let q = &code.encoders()[i];
        let accepted: Prob = match code.decoders() {
            Decoders::Deterministic(sets) => sets[j].iter().map(|&k| q.get(k)).sum(),
            Decoders::Stochastic(tables) => supports[i].iter().map(|&k| q.get(k) * &tables[j][k]).sum(),
        };
        if i == j {
            Prob::one() - accepted
        } else {
            accepted
        }
    })
}

/// Exact errors of a permutation-channel code, summed over transmitted words:
/// `λ_{i→j} = Σ_x Q_i(x)·|T_x ∩ D_j|/|T_x|`.
pub fn eval_perm_exact(code: &PermIdCode, opts: EvalOptions) -> ErrorReport {
    let space = code.space();
    let supports: Vec<Vec<(usize, BigUint, Prob)>> = code
        .encoders()
        .iter()
        .map(|e| {
            e.entries()
                .iter()
                .map(|(w, p)| {
                    let t = space.profile_of(w).expect("validated");
                    (t, space.profile_size(t), p.clone())
                })
                .collect()
        })
        .collect();
    assemble(code.m(), opts, |i, j| {
        supports[i]
            .iter()
            .map(|(t, size, p)| {
                let c = &code.counts()[j][*t];
                let accept = from_biguint_ratio(c, size);
                if i == j {
                    p * (Prob::one() - accept)
                } else {
                    p * accept
                }
            })
            .sum()
    })
}

/// Sampled error estimates with binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub m: usize,
    pub trials: u64,
    /// Hit counts `[sender][decoder]` (misses on the diagonal), when kept.
    pub hits: Option<Vec<Vec<u64>>>,
    pub lambda1: Prob,
    pub lambda2: Prob,
    pub lambda1_stderr: f64,
    pub lambda2_stderr: f64,
}

impl McReport {
    pub fn estimate(&self, i: usize, j: usize) -> Option<Prob> {
        self.hits
            .as_ref()
            .map(|h| Prob::new(h[i][j].into(), self.trials.into()))
    }

    pub fn stderr(&self, i: usize, j: usize) -> Option<f64> {
        self.hits.as_ref().map(|h| binomial_stderr(h[i][j], self.trials))
    }
}

pub fn binomial_stderr(hits: u64, trials: u64) -> f64 {
    let p = hits as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

pub(crate) fn summarize_rows(m: usize, trials: u64, rows: Vec<Vec<u64>>, keep: bool) -> McReport {
    let mut best1 = 0u64;
    let mut best2 = 0u64;
    for (i, row) in rows.iter().enumerate() {
        best1 = best1.max(row[i]);
        for (j, &h) in row.iter().enumerate() {
            if j != i {
                best2 = best2.max(h);
            }
        }
    }
    McReport {
        m,
        trials,
        hits: keep.then_some(rows),
        lambda1: Prob::new(best1.into(), trials.into()),
        lambda2: Prob::new(best2.into(), trials.into()),
        lambda1_stderr: binomial_stderr(best1, trials),
        lambda2_stderr: binomial_stderr(best2, trials),
    }
}

enum RankRule {
    /// Class size and per-decoder counts, all below 2^64.
    Small { size: u64, counts: Vec<u64> },
    Big { size: BigUint, counts: Vec<BigUint> },
}

/// Monte Carlo evaluation: each trial draws a word from the sender's
/// encoder, passes every block through the channel and asks every decoder.
///
/// The channel output is represented by its rank in the product of block
/// type classes (a bijection onto the output), and decoder `j` is realised
/// as the `c[j][t]` lowest-ranked members of class `t`. Each sender uses
/// its own stream split from `stream`, so results do not depend on the
/// number of worker threads.
pub fn eval_perm_mc(code: &PermIdCode, trials: u64, stream: &Stream, opts: EvalOptions) -> Result<McReport> {
    if trials == 0 {
        return Err(invalid!("trials must be ≥ 1"));
    }
    let space = code.space();
    let m = code.m();
    let rules: Vec<Vec<RankRule>> = code
        .encoders()
        .iter()
        .map(|e| {
            e.entries()
                .iter()
                .map(|(w, _)| {
                    let t = space.profile_of(w).expect("validated");
                    let size = space.profile_size(t);
                    let counts: Vec<&BigUint> = code.counts().iter().map(|row| &row[t]).collect();
                    match size.to_u64() {
                        Some(s) => RankRule::Small {
                            size: s,
                            counts: counts.iter().map(|c| c.to_u64().expect("count ≤ size")).collect(),
                        },
                        None => RankRule::Big {
                            size,
                            counts: counts.into_iter().cloned().collect(),
                        },
                    }
                })
                .collect()
        })
        .collect();
    let samplers: Vec<Sampler> = code.encoders().iter().map(WordDist::sampler).collect();
    let rows: Vec<Vec<u64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.split_index(i as u64);
            let mut row = vec![0u64; m];
            for _ in 0..trials {
                let rule = &rules[i][samplers[i].sample(&mut rng)];
                match rule {
                    RankRule::Small { size, counts } => {
                        let r = rng.gen_range(0..*size);
                        for (j, c) in counts.iter().enumerate() {
                            let accept = r < *c;
                            if accept != (i == j) {
                                row[j] += 1;
                            }
                        }
                    }
                    RankRule::Big { size, counts } => {
                        let r = rng.gen_biguint_below(size);
                        for (j, c) in counts.iter().enumerate() {
                            let accept = r < *c;
                            if accept != (i == j) {
                                row[j] += 1;
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    Ok(summarize_rows(m, trials, rows, m <= opts.matrix_cap))
}

/// Monte Carlo evaluation of a code on `[N]`. Stochastic decoders flip an
/// exact coin per decision.
pub fn eval_noiseless_mc(code: &NoiselessIdCode, trials: u64, stream: &Stream, opts: EvalOptions) -> Result<McReport> {
    if trials == 0 {
        return Err(invalid!("trials must be ≥ 1"));
    }
    let m = code.m();
    let samplers: Vec<Sampler> = code.encoders().iter().map(Dist::sampler).collect();
    let rows: Vec<Vec<u64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.split_index(i as u64);
            let mut row = vec![0u64; m];
            for _ in 0..trials {
                let k = samplers[i].sample(&mut rng);
                for (j, hit) in row.iter_mut().enumerate() {
                    let accept = match code.decoders() {
                        Decoders::Deterministic(sets) => sets[j].binary_search(&k).is_ok(),
                        Decoders::Stochastic(tables) => {
                            let p = &tables[j][k];
                            let den = p.denom().magnitude();
                            rng.gen_biguint_below(den) < *p.numer().magnitude()
                        }
                    };
                    if accept != (i == j) {
                        *hit += 1;
                    }
                }
            }
            row
        })
        .collect();
    Ok(summarize_rows(m, trials, rows, m <= opts.matrix_cap))
}

/// `1 − min_{j≠k} d(Q_j, Q_k)`, clamped to `[0, 1]`; every code has
/// `λ1 + λ2` at least this large.
pub fn strong_converse_floor(code: &NoiselessIdCode) -> Result<Prob> {
    if code.m() < 2 {
        return Err(invalid!("strong-converse floor needs at least two messages"));
    }
    let enc = code.encoders();
    let min_d = (0..enc.len())
        .into_par_iter()
        .flat_map_iter(|j| (j + 1..enc.len()).map(move |k| (j, k)))
        .map(|(j, k)| tv_distance(&enc[j], &enc[k]).expect("same ground"))
        .min()
        .expect("at least one pair");
    let floor = Prob::one() - min_d;
    Ok(if floor.is_negative() { Prob::zero() } else { floor })
}

/// Derived parameters of the achievability construction.
#[derive(Debug, Clone)]
pub struct AchievabilityParams {
    pub n: usize,
    pub q: usize,
    pub blocks: usize,
    /// Ground size `N^l`.
    pub ground: usize,
    pub epsilon: Prob,
    pub epsilon_prime: f64,
    pub lambda2_param: f64,
    pub log_base: f64,
    /// `⌊ε′·N^l⌋`.
    pub set_size: usize,
    /// `⌊λ_{2,n}·ε′·N^l⌋`.
    pub cap: usize,
}

impl AchievabilityParams {
    /// `ε′ = (ε·n^{l(q−1)} + 1 + log(N^l)) / N^l` and `λ_{2,n} = 4/log(1/ε′)`,
    /// subject to `ε′ < 1/6` and `λ_{2,n}·log(1/ε′ − 1) > 2`.
    pub fn derive(n: usize, q: usize, blocks: usize, epsilon: &Prob, log_base: f64) -> Result<Self> {
        let p = Self::derive_unchecked(n, q, blocks, epsilon, log_base)?;
        if let Err(why) = p.hypotheses() {
            let hint = (n + 1..n + 20_000)
                .find(|&m| {
                    Self::derive_unchecked(m, q, blocks, epsilon, log_base)
                        .map(|p| p.hypotheses().is_ok())
                        .unwrap_or(false)
                })
                .map(|m| format!("; smallest feasible n with this ε is {m}"))
                .unwrap_or_default();
            return Err(Error::Hypothesis(format!("{why} at n = {n}{hint}")));
        }
        Ok(p)
    }

    fn derive_unchecked(n: usize, q: usize, blocks: usize, epsilon: &Prob, log_base: f64) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(invalid!("ε must be positive"));
        }
        let types = crate::combinatorics::count_types(n, q)?
            .to_usize()
            .ok_or_else(|| Error::Overflow("N".into()))?;
        let ground = MixedRadix::new(types, blocks)?.total();
        let ground_f = ground as f64;
        let scale = (n as f64).powi(((q - 1) * blocks) as i32);
        let eps_f = crate::rational::to_f64(epsilon);
        let epsilon_prime = (eps_f * scale + 1.0 + ground_f.log(log_base)) / ground_f;
        let lambda2_param = 4.0 / (1.0 / epsilon_prime).log(log_base);
        let eps_n = epsilon_prime * ground_f;
        Ok(AchievabilityParams {
            n,
            q,
            blocks,
            ground,
            epsilon: epsilon.clone(),
            epsilon_prime,
            lambda2_param,
            log_base,
            set_size: eps_n.floor() as usize,
            cap: (lambda2_param * eps_n).floor() as usize,
        })
    }

    fn hypotheses(&self) -> std::result::Result<(), String> {
        if !(self.epsilon_prime < 1.0 / 6.0) {
            return Err(format!("ε′ = {:.6} is not below 1/6", self.epsilon_prime));
        }
        let lhs = self.lambda2_param * (1.0 / self.epsilon_prime - 1.0).log(self.log_base);
        if !(lhs > 2.0) {
            return Err(format!("λ·log(1/ε′ − 1) = {lhs:.6} does not exceed 2"));
        }
        if self.set_size == 0 {
            return Err("⌊ε′·N⌋ = 0".into());
        }
        Ok(())
    }

    /// Guaranteed bound on `λ2`: `cap / set_size`.
    pub fn lambda2_bound(&self) -> Prob {
        Prob::new(self.cap.into(), self.set_size.into())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub requested_m: Option<usize>,
    pub max_attempts: u64,
    pub log_base: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            requested_m: None,
            max_attempts: 1_000_000,
            log_base: 2.0,
        }
    }
}

/// What the construction produced.
#[derive(Debug, Clone)]
pub struct AchievabilityReport {
    pub params: AchievabilityParams,
    pub target: usize,
    pub m: usize,
    pub attempts: u64,
    pub exhausted: bool,
    pub lambda2_bound: Prob,
}

/// Lifts a set system over `[N^l]` to a permutation-channel code: message
/// `i` sends a uniformly chosen tuple of type representatives indexed by
/// `U_i`, and decodes on the union of the corresponding products of type
/// classes.
pub fn lift_set_system(n: usize, q: usize, blocks: usize, system: &crate::setsystem::SetSystem) -> Result<PermIdCode> {
    let space = ProfileSpace::new(n, q, blocks)?;
    if system.ground() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "set system over {} points, profile space has {}",
            system.ground(),
            space.len()
        )));
    }
    let mut encoders = Vec::with_capacity(system.len());
    let mut counts = Vec::with_capacity(system.len());
    for set in system.sets() {
        encoders.push(WordDist::uniform(set.iter().map(|&t| space.representative(t)).collect())?);
        let mut row = vec![BigUint::zero(); space.len()];
        for &t in set {
            row[t] = space.profile_size(t);
        }
        counts.push(row);
    }
    PermIdCode::validated(&space, encoders, counts)
}

fn build_achievable(
    n: usize,
    q: usize,
    blocks: usize,
    epsilon: &Prob,
    stream: &mut Stream,
    opts: BuildOptions,
) -> Result<(PermIdCode, AchievabilityReport)> {
    let params = AchievabilityParams::derive(n, q, blocks, epsilon, opts.log_base)?;
    // the Gilbert floor is only the default; an explicit request may go past it
    let target = opts
        .requested_m
        .unwrap_or_else(|| crate::setsystem::gilbert_floor(params.ground, params.epsilon_prime * params.ground as f64));
    let outcome = crate::setsystem::greedy_packing(
        params.ground,
        params.set_size,
        params.cap,
        target,
        opts.max_attempts,
        stream,
    )?;
    let code = lift_set_system(n, q, blocks, &outcome.system)?;
    let report = AchievabilityReport {
        lambda2_bound: params.lambda2_bound(),
        params,
        target,
        m: outcome.system.len(),
        attempts: outcome.attempts,
        exhausted: outcome.exhausted,
    };
    Ok((code, report))
}

/// One-shot construction with `λ1 = 0`.
pub fn build_oneshot_achievable(
    n: usize,
    q: usize,
    epsilon: &Prob,
    stream: &mut Stream,
    opts: BuildOptions,
) -> Result<(PermIdCode, AchievabilityReport)> {
    build_achievable(n, q, 1, epsilon, stream, opts)
}

/// `l`-shot construction over the ground set `[N^l]`.
pub fn build_multishot_achievable(
    n: usize,
    q: usize,
    blocks: usize,
    epsilon: &Prob,
    stream: &mut Stream,
    opts: BuildOptions,
) -> Result<(PermIdCode, AchievabilityReport)> {
    if blocks == 0 {
        return Err(invalid!("l must be ≥ 1"));
    }
    build_achievable(n, q, blocks, epsilon, stream, opts)
}
