//! Two-phase identification with noiseless block feedback.
//!
//! The sender transmits the pilot `x*` (a vector of the largest type class)
//! in the first `l−1` blocks. After seeing the outputs `ȳ` it sends the
//! representative of type `Φ_i(ȳ)` in the last block, and decoder `k`
//! accepts iff the last output has type `Φ_k(ȳ)`. Only pilot outputs in
//! `T_{P*}^{l−1}` can occur, so each `Φ_i` is stored as a dense table over
//! rank tuples of that set.

use crate::channel::PermutationChannel;
use crate::combinatorics::{count_types, Symbol, TypeSpace, TypeVector};
use crate::error::{invalid, Error, Result};
use crate::idcode::{summarize_rows, McReport};
use crate::rational::Prob;
use crate::rng::Stream;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, Ordering};

/// Default cap on `M·|T_{P*}|^{l−1}` table entries.
pub const DEFAULT_TABLE_BUDGET: usize = 1 << 27;

/// The largest type class: counts as equal as possible, larger counts on
/// the smaller symbols (the first such type in the enumeration order).
pub fn max_typeclass(n: usize, q: usize) -> Result<(TypeVector, BigUint)> {
    if n == 0 || q < 2 {
        return Err(invalid!("need n ≥ 1 and q ≥ 2"));
    }
    let (base, extra) = (n / q, n % q);
    let counts = (0..q).map(|s| (base + usize::from(s < extra)) as u32).collect();
    let t = TypeVector::new(counts)?;
    let size = t.class_size();
    if n + 1 >= q {
        // q^n/(2n)^{q−1} ≤ |T| ≤ q^n
        let qn = BigUint::from(q).pow(n as u32);
        let low = &size * BigUint::from(2 * n).pow((q - 1) as u32);
        if low < qn || size > qn {
            return Err(Error::BoundViolation(format!("largest class size {size} outside its bounds")));
        }
    }
    Ok((t, size))
}

/// A feedback code with explicit `Φ` tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackCode {
    n: usize,
    q: usize,
    blocks: usize,
    pilot: Vec<Symbol>,
    class_size: u64,
    domain: usize,
    ground: usize,
    maps: Vec<u16>,
}

impl FeedbackCode {
    /// Validates explicit tables, `maps[i·domain + r] = Φ_i(r)`.
    pub fn from_tables(n: usize, q: usize, blocks: usize, maps: Vec<Vec<u16>>) -> Result<Self> {
        let mut code = Self::shape(n, q, blocks, maps.len(), usize::MAX)?;
        for (i, row) in maps.iter().enumerate() {
            if row.len() != code.domain {
                return Err(Error::InvalidCode(format!(
                    "table {i} has {} entries, expected {}",
                    row.len(),
                    code.domain
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| usize::from(v) >= code.ground) {
                return Err(Error::InvalidCode(format!("table value {v} outside [0,{})", code.ground)));
            }
        }
        code.maps = maps.concat();
        Ok(code)
    }

    fn shape(n: usize, q: usize, blocks: usize, m: usize, budget: usize) -> Result<Self> {
        if blocks < 2 {
            return Err(invalid!("feedback needs l ≥ 2"));
        }
        if m == 0 {
            return Err(invalid!("M must be ≥ 1"));
        }
        let (t, size) = max_typeclass(n, q)?;
        let class_size = size.to_u64().ok_or_else(|| Error::Budget(format!("|T*| = {size} is too large")))?;
        let domain = size
            .pow((blocks - 1) as u32)
            .to_usize()
            .filter(|d| d.checked_mul(m).is_some_and(|e| e <= budget))
            .ok_or_else(|| {
                Error::Budget(format!(
                    "M·|T*|^(l−1) = {m}·{size}^{} exceeds the table budget {budget}; use Monte Carlo evaluation",
                    blocks - 1
                ))
            })?;
        let ground = count_types(n, q)?
            .to_usize()
            .filter(|&g| g <= usize::from(u16::MAX) + 1)
            .ok_or_else(|| Error::Overflow("more than 65536 types".into()))?;
        Ok(FeedbackCode {
            n,
            q,
            blocks,
            pilot: t.representative(),
            class_size,
            domain,
            ground,
            maps: Vec::new(),
        })
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
        self.maps.len() / self.domain
    }

    /// `N`, the number of types.
    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn pilot(&self) -> &[Symbol] {
        &self.pilot
    }

    /// `|T_{P*}|^{l−1}`.
    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn table(&self, i: usize) -> &[u16] {
        &self.maps[i * self.domain..(i + 1) * self.domain]
    }
}

/// Draws every `Φ_i` entry uniformly from the `N` types.
pub fn build_feedback_code(
    n: usize,
    q: usize,
    blocks: usize,
    m: usize,
    stream: &Stream,
    budget: usize,
) -> Result<FeedbackCode> {
    let mut code = FeedbackCode::shape(n, q, blocks, m, budget)?;
    let mut rng = stream.split("phi");
    let ground = code.ground as u32;
    code.maps = (0..m * code.domain).map(|_| rng.gen_range(0..ground) as u16).collect();
    Ok(code)
}

/// Exact collision fractions between the `Φ` tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionReport {
    pub m: usize,
    pub ground: usize,
    pub domain: usize,
    /// `#{ȳ : Φ_j(ȳ) = Φ_k(ȳ)}` for `j ≠ k`, when `M` is at most the cap.
    pub counts: Option<Vec<Vec<u64>>>,
    /// Largest pair count and the pair attaining it first.
    pub max_count: u64,
    pub argmax: Option<(usize, usize)>,
    pub lambda1: Prob,
    pub lambda2: Prob,
    /// `2/N`.
    pub target: Prob,
    pub pass: bool,
    /// Scan stopped at the first pair above the target; `lambda2` is then
    /// a lower bound.
    pub early_exit: bool,
}

impl CollisionReport {
    pub fn fraction(&self, j: usize, k: usize) -> Option<Prob> {
        self.counts
            .as_ref()
            .map(|c| Prob::new(c[j][k].into(), (self.domain as u64).into()))
    }
}

fn collisions(a: &[u16], b: &[u16]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as u64
}

fn scan(code: &FeedbackCode, matrix_cap: usize, stop_above_target: bool) -> CollisionReport {
    let m = code.m();
    let limit = 2 * code.domain as u64; // count·N > 2·domain fails the target
    let stop = AtomicBool::new(false);
    let rows: Vec<Vec<u64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![0u64; m];
            if stop.load(Ordering::Relaxed) {
                return row;
            }
            for k in j + 1..m {
                let c = collisions(code.table(j), code.table(k));
                row[k] = c;
                if stop_above_target && c * code.ground as u64 > limit {
                    stop.store(true, Ordering::Relaxed);
                    break;
                }
            }
            row
        })
        .collect();
    let mut max_count = 0;
    let mut argmax = None;
    for (j, row) in rows.iter().enumerate() {
        for (k, &c) in row.iter().enumerate().skip(j + 1) {
            if argmax.is_none() || c > max_count {
                max_count = c;
                argmax = Some((j, k));
            }
        }
    }
    let counts = (m <= matrix_cap).then(|| {
        let mut full = rows.clone();
        for j in 0..m {
            full[j][j] = 0;
            for k in 0..j {
                full[j][k] = rows[k][j];
            }
        }
        full
    });
    let lambda2 = Prob::new(max_count.into(), (code.domain as u64).into());
    let target = Prob::new(2u32.into(), code.ground.into());
    CollisionReport {
        m,
        ground: code.ground,
        domain: code.domain,
        counts,
        max_count,
        argmax,
        lambda1: Prob::zero(),
        pass: lambda2 <= target,
        lambda2,
        target,
        early_exit: stop.into_inner(),
    }
}

/// `λ_{j→k}` by counting agreements of `Φ_j` and `Φ_k` over the whole
/// domain; `λ1` is zero because decoder `j` accepts exactly the type that
/// message `j` sends.
pub fn eval_feedback_exact(code: &FeedbackCode, matrix_cap: usize) -> CollisionReport {
    scan(code, matrix_cap, false)
}

/// `λ2 ≤ 2/N`, exactly. With `early_exit` the scan stops at the first
/// failing pair and the reported `λ2` is only a lower bound.
pub fn target_test(code: &FeedbackCode, early_exit: bool) -> Result<CollisionReport> {
    if code.m() < 2 {
        return Err(invalid!("target test needs at least two messages"));
    }
    Ok(scan(code, 0, early_exit))
}

/// Outcome of redrawing `Φ` until the target test passes.
#[derive(Debug, Clone)]
pub struct RetryOutcome {
    pub draws: u64,
    pub passed: bool,
    pub code: FeedbackCode,
    pub report: CollisionReport,
}

/// Draw `d` uses the stream split by index `d`, so a run is reproducible
/// from the root seed alone.
pub fn retry_until_pass(
    n: usize,
    q: usize,
    blocks: usize,
    m: usize,
    stream: &Stream,
    max_draws: u64,
    budget: usize,
) -> Result<RetryOutcome> {
    if max_draws == 0 {
        return Err(invalid!("draw budget must be ≥ 1"));
    }
    let mut last = None;
    for d in 0..max_draws {
        let code = build_feedback_code(n, q, blocks, m, &stream.split_index(d), budget)?;
        let report = target_test(&code, true)?;
        let passed = report.pass;
        last = Some((code, report));
        if passed {
            let (code, report) = last.expect("just set");
            return Ok(RetryOutcome {
                draws: d + 1,
                passed: true,
                code,
                report,
            });
        }
    }
    let (code, report) = last.expect("at least one draw");
    Ok(RetryOutcome {
        draws: max_draws,
        passed: false,
        code,
        report,
    })
}

/// Monte Carlo evaluation through the actual channel: pilot outputs are
/// sampled and ranked, the last block is sampled from the class of the
/// chosen representative and every decoder compares its type.
pub fn eval_feedback_mc(code: &FeedbackCode, trials: u64, stream: &Stream, matrix_cap: usize) -> Result<McReport> {
    if trials == 0 {
        return Err(invalid!("trials must be ≥ 1"));
    }
    let channel = PermutationChannel::new(code.n, code.q)?;
    let space = TypeSpace::new(code.n, code.q)?;
    let pilot_type = crate::combinatorics::type_of(&code.pilot, code.q)?;
    let reps: Vec<Vec<Symbol>> = (0..space.len()).map(|t| space.representative(t)).collect();
    let m = code.m();
    let rows: Vec<Vec<u64>> = (0..m)
        .into_par_iter()
        .map(|j| -> Result<Vec<u64>> {
            let mut rng = stream.split_index(j as u64);
            let mut row = vec![0u64; m];
            for _ in 0..trials {
                let mut idx = 0usize;
                for _ in 1..code.blocks {
                    let y = channel.sample_output(&code.pilot, &mut rng)?;
                    let r = pilot_type.rank_of(&y)?.to_usize().expect("below |T*|");
                    idx = idx * code.class_size as usize + r;
                }
                let sent = code.table(j)[idx];
                let last = channel.sample_output(&reps[usize::from(sent)], &mut rng)?;
                let seen = space.index_of_vector(&last)? as u16;
                for (k, hit) in row.iter_mut().enumerate() {
                    let accept = code.table(k)[idx] == seen;
                    if accept != (k == j) {
                        *hit += 1;
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(summarize_rows(m, trials, rows, m <= matrix_cap))
}

/// `M < 2^{q^{nl}}`: the decoders need `M` distinct nonempty output sets
/// for `λ1 + λ2 < 1`.
pub fn feedback_counting_converse(n: u32, q: u64, blocks: u32, m: &BigUint) -> bool {
    match n.checked_mul(blocks).and_then(|e| q.checked_pow(e)) {
        Some(e) => m.bits() <= e,
        None => true,
    }
}
