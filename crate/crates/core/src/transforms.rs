//! Code-to-code maps that turn a permutation-channel code into a
//! constant-weight set system, one step at a time. Every step re-evaluates
//! its output exactly and checks its error inequality; a failed check is
//! reported as [`Error::BoundViolation`].

use crate::dist::Dist;
use crate::error::{invalid, Error, Result};
use crate::idcode::{eval_noiseless, eval_perm_exact, Decoders, ErrorReport, EvalOptions, NoiselessIdCode, PermIdCode};
use crate::rational::{certify_poly_nonneg, format_ratio, from_biguint_ratio, gt_sqrt, le_sqrt, to_f64, Certified, Prob, RealPower};
use crate::setsystem::{intersection_size, prop2_bound_value, exceeds_lemma6_threshold, IntersectionProfile, SetSystem};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

fn full_matrix(code: &NoiselessIdCode) -> ErrorReport {
    eval_noiseless(code, EvalOptions { matrix_cap: usize::MAX })
}

fn matrix(r: &ErrorReport) -> &Vec<Vec<Prob>> {
    r.matrix.as_ref().expect("evaluated with an unbounded cap")
}

fn violation(what: &str, i: usize, j: usize, lhs: &Prob, rhs: impl std::fmt::Display) -> Error {
    Error::BoundViolation(format!(
        "{what} at ({i},{j}): {} against {rhs}",
        format_ratio(lhs)
    ))
}

/// Pushes a permutation-channel code down to the noiseless channel on the
/// type profiles `[N^l]`: encoders become the law of the transmitted type
/// profile and decoder `i` accepts profile `t` with probability
/// `c[i][t]/|T_t|`. Decoders come out deterministic when every count is
/// zero or a full class.
pub fn perm_to_noiseless(code: &PermIdCode) -> Result<NoiselessIdCode> {
    let space = code.space();
    let ground = space.len();
    let sizes: Vec<BigUint> = (0..ground).map(|t| space.profile_size(t)).collect();
    let encoders = code
        .encoders()
        .iter()
        .map(|e| {
            let mut probs = vec![Prob::zero(); ground];
            for (w, p) in e.entries() {
                probs[space.profile_of(w)?] += p;
            }
            Dist::new(probs)
        })
        .collect::<Result<Vec<_>>>()?;
    let deterministic = code
        .counts()
        .iter()
        .all(|row| row.iter().zip(&sizes).all(|(c, s)| c.is_zero() || c == s));
    let decoders = if deterministic {
        Decoders::Deterministic(
            code.counts()
                .iter()
                .map(|row| (0..ground).filter(|&t| !row[t].is_zero()).collect())
                .collect(),
        )
    } else {
        Decoders::Stochastic(
            code.counts()
                .iter()
                .map(|row| row.iter().zip(&sizes).map(|(c, s)| from_biguint_ratio(c, s)).collect())
                .collect(),
        )
    };
    NoiselessIdCode::new(ground, encoders, decoders)
}

/// [`perm_to_noiseless`] for an `l`-block code, checking the block count.
pub fn perm_to_noiseless_multishot(code: &PermIdCode, blocks: usize) -> Result<NoiselessIdCode> {
    if code.blocks() != blocks {
        return Err(Error::DimensionMismatch(format!(
            "code has {} blocks, {blocks} requested",
            code.blocks()
        )));
    }
    perm_to_noiseless(code)
}

/// Output of the thresholding step.
#[derive(Debug, Clone)]
pub struct ThresholdOutcome {
    pub code: NoiselessIdCode,
    /// `λ2` of the input; the threshold is its square root.
    pub lambda2: Prob,
    pub before: ErrorReport,
    pub after: ErrorReport,
}

/// Replaces stochastic decoders by `D_i = {y : P_i(1|y) > √λ2}`, which
/// gives `λ̃_{i→j} ≤ λ_{i→j}/√λ2 ≤ √λ_{i→j}` and
/// `λ̃_{i↛i} ≤ λ_{i↛i} + √λ2`. With `λ2 = 0` the rule keeps every
/// point of positive acceptance and all false alarms stay zero.
pub fn stoch_to_det_decoders(code: &NoiselessIdCode) -> Result<ThresholdOutcome> {
    let before = full_matrix(code);
    let lambda2 = before.lambda2.clone();
    let tables = code.acceptance_tables();
    let sets: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| (0..t.len()).filter(|&y| gt_sqrt(&t[y], &lambda2)).collect())
        .collect();
    let out = NoiselessIdCode::new(code.ground(), code.encoders().to_vec(), Decoders::Deterministic(sets))?;
    let after = full_matrix(&out);
    let (old, new) = (matrix(&before), matrix(&after));
    for i in 0..code.m() {
        for j in 0..code.m() {
            let (l, lt) = (&old[i][j], &new[i][j]);
            if i == j {
                if !le_sqrt(&(lt - l), &lambda2) {
                    return Err(violation("missed detection exceeds λ + √λ2", i, j, lt, format_ratio(l)));
                }
            } else if lambda2.is_zero() {
                if !lt.is_zero() {
                    return Err(violation("false alarm with λ2 = 0", i, j, lt, 0));
                }
            } else {
                // λ̃·√λ2 ≤ λ and λ̃ ≤ √λ
                if lt * lt * &lambda2 > l * l || !le_sqrt(lt, l) {
                    return Err(violation("false alarm exceeds λ/√λ2", i, j, lt, format_ratio(l)));
                }
            }
        }
    }
    Ok(ThresholdOutcome {
        code: out,
        lambda2,
        before,
        after,
    })
}

/// Output of the uniformisation step.
#[derive(Debug, Clone)]
pub struct UniformOutcome {
    pub code: NoiselessIdCode,
    pub gamma: Prob,
    /// `κ = ⌈1/γ⌉ + 1`.
    pub kappa: u32,
    /// Chosen bin `l_i* ∈ 1..=κ` per message.
    pub bins: Vec<u32>,
    /// `(1+2γ)N^γ/(γ(1−N^{−γ}))`, approximately.
    pub loose_factor: f64,
    /// `κN^γ/(1−N^{−(γκ−1)})`, approximately.
    pub internal_factor: f64,
    /// Entries where `λ·loose_factor ≥ 1`, i.e. the bound says nothing.
    pub vacuous_entries: usize,
    /// Entries the interval test could not separate from equality.
    pub undecided_entries: usize,
    pub before: ErrorReport,
    pub after: ErrorReport,
}

/// Bin of `p` in `1..=κ`: the smallest `l` with `p > N^{−γl}`.
fn bin_of(p: &Prob, ground: usize, a: u32, b: u32, kappa: u32) -> Option<u32> {
    if !p.is_positive() {
        return None;
    }
    // p > N^{−al/b} ⟺ p^b·N^{al} > 1
    let pb: Prob = Pow::pow(p, b);
    let n = BigInt::from(ground);
    (1..=kappa).find(|&l| &pb * Prob::from_integer(Pow::pow(&n, a * l)) > Prob::one())
}

/// Makes every encoder uniform on its heaviest bin
/// `B(l,i) = {k : N^{−γl} < Q_i(k) ≤ N^{−γ(l−1)}}`, `l ∈ 1..=κ`, keeping the
/// decoders. Ties between bins go to the smallest `l`.
pub fn to_uniform_encoders(code: &NoiselessIdCode, gamma: &Prob) -> Result<UniformOutcome> {
    if !code.is_deterministic() {
        return Err(invalid!("uniformisation needs deterministic decoders"));
    }
    if !gamma.is_positive() || *gamma >= Prob::one() {
        return Err(invalid!("γ = {} must lie in (0,1)", format_ratio(gamma)));
    }
    let ground = code.ground();
    if ground < 2 {
        return Err(invalid!("uniformisation needs N ≥ 2"));
    }
    let a = gamma.numer().to_u32().ok_or_else(|| Error::Overflow("γ numerator".into()))?;
    let b = gamma.denom().to_u32().ok_or_else(|| Error::Overflow("γ denominator".into()))?;
    let kappa = b.div_ceil(a) + 1;

    let mut bins = Vec::with_capacity(code.m());
    let mut encoders = Vec::with_capacity(code.m());
    for (i, q) in code.encoders().iter().enumerate() {
        let mut mass = vec![Prob::zero(); kappa as usize + 1];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); kappa as usize + 1];
        for k in q.support() {
            if let Some(l) = bin_of(q.get(k), ground, a, b, kappa) {
                mass[l as usize] += q.get(k);
                members[l as usize].push(k);
            }
        }
        let best = (1..=kappa as usize)
            .filter(|&l| !members[l].is_empty())
            .fold(None::<usize>, |acc, l| match acc {
                Some(b) if mass[b] >= mass[l] => Some(b),
                _ => Some(l),
            })
            .ok_or_else(|| Error::Inapplicable(format!("encoder {i} has no mass above N^(−γκ)")))?;
        bins.push(best as u32);
        encoders.push(Dist::uniform_on(ground, &members[best])?);
    }
    let out = NoiselessIdCode::new(ground, encoders, code.decoders().clone())?;
    let before = full_matrix(code);
    let after = full_matrix(&out);

    let mut power = RealPower::new(ground as u64, gamma)?;
    for _ in 0..64 {
        power.refine();
    }
    let t = power.approx();
    let g = to_f64(gamma);
    let loose_factor = (1.0 + 2.0 * g) / g * t * t / (t - 1.0);
    let internal_factor = kappa as f64 * t / (1.0 - (ground as f64) / t.powi(kappa as i32));
    let c_scale = gamma / (Prob::one() + gamma * Prob::from_integer(2.into()));
    let big_n = Prob::from_integer(ground.into());

    let (old, new) = (matrix(&before), matrix(&after));
    let m = code.m();
    let checks: Vec<(usize, usize, bool)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut p = power.clone();
            let mut vacuous = 0;
            let mut undecided = 0;
            for j in 0..m {
                let (l, lt) = (&old[i][j], &new[i][j]);
                if to_f64(l) * loose_factor >= 1.0 {
                    vacuous += 1;
                }
                if lt.is_zero() {
                    continue;
                }
                // λ·t² − c·t + c ≥ 0 with c = λ̃γ/(1+2γ)
                let c = lt * &c_scale;
                let loose = certify_poly_nonneg(&[c.clone(), -c, l.clone()], &mut p);
                // λκ·t^{κ+1} − λ̃·t^κ + λ̃N ≥ 0
                let mut coeffs = vec![Prob::zero(); kappa as usize + 2];
                coeffs[0] = lt * &big_n;
                coeffs[kappa as usize] = -lt.clone();
                coeffs[kappa as usize + 1] = l * Prob::from_integer(kappa.into());
                let internal = certify_poly_nonneg(&coeffs, &mut p);
                for r in [loose, internal] {
                    match r {
                        Certified::Fails => return (vacuous, undecided, false),
                        Certified::Undecided => undecided += 1,
                        Certified::Holds => {}
                    }
                }
            }
            (vacuous, undecided, true)
        })
        .collect();
    if let Some(i) = checks.iter().position(|c| !c.2) {
        return Err(Error::BoundViolation(format!(
            "uniformised encoder {i} exceeds the factor bound"
        )));
    }
    Ok(UniformOutcome {
        code: out,
        gamma: gamma.clone(),
        kappa,
        bins,
        loose_factor,
        internal_factor,
        vacuous_entries: checks.iter().map(|c| c.0).sum(),
        undecided_entries: checks.iter().map(|c| c.1).sum(),
        before,
        after,
    })
}

/// Output of the support-trimming step.
#[derive(Debug, Clone)]
pub struct SupportOutcome {
    pub code: NoiselessIdCode,
    pub before: ErrorReport,
    pub after: ErrorReport,
}

/// Uses `G_i = A_i ∩ D_i` as both support and decoder, so
/// `λ̃_{i↛i} = 0` and `λ̃_{i→j} ≤ λ_{i→j}/(1 − λ_{i↛i})`.
pub fn decoder_equals_support(code: &NoiselessIdCode) -> Result<SupportOutcome> {
    let Decoders::Deterministic(sets) = code.decoders() else {
        return Err(invalid!("support trimming needs deterministic decoders"));
    };
    if let Some(i) = code.encoders().iter().position(|e| !e.is_uniform()) {
        return Err(invalid!("encoder {i} is not uniform on its support"));
    }
    let mut g = Vec::with_capacity(code.m());
    for (i, (e, d)) in code.encoders().iter().zip(sets).enumerate() {
        let gi: Vec<usize> = e.support().into_iter().filter(|k| d.binary_search(k).is_ok()).collect();
        if gi.is_empty() {
            return Err(Error::Inapplicable(format!(
                "message {i} has A ∩ D empty (missed-detection probability 1)"
            )));
        }
        g.push(gi);
    }
    let out = NoiselessIdCode::from_supports(code.ground(), &g, g.clone())?;
    let before = full_matrix(code);
    let after = full_matrix(&out);
    let (old, new) = (matrix(&before), matrix(&after));
    for i in 0..code.m() {
        if !new[i][i].is_zero() {
            return Err(violation("missed detection after trimming", i, i, &new[i][i], 0));
        }
        let keep = Prob::one() - &old[i][i];
        for j in (0..code.m()).filter(|&j| j != i) {
            if &new[i][j] * &keep > old[i][j] {
                return Err(violation("false alarm exceeds λ/(1−λ_ii)", i, j, &new[i][j], format_ratio(&old[i][j])));
            }
        }
    }
    Ok(SupportOutcome { code: out, before, after })
}

/// Output of the size-binning step.
#[derive(Debug, Clone)]
pub struct EqualSizeOutcome {
    pub code: NoiselessIdCode,
    /// Indices of the kept messages in the input code.
    pub kept: Vec<usize>,
    /// Common support size `k*`.
    pub size: usize,
    pub before: ErrorReport,
    pub after: ErrorReport,
}

/// Keeps the largest class `N(k) = {i : |A_i| = k}`; ties go to the
/// smallest `k`. The kept count is at least `⌈M/N⌉`.
pub fn equal_size_supports(code: &NoiselessIdCode) -> Result<EqualSizeOutcome> {
    let mut classes: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, e) in code.encoders().iter().enumerate() {
        classes.entry(e.support().len()).or_default().push(i);
    }
    let (size, kept) = classes
        .into_iter()
        .fold(None::<(usize, Vec<usize>)>, |acc, (k, v)| match acc {
            Some(best) if best.1.len() >= v.len() => Some(best),
            _ => Some((k, v)),
        })
        .expect("code has messages");
    let out = code.restrict(&kept)?;
    let before = full_matrix(code);
    let after = full_matrix(&out);
    let floor = code.m().div_ceil(code.ground());
    if kept.len() < floor {
        return Err(Error::BoundViolation(format!(
            "kept {} messages, pigeonhole guarantees {floor}",
            kept.len()
        )));
    }
    if after.lambda1 > before.lambda1 || after.lambda2 > before.lambda2 {
        return Err(Error::BoundViolation("sub-code has larger errors".into()));
    }
    Ok(EqualSizeOutcome {
        code: out,
        kept,
        size,
        before,
        after,
    })
}

/// Standard choices of γ for the uniformisation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaPreset {
    /// `μ/(4(q−1))`.
    OneShot,
    /// `μ/(4l(q−1))`.
    MultiShot { blocks: usize },
    /// `μ/(4(q−1))`, the variant used with a fixed number of blocks.
    MultiShotFixed,
}

impl GammaPreset {
    pub fn gamma(self, mu: &Prob, q: usize) -> Result<Prob> {
        if !mu.is_positive() || q < 2 {
            return Err(invalid!("γ presets need μ > 0 and q ≥ 2"));
        }
        let base = Prob::from_integer(BigInt::from(4 * (q - 1)));
        let g = match self {
            GammaPreset::OneShot | GammaPreset::MultiShotFixed => mu / base,
            GammaPreset::MultiShot { blocks } => {
                if blocks == 0 {
                    return Err(invalid!("l must be ≥ 1"));
                }
                mu / (base * Prob::from_integer(blocks.into()))
            }
        };
        if g >= Prob::one() {
            return Err(invalid!("γ = {} is not below 1", format_ratio(&g)));
        }
        Ok(g)
    }
}

/// One pipeline stage, for reporting.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub name: &'static str,
    pub m: usize,
    pub report: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub gamma: Prob,
    pub steps: Vec<StepReport>,
    pub bins: Vec<u32>,
    pub kappa: u32,
    pub loose_factor: f64,
    pub internal_factor: f64,
    pub vacuous_entries: usize,
    pub undecided_entries: usize,
    /// Indices of the surviving messages in the input code.
    pub kept: Vec<usize>,
    pub final_code: NoiselessIdCode,
    /// `None` when two surviving supports coincide.
    pub final_system: Option<SetSystem>,
    pub profile: IntersectionProfile,
    /// `(1−α)h2⁻¹(log2(M′)/N)` and whether `Δ/Γ` meets it, when `M′ > 1 + N/α`.
    pub prop2: Option<(f64, bool)>,
}

impl PipelineReport {
    /// `Δ/Γ` of the final system.
    pub fn ratio(&self) -> Prob {
        self.profile.normalized()
    }
}

/// Runs all five steps. The equality of the first step is checked entry by
/// entry and the final `Δ/Γ` is checked against the last step's `λ2`.
pub fn soft_converse_pipeline(code: &PermIdCode, gamma: &Prob, alpha: &Prob) -> Result<PipelineReport> {
    let direct = eval_perm_exact(code, EvalOptions { matrix_cap: usize::MAX });
    let step1 = perm_to_noiseless(code)?;
    let r1 = full_matrix(&step1);
    if r1.matrix != direct.matrix {
        return Err(Error::BoundViolation("type-level code has different errors".into()));
    }
    let step2 = stoch_to_det_decoders(&step1)?;
    let step3 = to_uniform_encoders(&step2.code, gamma)?;
    let step4 = decoder_equals_support(&step3.code)?;
    let step5 = equal_size_supports(&step4.code)?;

    let fin = &step5.code;
    let supports: Vec<Vec<usize>> = fin.encoders().iter().map(Dist::support).collect();
    let delta = (0..supports.len())
        .flat_map(|i| (i + 1..supports.len()).map(move |j| (i, j)))
        .map(|(i, j)| intersection_size(&supports[i], &supports[j]))
        .max()
        .unwrap_or(0);
    let profile = IntersectionProfile {
        ground: fin.ground(),
        m: fin.m(),
        gamma: step5.size,
        delta,
    };
    if profile.normalized() != step5.after.lambda2 {
        return Err(Error::BoundViolation(format!(
            "Δ/Γ = {} but λ2 = {}",
            format_ratio(&profile.normalized()),
            format_ratio(&step5.after.lambda2)
        )));
    }
    let final_system = SetSystem::new(fin.ground(), supports).ok();
    let m_big = BigUint::from(fin.m());
    let prop2 = if exceeds_lemma6_threshold(fin.ground(), &m_big, alpha) {
        let bound = prop2_bound_value(fin.ground(), &m_big, alpha)?;
        Some((bound, to_f64(&profile.normalized()) >= bound - 1e-12))
    } else {
        None
    };
    let kept = step5.kept.clone();
    let steps = vec![
        StepReport { name: "input", m: code.m(), report: direct },
        StepReport { name: "types", m: step1.m(), report: r1 },
        StepReport { name: "threshold", m: step2.code.m(), report: step2.after },
        StepReport { name: "uniform", m: step3.code.m(), report: step3.after },
        StepReport { name: "trim", m: step4.code.m(), report: step4.after },
        StepReport { name: "equal-size", m: fin.m(), report: step5.after.clone() },
    ];
    Ok(PipelineReport {
        gamma: gamma.clone(),
        steps,
        bins: step3.bins,
        kappa: step3.kappa,
        loose_factor: step3.loose_factor,
        internal_factor: step3.internal_factor,
        vacuous_entries: step3.vacuous_entries,
        undecided_entries: step3.undecided_entries,
        kept,
        final_code: step5.code,
        final_system,
        profile,
        prop2,
    })
}
