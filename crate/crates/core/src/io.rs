//! JSON and CSV file formats. Every document carries
//! `"schema": "permid/1"`; probabilities are `"p/q"` strings, with decimal
//! fields for convenience only.

use crate::approx::ApproxMap;
use crate::dist::{Dist, WordDist};
use crate::error::{Error, Result};
use crate::feedback::{CollisionReport, FeedbackCode};
use crate::idcode::{Decoders, ErrorReport, McReport, NoiselessIdCode, PermIdCode, ProfileSpace};
use crate::rational::{format_ratio, parse_ratio, to_f64, Prob};
use crate::setsystem::SetSystem;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA: &str = "permid/1";

/// Exact probability as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratio(pub Prob);

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(&self.0))
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map(Ratio).map_err(serde::de::Error::custom)
    }
}

/// Nonnegative integer written as a JSON number when it fits in `u64`,
/// as a decimal string otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Count(pub BigUint);

impl Serialize for Count {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Count(v.into())),
            Raw::Str(s) => s.parse().map(Count).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderFile {
    Deterministic(Vec<Vec<usize>>),
    Stochastic(Vec<Vec<Ratio>>),
    Typecounts(Vec<Vec<Count>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermFile {
    pub n: usize,
    pub q: usize,
    pub l: usize,
    /// `N^l`.
    #[serde(rename = "N")]
    pub ground: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Per message: `[[symbols…], "p/q"]` entries.
    pub encoders: Vec<Vec<(Vec<u8>, Ratio)>>,
    pub decoders: DecoderFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiselessFile {
    #[serde(rename = "N")]
    pub ground: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Per message: `[index, "p/q"]` entries of the support.
    pub encoders: Vec<Vec<(usize, Ratio)>>,
    pub decoders: DecoderFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackFile {
    pub n: usize,
    pub q: usize,
    pub l: usize,
    #[serde(rename = "N")]
    pub ground: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub pilot: Vec<u8>,
    /// `tables[i][r] = Φ_i(r)` over rank tuples `r` of the pilot class.
    pub tables: Vec<Vec<u16>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSystemFile {
    #[serde(rename = "N")]
    pub ground: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxFile {
    #[serde(rename = "N")]
    pub ground: usize,
    #[serde(rename = "K")]
    pub atoms: u64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodeFile {
    Perm(PermFile),
    Noiseless(NoiselessFile),
    Feedback(FeedbackFile),
    SetSystem(SetSystemFile),
    ApproxMap(ApproxFile),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: String,
    #[serde(flatten)]
    body: CodeFile,
}

/// A loaded code document.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Perm(PermIdCode),
    Noiseless(NoiselessIdCode),
    Feedback(FeedbackCode),
    SetSystem(SetSystem),
    ApproxMap(ApproxMap),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Perm(_) => "perm",
            Document::Noiseless(_) => "noiseless",
            Document::Feedback(_) => "feedback",
            Document::SetSystem(_) => "setsystem",
            Document::ApproxMap(_) => "approxmap",
        }
    }
}

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn perm_to_file(code: &PermIdCode, seed: Option<u64>) -> PermFile {
    PermFile {
        n: code.n(),
        q: code.q(),
        l: code.blocks(),
        ground: code.counts()[0].len(),
        m: code.m(),
        encoders: code
            .encoders()
            .iter()
            .map(|e| e.entries().iter().map(|(w, p)| (w.clone(), Ratio(p.clone()))).collect())
            .collect(),
        decoders: DecoderFile::Typecounts(
            code.counts()
                .iter()
                .map(|row| row.iter().cloned().map(Count).collect())
                .collect(),
        ),
        seed,
    }
}

pub fn noiseless_to_file(code: &NoiselessIdCode, seed: Option<u64>) -> NoiselessFile {
    NoiselessFile {
        ground: code.ground(),
        m: code.m(),
        encoders: code
            .encoders()
            .iter()
            .map(|e| e.support().into_iter().map(|k| (k, Ratio(e.get(k).clone()))).collect())
            .collect(),
        decoders: match code.decoders() {
            Decoders::Deterministic(s) => DecoderFile::Deterministic(s.clone()),
            Decoders::Stochastic(t) => {
                DecoderFile::Stochastic(t.iter().map(|r| r.iter().cloned().map(Ratio).collect()).collect())
            }
        },
        seed,
    }
}

pub fn feedback_to_file(code: &FeedbackCode, seed: Option<u64>) -> FeedbackFile {
    FeedbackFile {
        n: code.n(),
        q: code.q(),
        l: code.blocks(),
        ground: code.ground(),
        m: code.m(),
        pilot: code.pilot().to_vec(),
        tables: (0..code.m()).map(|i| code.table(i).to_vec()).collect(),
        seed,
    }
}

pub fn setsystem_to_file(system: &SetSystem, seed: Option<u64>) -> SetSystemFile {
    SetSystemFile {
        ground: system.ground(),
        m: system.len(),
        sets: system.sets().to_vec(),
        seed,
    }
}

pub fn approx_to_file(map: &ApproxMap) -> ApproxFile {
    ApproxFile {
        ground: map.ground(),
        atoms: map.atoms(),
        counts: map.counts().to_vec(),
    }
}

fn check_m(declared: usize, actual: usize) -> Result<()> {
    if declared != actual {
        return Err(Error::Format(format!("M = {declared} but {actual} entries given")));
    }
    Ok(())
}

fn perm_from_file(f: PermFile) -> Result<PermIdCode> {
    check_m(f.m, f.encoders.len())?;
    let encoders = f
        .encoders
        .into_iter()
        .map(|e| WordDist::new(e.into_iter().map(|(w, p)| (w, p.0)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let DecoderFile::Typecounts(rows) = f.decoders else {
        return Err(Error::Format("perm codes store decoders as typecounts".into()));
    };
    let counts = rows
        .into_iter()
        .map(|r| r.into_iter().map(|c| c.0).collect())
        .collect();
    let code = PermIdCode::new(f.n, f.q, f.l, encoders, counts)?;
    let ground = ProfileSpace::new(f.n, f.q, f.l)?.len();
    if ground != f.ground {
        return Err(Error::Format(format!("N = {} but the profile space has {ground} points", f.ground)));
    }
    Ok(code)
}

fn noiseless_from_file(f: NoiselessFile) -> Result<NoiselessIdCode> {
    check_m(f.m, f.encoders.len())?;
    let encoders = f
        .encoders
        .into_iter()
        .map(|e| {
            let mut probs = vec![Prob::zero(); f.ground];
            for (k, p) in e {
                let slot = probs
                    .get_mut(k)
                    .ok_or_else(|| Error::Format(format!("encoder index {k} outside [0,{})", f.ground)))?;
                *slot += p.0;
            }
            Dist::new(probs)
        })
        .collect::<Result<Vec<_>>>()?;
    let decoders = match f.decoders {
        DecoderFile::Deterministic(s) => Decoders::Deterministic(s),
        DecoderFile::Stochastic(t) => Decoders::Stochastic(t.into_iter().map(|r| r.into_iter().map(|p| p.0).collect()).collect()),
        DecoderFile::Typecounts(_) => return Err(Error::Format("typecounts belong to perm codes".into())),
    };
    NoiselessIdCode::new(f.ground, encoders, decoders)
}

fn feedback_from_file(f: FeedbackFile) -> Result<FeedbackCode> {
    check_m(f.m, f.tables.len())?;
    let code = FeedbackCode::from_tables(f.n, f.q, f.l, f.tables)?;
    if code.ground() != f.ground || code.pilot() != f.pilot.as_slice() {
        return Err(Error::Format("N or pilot does not match n and q".into()));
    }
    Ok(code)
}

/// Parses any code document.
pub fn parse_document(text: &str) -> Result<(Document, Option<u64>)> {
    let env: Envelope = serde_json::from_str(text).map_err(format_err)?;
    if env.schema != SCHEMA {
        return Err(Error::Format(format!("unsupported schema {:?}", env.schema)));
    }
    Ok(match env.body {
        CodeFile::Perm(f) => {
            let seed = f.seed;
            (Document::Perm(perm_from_file(f)?), seed)
        }
        CodeFile::Noiseless(f) => {
            let seed = f.seed;
            (Document::Noiseless(noiseless_from_file(f)?), seed)
        }
        CodeFile::Feedback(f) => {
            let seed = f.seed;
            (Document::Feedback(feedback_from_file(f)?), seed)
        }
        CodeFile::SetSystem(f) => {
            check_m(f.m, f.sets.len())?;
            (Document::SetSystem(SetSystem::new(f.ground, f.sets)?), f.seed)
        }
        CodeFile::ApproxMap(f) => {
            if f.counts.len() != f.ground {
                return Err(Error::Format("N does not match the atom vector".into()));
            }
            (Document::ApproxMap(ApproxMap::new(f.atoms, f.counts)?), None)
        }
    })
}

/// Renders a code document.
pub fn render_document(doc: &Document, seed: Option<u64>) -> String {
    let body = match doc {
        Document::Perm(c) => CodeFile::Perm(perm_to_file(c, seed)),
        Document::Noiseless(c) => CodeFile::Noiseless(noiseless_to_file(c, seed)),
        Document::Feedback(c) => CodeFile::Feedback(feedback_to_file(c, seed)),
        Document::SetSystem(s) => CodeFile::SetSystem(setsystem_to_file(s, seed)),
        Document::ApproxMap(m) => CodeFile::ApproxMap(approx_to_file(m)),
    };
    let env = Envelope {
        schema: SCHEMA.into(),
        body,
    };
    serde_json::to_string_pretty(&env).expect("serializable")
}

/// `{"value": "p/q", "decimal": x}`.
pub fn ratio_json(p: &Prob) -> Value {
    json!({ "value": format_ratio(p), "decimal": to_f64(p) })
}

/// Collision counts of a feedback code as a report.
pub fn collision_report_json(r: &CollisionReport) -> Value {
    json!({
        "schema": SCHEMA,
        "kind": "feedback-report",
        "M": r.m,
        "N": r.ground,
        "domain": r.domain,
        "lambda1": json!(format_ratio(&r.lambda1)),
        "lambda2": json!(format_ratio(&r.lambda2)),
        "lambda2_decimal": to_f64(&r.lambda2),
        "max_collisions": r.max_count,
        "argmax": r.argmax,
        "target": json!(format_ratio(&r.target)),
        "pass": r.pass,
        "early_exit": r.early_exit,
    })
}

/// One matrix entry, shared by the JSON and CSV renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub value: Prob,
    pub stderr: Option<f64>,
}

impl Entry {
    pub fn kind(&self) -> &'static str {
        if self.i == self.j {
            "missed"
        } else {
            "false_alarm"
        }
    }
}

fn exact_entries(r: &ErrorReport) -> Option<Vec<Entry>> {
    r.matrix.as_ref().map(|m| {
        m.iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().map(move |(j, v)| Entry {
                    i,
                    j,
                    value: v.clone(),
                    stderr: None,
                })
            })
            .collect()
    })
}

fn mc_entries(r: &McReport) -> Option<Vec<Entry>> {
    r.hits.as_ref().map(|h| {
        (0..h.len())
            .flat_map(|i| (0..h.len()).map(move |j| (i, j)))
            .map(|(i, j)| Entry {
                i,
                j,
                value: r.estimate(i, j).expect("hits kept"),
                stderr: r.stderr(i, j),
            })
            .collect()
    })
}

fn entries_json(entries: &[Entry]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| {
                let mut v = json!({
                    "i": e.i,
                    "j": e.j,
                    "kind": e.kind(),
                    "value": format_ratio(&e.value),
                    "decimal": to_f64(&e.value),
                });
                if let Some(s) = e.stderr {
                    v["stderr"] = json!(s);
                }
                v
            })
            .collect(),
    )
}

fn summary(m: usize, l1: &Prob, l2: &Prob) -> Value {
    let l = l1 + l2;
    json!({
        "schema": SCHEMA,
        "kind": "report",
        "M": m,
        "lambda1": format_ratio(l1),
        "lambda2": format_ratio(l2),
        "lambda": format_ratio(&l),
        "lambda1_decimal": to_f64(l1),
        "lambda2_decimal": to_f64(l2),
        "lambda_decimal": to_f64(&l),
    })
}

pub fn exact_report_json(r: &ErrorReport) -> Value {
    let mut v = summary(r.m, &r.lambda1, &r.lambda2);
    v["mode"] = json!("exact");
    if let Some(e) = exact_entries(r) {
        v["matrix"] = entries_json(&e);
    }
    v
}

pub fn mc_report_json(r: &McReport) -> Value {
    let mut v = summary(r.m, &r.lambda1, &r.lambda2);
    v["mode"] = json!("mc");
    v["mc"] = json!({
        "trials": r.trials,
        "lambda1_stderr": r.lambda1_stderr,
        "lambda2_stderr": r.lambda2_stderr,
    });
    if let Some(e) = mc_entries(r) {
        v["matrix"] = entries_json(&e);
    }
    v
}

/// Reads an exact report back from its JSON rendering.
pub fn parse_exact_report_json(v: &Value) -> Result<ErrorReport> {
    let bad = |what: &str| Error::Format(format!("report: {what}"));
    if v["schema"] != SCHEMA || v["mode"] != "exact" {
        return Err(bad("not an exact permid report"));
    }
    let ratio_at = |key: &str| -> Result<Prob> { parse_ratio(v[key].as_str().ok_or_else(|| bad(key))?) };
    let m = v["M"].as_u64().ok_or_else(|| bad("M"))? as usize;
    let matrix = match v.get("matrix") {
        None => None,
        Some(Value::Array(rows)) => {
            if rows.len() != m * m {
                return Err(bad("matrix size"));
            }
            let mut out = vec![vec![Prob::zero(); m]; m];
            for e in rows {
                let i = e["i"].as_u64().ok_or_else(|| bad("i"))? as usize;
                let j = e["j"].as_u64().ok_or_else(|| bad("j"))? as usize;
                if i >= m || j >= m {
                    return Err(bad("index out of range"));
                }
                out[i][j] = parse_ratio(e["value"].as_str().ok_or_else(|| bad("value"))?)?;
            }
            Some(out)
        }
        Some(_) => return Err(bad("matrix")),
    };
    Ok(ErrorReport {
        m,
        lambda1: ratio_at("lambda1")?,
        lambda2: ratio_at("lambda2")?,
        matrix,
    })
}

const CSV_HEADER: &str = "i,j,kind,value,decimal,stderr";

fn entries_csv(entries: &[Entry]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for e in entries {
        let stderr = e.stderr.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.i,
            e.j,
            e.kind(),
            format_ratio(&e.value),
            to_f64(&e.value),
            stderr
        ));
    }
    out
}

/// One row per matrix entry; errors if the matrix was not kept.
pub fn exact_report_csv(r: &ErrorReport) -> Result<String> {
    exact_entries(r)
        .map(|e| entries_csv(&e))
        .ok_or_else(|| Error::Format("matrix above the cap; raise --matrix-cap for CSV".into()))
}

pub fn mc_report_csv(r: &McReport) -> Result<String> {
    mc_entries(r)
        .map(|e| entries_csv(&e))
        .ok_or_else(|| Error::Format("matrix above the cap; raise --matrix-cap for CSV".into()))
}

/// Parses the CSV rendering back into entries.
pub fn parse_report_csv(text: &str) -> Result<Vec<Entry>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Format("unexpected CSV header".into()));
    }
    let bad = |l: &str| Error::Format(format!("bad CSV row {l:?}"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(bad(l));
            }
            Ok(Entry {
                i: f[0].parse().map_err(|_| bad(l))?,
                j: f[1].parse().map_err(|_| bad(l))?,
                value: parse_ratio(f[3])?,
                stderr: if f[5].is_empty() { None } else { Some(f[5].parse().map_err(|_| bad(l))?) },
            })
        })
        .collect()
}

/// Rows of a parameter sweep; every row carries the same keys.
pub fn sweep_csv(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = keys
            .iter()
            .map(|k| match &r[k.as_str()] {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                v => v.to_string(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
