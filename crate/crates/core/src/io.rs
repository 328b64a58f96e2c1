//! Versioned JSON and CSV formats.
//!
//! Every JSON document carries `"version": 1`. Complex numbers are written as
//! `[re, im]`; inputs also accept a bare number for a real value. Floating
//! point output uses 17 significant digits (`{:.16e}`) in both JSON and CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::approx::SweepReport;
use crate::cepstral::{EpsilonReport, JointSolution, LambdaPathPoint};
use crate::circulant::SymmetricPseudoPolynomial;
use crate::dual::{CovarianceExtension, SolutionReport};
use crate::error::{Error, Result};
use crate::grid::{DiscreteGrid, Signal, SpectrumSamples};
use crate::moments::{CepstralSequence, CovarianceSequence, Feasibility};
use crate::process::{PeriodicModel, Realization};
use crate::scalar::Cx;

pub const FORMAT_VERSION: u64 = 1;

fn schema(msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("schema: {}", msg.into()))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
    serde::Serialize::serialize(v, &mut ser).expect("serializing a Value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn complex_json(v: Cx<f64>) -> Value {
    json!([v.re, v.im])
}

fn complex_list(vs: &[Cx<f64>]) -> Value {
    Value::Array(vs.iter().map(|&v| complex_json(v)).collect())
}

fn symbol_json(p: &SymmetricPseudoPolynomial<f64>) -> Value {
    complex_list(p.coeffs())
}

fn parse_complex(v: &Value, what: &str) -> Result<Cx<f64>> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| Cx::new(x, 0.0)).ok_or_else(|| schema(format!("{what}: bad number"))),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| schema(format!("{what}: real part is not a number")))?;
            let im = a[1].as_f64().ok_or_else(|| schema(format!("{what}: imaginary part is not a number")))?;
            Ok(Cx::new(re, im))
        }
        _ => Err(schema(format!("{what}: expected a number or [re, im]"))),
    }
}

fn parse_complex_list(v: &Value, what: &str) -> Result<Vec<Cx<f64>>> {
    let arr = v.as_array().ok_or_else(|| schema(format!("\"{what}\" must be an array")))?;
    arr.iter().enumerate().map(|(i, x)| parse_complex(x, &format!("{what}[{i}]"))).collect()
}

/// Object fields with the known keys checked off; leftovers become warnings.
struct Fields<'a> {
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(v: &'a Value, what: &str) -> Result<Self> {
        let map = v.as_object().ok_or_else(|| schema(format!("{what} must be a JSON object")))?;
        Ok(Self { map, seen: Vec::new() })
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn require(&mut self, key: &'static str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| schema(format!("missing field \"{key}\"")))
    }

    fn usize(&mut self, key: &'static str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| schema(format!("\"{key}\" must be a nonnegative integer"))))
            .transpose()
    }

    fn f64(&mut self, key: &'static str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| v.as_f64().ok_or_else(|| schema(format!("\"{key}\" must be a number"))))
            .transpose()
    }

    fn unknown(&self) -> Vec<String> {
        self.map.keys().filter(|k| !self.seen.contains(&k.as_str())).cloned().collect()
    }
}

fn check_version(f: &mut Fields) -> Result<()> {
    match f.get("version").map(|v| v.as_u64()) {
        None => Err(schema("missing field \"version\"")),
        Some(Some(FORMAT_VERSION)) => Ok(()),
        Some(_) => Err(schema(format!("unsupported version, expected {FORMAT_VERSION}"))),
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

/// Solver settings that may appear in an input file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileOptions {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

fn parse_options(v: Option<&Value>, warnings: &mut Vec<String>) -> Result<FileOptions> {
    let Some(v) = v else { return Ok(FileOptions::default()) };
    let mut f = Fields::new(v, "\"options\"")?;
    let out = FileOptions { tol: f.f64("tol")?, max_iter: f.usize("max_iter")? };
    warnings.extend(f.unknown().into_iter().map(|k| format!("options.{k}")));
    Ok(out)
}

/// Input of `solve`, `maxent`, `cepstral` and `check`.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    /// Half-period `N`.
    pub half: usize,
    pub c: CovarianceSequence<f64>,
    pub p: Option<SymmetricPseudoPolynomial<f64>>,
    pub m: Option<CepstralSequence<f64>>,
    pub lambda: Option<f64>,
    pub options: FileOptions,
    /// Unknown field names, ignored.
    pub warnings: Vec<String>,
}

impl ProblemFile {
    /// `{"version": 1, "N": 8, "c": [...], "p": [...], "m": [...], "lambda": 0.001, "options": {...}}`.
    pub fn parse(text: &str) -> Result<Self> {
        let value = parse_json(text)?;
        let mut f = Fields::new(&value, "problem file")?;
        check_version(&mut f)?;
        let half = f.usize("N")?.ok_or_else(|| schema("missing field \"N\""))?;
        let c = CovarianceSequence::new(parse_complex_list(f.require("c")?, "c")?)?;
        let p = f
            .get("p")
            .map(|v| parse_complex_list(v, "p").and_then(SymmetricPseudoPolynomial::new))
            .transpose()?;
        let m = f
            .get("m")
            .map(|v| parse_complex_list(v, "m").and_then(CepstralSequence::new))
            .transpose()?;
        let lambda = f.f64("lambda")?;
        let mut warnings = Vec::new();
        let options = parse_options(f.get("options"), &mut warnings)?;
        warnings.splice(0..0, f.unknown());
        Ok(Self { half, c, p, m, lambda, options, warnings })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn grid(&self) -> Result<DiscreteGrid<f64>> {
        DiscreteGrid::new(self.half)
    }
}

/// Input of `approx`.
#[derive(Debug, Clone)]
pub struct SweepFile {
    pub c: CovarianceSequence<f64>,
    pub p: Option<SymmetricPseudoPolynomial<f64>>,
    /// Explicit half-periods; when absent the schedule doubles from the threshold up to `N_max`.
    pub schedule: Option<Vec<usize>>,
    pub reference_half: Option<usize>,
    pub n_max: usize,
    pub options: FileOptions,
    pub warnings: Vec<String>,
}

impl SweepFile {
    /// `{"version": 1, "c": [...], "p": [...], "schedule": [...], "reference_N": 4096, "N_max": 512}`.
    pub fn parse(text: &str) -> Result<Self> {
        let value = parse_json(text)?;
        let mut f = Fields::new(&value, "sweep config")?;
        check_version(&mut f)?;
        let c = CovarianceSequence::new(parse_complex_list(f.require("c")?, "c")?)?;
        let p = f
            .get("p")
            .map(|v| parse_complex_list(v, "p").and_then(SymmetricPseudoPolynomial::new))
            .transpose()?;
        let schedule = f
            .get("schedule")
            .map(|v| {
                v.as_array()
                    .and_then(|a| a.iter().map(|x| x.as_u64().map(|n| n as usize)).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| schema("\"schedule\" must be an array of nonnegative integers"))
            })
            .transpose()?;
        let reference_half = f.usize("reference_N")?;
        let n_max = f.usize("N_max")?.ok_or_else(|| schema("missing field \"N_max\""))?;
        let mut warnings = Vec::new();
        let options = parse_options(f.get("options"), &mut warnings)?;
        warnings.splice(0..0, f.unknown());
        Ok(Self { c, p, schedule, reference_half, n_max, options, warnings })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }
}

/// A model for `simulate`: `{"version": 1, "N": 8, "p": [...], "q": [...]}`.
///
/// Solution documents written by `solve`, `maxent` and `cepstral` have this shape.
pub fn parse_model(text: &str) -> Result<(PeriodicModel<f64>, Vec<String>)> {
    let value = parse_json(text)?;
    let mut f = Fields::new(&value, "model file")?;
    check_version(&mut f)?;
    let half = f.usize("N")?.ok_or_else(|| schema("missing field \"N\""))?;
    let q = SymmetricPseudoPolynomial::new(parse_complex_list(f.require("q")?, "q")?)?;
    let p = match f.get("p") {
        Some(v) => SymmetricPseudoPolynomial::new(parse_complex_list(v, "p")?)?,
        None => SymmetricPseudoPolynomial::one(),
    };
    let grid = DiscreteGrid::new(half)?;
    Ok((PeriodicModel::new(&grid, p, q)?, Vec::new()))
}

/// Canonical model text, hashed into ensemble manifests.
pub fn model_json(model: &PeriodicModel<f64>) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "kind": "model",
        "N": model.grid.half(),
        "p": symbol_json(&model.p),
        "q": symbol_json(&model.q),
    })
}

pub fn solution_json(report: &SolutionReport<f64>, ext: &CovarianceExtension<f64>) -> Value {
    let block = ext.block.as_ref().map(|b| {
        json!({
            "circulant_defect": b.circulant_defect,
            "hermitian_defect": b.hermitian_defect,
            "block_error": b.block_error,
            "min_eigenvalue": b.min_eigenvalue,
        })
    });
    json!({
        "version": FORMAT_VERSION,
        "kind": "solution",
        "N": report.grid.half(),
        "n": report.c.order(),
        "c": complex_list(report.c.lags()),
        "p": symbol_json(&report.p),
        "q": symbol_json(&report.q),
        "objective": report.objective,
        "iterations": report.iterations,
        "residual": report.residual,
        "input_residual": ext.input_residual,
        "block_check": block,
        "trace": report.trace.iter().map(|r| json!({
            "objective": r.objective,
            "grad_norm": r.grad_norm,
            "step": r.step,
            "min_q": r.min_q,
        })).collect::<Vec<_>>(),
    })
}

pub fn joint_json(sol: &JointSolution<f64>, eps: &EpsilonReport<f64>) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "kind": "joint_solution",
        "N": sol.grid.half(),
        "n": sol.c.order(),
        "lambda": sol.lambda,
        "c": complex_list(sol.c.lags()),
        "m": complex_list(sol.m.coeffs()),
        "p": symbol_json(&sol.p),
        "q": symbol_json(&sol.q),
        "objective": sol.objective,
        "iterations": sol.iterations,
        "covariance_residual": sol.covariance_residual,
        "cepstral_residual": sol.cepstral_residual,
        "boundary": sol.boundary_flag,
        "epsilon": complex_list(&sol.epsilon),
        "adjusted_m": complex_list(&eps.adjusted),
        "identity_error": eps.identity_error,
    })
}

pub fn feasibility_json(c: &CovarianceSequence<f64>, half: usize, f: &Feasibility<f64>, toeplitz_min_eig: f64) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "kind": "feasibility",
        "N": half,
        "n": c.order(),
        "feasible": f.feasible,
        "margin": f.margin,
        "toeplitz_positive": toeplitz_min_eig > 0.0,
        "toeplitz_min_eigenvalue": toeplitz_min_eig,
    })
}

pub fn sweep_json(rep: &SweepReport<f64>, threshold: Option<usize>) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "kind": "sweep",
        "threshold_N": threshold,
        "reference_N": rep.reference_half,
        "reference_q": symbol_json(&rep.reference_q),
        "eventually_decreasing": rep.eventually_decreasing,
        "final_distance": rep.final_distance(),
        "stages": rep.entries.iter().map(|e| json!({
            "N": e.half,
            "feasible": e.feasible,
            "distance": e.distance,
            "iterations": e.iterations,
            "residual": e.residual,
            "q": e.q.as_ref().map(symbol_json),
            "error": e.error,
        })).collect::<Vec<_>>(),
    })
}

/// Wall-clock and provenance of a run, kept apart from the numerical output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub command: String,
    pub input_hash: String,
    pub timestamp_unix: u64,
    pub wall_clock_ms: f64,
    pub outputs: Vec<String>,
}

impl RunRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "version": FORMAT_VERSION,
            "kind": "run",
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "input_hash": self.input_hash,
            "timestamp_unix": self.timestamp_unix,
            "wall_clock_ms": self.wall_clock_ms,
            "outputs": self.outputs,
        })
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
}

fn rows_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv_writer();
    w.write_record(header).expect("in-memory writer");
    for r in rows {
        w.write_record(&r).expect("in-memory writer");
    }
    finish(w)
}

/// `index,re,im` rows.
pub fn indexed_csv(rows: impl IntoIterator<Item = (i64, Cx<f64>)>) -> String {
    rows_csv(
        &["index", "re", "im"],
        rows.into_iter().map(|(k, v)| vec![k.to_string(), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

pub fn spectrum_csv(s: &SpectrumSamples<f64>) -> String {
    indexed_csv(s.grid().indices().zip(s.values().iter().copied()))
}

pub fn signal_csv(s: &Signal<f64>) -> String {
    indexed_csv(s.grid().indices().zip(s.values().iter().copied()))
}

/// Realization rows `t,re,im`.
pub fn realization_csv(r: &Realization<f64>) -> String {
    rows_csv(
        &["t", "re", "im"],
        r.grid().indices().zip(r.samples()).map(|(t, v)| vec![t.to_string(), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

/// Reads `index,re,im` (or `t,re,im`) rows.
pub fn parse_indexed_csv(text: &str) -> Result<Vec<(i64, Cx<f64>)>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| schema(format!("CSV row {}: {e}", line + 2)))?;
        if rec.len() != 3 {
            return Err(schema(format!("CSV row {}: expected 3 columns, got {}", line + 2, rec.len())));
        }
        let bad = |col: &str| schema(format!("CSV row {}: bad {col}", line + 2));
        let k: i64 = rec[0].parse().map_err(|_| bad("index"))?;
        let re: f64 = rec[1].parse().map_err(|_| bad("re"))?;
        let im: f64 = rec[2].parse().map_err(|_| bad("im"))?;
        out.push((k, Cx::new(re, im)));
    }
    Ok(out)
}

/// Realization from CSV; the rows must cover `t = -N+1 ..= N` in order.
pub fn parse_realization_csv(text: &str, seed: u64, index: usize) -> Result<Realization<f64>> {
    let rows = parse_indexed_csv(text)?;
    if rows.is_empty() || rows.len() % 2 != 0 {
        return Err(schema(format!("realization needs an even, positive number of rows, got {}", rows.len())));
    }
    let grid = DiscreteGrid::new(rows.len() / 2)?;
    if rows.iter().map(|r| r.0).ne(grid.indices()) {
        return Err(schema("realization rows must be t = -N+1 ..= N in order"));
    }
    let signal = Signal::new(&grid, rows.into_iter().map(|r| r.1).collect())?;
    Ok(Realization { signal, seed, index })
}

pub fn covariances_csv(lags: &[Cx<f64>]) -> String {
    indexed_csv(lags.iter().enumerate().map(|(k, &v)| (k as i64, v)))
}

/// `N,distance,iterations,runtime_ms`; infeasible or failed stages leave the fields empty.
pub fn sweep_csv(rep: &SweepReport<f64>) -> String {
    rows_csv(
        &["N", "distance", "iterations", "runtime_ms"],
        rep.entries.iter().map(|e| {
            vec![
                e.half.to_string(),
                e.distance.map(fmt_f64).unwrap_or_default(),
                e.iterations.map(|i| i.to_string()).unwrap_or_default(),
                format!("{:.3}", e.runtime_ms),
            ]
        }),
    )
}

/// `lambda,distance` with `distance = max_k |p_k − δ_{k0}|`.
pub fn lambda_path_csv(path: &[LambdaPathPoint<f64>]) -> String {
    rows_csv(&["lambda", "distance"], path.iter().map(|pt| vec![fmt_f64(pt.lambda), fmt_f64(pt.distance_to_maxent)]))
}

pub const MANIFEST: &str = "manifest.json";

fn realization_name(index: usize) -> String {
    format!("realization_{index:05}.csv")
}

/// Writes `manifest.json` and one CSV per realization; returns the file names.
pub fn write_ensemble(dir: &Path, model: &PeriodicModel<f64>, rs: &[Realization<f64>], seed: u64, real_valued: bool) -> Result<Vec<String>> {
    let names: Vec<String> = (0..rs.len()).map(realization_name).collect();
    for (r, name) in rs.iter().zip(&names) {
        write_text(&dir.join(name), &realization_csv(r))?;
    }
    let manifest = json!({
        "version": FORMAT_VERSION,
        "kind": "ensemble",
        "seed": seed,
        "count": rs.len(),
        "N": model.grid.half(),
        "real_valued": real_valued,
        "model_hash": sha256_hex(to_json_string(&model_json(model)).as_bytes()),
        "model": model_json(model),
        "files": names,
    });
    write_text(&dir.join(MANIFEST), &to_json_string(&manifest))?;
    let mut out = names;
    out.push(MANIFEST.to_string());
    Ok(out)
}

/// Ensemble metadata read back from a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub half: usize,
    pub model_hash: String,
    pub files: Vec<String>,
}

pub fn read_ensemble(dir: &Path) -> Result<(Manifest, Vec<Realization<f64>>)> {
    let value = parse_json(&read_text(&dir.join(MANIFEST))?)?;
    let mut f = Fields::new(&value, "manifest")?;
    check_version(&mut f)?;
    let seed = f.get("seed").and_then(Value::as_u64).ok_or_else(|| schema("manifest: missing \"seed\""))?;
    let half = f.usize("N")?.ok_or_else(|| schema("manifest: missing \"N\""))?;
    let model_hash = f.get("model_hash").and_then(Value::as_str).unwrap_or_default().to_string();
    let files: Vec<String> = f
        .require("files")?
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_str().map(String::from)).collect())
        .ok_or_else(|| schema("manifest: \"files\" must be an array of strings"))?;
    let mut rs = Vec::with_capacity(files.len());
    for (index, name) in files.iter().enumerate() {
        let r = parse_realization_csv(&read_text(&dir.join(name))?, seed, index)?;
        if r.grid().half() != half {
            return Err(Error::GridMismatch { left: half, right: r.grid().half() });
        }
        rs.push(r);
    }
    Ok((Manifest { seed, half, model_hash, files }, rs))
}

/// Estimates written by `estimate`.
pub fn estimate_json(c: &CovarianceSequence<f64>, m: Option<&CepstralSequence<f64>>, count: usize, extra: BTreeMap<String, Value>) -> Value {
    let mut v = json!({
        "version": FORMAT_VERSION,
        "kind": "estimate",
        "realizations": count,
        "c": complex_list(c.lags()),
        "m": m.map(|m| complex_list(m.coeffs())),
    });
    let obj = v.as_object_mut().expect("object literal");
    obj.extend(extra);
    v
}
