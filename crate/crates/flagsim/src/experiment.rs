//! Seeded end-to-end experiments: candidate generation, ranking, noisy
//! simulation over a parameter grid, and deterministic CSV/JSON reports.
//!
//! All randomness flows from one `ChaCha8` stream per experiment, jobs fan
//! out over a worker pool with order-preserving collection, and floating
//! point values are written in shortest round-trip form — so identical
//! configurations produce byte-identical output files.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::benchmarks::{magic_distillation_circuit, zzzzz_rotation_circuit};
use crate::circuit::Circuit;
use crate::dense::{apply_circuit_to_state, zero_state, CVec};
use crate::densesim::{fidelity, postselect_flags, simulate};
use crate::error::{Error, Result};
use crate::fault::{
    detection_mask, output_error_set, quality, quality_set, quality_set_exact, rank_flags_scored,
    NoiseKind, NoiseModel, RankOutcome, SetScore,
};
use crate::gadget::{instrument, synthesize, FlagGadget, NestedFlagSet};
use crate::native::compile_to_native;
use crate::pauli::PauliString;
use crate::propagate::{check_compatibility, propagate};

/// Default candidate count for single-flag sweeps.
pub const DEFAULT_N_FLAGS: usize = 500;
/// Default pair count for nested-pair sweeps.
pub const DEFAULT_N_PAIRS: usize = 100;
/// Candidate re-draws allowed per requested flag before giving up.
pub const REDRAW_CAP_FACTOR: usize = 100;

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default sweep grid: five log-spaced error probabilities in
/// `[1e-4, 1e-2]`, or overrotation angles in `[1e-3, 1e-1]`.
pub fn default_parameter_grid(kind: NoiseKind) -> Vec<f64> {
    match kind {
        NoiseKind::Depolarizing | NoiseKind::Crosstalk => log_grid(1e-4, 1e-2, 5),
        NoiseKind::Overrotation => log_grid(1e-3, 1e-1, 5),
    }
}

/// Everything one experiment needs; echoed verbatim into the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    /// Builtin circuit name (`magic`, `zzzzz`) or a circuit-file path.
    pub circuit: String,
    pub model: NoiseModel,
    pub parameter_grid: Vec<f64>,
    pub n_flags: usize,
    pub n_pairs: usize,
    pub seed: u64,
    /// Moment range `[start, end)`; defaults to the circuit's natural
    /// section (for `magic`, everything after the leading non-Clifford
    /// layer; otherwise the whole circuit).
    pub section: Option<(usize, usize)>,
    /// Score candidates on the instrumented circuit instead of with the
    /// penalty heuristic.
    pub exact_scoring: bool,
    /// Maximum support overlap for pair draws; defaults to
    /// `floor(width / 2)`.
    pub overlap_threshold: Option<usize>,
    /// Output path prefix; `{prefix}.csv` and `{prefix}.json` are written
    /// when set.
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(circuit: &str, model: NoiseModel) -> Self {
        ExperimentConfig {
            circuit: circuit.to_string(),
            model,
            parameter_grid: default_parameter_grid(model.kind),
            n_flags: DEFAULT_N_FLAGS,
            n_pairs: DEFAULT_N_PAIRS,
            seed: 0,
            section: None,
            exact_scoring: false,
            overlap_threshold: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n_flags == 0 {
            return Err(Error::InvalidArgument("n_flags must be at least 1".into()));
        }
        if self.parameter_grid.is_empty() {
            return Err(Error::InvalidArgument("parameter grid is empty".into()));
        }
        for &v in &self.parameter_grid {
            self.model.with_parameter(v).validate()?;
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "negative grid value {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Resolves the configured circuit and section into working form. Under
/// overrotation the circuit is native-compiled *before* any flag search,
/// so sections and gadget boundaries refer to native moments.
pub fn resolve_circuit(cfg: &ExperimentConfig) -> Result<(Circuit, Range<usize>)> {
    let (raw, skip_leading_moment) = match cfg.circuit.as_str() {
        "magic" => (magic_distillation_circuit(), true),
        "zzzzz" => (zzzzz_rotation_circuit(5, FRAC_PI_4)?, false),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("reading circuit {path}: {e}")))?;
            (Circuit::parse(&text)?, false)
        }
    };
    let work = if cfg.model.kind == NoiseKind::Overrotation {
        compile_to_native(&raw)?
    } else {
        raw
    };
    let end = work.num_moments();
    let section = match cfg.section {
        Some((a, b)) => a..b,
        None => (if skip_leading_moment { 1 } else { 0 })..end,
    };
    if section.start >= section.end || section.end > end {
        return Err(Error::InvalidArgument(format!(
            "section {}..{} invalid for a circuit with {} moments",
            section.start, section.end, end
        )));
    }
    Ok((work, section))
}

/// Draws `n` distinct sign-normalized Pauli candidates compatible with the
/// section, re-drawing on rejection up to the re-draw cap.
pub fn draw_candidates(
    c: &Circuit,
    section: Range<usize>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PauliString>> {
    let cap = REDRAW_CAP_FACTOR * n.max(1);
    let mut out = Vec::with_capacity(n);
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut draws = 0usize;
    let mut rejected = 0usize;
    while out.len() < n {
        if draws >= cap {
            return Err(Error::RedrawCapExhausted {
                requested: n,
                kept: out.len(),
                draws,
                rejected,
            });
        }
        draws += 1;
        let cand = PauliString::random(rng, c.width(), true).abs();
        let key = (cand.x_mask(), cand.z_mask());
        if seen.contains(&key) {
            rejected += 1;
            continue;
        }
        if !check_compatibility(c, &cand, section.start, section.end)?.compatible {
            rejected += 1;
            continue;
        }
        seen.insert(key);
        out.push(cand);
    }
    Ok(out)
}

/// Draws `n` pairs of distinct compatible candidates whose supports
/// overlap on at most `overlap_threshold` qubits (flags that disagree on
/// most qubits catch complementary errors).
pub fn draw_pairs(
    c: &Circuit,
    section: Range<usize>,
    n: usize,
    overlap_threshold: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(PauliString, PauliString)>> {
    let cap = REDRAW_CAP_FACTOR * n.max(1);
    let mut out = Vec::with_capacity(n);
    let mut seen: HashSet<((u64, u64), (u64, u64))> = HashSet::new();
    let mut draws = 0usize;
    let mut rejected = 0usize;
    while out.len() < n {
        if draws >= cap {
            return Err(Error::RedrawCapExhausted {
                requested: n,
                kept: out.len(),
                draws,
                rejected,
            });
        }
        draws += 1;
        let a = PauliString::random(rng, c.width(), true).abs();
        let b = PauliString::random(rng, c.width(), true).abs();
        if a == b {
            rejected += 1;
            continue;
        }
        let overlap = (a.support_mask() & b.support_mask()).count_ones() as usize;
        if overlap > overlap_threshold {
            rejected += 1;
            continue;
        }
        let ka = (a.x_mask(), a.z_mask());
        let kb = (b.x_mask(), b.z_mask());
        let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
        if seen.contains(&key) {
            rejected += 1;
            continue;
        }
        if !check_compatibility(c, &a, section.start, section.end)?.compatible
            || !check_compatibility(c, &b, section.start, section.end)?.compatible
        {
            rejected += 1;
            continue;
        }
        seen.insert(key);
        out.push((a, b));
    }
    Ok(out)
}

/// One output row: a (flag-or-pair, parameter) point, or a raw-circuit
/// baseline row with flag id `none`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub flag_id: String,
    pub entangle: String,
    pub disentangle: String,
    pub q: Option<f64>,
    pub n_detected: Option<f64>,
    pub parameter: f64,
    pub fidelity_raw: f64,
    pub fidelity_postselected: f64,
    pub survival_probability: f64,
}

/// A finished experiment: all records plus the JSON summary, with the
/// paths written (when an output prefix was configured).
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub records: Vec<ExperimentRecord>,
    pub summary: serde_json::Value,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
}

fn write_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Io(format!("creating {}: {e}", path.display())))?;
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
    }
    w.flush()
        .map_err(|e| Error::Io(format!("flushing {}: {e}", path.display())))?;
    Ok(())
}

fn write_summary(path: &Path, summary: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Io(format!("encoding summary: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

fn write_outputs(
    cfg: &ExperimentConfig,
    records: &[ExperimentRecord],
    summary: &serde_json::Value,
) -> Result<(Option<PathBuf>, Option<PathBuf>)> {
    match &cfg.output {
        None => Ok((None, None)),
        Some(prefix) => {
            let csv_path = PathBuf::from(format!("{prefix}.csv"));
            let summary_path = PathBuf::from(format!("{prefix}.json"));
            write_csv(&csv_path, records)?;
            write_summary(&summary_path, summary)?;
            Ok((Some(csv_path), Some(summary_path)))
        }
    }
}

/// Raw-circuit fidelity at every grid point, computed once and repeated
/// into every record at that parameter.
fn baselines(
    c: &Circuit,
    cfg: &ExperimentConfig,
    reference: &CVec,
) -> Result<Vec<(f64, f64)>> {
    cfg.parameter_grid
        .par_iter()
        .map(|&pv| {
            let m = cfg.model.with_parameter(pv);
            let rho = simulate(c, &m)?;
            Ok((pv, fidelity(&rho, reference)?))
        })
        .collect()
}

fn baseline_records(points: &[(f64, f64)]) -> Vec<ExperimentRecord> {
    points
        .iter()
        .map(|&(pv, fid)| ExperimentRecord {
            flag_id: "none".to_string(),
            entangle: String::new(),
            disentangle: String::new(),
            q: None,
            n_detected: None,
            parameter: pv,
            fidelity_raw: fid,
            fidelity_postselected: fid,
            survival_probability: 1.0,
        })
        .collect()
}

/// Index of the smallest strictly positive grid value (falls back to the
/// smallest value if the grid is all zeros).
fn smallest_nonzero_index(grid: &[f64]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &v) in grid.iter().enumerate() {
        if v > 0.0 && best.map_or(true, |b| v < grid[b]) {
            best = Some(i);
        }
    }
    best.unwrap_or_else(|| {
        grid.iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("validated grids are non-empty")
    })
}

/// Improvement statistics over the records at one parameter value.
fn improvement_stats(
    records: &[ExperimentRecord],
    parameter: f64,
) -> (usize, usize, f64, Option<serde_json::Value>) {
    let at: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.flag_id != "none" && r.parameter == parameter)
        .collect();
    let improved = at
        .iter()
        .filter(|r| r.fidelity_postselected > r.fidelity_raw)
        .count();
    let fraction = if at.is_empty() {
        0.0
    } else {
        improved as f64 / at.len() as f64
    };
    let best = at
        .iter()
        .max_by(|a, b| {
            a.fidelity_postselected
                .total_cmp(&b.fidelity_postselected)
                .then_with(|| b.flag_id.cmp(&a.flag_id))
        })
        .map(|r| {
            serde_json::json!({
                "flag_id": r.flag_id,
                "entangle": r.entangle,
                "disentangle": r.disentangle,
                "q": r.q,
                "n_detected": r.n_detected,
                "fidelity_raw": r.fidelity_raw,
                "fidelity_postselected": r.fidelity_postselected,
                "survival_probability": r.survival_probability,
            })
        });
    (improved, at.len(), fraction, best)
}

/// Max minus min post-selected fidelity across flags at one parameter.
fn fidelity_spread(records: &[ExperimentRecord], parameter: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records {
        if r.flag_id != "none" && r.parameter == parameter {
            lo = lo.min(r.fidelity_postselected);
            hi = hi.max(r.fidelity_postselected);
        }
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

struct PreparedSet {
    id: String,
    entangle_text: String,
    disentangle_text: String,
    q: f64,
    n_detected: f64,
    set: NestedFlagSet,
    instrumented: Circuit,
}

fn prepare_set(
    c: &Circuit,
    m: &NoiseModel,
    id: String,
    set: NestedFlagSet,
    q: f64,
    n_detected: f64,
) -> Result<PreparedSet> {
    let entangle_text = set
        .gadgets
        .iter()
        .map(|f| f.entangle.to_string())
        .collect::<Vec<_>>()
        .join("&");
    let disentangle_text = set
        .gadgets
        .iter()
        .map(|f| f.disentangle.to_string())
        .collect::<Vec<_>>()
        .join("&");
    let instrumented = instrument(c, &set)?;
    let instrumented = if m.kind == NoiseKind::Overrotation {
        compile_to_native(&instrumented)?
    } else {
        instrumented
    };
    Ok(PreparedSet {
        id,
        entangle_text,
        disentangle_text,
        q,
        n_detected,
        set,
        instrumented,
    })
}

/// Simulates every prepared set at every grid point and assembles the
/// record table, baselines first.
fn sweep_records(
    cfg: &ExperimentConfig,
    prepared: &[PreparedSet],
    base: &[(f64, f64)],
    reference: &CVec,
) -> Result<Vec<ExperimentRecord>> {
    let jobs: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|f| (0..cfg.parameter_grid.len()).map(move |g| (f, g)))
        .collect();
    let flag_rows: Vec<ExperimentRecord> = jobs
        .par_iter()
        .map(|&(fi, gi)| {
            let ps = &prepared[fi];
            let pv = cfg.parameter_grid[gi];
            let m = cfg.model.with_parameter(pv);
            let rho = simulate(&ps.instrumented, &m)?;
            let (data, survival) = postselect_flags(&rho, &ps.set)?;
            let fid_post = fidelity(&data, reference)?;
            Ok(ExperimentRecord {
                flag_id: ps.id.clone(),
                entangle: ps.entangle_text.clone(),
                disentangle: ps.disentangle_text.clone(),
                q: Some(ps.q),
                n_detected: Some(ps.n_detected),
                parameter: pv,
                fidelity_raw: base[gi].1,
                fidelity_postselected: fid_post,
                survival_probability: survival,
            })
        })
        .collect::<Result<_>>()?;
    let mut records = baseline_records(base);
    records.extend(flag_rows);
    Ok(records)
}

fn common_summary(
    cfg: &ExperimentConfig,
    records: &[ExperimentRecord],
    extra: serde_json::Value,
) -> serde_json::Value {
    let idx = smallest_nonzero_index(&cfg.parameter_grid);
    let p_star = cfg.parameter_grid[idx];
    let (improved, total, fraction, best) = improvement_stats(records, p_star);
    serde_json::json!({
        "config": cfg,
        "smallest_nonzero_parameter": p_star,
        "improved_count": improved,
        "evaluated_count": total,
        "improved_fraction": fraction,
        "best_by_postselected_fidelity": best,
        "postselected_fidelity_spread": fidelity_spread(records, p_star),
        "detail": extra,
    })
}

/// Ranks `n_flags` random compatible candidates, simulates each at every
/// grid point, and writes `{prefix}.csv` / `{prefix}.json` when an output
/// prefix is configured. Flag ids `f000`, `f001`, ... follow rank order.
pub fn run_single_flag_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (c, section) = resolve_circuit(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let candidates = draw_candidates(&c, section.clone(), cfg.n_flags, &mut rng)?;
    let ranked = rank_flags_scored(&c, &candidates, section, &cfg.model, cfg.exact_scoring)?;
    let reference = apply_circuit_to_state(&c, &zero_state(c.width()))?;
    let base = baselines(&c, cfg, &reference)?;
    let prepared: Vec<PreparedSet> = ranked
        .scores
        .iter()
        .enumerate()
        .map(|(i, s)| {
            prepare_set(
                &c,
                &cfg.model,
                format!("f{i:03}"),
                NestedFlagSet::single(s.flag.clone()),
                s.q,
                s.n_detected,
            )
        })
        .collect::<Result<_>>()?;
    let records = sweep_records(cfg, &prepared, &base, &reference)?;
    let summary = common_summary(
        cfg,
        &records,
        serde_json::json!({
            "mode": "single",
            "candidates_ranked": ranked.scores.len(),
            "candidates_incompatible": ranked.incompatible.len(),
        }),
    );
    let (csv_path, summary_path) = write_outputs(cfg, &records, &summary)?;
    Ok(ExperimentReport {
        records,
        summary,
        csv_path,
        summary_path,
    })
}

/// Draws `n_pairs` nested pairs over the same section (ancillas placed on
/// the two registers above the data), scores them by union detection, and
/// simulates with joint post-selection. Pair ids `p000`, ... follow rank
/// order.
pub fn run_pair_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (c, section) = resolve_circuit(cfg)?;
    let threshold = cfg.overlap_threshold.unwrap_or(c.width() / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = draw_pairs(&c, section.clone(), cfg.n_pairs, threshold, &mut rng)?;
    let error_set = output_error_set(&c, &cfg.model)?;
    let mut scored: Vec<(NestedFlagSet, SetScore)> = pairs
        .par_iter()
        .map(|(a, b)| {
            let fa = synthesize(&c, a, section.clone())?;
            let fb = synthesize(&c, b, section.clone())?.with_ancilla(c.width() + 1);
            let set = NestedFlagSet::new(vec![fa, fb]);
            let score = if cfg.exact_scoring {
                quality_set_exact(&c, &set, &cfg.model)?
            } else {
                quality_set(&set, &error_set, &cfg.model)
            };
            Ok((set, score))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|(sa, a), (sb, b)| {
        let wa: usize = sa
            .gadgets
            .iter()
            .map(|f| f.entangle.weight() + f.disentangle.weight())
            .sum();
        let wb: usize = sb
            .gadgets
            .iter()
            .map(|f| f.entangle.weight() + f.disentangle.weight())
            .sum();
        b.q.total_cmp(&a.q)
            .then_with(|| wa.cmp(&wb))
            .then_with(|| {
                let ta: Vec<String> = sa.gadgets.iter().map(|f| f.entangle.to_string()).collect();
                let tb: Vec<String> = sb.gadgets.iter().map(|f| f.entangle.to_string()).collect();
                ta.cmp(&tb)
            })
    });
    let reference = apply_circuit_to_state(&c, &zero_state(c.width()))?;
    let base = baselines(&c, cfg, &reference)?;
    let prepared: Vec<PreparedSet> = scored
        .iter()
        .enumerate()
        .map(|(i, (set, score))| {
            prepare_set(
                &c,
                &cfg.model,
                format!("p{i:03}"),
                set.clone(),
                score.q,
                score.n_detected,
            )
        })
        .collect::<Result<_>>()?;
    let records = sweep_records(cfg, &prepared, &base, &reference)?;
    let summary = common_summary(
        cfg,
        &records,
        serde_json::json!({
            "mode": "pair",
            "pairs_evaluated": prepared.len(),
            "overlap_threshold": threshold,
        }),
    );
    let (csv_path, summary_path) = write_outputs(cfg, &records, &summary)?;
    Ok(ExperimentReport {
        records,
        summary,
        csv_path,
        summary_path,
    })
}

/// Resolves the circuit, draws `n_flags` candidates, and ranks them: the
/// library entry point behind the `rank` command.
pub fn run_rank(cfg: &ExperimentConfig) -> Result<RankOutcome> {
    cfg.validate()?;
    let (c, section) = resolve_circuit(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let candidates = draw_candidates(&c, section.clone(), cfg.n_flags, &mut rng)?;
    rank_flags_scored(&c, &candidates, section, &cfg.model, cfg.exact_scoring)
}

/// Renders experiment records as CSV text (header included).
pub fn records_csv_string(records: &[ExperimentRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Io(format!("encoding record row: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(format!("finishing record CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(format!("record CSV not UTF-8: {e}")))
}

/// One ranking row for CSV export.
#[derive(Debug, Clone, Serialize)]
pub struct RankRecord {
    pub flag_entangle: String,
    pub flag_disentangle: String,
    #[serde(rename = "weight_P")]
    pub weight_p: usize,
    #[serde(rename = "weight_Pprime")]
    pub weight_pprime: usize,
    pub n_detected: f64,
    pub q: f64,
}

/// Flattens a ranking into CSV rows, best first.
pub fn rank_records(outcome: &RankOutcome) -> Vec<RankRecord> {
    outcome
        .scores
        .iter()
        .map(|s| RankRecord {
            flag_entangle: s.flag.entangle.to_string(),
            flag_disentangle: s.flag.disentangle.to_string(),
            weight_p: s.flag.entangle.weight(),
            weight_pprime: s.flag.disentangle.weight(),
            n_detected: s.n_detected,
            q: s.q,
        })
        .collect()
}

/// Renders ranking rows as CSV text (header included).
pub fn rank_csv_string(records: &[RankRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Io(format!("encoding rank row: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(format!("finishing rank CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(format!("rank CSV not UTF-8: {e}")))
}

/// A JSON report explaining one flag: the layer-by-layer propagation
/// trace across its section, the circuit's fault locations, the detected
/// subset, and the quality score's term breakdown.
pub fn explain_flag(
    c: &Circuit,
    flag: &FlagGadget,
    m: &NoiseModel,
) -> Result<serde_json::Value> {
    let trace = propagate(c, &flag.entangle, flag.entry, flag.exit)?;
    let set = output_error_set(c, m)?;
    let mask = detection_mask(flag, &set);
    let score = quality(flag, &set, m);
    let detected: Vec<serde_json::Value> = set
        .errors
        .iter()
        .zip(&mask)
        .filter(|(_, &hit)| hit)
        .map(|(e, _)| {
            serde_json::json!({
                "moment": e.moment,
                "fault": e.fault.to_string(),
                "output": e.output.to_string(),
                "rate_weight": e.rate_weight,
            })
        })
        .collect();
    let weight_sum = flag.entangle.weight() + flag.disentangle.weight();
    let penalty = m.penalty_coefficient() * weight_sum as f64;
    Ok(serde_json::json!({
        "flag": {
            "entangle": flag.entangle.to_string(),
            "disentangle": flag.disentangle.to_string(),
            "ancilla": flag.ancilla,
            "entry": flag.entry,
            "exit": flag.exit,
            "sign_fix": flag.sign_fix,
            "two_qubit_gate_count": flag.two_qubit_gate_count(),
        },
        "trace": trace
            .layer_trace
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>(),
        "fault_locations": set.locations.len(),
        "faults_total_weight": set.total_weight,
        "faults_non_propagable": set.non_propagable.len(),
        "detected_faults": detected,
        "n_detected": score.n_detected,
        "penalty_coefficient": m.penalty_coefficient(),
        "penalty": penalty,
        "q": score.q,
    }))
}
