//! Two-stage unsupervised fault screening over a corpus of motor records.
//!
//! - [`embed_records`] — preprocess a set of records into functional data and
//!   project it to a low-dimensional embedding with either method.
//! - [`run_detection`] — stage 1: current derivatives → 2-D embedding →
//!   two-way split, named healthy/faulty via a synthesized reference template.
//! - [`run_diagnosis`] — stage 2: instantaneous-active-power spectra → 2-D
//!   embedding → three-way split, labeled by low-frequency band votes.
//! - [`default_fdm_params`] — the per-channel/per-representation diffusion-map
//!   defaults, all six rows reachable.
//!
//! Everything here is deterministic: embeddings, k-means seeding, template
//! synthesis and band votes involve no randomness beyond the seeds already
//! frozen into the corpus records, so identical inputs give identical
//! verdicts and exports.
//!
//! Conventions and fallbacks:
//!
//! - Stage 1 clusters the radial distance from the healthy template in
//!   embedding space rather than the raw 2-D coordinates: faulty records
//!   scatter around the tight healthy cloud in every direction, so the radius
//!   is the coordinate along which the two groups are actually separable; the
//!   template (radius zero by construction) then names the healthy cluster.
//!   Radii are clustered on a log scale, because fault severities spread the
//!   faulty radii over a wide linear range while the healthy/faulty gap is a
//!   fixed *ratio*; the log makes that gap the dominant feature and leaves
//!   the whole decision invariant under rescaling of the embedding.
//! - Stage 2 clusters unit *directions* in embedding space, measured from
//!   the image of the zero-content signature: each fault family excites its
//!   own low-frequency bins, so the family is encoded by direction while
//!   severity and load only stretch the magnitude along the ray. Normalizing
//!   strips the severity axis that would otherwise dominate the three-way
//!   split.
//! - A split whose own silhouette falls below [`DEGENERATE_SILHOUETTE`] is
//!   treated as "no real structure": stage 1 reports every record healthy,
//!   stage 2 collapses to a single class chosen by the global band vote.
//!   Stage 1 additionally requires the two radius clusters to be separated
//!   by a factor of [`RADIUS_SEPARATION`], the signature of genuine faults.
//! - Verdict separation scores are silhouettes of the *true* condition
//!   labels (stage 1: over the embedding coordinates; stage 2: over the unit
//!   directions it clusters), reported as `None` when undefined (e.g. a
//!   single-condition corpus).

use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans, silhouette};
use crate::error::{Error, Result};
use crate::fda::{trapezoid_weights, FunctionalDataset, SampleGrid};
use crate::fdm::{fit_fdm, FdmParams, KernelKind};
use crate::fpca::{fit_fpca, transform};
use crate::preprocess::{preprocess_signal, time_grid, PreprocessConfig};
use crate::synth::{gen_current_with, FaultKind, FaultSpec, MotorSpec, SignalChannel, SignalRecord};

/// Embedding dimension used by both stages (all downstream plots are 2-D).
pub const EMBED_DIMS: usize = 2;

/// Split-quality floor: a k-means partition scoring below this silhouette is
/// considered degenerate (no real cluster structure).
pub const DEGENERATE_SILHOUETTE: f64 = 0.1;

/// Stage-1 guard against splitting a fault-free corpus: the far radius
/// cluster must sit at least this many times farther from the template than
/// the near one (compared as a gap between log-radius cluster centers).
/// Noise alone scatters healthy radii within a factor of a few of their
/// floor, while any modeled fault pushes records well over an order of
/// magnitude beyond it, so a ratio test separates the two regimes where a
/// silhouette cannot (the best two-way split of a unimodal radius cloud
/// still scores well).
pub const RADIUS_SEPARATION: f64 = 10.0;

/// Radii are floored at this fraction of the largest radius before taking
/// logs, so an exact-zero distance (a record identical to the template)
/// cannot produce an infinite feature.
const RADIUS_FLOOR_REL: f64 = 1e-9;

/// If even the largest radius is below this fraction of the coordinate
/// scale, every record sits on the template to machine precision and the
/// corpus is declared fault-free outright (clustering numerical dust would
/// read noise in the last bits as structure).
const RADIUS_DUST_REL: f64 = 1e-9;

/// Load level of the synthesized healthy reference template (mid-range).
const TEMPLATE_LOAD_PCT: u8 = 40;

/// Longest window (samples) used for the low-frequency spectral signature of
/// power records. Long windows give the sub-hertz bin spacing needed to
/// resolve the 1 Hz / 2 Hz / slip-harmonic components apart; the cap keeps
/// the spectrum length bounded for the embedding stage.
const IAP_SIG_MAX_LEN: usize = 120_000;

/// Upper edge (Hz) of the band kept from power-record signatures. Every
/// modeled fault leaves its mark within a few hertz of DC; beyond that the
/// spectrum holds only the carrier ridge, common to all records.
const IAP_BAND_HZ: f64 = 5.0;

/// Directions shorter than this fraction of the longest one (relative to the
/// zero-content point) are left at the origin instead of being normalized —
/// a record with no band content has no meaningful direction.
const DIRECTION_EPS: f64 = 1e-9;

/// Relative weight a 4 Hz component must reach against the 2 Hz component for
/// a record to vote "broken bars" (the second slip harmonic rides at a third
/// of the first, far above this floor; oscillation faults leave only noise
/// there).
const SECOND_HARMONIC_RATIO: f64 = 0.15;

// ---------------------------------------------------------------------------
// parameter records
// ---------------------------------------------------------------------------

/// Which embedding backend to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbedMethod {
    Fpca,
    Fdm,
}

impl EmbedMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbedMethod::Fpca => "FPCA",
            EmbedMethod::Fdm => "FDM",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fpca" => Ok(EmbedMethod::Fpca),
            "fdm" => Ok(EmbedMethod::Fdm),
            other => Err(Error::InvalidSpec(format!("unknown method `{other}`"))),
        }
    }
}

/// Which functional representation of each record is embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataKind {
    Signal,
    Derivative,
    Signature,
}

impl DataKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DataKind::Signal => "signal",
            DataKind::Derivative => "derivative",
            DataKind::Signature => "signature",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "signal" => Ok(DataKind::Signal),
            "derivative" => Ok(DataKind::Derivative),
            "signature" => Ok(DataKind::Signature),
            other => Err(Error::InvalidSpec(format!("unknown data kind `{other}`"))),
        }
    }
}

/// Coarse channel family an embedding was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelClass {
    Current,
    Iap,
}

impl ChannelClass {
    pub fn of(channel: SignalChannel) -> Self {
        match channel {
            SignalChannel::Iap => ChannelClass::Iap,
            _ => ChannelClass::Current,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelClass::Current => "current",
            ChannelClass::Iap => "iap",
        }
    }
}

/// Full parameter record of a fitted embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EmbedParams {
    Fpca { components: usize, centered: bool },
    Fdm(FdmParams),
}

/// Default diffusion-map hyperparameters per channel family and
/// representation. Bandwidths were tuned against lab data whose amplitudes
/// differ from this crate's synthetic corpus, so they are defaults, not
/// constraints; every row is overridable at the call site.
pub fn default_fdm_params(class: ChannelClass, kind: DataKind) -> FdmParams {
    let (kernel, sigma, alpha) = match (class, kind) {
        (ChannelClass::Current, DataKind::Signal) => (KernelKind::Gaussian, 0.035, 1.0),
        (ChannelClass::Current, DataKind::Derivative) => (KernelKind::Gaussian, 10.0, 0.0),
        (ChannelClass::Current, DataKind::Signature) => (KernelKind::Laplacian, 100.0, 1.0),
        (ChannelClass::Iap, DataKind::Signal) => (KernelKind::Gaussian, 0.1, 0.5),
        (ChannelClass::Iap, DataKind::Derivative) => (KernelKind::Gaussian, 5.0, 0.0),
        (ChannelClass::Iap, DataKind::Signature) => (KernelKind::Laplacian, 38.0, 0.25),
    };
    FdmParams {
        kernel,
        sigma,
        alpha,
        steps: 1,
        dims: EMBED_DIMS,
    }
}

// ---------------------------------------------------------------------------
// embedding results and verdicts
// ---------------------------------------------------------------------------

/// Condition tag and load level of one embedded record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointLabel {
    pub condition: String,
    pub load_pct: u8,
}

/// A fitted low-dimensional embedding of a record set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub method: EmbedMethod,
    pub params: EmbedParams,
    pub data_kind: DataKind,
    pub channel: ChannelClass,
    /// One label per embedded record; same order as `coords`.
    pub labels: Vec<PointLabel>,
    /// Row-per-record coordinates, all finite.
    pub coords: Vec<Vec<f64>>,
}

impl EmbeddingResult {
    /// Number of embedded records.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Checks the structural invariants (label/coordinate alignment, finite
    /// and rectangular coordinates). Import paths call this on anything read
    /// back from disk.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.coords.len() {
            return Err(Error::LengthMismatch {
                left: self.labels.len(),
                right: self.coords.len(),
            });
        }
        let width = self.coords.first().map_or(0, Vec::len);
        for (i, row) in self.coords.iter().enumerate() {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    left: width,
                    right: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Stage-1 health call for one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HealthLabel {
    Healthy,
    Faulty,
}

/// Stage-2 fault family for one faulty record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultClass {
    BrokenBars,
    LoadOsc1Hz,
    LoadOsc2Hz,
}

impl FaultClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultClass::BrokenBars => "broken-bars",
            FaultClass::LoadOsc1Hz => "load-osc-1hz",
            FaultClass::LoadOsc2Hz => "load-osc-2hz",
        }
    }
}

/// True-label silhouette per stage, `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationScores {
    pub stage1: Option<f64>,
    pub stage2: Option<f64>,
}

/// Per-record outcome of a pipeline stage.
///
/// `stage2` entries are `Some` only where `stage1` is [`HealthLabel::Faulty`];
/// [`PipelineVerdict::validate`] enforces that shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineVerdict {
    pub stage1: Vec<HealthLabel>,
    pub stage2: Vec<Option<FaultClass>>,
    pub separation: SeparationScores,
}

impl PipelineVerdict {
    pub fn validate(&self) -> Result<()> {
        if self.stage1.len() != self.stage2.len() {
            return Err(Error::LengthMismatch {
                left: self.stage1.len(),
                right: self.stage2.len(),
            });
        }
        for (h, f) in self.stage1.iter().zip(&self.stage2) {
            if f.is_some() && *h == HealthLabel::Healthy {
                return Err(Error::InvalidSpec(
                    "fault class attached to a healthy record".into(),
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// embedding machinery
// ---------------------------------------------------------------------------

fn preprocess_config(kind: DataKind) -> PreprocessConfig {
    PreprocessConfig {
        derivative: kind == DataKind::Derivative,
        signature: kind == DataKind::Signature,
        ..PreprocessConfig::default()
    }
}

/// Runs the fixed preprocessing chain over every record and stacks the chosen
/// representation into one functional dataset. All records must share a
/// sampling rate; rows then share the grid by construction.
///
/// Signatures are windowed per channel family. Current spectra keep the short
/// default window and the full one-sided band, where the carrier neighborhood
/// carries the information. Power spectra instead use the longest common
/// window (capped at [`IAP_SIG_MAX_LEN`] samples, with head-room for the
/// alignment shift) and keep only the `(0,` [`IAP_BAND_HZ`]`]` band: the
/// fault components of interest sit within a few hertz of DC, so resolving
/// them needs sub-hertz bins, and the rest of the band holds nothing but the
/// carrier ridge and noise.
fn functional_dataset(records: &[&SignalRecord], kind: DataKind) -> Result<FunctionalDataset> {
    let fs = records[0].fs_hz;
    if records.iter().any(|r| r.fs_hz != fs) {
        return Err(Error::RecordMismatch);
    }
    let mut cfg = preprocess_config(kind);
    let low_band = kind == DataKind::Signature
        && records.iter().all(|r| r.channel == SignalChannel::Iap);
    if low_band {
        let min_len = records.iter().map(|r| r.samples.len()).min().unwrap_or(0);
        cfg.truncate_len = (min_len - min_len / 16).min(IAP_SIG_MAX_LEN).max(2);
    }
    let mut rows = Vec::with_capacity(records.len());
    let mut grid: Option<SampleGrid> = None;
    for record in records {
        let p = preprocess_signal(record, &cfg)?;
        match kind {
            DataKind::Signal => {
                rows.push(p.signal);
            }
            DataKind::Derivative => {
                rows.push(p.derivative.expect("derivative requested"));
            }
            DataKind::Signature => {
                let sig = p.signature.expect("signature requested");
                if low_band {
                    let (freqs, mags): (Vec<f64>, Vec<f64>) = sig
                        .freqs
                        .iter()
                        .zip(&sig.magnitudes)
                        .filter(|(f, _)| **f > 0.0 && **f <= IAP_BAND_HZ)
                        .map(|(f, m)| (*f, *m))
                        .unzip();
                    if grid.is_none() {
                        grid = Some(SampleGrid::from_points(freqs)?);
                    }
                    rows.push(mags);
                } else {
                    if grid.is_none() {
                        grid = Some(sig.grid()?);
                    }
                    rows.push(sig.magnitudes);
                }
            }
        }
    }
    let grid = match grid {
        Some(g) => g,
        None => time_grid(fs, cfg.truncate_len)?,
    };
    FunctionalDataset::from_rows(grid, rows)
}

fn resolve_params(
    method: EmbedMethod,
    params: Option<EmbedParams>,
    class: ChannelClass,
    kind: DataKind,
) -> Result<EmbedParams> {
    match (method, params) {
        (EmbedMethod::Fpca, None) => Ok(EmbedParams::Fpca {
            components: EMBED_DIMS,
            centered: true,
        }),
        (EmbedMethod::Fdm, None) => Ok(EmbedParams::Fdm(default_fdm_params(class, kind))),
        (EmbedMethod::Fpca, Some(p @ EmbedParams::Fpca { components, .. })) => {
            if components == 0 {
                return Err(Error::InvalidSpec("components must be ≥ 1".into()));
            }
            Ok(p)
        }
        (EmbedMethod::Fdm, Some(EmbedParams::Fdm(p))) => {
            p.validate()?;
            Ok(EmbedParams::Fdm(p))
        }
        _ => Err(Error::InvalidSpec(
            "parameter record does not match the embedding method".into(),
        )),
    }
}

fn point_labels(records: &[&SignalRecord]) -> Vec<PointLabel> {
    records
        .iter()
        .map(|r| PointLabel {
            condition: r.condition_tag(),
            load_pct: r.condition.load_pct,
        })
        .collect()
}

/// Embeds a uniform-channel record set into [`EMBED_DIMS`] coordinates.
///
/// With `params = None` the method defaults apply: a centered 2-component
/// fit for [`EmbedMethod::Fpca`], the matching [`default_fdm_params`] row for
/// [`EmbedMethod::Fdm`].
pub fn embed_records(
    records: &[&SignalRecord],
    kind: DataKind,
    method: EmbedMethod,
    params: Option<EmbedParams>,
) -> Result<EmbeddingResult> {
    embed_records_with_origin(records, kind, method, params).map(|(result, _)| result)
}

/// [`embed_records`] plus the embedding image of the zero function — the
/// point a record with no spectral content at all would land on. Linear
/// embeddings map it exactly (it is the projection of `0 − mean`); diffusion
/// embeddings have no out-of-sample extension, so the origin is used there.
fn embed_records_with_origin(
    records: &[&SignalRecord],
    kind: DataKind,
    method: EmbedMethod,
    params: Option<EmbedParams>,
) -> Result<(EmbeddingResult, Vec<f64>)> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let class = ChannelClass::of(records[0].channel);
    if records.iter().any(|r| ChannelClass::of(r.channel) != class) {
        return Err(Error::RecordMismatch);
    }
    let resolved = resolve_params(method, params, class, kind)?;
    let data = functional_dataset(records, kind)?;
    let q = trapezoid_weights(data.grid());
    let (coords, zero_point) = match &resolved {
        EmbedParams::Fpca {
            components,
            centered,
        } => {
            let model = fit_fpca(&data, &q, *components, *centered)?;
            let zeros = FunctionalDataset::from_rows(
                data.grid().clone(),
                vec![vec![0.0; data.grid().len()]],
            )?;
            let zero_point = transform(&model, &zeros)?.remove(0);
            (model.scores, zero_point)
        }
        EmbedParams::Fdm(p) => {
            let model = fit_fdm(&data, &q, p)?;
            let dims = model.embedding.first().map_or(0, Vec::len);
            (model.embedding, vec![0.0; dims])
        }
    };
    let result = EmbeddingResult {
        method,
        params: resolved,
        data_kind: kind,
        channel: class,
        labels: point_labels(records),
        coords,
    };
    result.validate()?;
    Ok((result, zero_point))
}

// ---------------------------------------------------------------------------
// stage 1: detection
// ---------------------------------------------------------------------------

/// Synthesizes the noise-free healthy reference record the detection stage
/// compares against: the default machine at mid load, first current phase,
/// matching the corpus sampling rate and record length.
fn healthy_template(probe: &SignalRecord) -> Result<SignalRecord> {
    let motor = MotorSpec {
        fs_hz: probe.fs_hz,
        n_samples: probe.samples.len(),
        ..MotorSpec::default()
    };
    let fault = FaultSpec::new(FaultKind::Healthy, TEMPLATE_LOAD_PCT)?;
    gen_current_with(&motor, &fault, 0, 0, 0.0)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Groups a condition tag for truth-based separation scores: 0 healthy,
/// 1 broken bars, 2 slow (1 Hz) oscillation, 3 fast (2 Hz) oscillation.
fn condition_group(tag: &str) -> usize {
    if tag == "HM" {
        0
    } else if tag.contains("BB") {
        1
    } else if tag.starts_with("SS_1") {
        2
    } else {
        3
    }
}

fn true_label_silhouette(coords: &[Vec<f64>], groups: &[usize]) -> Option<f64> {
    silhouette(coords, groups).ok()
}

/// Stage 1: screens a corpus of current records for faults.
///
/// The records' time-domain derivatives are embedded in 2-D; each record is
/// then summarized by its embedding-space distance to the healthy template
/// and the radii are split two ways. The cluster holding the template
/// (radius 0) is called healthy, the other faulty. Splits with silhouette
/// below [`DEGENERATE_SILHOUETTE`], and corpora too small to cluster, yield
/// the no-fault verdict.
pub fn run_detection(
    corpus: &[SignalRecord],
    method: EmbedMethod,
    params: Option<EmbedParams>,
) -> Result<(EmbeddingResult, PipelineVerdict)> {
    let currents: Vec<&SignalRecord> = corpus.iter().filter(|r| r.channel.is_current()).collect();
    if currents.is_empty() {
        return Err(Error::MissingChannel("current".into()));
    }
    let n = currents.len();
    let kind = DataKind::Derivative;
    let class = ChannelClass::Current;
    let resolved = resolve_params(method, params, class, kind)?;
    let template = healthy_template(currents[0])?;

    let (coords, template_coords) = match &resolved {
        EmbedParams::Fpca {
            components,
            centered,
        } => {
            let data = functional_dataset(&currents, kind)?;
            let q = trapezoid_weights(data.grid());
            let model = fit_fpca(&data, &q, *components, *centered)?;
            let template_data = functional_dataset(&[&template], kind)?;
            let template_coords = transform(&model, &template_data)?.remove(0);
            (model.scores, template_coords)
        }
        EmbedParams::Fdm(p) => {
            // No out-of-sample extension for diffusion maps: fit on the
            // corpus plus the template, then drop the template row from the
            // reported embedding.
            let mut with_template = currents.clone();
            with_template.push(&template);
            let data = functional_dataset(&with_template, kind)?;
            let q = trapezoid_weights(data.grid());
            let model = fit_fdm(&data, &q, p)?;
            let mut embedding = model.embedding;
            let template_coords = embedding.pop().expect("template row present");
            (embedding, template_coords)
        }
    };

    // Radial decision coordinate: distance from the healthy template.
    let radii: Vec<f64> = coords.iter().map(|c| euclid(c, &template_coords)).collect();
    let max_radius = radii.iter().fold(0.0_f64, |m, &r| m.max(r));
    let coord_scale = coords
        .iter()
        .flatten()
        .chain(template_coords.iter())
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    let stage1 = if n < 3 || max_radius <= RADIUS_DUST_REL * coord_scale {
        vec![HealthLabel::Healthy; n]
    } else {
        let floor = max_radius * RADIUS_FLOOR_REL;
        let feats: Vec<Vec<f64>> = radii.iter().map(|&r| vec![r.max(floor).log10()]).collect();
        let fit = kmeans(&feats, 2)?;
        let split_score = silhouette(&feats, &fit.assignments).unwrap_or(0.0);
        let (near, far) = if fit.centers[0][0] <= fit.centers[1][0] {
            (fit.centers[0][0], fit.centers[1][0])
        } else {
            (fit.centers[1][0], fit.centers[0][0])
        };
        if split_score < DEGENERATE_SILHOUETTE || far - near < RADIUS_SEPARATION.log10() {
            vec![HealthLabel::Healthy; n]
        } else {
            // The template sits at radius 0; the near-center cluster is
            // therefore the one containing it.
            let healthy_cluster = if fit.centers[0][0] <= fit.centers[1][0] {
                0
            } else {
                1
            };
            fit.assignments
                .iter()
                .map(|&a| {
                    if a == healthy_cluster {
                        HealthLabel::Healthy
                    } else {
                        HealthLabel::Faulty
                    }
                })
                .collect()
        }
    };

    let groups: Vec<usize> = currents
        .iter()
        .map(|r| usize::from(condition_group(&r.condition_tag()) != 0))
        .collect();
    let separation = SeparationScores {
        stage1: true_label_silhouette(&coords, &groups),
        stage2: None,
    };

    let result = EmbeddingResult {
        method,
        params: resolved,
        data_kind: kind,
        channel: class,
        labels: point_labels(&currents),
        coords,
    };
    result.validate()?;
    let verdict = PipelineVerdict {
        stage2: vec![None; n],
        stage1,
        separation,
    };
    verdict.validate()?;
    Ok((result, verdict))
}

// ---------------------------------------------------------------------------
// stage 2: diagnosis
// ---------------------------------------------------------------------------

/// One-sided amplitude of a single frequency in a raw record, via direct
/// summation against the nearest DFT bin. Returns 0 for frequencies the
/// record cannot resolve.
///
/// Deliberately not Goertzel: for bins this far below the record's dominant
/// components the recursion's near-DC resonance amplifies rounding error past
/// the small line amplitudes being probed, while the direct sum stays at
/// machine precision.
fn band_amplitude(samples: &[f64], fs_hz: f64, freq_hz: f64) -> f64 {
    let n = samples.len();
    let k = (freq_hz * n as f64 / fs_hz).round();
    if k < 1.0 || k >= (n / 2) as f64 {
        return 0.0;
    }
    let w = 2.0 * std::f64::consts::PI * k / n as f64;
    let (mut re, mut im) = (0.0_f64, 0.0_f64);
    for (j, &x) in samples.iter().enumerate() {
        let (s, c) = (w * j as f64).sin_cos();
        re += x * c;
        im -= x * s;
    }
    2.0 * (re * re + im * im).sqrt() / n as f64
}

/// Votes a fault family for one raw IAP record from its low-frequency band
/// content: a dominant 1 Hz line means slow load oscillation; a 2 Hz line
/// accompanied by its 4 Hz harmonic means broken bars (the slip-frequency
/// pair of the default machine); a bare 2 Hz line means fast load
/// oscillation. Band placement assumes the default machine's slip, which is
/// what this crate's synthesizer produces.
fn band_vote(record: &SignalRecord) -> FaultClass {
    let m1 = band_amplitude(&record.samples, record.fs_hz, 1.0);
    let m2 = band_amplitude(&record.samples, record.fs_hz, 2.0);
    let m4 = band_amplitude(&record.samples, record.fs_hz, 4.0);
    if m1 > m2 {
        FaultClass::LoadOsc1Hz
    } else if m4 > SECOND_HARMONIC_RATIO * m2 {
        FaultClass::BrokenBars
    } else {
        FaultClass::LoadOsc2Hz
    }
}

/// Majority class among `votes`, restricted to indices where `pick` is true.
/// Ties resolve in declaration order of [`FaultClass`].
fn majority(votes: &[FaultClass], pick: impl Fn(usize) -> bool) -> FaultClass {
    let order = [
        FaultClass::BrokenBars,
        FaultClass::LoadOsc1Hz,
        FaultClass::LoadOsc2Hz,
    ];
    let mut counts = [0usize; 3];
    for (i, v) in votes.iter().enumerate() {
        if pick(i) {
            counts[order.iter().position(|o| o == v).unwrap()] += 1;
        }
    }
    let best = (0..3).max_by_key(|&i| (counts[i], 3 - i)).unwrap();
    order[best]
}

/// Stage 2: sorts faulty records into fault families.
///
/// The corpus's instantaneous-active-power records are reduced to
/// low-frequency signatures and embedded in 2-D; the unit directions of the
/// embedded points (taken from the zero-content point) are split three ways,
/// and each cluster takes the majority band vote of its members. A
/// degenerate split (silhouette below [`DEGENERATE_SILHOUETTE`], or a corpus
/// too small to cluster) collapses to one global vote for all records.
pub fn run_diagnosis(
    corpus: &[SignalRecord],
    method: EmbedMethod,
    params: Option<EmbedParams>,
) -> Result<(EmbeddingResult, PipelineVerdict)> {
    let iaps: Vec<&SignalRecord> = corpus
        .iter()
        .filter(|r| r.channel == SignalChannel::Iap)
        .collect();
    if iaps.is_empty() {
        return Err(Error::MissingChannel("iap".into()));
    }
    let n = iaps.len();
    let (result, zero_point) = embed_records_with_origin(&iaps, DataKind::Signature, method, params)?;

    // Severity-invariant cluster features: each fault family excites its own
    // spectral bins, so the family is encoded by the *direction* of a record
    // relative to the zero-content point, while severity and load only
    // stretch the magnitude along that ray. Normalizing strips the severity
    // axis, which would otherwise dominate the three-way split.
    let offsets: Vec<Vec<f64>> = result
        .coords
        .iter()
        .map(|c| c.iter().zip(&zero_point).map(|(a, b)| a - b).collect())
        .collect();
    let max_norm = offsets
        .iter()
        .map(|d| d.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    let feats: Vec<Vec<f64>> = offsets
        .into_iter()
        .map(|d| {
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= DIRECTION_EPS * max_norm || norm == 0.0 {
                vec![0.0; d.len()]
            } else {
                d.into_iter().map(|v| v / norm).collect()
            }
        })
        .collect();

    let votes: Vec<FaultClass> = iaps.iter().map(|r| band_vote(r)).collect();
    let stage2: Vec<Option<FaultClass>> = if n < 3 {
        let class = majority(&votes, |_| true);
        vec![Some(class); n]
    } else {
        let fit = kmeans(&feats, 3)?;
        let split_score = silhouette(&feats, &fit.assignments).unwrap_or(0.0);
        if split_score < DEGENERATE_SILHOUETTE {
            let class = majority(&votes, |_| true);
            vec![Some(class); n]
        } else {
            let cluster_class: Vec<FaultClass> = (0..3)
                .map(|c| majority(&votes, |i| fit.assignments[i] == c))
                .collect();
            fit.assignments
                .iter()
                .map(|&a| Some(cluster_class[a]))
                .collect()
        }
    };

    let groups: Vec<usize> = iaps
        .iter()
        .map(|r| condition_group(&r.condition_tag()))
        .collect();
    let separation = SeparationScores {
        stage1: None,
        stage2: true_label_silhouette(&feats, &groups),
    };

    let verdict = PipelineVerdict {
        stage1: vec![HealthLabel::Faulty; n],
        stage2,
        separation,
    };
    verdict.validate()?;
    Ok((result, verdict))
}
