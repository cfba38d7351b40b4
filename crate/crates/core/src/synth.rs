//! Seeded synthesis of motor current, line-voltage and instantaneous
//! active power (IAP) records.
//!
//! No electromagnetic modeling — records mimic the qualitative spectral
//! fingerprints that matter downstream:
//!
//! - broken rotor bars add slip-frequency sidebands at `f·(1 ± 2ks)`,
//!   `k = 1, 2`, growing with the number of bars;
//! - an oscillating load amplitude-modulates the current at the oscillation
//!   frequency (1 or 2 Hz, two modulation depths);
//! - IAP is the two-wattmeter sum `v₁i₁ + v₂i₂`, whose low-frequency band
//!   carries the fault components the diagnosis stage reads;
//! - a small amount of seeded white noise keeps repetitions from being
//!   bit-identical.
//!
//! Every record's seed is derived from a master seed plus the record's
//! identity (condition tag, load, repetition, channel role), so a corpus is
//! reproducible bit-for-bit regardless of generation order.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default broadband noise amplitude, relative to the carrier amplitude.
///
/// Chosen small enough that fault components survive two amplification
/// effects downstream — the roughly 4000× gain a discrete derivative applies
/// to white noise at this sampling rate, and the per-record scale jitter that
/// min–max normalization inherits from the noise extremes of the carrier —
/// yet large enough that no two repetitions tie exactly.
pub const DEFAULT_NOISE_REL: f64 = 1e-4;

/// Peak amplitude used for both synthesized line voltages.
pub const LINE_VOLTAGE_AMP: f64 = 1.0;

/// First slip-sideband amplitude per broken bar, in units of the base
/// current amplitude (the second harmonic rides at a third of the first).
const BB_SIDEBAND_PER_BAR: f64 = 0.02;

/// Load-oscillation modulation depths for severity levels A and B.
const OSC_DEPTH_A: f64 = 0.06;
const OSC_DEPTH_B: f64 = 0.09;

/// Current phase offsets (radians) for phases 1 and 2.
const CURRENT_PHASE: [f64; 2] = [-PI / 3.0, -PI];

/// Line-voltage phase offsets (radians) for pairs 1 and 2.
const VOLTAGE_PHASE: [f64; 2] = [0.0, 2.0 * PI / 3.0];

/// Electrical and sampling parameters of the simulated machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorSpec {
    /// Supply frequency in hertz.
    pub rated_freq_hz: f64,
    /// Rated rotor speed in revolutions per minute.
    pub rated_speed_rpm: f64,
    /// Number of pole pairs.
    pub pole_pairs: u32,
    /// Sampling rate in samples per second.
    pub fs_hz: f64,
    /// Record length in samples.
    pub n_samples: usize,
    /// Base current amplitude before the load-dependent scale factor.
    pub current_amp: f64,
}

impl MotorSpec {
    /// Validates the parameters, including that the slip lands in `(0, 0.1)`.
    pub fn validated(self) -> Result<Self> {
        if !(self.rated_freq_hz > 0.0)
            || !(self.rated_speed_rpm > 0.0)
            || self.pole_pairs == 0
            || !(self.fs_hz > 0.0)
            || !(self.current_amp > 0.0)
        {
            return Err(Error::InvalidSpec(
                "motor parameters must be positive".into(),
            ));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidSpec(format!(
                "record length {} is too short",
                self.n_samples
            )));
        }
        let s = self.slip();
        if !(s > 0.0 && s < 0.1) {
            return Err(Error::InvalidSpec(format!(
                "slip {s} outside (0, 0.1); check rated speed vs pole pairs"
            )));
        }
        Ok(self)
    }

    /// Synchronous speed `60·f / p` in rpm.
    pub fn sync_speed_rpm(&self) -> f64 {
        60.0 * self.rated_freq_hz / self.pole_pairs as f64
    }

    /// Slip `s = (n_sync − n_rated) / n_sync`.
    pub fn slip(&self) -> f64 {
        let sync = self.sync_speed_rpm();
        (sync - self.rated_speed_rpm) / sync
    }

    /// Current amplitude at a given load percentage.
    pub fn amp_at_load(&self, load_pct: u8) -> f64 {
        self.current_amp * (0.4 + 0.006 * load_pct as f64)
    }
}

impl Default for MotorSpec {
    /// 50 Hz machine, 1470 rpm rated speed, 2 pole pairs, sampled at
    /// 8000 samples/s for 128000 samples (16 s), unit current amplitude.
    fn default() -> Self {
        Self {
            rated_freq_hz: 50.0,
            rated_speed_rpm: 1470.0,
            pole_pairs: 2,
            fs_hz: 8000.0,
            n_samples: 128_000,
            current_amp: 1.0,
        }
    }
}

/// Oscillating-load severity: `A` ⇒ 6 % modulation depth, `B` ⇒ 9 %.
///
/// The depths are sized so that even the slowest oscillation moves a short
/// analysis window's envelope well clear of the healthy noise floor after
/// min–max scaling, keeping severity a visible knob rather than a tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OscLevel {
    A,
    B,
}

impl OscLevel {
    /// Modulation depth for this level.
    pub fn depth(self) -> f64 {
        match self {
            OscLevel::A => OSC_DEPTH_A,
            OscLevel::B => OSC_DEPTH_B,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OscLevel::A => "A",
            OscLevel::B => "B",
        }
    }
}

/// Machine condition being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    /// No fault.
    Healthy,
    /// `bars ∈ {1, 2, 3}` broken rotor bars.
    BrokenBars { bars: u8 },
    /// Sinusoidal load oscillation at `freq_hz ∈ {1, 2}`, severity `level`.
    LoadOscillation { freq_hz: u8, level: OscLevel },
}

/// Valid load percentages.
pub const LOAD_LEVELS: [u8; 5] = [0, 20, 40, 60, 80];

/// A machine condition at a load level — the label attached to every record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub load_pct: u8,
}

impl FaultSpec {
    /// Builds and validates a condition/load pair.
    pub fn new(kind: FaultKind, load_pct: u8) -> Result<Self> {
        let spec = Self { kind, load_pct };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FaultKind::Healthy => {}
            FaultKind::BrokenBars { bars } => {
                if !(1..=3).contains(&bars) {
                    return Err(Error::InvalidSpec(format!(
                        "broken-bar count {bars} outside 1..=3"
                    )));
                }
            }
            FaultKind::LoadOscillation { freq_hz, .. } => {
                if freq_hz != 1 && freq_hz != 2 {
                    return Err(Error::InvalidSpec(format!(
                        "load-oscillation frequency {freq_hz} Hz not in {{1, 2}}"
                    )));
                }
            }
        }
        if !LOAD_LEVELS.contains(&self.load_pct) {
            return Err(Error::InvalidSpec(format!(
                "load {} % not one of {:?}",
                self.load_pct, LOAD_LEVELS
            )));
        }
        Ok(())
    }

    /// Short condition tag: `HM`, `1BB`..`3BB`, `SS_1_A`..`SS_2_B`.
    pub fn tag(&self) -> String {
        match self.kind {
            FaultKind::Healthy => "HM".to_string(),
            FaultKind::BrokenBars { bars } => format!("{bars}BB"),
            FaultKind::LoadOscillation { freq_hz, level } => {
                format!("SS_{freq_hz}_{}", level.as_str())
            }
        }
    }

    /// Parses a condition tag back into its kind.
    pub fn kind_from_tag(tag: &str) -> Result<FaultKind> {
        match tag {
            "HM" => Ok(FaultKind::Healthy),
            "1BB" => Ok(FaultKind::BrokenBars { bars: 1 }),
            "2BB" => Ok(FaultKind::BrokenBars { bars: 2 }),
            "3BB" => Ok(FaultKind::BrokenBars { bars: 3 }),
            "SS_1_A" => Ok(FaultKind::LoadOscillation {
                freq_hz: 1,
                level: OscLevel::A,
            }),
            "SS_1_B" => Ok(FaultKind::LoadOscillation {
                freq_hz: 1,
                level: OscLevel::B,
            }),
            "SS_2_A" => Ok(FaultKind::LoadOscillation {
                freq_hz: 2,
                level: OscLevel::A,
            }),
            "SS_2_B" => Ok(FaultKind::LoadOscillation {
                freq_hz: 2,
                level: OscLevel::B,
            }),
            other => Err(Error::UnknownConditionTag(other.to_string())),
        }
    }
}

/// Which measured quantity a record holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalChannel {
    CurrentPhase1,
    CurrentPhase2,
    LineVoltage1,
    LineVoltage2,
    Iap,
}

impl SignalChannel {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalChannel::CurrentPhase1 => "current1",
            SignalChannel::CurrentPhase2 => "current2",
            SignalChannel::LineVoltage1 => "voltage1",
            SignalChannel::LineVoltage2 => "voltage2",
            SignalChannel::Iap => "iap",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "current1" => Ok(SignalChannel::CurrentPhase1),
            "current2" => Ok(SignalChannel::CurrentPhase2),
            "voltage1" => Ok(SignalChannel::LineVoltage1),
            "voltage2" => Ok(SignalChannel::LineVoltage2),
            "iap" => Ok(SignalChannel::Iap),
            other => Err(Error::UnknownConditionTag(format!("channel {other}"))),
        }
    }

    /// True for either current phase.
    pub fn is_current(self) -> bool {
        matches!(
            self,
            SignalChannel::CurrentPhase1 | SignalChannel::CurrentPhase2
        )
    }
}

/// One labeled measurement: condition, channel, sampling rate, samples and
/// the seed its noise was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub condition: FaultSpec,
    pub channel: SignalChannel,
    pub fs_hz: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl SignalRecord {
    /// Builds a record, rejecting empty or non-finite sample data.
    pub fn new(
        condition: FaultSpec,
        channel: SignalChannel,
        fs_hz: f64,
        samples: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (j, v) in samples.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row: 0, col: j });
            }
        }
        Ok(Self {
            condition,
            channel,
            fs_hz,
            samples,
            seed,
        })
    }

    /// The record's condition tag (`HM`, `1BB`, …).
    pub fn condition_tag(&self) -> String {
        self.condition.tag()
    }
}

/// Derives a per-record seed from the master seed and the record identity.
///
/// FNV-1a over the identity bytes; stable across runs and platforms.
pub fn derive_seed(master: u64, tag: &str, load_pct: u8, rep: u32, role: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&master.to_le_bytes());
    eat(tag.as_bytes());
    eat(&[0xff, load_pct]);
    eat(&rep.to_le_bytes());
    eat(role.as_bytes());
    h
}

fn add_noise(samples: &mut [f64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in samples.iter_mut() {
        let n: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * n;
    }
}

/// Synthesizes one stator-current record with an explicit noise level
/// (relative to the load-scaled amplitude; `0.0` gives a noise-free record).
pub fn gen_current_with(
    motor: &MotorSpec,
    fault: &FaultSpec,
    phase: usize,
    seed: u64,
    noise_rel: f64,
) -> Result<SignalRecord> {
    motor.validated()?;
    fault.validate()?;
    if phase >= 2 {
        return Err(Error::InvalidSpec(format!("phase index {phase} not 0 or 1")));
    }
    let a = motor.amp_at_load(fault.load_pct);
    let w = 2.0 * PI * motor.rated_freq_hz;
    let beta = CURRENT_PHASE[phase];
    let s = motor.slip();
    let mut x = Vec::with_capacity(motor.n_samples);
    match fault.kind {
        FaultKind::Healthy => {
            for i in 0..motor.n_samples {
                let t = i as f64 / motor.fs_hz;
                x.push(a * (w * t + beta).sin());
            }
        }
        FaultKind::BrokenBars { bars } => {
            // Sideband amplitudes are absolute (in units of the base current
            // amplitude), not load-scaled: the severity knob is the bar
            // count, while load only moves the carrier.
            let a1 = BB_SIDEBAND_PER_BAR * bars as f64 * motor.current_amp;
            let amps = [a1, a1 / 3.0];
            for i in 0..motor.n_samples {
                let t = i as f64 / motor.fs_hz;
                let mut v = a * (w * t + beta).sin();
                for (k, &ak) in amps.iter().enumerate() {
                    let off = 2.0 * (k + 1) as f64 * s;
                    v += ak * ((1.0 - off) * w * t + beta).sin();
                    v += ak * ((1.0 + off) * w * t + beta).sin();
                }
                x.push(v);
            }
        }
        FaultKind::LoadOscillation { freq_hz, level } => {
            let m = level.depth();
            let wo = 2.0 * PI * freq_hz as f64;
            // Cosine modulation: over a window much shorter than the
            // oscillation period the envelope then departs quadratically
            // (∝ m·f²) rather than linearly (∝ m·f), which keeps the
            // 1 Hz and 2 Hz severity ladders from interleaving downstream.
            for i in 0..motor.n_samples {
                let t = i as f64 / motor.fs_hz;
                x.push(a * (1.0 + m * (wo * t).cos()) * (w * t + beta).sin());
            }
        }
    }
    add_noise(&mut x, noise_rel * a, seed);
    let channel = if phase == 0 {
        SignalChannel::CurrentPhase1
    } else {
        SignalChannel::CurrentPhase2
    };
    SignalRecord::new(*fault, channel, motor.fs_hz, x, seed)
}

/// Synthesizes one stator-current record at the default noise level.
pub fn gen_current(
    motor: &MotorSpec,
    fault: &FaultSpec,
    phase: usize,
    seed: u64,
) -> Result<SignalRecord> {
    gen_current_with(motor, fault, phase, seed, DEFAULT_NOISE_REL)
}

/// Synthesizes one line-voltage record with an explicit noise level.
///
/// The supply is condition-independent, so the record is labeled healthy at
/// zero load; consumers combining it into IAP take labels from the currents.
pub fn gen_line_voltage_with(
    motor: &MotorSpec,
    phase_pair: usize,
    seed: u64,
    noise_rel: f64,
) -> Result<SignalRecord> {
    motor.validated()?;
    if phase_pair >= 2 {
        return Err(Error::InvalidSpec(format!(
            "phase pair index {phase_pair} not 0 or 1"
        )));
    }
    let w = 2.0 * PI * motor.rated_freq_hz;
    let alpha = VOLTAGE_PHASE[phase_pair];
    let mut x = Vec::with_capacity(motor.n_samples);
    for i in 0..motor.n_samples {
        let t = i as f64 / motor.fs_hz;
        x.push(LINE_VOLTAGE_AMP * (w * t + alpha).sin());
    }
    add_noise(&mut x, noise_rel * LINE_VOLTAGE_AMP, seed);
    let channel = if phase_pair == 0 {
        SignalChannel::LineVoltage1
    } else {
        SignalChannel::LineVoltage2
    };
    let label = FaultSpec {
        kind: FaultKind::Healthy,
        load_pct: 0,
    };
    SignalRecord::new(label, channel, motor.fs_hz, x, seed)
}

/// Synthesizes one line-voltage record at the default noise level.
pub fn gen_line_voltage(motor: &MotorSpec, phase_pair: usize, seed: u64) -> Result<SignalRecord> {
    gen_line_voltage_with(motor, phase_pair, seed, DEFAULT_NOISE_REL)
}

/// Two-wattmeter instantaneous active power: `p = v₁·i₁ + v₂·i₂`.
///
/// The result inherits condition, load and seed from the phase-1 current.
pub fn compute_iap(
    i1: &SignalRecord,
    i2: &SignalRecord,
    v1: &SignalRecord,
    v2: &SignalRecord,
) -> Result<SignalRecord> {
    let n = i1.samples.len();
    let fs = i1.fs_hz;
    for r in [i2, v1, v2] {
        if r.samples.len() != n || r.fs_hz != fs {
            return Err(Error::RecordMismatch);
        }
    }
    let mut p = Vec::with_capacity(n);
    for j in 0..n {
        p.push(v1.samples[j] * i1.samples[j] + v2.samples[j] * i2.samples[j]);
    }
    SignalRecord::new(i1.condition, SignalChannel::Iap, fs, p, i1.seed)
}

/// One corpus entry: a condition/load pair and how many repetitions of it to
/// generate.
pub type ManifestEntry = (FaultSpec, u32);

/// The default corpus layout: 10 healthy repetitions per load level, and
/// 2 repetitions per load level for each of the seven fault conditions —
/// 120 current records, with IAP for the 70 faulty ones.
pub fn default_manifest() -> Vec<ManifestEntry> {
    let mut entries = Vec::new();
    for &load in &LOAD_LEVELS {
        entries.push((
            FaultSpec {
                kind: FaultKind::Healthy,
                load_pct: load,
            },
            10,
        ));
    }
    let faulty = [
        FaultKind::BrokenBars { bars: 1 },
        FaultKind::BrokenBars { bars: 2 },
        FaultKind::BrokenBars { bars: 3 },
        FaultKind::LoadOscillation {
            freq_hz: 1,
            level: OscLevel::A,
        },
        FaultKind::LoadOscillation {
            freq_hz: 1,
            level: OscLevel::B,
        },
        FaultKind::LoadOscillation {
            freq_hz: 2,
            level: OscLevel::A,
        },
        FaultKind::LoadOscillation {
            freq_hz: 2,
            level: OscLevel::B,
        },
    ];
    for kind in faulty {
        for &load in &LOAD_LEVELS {
            entries.push((
                FaultSpec {
                    kind,
                    load_pct: load,
                },
                2,
            ));
        }
    }
    entries
}

/// Generates a corpus from a manifest.
///
/// Every entry yields a phase-1 current record per repetition; faulty
/// entries additionally yield the IAP record computed from both phase
/// currents and both line voltages. Per-record seeds come from
/// [`derive_seed`], so the output is independent of entry order.
pub fn gen_corpus(
    motor: &MotorSpec,
    manifest: &[ManifestEntry],
    master_seed: u64,
) -> Result<Vec<SignalRecord>> {
    let mut records = Vec::new();
    for (fault, reps) in manifest {
        fault.validate()?;
        let tag = fault.tag();
        for rep in 0..*reps {
            let seed_i1 = derive_seed(master_seed, &tag, fault.load_pct, rep, "i1");
            let i1 = gen_current(motor, fault, 0, seed_i1)?;
            if fault.kind == FaultKind::Healthy {
                records.push(i1);
                continue;
            }
            let i2 = gen_current(
                motor,
                fault,
                1,
                derive_seed(master_seed, &tag, fault.load_pct, rep, "i2"),
            )?;
            let v1 = gen_line_voltage(
                motor,
                0,
                derive_seed(master_seed, &tag, fault.load_pct, rep, "v1"),
            )?;
            let v2 = gen_line_voltage(
                motor,
                1,
                derive_seed(master_seed, &tag, fault.load_pct, rep, "v2"),
            )?;
            let mut iap = compute_iap(&i1, &i2, &v1, &v2)?;
            // Give the derived record its own identity seed so every corpus
            // entry is addressable by a unique seed in manifests.
            iap.seed = derive_seed(master_seed, &tag, fault.load_pct, rep, "iap");
            records.push(i1);
            records.push(iap);
        }
    }
    Ok(records)
}

/// Generates the default 120-current / 70-IAP corpus.
pub fn gen_default_corpus(master_seed: u64) -> Result<Vec<SignalRecord>> {
    gen_corpus(&MotorSpec::default(), &default_manifest(), master_seed)
}
