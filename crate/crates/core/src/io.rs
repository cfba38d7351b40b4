//! Plain-text corpus and embedding files, plus scatter-plot emission.
//!
//! Formats:
//!
//! - **Signal file**: `#`-prefixed header lines (`fs=`, `condition=`,
//!   `load=`, `channel=`, `seed=`, `samples=`), then one sample per line in
//!   scientific notation with 17 significant digits, which round-trips every
//!   finite `f64` bit-exactly.
//! - **Corpus directory**: one `record_NNN.txt` per record plus a
//!   `manifest.txt` naming each file with its metadata; loading follows the
//!   manifest order when present and falls back to sorted `*.txt` files.
//! - **Embedding export**: JSON or a `#`-headed delimited table; both carry
//!   method, parameters, labels and coordinates, and both round-trip through
//!   [`import_embedding`] without precision loss.
//! - **Plot**: a self-contained SVG scatter; color encodes the condition
//!   tag, marker shape encodes the load level, one `class="marker"` element
//!   per embedded point.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{DataKind, EmbedMethod, EmbedParams, EmbeddingResult, PointLabel};
use crate::synth::{FaultSpec, SignalChannel, SignalRecord};

/// File name of the corpus index written next to the record files.
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Which text flavor an embedding export uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Table,
}

impl ExportFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Table => "table",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "table" => Ok(ExportFormat::Table),
            other => Err(Error::Parse {
                path: String::new(),
                reason: format!("unknown export format `{other}` (expected json or table)"),
            }),
        }
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------------------
// signal records
// ---------------------------------------------------------------------------

/// Serializes one record into the signal file format.
fn record_text(record: &SignalRecord) -> String {
    let mut out = String::with_capacity(record.samples.len() * 26 + 128);
    let _ = writeln!(out, "# fs={}", record.fs_hz);
    let _ = writeln!(out, "# condition={}", record.condition_tag());
    let _ = writeln!(out, "# load={}", record.condition.load_pct);
    let _ = writeln!(out, "# channel={}", record.channel.as_str());
    let _ = writeln!(out, "# seed={}", record.seed);
    let _ = writeln!(out, "# samples={}", record.samples.len());
    for v in &record.samples {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

/// Writes one record as a signal file.
pub fn save_record(record: &SignalRecord, path: &Path) -> Result<()> {
    fs::write(path, record_text(record))?;
    Ok(())
}

/// Reads one signal file back into a record.
pub fn load_record(path: &Path) -> Result<SignalRecord> {
    let text = fs::read_to_string(path)?;
    let mut fs_hz: Option<f64> = None;
    let mut condition: Option<String> = None;
    let mut load: Option<u8> = None;
    let mut channel: Option<SignalChannel> = None;
    let mut seed: Option<u64> = None;
    let mut declared: Option<usize> = None;
    let mut samples = Vec::new();

    let malformed = |reason: &str| Error::MalformedHeader {
        path: path_str(path),
        reason: reason.to_string(),
    };

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| malformed(&format!("header line `{rest}` has no `=`")))?;
            let value = value.trim();
            match key.trim() {
                "fs" => {
                    fs_hz = Some(
                        value
                            .parse()
                            .map_err(|_| malformed(&format!("bad fs value `{value}`")))?,
                    );
                }
                "condition" => condition = Some(value.to_string()),
                "load" => {
                    load = Some(
                        value
                            .parse()
                            .map_err(|_| malformed(&format!("bad load value `{value}`")))?,
                    );
                }
                "channel" => channel = Some(SignalChannel::from_str(value)?),
                "seed" => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|_| malformed(&format!("bad seed value `{value}`")))?,
                    );
                }
                "samples" => {
                    declared = Some(
                        value
                            .parse()
                            .map_err(|_| malformed(&format!("bad samples value `{value}`")))?,
                    );
                }
                other => return Err(malformed(&format!("unknown header key `{other}`"))),
            }
        } else {
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                path: path_str(path),
                reason: format!("bad sample value `{line}`"),
            })?;
            samples.push(v);
        }
    }

    let fs_hz = fs_hz.ok_or_else(|| malformed("missing fs header"))?;
    let condition = condition.ok_or_else(|| malformed("missing condition header"))?;
    let load = load.ok_or_else(|| malformed("missing load header"))?;
    let channel = channel.ok_or_else(|| malformed("missing channel header"))?;
    let seed = seed.ok_or_else(|| malformed("missing seed header"))?;
    let declared = declared.ok_or_else(|| malformed("missing samples header"))?;
    if samples.len() != declared {
        return Err(Error::SampleCountMismatch {
            path: path_str(path),
            got: samples.len(),
            declared,
        });
    }

    let kind = FaultSpec::kind_from_tag(&condition)?;
    let spec = FaultSpec::new(kind, load)?;
    SignalRecord::new(spec, channel, fs_hz, samples, seed)
}

/// Writes a corpus as one signal file per record plus a manifest.
///
/// Record files are named `record_NNN.txt` in input order; the manifest
/// lists them with their metadata so the corpus reloads in the same order.
pub fn save_corpus(records: &[SignalRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("# corpus manifest: <file> <metadata>\n");
    for (i, record) in records.iter().enumerate() {
        let name = format!("record_{i:03}.txt");
        save_record(record, &dir.join(&name))?;
        let _ = writeln!(
            manifest,
            "{name}\tcondition={}\tload={}\tchannel={}\tseed={}\tsamples={}",
            record.condition_tag(),
            record.condition.load_pct,
            record.channel.as_str(),
            record.seed,
            record.samples.len(),
        );
    }
    fs::write(dir.join(MANIFEST_FILE), manifest)?;
    Ok(())
}

/// Loads every record of a corpus directory.
///
/// Follows `manifest.txt` order when the manifest exists; otherwise loads
/// all `*.txt` files in name order. An empty directory is an empty corpus,
/// not an error.
pub fn load_corpus(dir: &Path) -> Result<Vec<SignalRecord>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut paths: Vec<PathBuf> = Vec::new();
    if manifest_path.is_file() {
        let text = fs::read_to_string(&manifest_path)?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let name = line.split_whitespace().next().ok_or_else(|| Error::Parse {
                path: path_str(&manifest_path),
                reason: "manifest line without a file name".to_string(),
            })?;
            paths.push(dir.join(name));
        }
    } else {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let is_txt = path.extension().is_some_and(|e| e == "txt");
            let is_manifest = path.file_name().is_some_and(|n| n == MANIFEST_FILE);
            if path.is_file() && is_txt && !is_manifest {
                paths.push(path);
            }
        }
        paths.sort();
    }
    paths.iter().map(|p| load_record(p)).collect()
}

// ---------------------------------------------------------------------------
// embedding export / import
// ---------------------------------------------------------------------------

/// Writes an embedding in the chosen flavor; both flavors round-trip through
/// [`import_embedding`] with no precision loss.
pub fn export_embedding(
    result: &EmbeddingResult,
    path: &Path,
    format: ExportFormat,
) -> Result<()> {
    result.validate()?;
    let text = match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(result).map_err(|e| Error::Parse {
                path: path_str(path),
                reason: e.to_string(),
            })?;
            s.push('\n');
            s
        }
        ExportFormat::Table => {
            let params = serde_json::to_string(&result.params).map_err(|e| Error::Parse {
                path: path_str(path),
                reason: e.to_string(),
            })?;
            let mut out = String::new();
            let _ = writeln!(out, "# method={}", result.method.as_str());
            let _ = writeln!(out, "# data_kind={}", result.data_kind.as_str());
            let _ = writeln!(out, "# channel={}", result.channel.as_str());
            let _ = writeln!(out, "# params={params}");
            let _ = writeln!(out, "# columns=condition\tload\tcoordinates…");
            for (label, coord) in result.labels.iter().zip(&result.coords) {
                let _ = write!(out, "{}\t{}", label.condition, label.load_pct);
                for v in coord {
                    let _ = write!(out, "\t{v:.16e}");
                }
                out.push('\n');
            }
            out
        }
    };
    fs::write(path, text)?;
    Ok(())
}

/// Reads an embedding export of either flavor (sniffed from the content).
pub fn import_embedding(path: &Path) -> Result<EmbeddingResult> {
    let text = fs::read_to_string(path)?;
    let result = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path_str(path),
            reason: e.to_string(),
        })?
    } else {
        import_table(&text, path)?
    };
    result.validate()?;
    Ok(result)
}

fn import_table(text: &str, path: &Path) -> Result<EmbeddingResult> {
    let malformed = |reason: String| Error::MalformedHeader {
        path: path_str(path),
        reason,
    };
    let mut method: Option<EmbedMethod> = None;
    let mut data_kind: Option<DataKind> = None;
    let mut channel_str: Option<String> = None;
    let mut params: Option<EmbedParams> = None;
    let mut labels = Vec::new();
    let mut coords = Vec::new();

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            let Some((key, value)) = rest.split_once('=') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "method" => method = Some(EmbedMethod::from_str(value)?),
                "data_kind" => data_kind = Some(DataKind::from_str(value)?),
                "channel" => channel_str = Some(value.to_string()),
                "params" => {
                    params = Some(serde_json::from_str(value).map_err(|e| Error::Parse {
                        path: path_str(path),
                        reason: format!("bad params: {e}"),
                    })?);
                }
                _ => {}
            }
        } else {
            let mut fields = line.split('\t');
            let condition = fields
                .next()
                .ok_or_else(|| malformed("empty data row".to_string()))?
                .to_string();
            let load_pct: u8 = fields
                .next()
                .ok_or_else(|| malformed("data row without load".to_string()))?
                .parse()
                .map_err(|_| Error::Parse {
                    path: path_str(path),
                    reason: "bad load in data row".to_string(),
                })?;
            let coord: Vec<f64> = fields
                .map(|f| {
                    f.parse().map_err(|_| Error::Parse {
                        path: path_str(path),
                        reason: format!("bad coordinate `{f}`"),
                    })
                })
                .collect::<Result<_>>()?;
            labels.push(PointLabel {
                condition,
                load_pct,
            });
            coords.push(coord);
        }
    }

    let channel_str = channel_str.ok_or_else(|| malformed("missing channel".to_string()))?;
    let channel = match channel_str.as_str() {
        "current" => crate::pipeline::ChannelClass::Current,
        "iap" => crate::pipeline::ChannelClass::Iap,
        other => return Err(malformed(format!("unknown channel `{other}`"))),
    };
    Ok(EmbeddingResult {
        method: method.ok_or_else(|| malformed("missing method".to_string()))?,
        params: params.ok_or_else(|| malformed("missing params".to_string()))?,
        data_kind: data_kind.ok_or_else(|| malformed("missing data_kind".to_string()))?,
        channel,
        labels,
        coords,
    })
}

// ---------------------------------------------------------------------------
// plotting
// ---------------------------------------------------------------------------

/// Fill color per condition tag: blue for healthy, a warm ramp for broken
/// bars, greens for 1 Hz oscillation, purples for 2 Hz.
fn condition_color(tag: &str) -> &'static str {
    match tag {
        "HM" => "#1f77b4",
        "1BB" => "#ffbb55",
        "2BB" => "#ff7f0e",
        "3BB" => "#d62728",
        "SS_1_A" => "#2ca02c",
        "SS_1_B" => "#145214",
        "SS_2_A" => "#9467bd",
        "SS_2_B" => "#4b2070",
        _ => "#7f7f7f",
    }
}

/// One marker element at (x, y); the shape encodes the load level.
fn marker_svg(x: f64, y: f64, load_pct: u8, color: &str, tooltip: &str) -> String {
    let t = format!("<title>{tooltip}</title>");
    let common = format!("class=\"marker\" fill=\"{color}\" stroke=\"#333333\" stroke-width=\"0.6\"");
    match load_pct {
        0 => format!("<circle {common} cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4.2\">{t}</circle>"),
        20 => format!(
            "<rect {common} x=\"{:.2}\" y=\"{:.2}\" width=\"7.6\" height=\"7.6\">{t}</rect>",
            x - 3.8,
            y - 3.8
        ),
        40 => format!(
            "<polygon {common} points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\">{t}</polygon>",
            x,
            y - 4.6,
            x - 4.3,
            y + 3.6,
            x + 4.3,
            y + 3.6
        ),
        60 => format!(
            "<polygon {common} points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\">{t}</polygon>",
            x,
            y - 5.0,
            x + 5.0,
            y,
            x,
            y + 5.0,
            x - 5.0,
            y
        ),
        _ => format!(
            "<path {common} d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\" stroke=\"{color}\" stroke-width=\"2.2\">{t}</path>",
            x - 3.8,
            y - 3.8,
            x + 3.8,
            y + 3.8,
            x - 3.8,
            y + 3.8,
            x + 3.8,
            y - 3.8
        ),
    }
}

fn axis_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span == 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo - 0.06 * span, hi + 0.06 * span)
    }
}

/// Renders the embedding as a self-contained SVG scatter plot.
///
/// The first two coordinates are plotted (a 1-D embedding gets y = 0); color
/// encodes the condition tag, marker shape the load level, and every point
/// is one `class="marker"` element, so structured consumers can count them.
pub fn plot_embedding(result: &EmbeddingResult, path: &Path) -> Result<()> {
    if result.is_empty() {
        return Err(Error::EmptyResult);
    }
    result.validate()?;

    const W: f64 = 900.0;
    const H: f64 = 620.0;
    const L: f64 = 76.0;
    const R: f64 = 700.0;
    const T: f64 = 56.0;
    const B: f64 = 552.0;

    let xs = |c: &Vec<f64>| c[0];
    let ys = |c: &Vec<f64>| c.get(1).copied().unwrap_or(0.0);
    let (x_lo, x_hi) = axis_bounds(result.coords.iter().map(xs));
    let (y_lo, y_hi) = axis_bounds(result.coords.iter().map(ys));
    let sx = |v: f64| L + (v - x_lo) / (x_hi - x_lo) * (R - L);
    let sy = |v: f64| B - (v - y_lo) / (y_hi - y_lo) * (B - T);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"17\">{} embedding \
         of {} {}s</text>",
        (L + R) / 2.0,
        result.method.as_str(),
        result.channel.as_str(),
        result.data_kind.as_str(),
    );

    // Axes with a few labeled ticks.
    let _ = writeln!(
        svg,
        "<rect x=\"{L}\" y=\"{T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#555555\"/>",
        R - L,
        B - T
    );
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{B}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"#555555\"/>\
             <text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\">{fx:.3e}</text>",
            B + 6.0,
            B + 22.0
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{L}\" y2=\"{py:.1}\" stroke=\"#555555\"/>\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{fy:.3e}</text>",
            L - 6.0,
            L - 10.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">component 1</text>",
        (L + R) / 2.0,
        B + 44.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">component 2</text>",
        (T + B) / 2.0,
        (T + B) / 2.0
    );

    // Markers.
    for (label, coord) in result.labels.iter().zip(&result.coords) {
        let color = condition_color(&label.condition);
        let tooltip = format!("{} @ {}%", label.condition, label.load_pct);
        let _ = writeln!(
            svg,
            "{}",
            marker_svg(sx(xs(coord)), sy(ys(coord)), label.load_pct, color, &tooltip)
        );
    }

    // Legends: conditions present (color), loads present (shape).
    let mut tags: Vec<&str> = result.labels.iter().map(|l| l.condition.as_str()).collect();
    tags.sort_unstable();
    tags.dedup();
    let mut loads: Vec<u8> = result.labels.iter().map(|l| l.load_pct).collect();
    loads.sort_unstable();
    loads.dedup();
    let lx = R + 24.0;
    let mut ly = T + 10.0;
    let _ = writeln!(svg, "<text x=\"{lx}\" y=\"{ly}\" font-weight=\"bold\">condition</text>");
    for tag in tags {
        ly += 22.0;
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"5\" fill=\"{}\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 6.0,
            ly - 4.0,
            condition_color(tag),
            lx + 18.0,
            ly,
            tag
        );
    }
    ly += 34.0;
    let _ = writeln!(svg, "<text x=\"{lx}\" y=\"{ly}\" font-weight=\"bold\">load</text>");
    for load in loads {
        ly += 22.0;
        let sample = marker_svg(lx + 6.0, ly - 4.0, load, "#888888", "");
        // Legend swatches are not data markers; drop the marker class.
        let _ = writeln!(svg, "{}", sample.replace("class=\"marker\" ", ""));
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{ly:.1}\">{load}%</text>", lx + 18.0);
    }
    let _ = writeln!(svg, "</svg>");

    fs::write(path, svg)?;
    Ok(())
}
