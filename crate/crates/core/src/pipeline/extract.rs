use serde::{Deserialize, Serialize};

use super::{find_rpeaks, normalize, resample, window_10s, TARGET_FS, WINDOW_LEN};
use crate::beat::{Beat, BeatSource, BEAT_LEN};
use crate::wfdb::{map_to_aami, AamiMapping, Annotation, Record};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Lead to extract; falls back to channel 0 when absent.
    pub lead: String,
    pub rpeak_threshold: f64,
    /// Segment length as a multiple of the nominal period.
    pub segment_factor: f64,
    /// Max distance in seconds between a detected peak and its annotation.
    pub label_tolerance_s: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lead: "MLII".into(),
            rpeak_threshold: super::RPEAK_THRESHOLD,
            segment_factor: 1.2,
            label_tolerance_s: 0.15,
        }
    }
}

/// How detected peaks get class labels.
#[derive(Debug, Clone)]
pub enum BeatLabeler {
    /// Nearest beat annotation within the tolerance, mapped to AAMI classes.
    /// Entries are (time in seconds, class index), sorted by time.
    Annotations(Vec<(f64, usize)>),
    /// Every beat of the record gets the same class (record-level diagnosis).
    Fixed(usize),
}

impl BeatLabeler {
    /// Builds an annotation labeler; non-beat annotations are discarded.
    pub fn from_annotations(anns: &[Annotation], fs_src: f64) -> Self {
        let mut marks: Vec<(f64, usize)> = anns
            .iter()
            .filter_map(|a| match map_to_aami(&a.symbol) {
                AamiMapping::Class(c) => Some((a.sample_index as f64 / fs_src, c.index())),
                AamiMapping::Skip => None,
            })
            .collect();
        marks.sort_by(|a, b| a.0.total_cmp(&b.0));
        BeatLabeler::Annotations(marks)
    }

    fn label_at(&self, t: f64, tolerance: f64) -> Option<usize> {
        match self {
            BeatLabeler::Fixed(c) => Some(*c),
            BeatLabeler::Annotations(marks) => {
                let i = marks.partition_point(|m| m.0 < t);
                let before = i.checked_sub(1).map(|j| marks[j]);
                let after = marks.get(i).copied();
                let nearest = match (before, after) {
                    (Some(b), Some(a)) => {
                        if t - b.0 <= a.0 - t {
                            b
                        } else {
                            a
                        }
                    }
                    (Some(m), None) | (None, Some(m)) => m,
                    (None, None) => return None,
                };
                ((nearest.0 - t).abs() <= tolerance).then_some(nearest.1)
            }
        }
    }
}

/// Identifies a window within its record.
#[derive(Debug, Clone)]
pub struct WindowContext<'a> {
    pub record: &'a str,
    pub window_index: usize,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Segments one normalized 125 Hz window into fixed-length beats.
///
/// The nominal period T is the median R-R interval of the window. Each beat
/// starts at its R-peak, spans `floor(factor * T)` samples (clipped to the
/// window end and to 178), and is zero-padded to 178. Windows with fewer than
/// two peaks and peaks without a matching label yield nothing.
pub fn extract_beats(
    window: &[f64],
    rpeaks: &[usize],
    labeler: &BeatLabeler,
    ctx: &WindowContext<'_>,
    cfg: &PipelineConfig,
) -> Vec<Beat> {
    if rpeaks.len() < 2 {
        return Vec::new();
    }
    let mut rr: Vec<f64> = rpeaks.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let t_beat = median(&mut rr);
    let seg_len = ((cfg.segment_factor * t_beat).floor() as usize).min(BEAT_LEN);
    let window_start = ctx.window_index * WINDOW_LEN;

    rpeaks
        .iter()
        .enumerate()
        .filter_map(|(peak_idx, &r)| {
            let t = (window_start + r) as f64 / TARGET_FS;
            let label = labeler.label_at(t, cfg.label_tolerance_s)?;
            let end = (r + seg_len).min(window.len());
            let mut samples = vec![0.0; BEAT_LEN];
            samples[..end - r].copy_from_slice(&window[r..end]);
            let source = BeatSource {
                record: ctx.record.to_string(),
                window: ctx.window_index,
                peak: peak_idx,
            };
            Beat::new(samples, label, Some(t_beat), source).ok()
        })
        .collect()
}

/// Counters from running the pipeline over a record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub windows: usize,
    pub degenerate_windows: usize,
    pub peaks: usize,
    pub unlabeled_peaks: usize,
    pub beats: usize,
}

impl ExtractStats {
    pub fn merge(&mut self, other: &ExtractStats) {
        self.windows += other.windows;
        self.degenerate_windows += other.degenerate_windows;
        self.peaks += other.peaks;
        self.unlabeled_peaks += other.unlabeled_peaks;
        self.beats += other.beats;
    }
}

/// Full pipeline over one record's configured lead.
pub fn extract_record(
    record: &Record,
    labeler: &BeatLabeler,
    cfg: &PipelineConfig,
) -> crate::Result<(Vec<Beat>, ExtractStats)> {
    let lead = record.lead(&cfg.lead);
    let signal = resample(lead, record.sampling_rate(), TARGET_FS)?;
    let mut stats = ExtractStats::default();
    let mut beats = Vec::new();
    for (w, window) in window_10s(&signal).into_iter().enumerate() {
        stats.windows += 1;
        let norm = normalize(window);
        if norm.degenerate {
            stats.degenerate_windows += 1;
            continue;
        }
        let peaks = find_rpeaks(&norm.samples, cfg.rpeak_threshold);
        stats.peaks += peaks.len();
        let ctx = WindowContext {
            record: record.name(),
            window_index: w,
        };
        let got = extract_beats(&norm.samples, &peaks, labeler, &ctx, cfg);
        if peaks.len() >= 2 {
            stats.unlabeled_peaks += peaks.len() - got.len();
        }
        beats.extend(got);
    }
    stats.beats = beats.len();
    Ok((beats, stats))
}
