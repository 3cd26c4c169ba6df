//! Frame layout of component sequences.
//!
//! `n` sequences of length `t` are viewed as `t` frames of `n` slots: frame
//! `f` holds the `f`-th component of every instance, and slot `j` across
//! frames `0..t` is instance `j` in reading order. Instances come straight
//! out of the slots, so no grouping or ordering step is needed.

use alloc::vec::Vec;

use crate::geometry::{assemble, ComponentQuad, ComponentSequence, Polygon};
use crate::{math, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEntry {
    pub quad: ComponentQuad,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    t: usize,
    n: usize,
    /// Frame-major: entry `(f, j)` at `f * n + j`.
    entries: Vec<FrameEntry>,
}

impl FrameGrid {
    /// Number of frames (sequence length).
    #[inline]
    pub fn frames(&self) -> usize {
        self.t
    }

    /// Number of slots per frame (instances).
    #[inline]
    pub fn slots(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, frame: usize, slot: usize) -> &FrameEntry {
        &self.entries[frame * self.n + slot]
    }

    /// All `n` entries of one frame.
    pub fn frame(&self, frame: usize) -> &[FrameEntry] {
        &self.entries[frame * self.n..(frame + 1) * self.n]
    }

    /// Slot `j` in temporal order.
    pub fn slot(&self, slot: usize) -> impl Iterator<Item = &FrameEntry> + '_ {
        (0..self.t).map(move |f| self.get(f, slot))
    }

    /// Total entry count `n * t`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Transposes scored sequences into frames.
pub fn to_frames(sequences: &[ComponentSequence]) -> Result<FrameGrid> {
    let first = sequences.first().ok_or_else(|| Error::pre("no sequences to lay out"))?;
    let t = first.len();
    let n = sequences.len();
    if sequences.iter().any(|s| s.len() != t) {
        return Err(Error::pre("all sequences must share the same length"));
    }
    let mut entries = Vec::with_capacity(n * t);
    for f in 0..t {
        for seq in sequences {
            let scores = seq.scores().ok_or_else(|| Error::pre("sequences must carry scores"))?;
            entries.push(FrameEntry { quad: seq.quads()[f], score: scores[f] });
        }
    }
    Ok(FrameGrid { t, n, entries })
}

/// Inverse of [`to_frames`]: one scored sequence per slot.
pub fn frames_to_sequences(grid: &FrameGrid) -> Vec<ComponentSequence> {
    (0..grid.n)
        .map(|j| {
            let (quads, scores) = grid.slot(j).map(|e| (e.quad, e.score)).unzip();
            ComponentSequence::prediction(quads, scores).expect("grid entries come from valid sequences")
        })
        .collect()
}

/// How per-frame scores combine into an instance score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreAggregation {
    #[default]
    Mean,
    Min,
    GeometricMean,
}

impl ScoreAggregation {
    pub fn apply(self, scores: &[f64]) -> f64 {
        if scores.is_empty() {
            return 0.0;
        }
        match self {
            ScoreAggregation::Mean => scores.iter().sum::<f64>() / scores.len() as f64,
            ScoreAggregation::Min => scores.iter().copied().fold(f64::INFINITY, f64::min),
            ScoreAggregation::GeometricMean => {
                if scores.iter().any(|&s| s <= 0.0) {
                    0.0
                } else {
                    libm::exp(scores.iter().map(|&s| math::ln(s)).sum::<f64>() / scores.len() as f64)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDecodeConfig {
    pub score_threshold: f64,
    pub aggregation: ScoreAggregation,
}

impl Default for FrameDecodeConfig {
    fn default() -> Self {
        Self { score_threshold: 0.5, aggregation: ScoreAggregation::Mean }
    }
}

/// A decoded text instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstancePrediction {
    /// Slot index the instance came from.
    pub slot: usize,
    pub polygon: Polygon,
    pub score: f64,
}

/// Assembles every slot into an outline, scores it, and drops slots below
/// the threshold. Output follows slot order.
pub fn from_frames(grid: &FrameGrid, cfg: &FrameDecodeConfig) -> Result<Vec<InstancePrediction>> {
    if !(0.0..=1.0).contains(&cfg.score_threshold) {
        return Err(Error::pre("score threshold must lie in [0, 1]"));
    }
    let mut out = Vec::new();
    let mut scores = Vec::with_capacity(grid.t);
    for (slot, seq) in frames_to_sequences(grid).into_iter().enumerate() {
        scores.clear();
        scores.extend(seq.scores().unwrap_or_default());
        let score = cfg.aggregation.apply(&scores);
        if score >= cfg.score_threshold {
            out.push(InstancePrediction { slot, polygon: assemble(&seq), score });
        }
    }
    Ok(out)
}
