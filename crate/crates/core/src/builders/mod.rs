//! Threshold-tree construction.
//!
//! The randomized builders ([`build_uniform`], [`build_modified`],
//! [`build_lp`]) only ever see the centers: their signatures take no data
//! points. They keep a set of open leaves, each holding a subset of center
//! indices, and repeatedly draw a cut. A cut that splits several leaves
//! splits all of them at once. Only cuts that split at least one leaf are
//! ever drawn: the reference builders sample directly from the law
//! conditioned on that event and record, through a geometric variate, how
//! many unconditioned draws the plain rejection loop would have spent.
//!
//! [`build_imm_min_cut`] is the deterministic, data-dependent baseline that
//! picks at every node the center-separating cut with the fewest mistakes.

mod imm;
mod reference;

pub use imm::build_imm_min_cut;
pub use reference::{build_lp, build_modified, build_uniform};

use serde::{Deserialize, Serialize};

use crate::model::ThresholdCut;

/// Consecutive discards after which a build gives up.
pub const MAX_CONSECUTIVE_DISCARDS: u64 = 10_000_000;

/// Discarded draws kept verbatim in a [`BuildTrace`]; later ones are only counted.
pub const MAX_TRACED_DISCARDS: usize = 10_000;

/// One sampled cut and what the builder did with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Index of this conditioned draw within the build.
    pub iteration: u64,
    pub cut: ThresholdCut,
    pub accepted: bool,
    /// Leaves split by the cut (zero when discarded).
    pub leaves_split: usize,
    /// `c_max(t)` (or `c'_{p,max}(t)`) when the cut was drawn, if tracked.
    pub c_max: Option<f64>,
    /// Unconditioned draws this conditioned draw stands for.
    pub draws: u64,
}

/// Everything a build did, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildTrace {
    pub events: Vec<TraceEvent>,
    /// Sampled cuts that were accepted.
    pub accepted: usize,
    /// Tree nodes split; always `k - 1` for a finished build.
    pub splits: usize,
    /// Conditioned draws thrown away by the discard rule.
    pub discarded: u64,
    /// Conditioned draws that, through floating-point rounding, split nothing.
    pub resampled: u64,
    /// Unconditioned draws from the full law, accepted ones included.
    pub unconditioned_draws: u64,
    /// `c_max(t)` at the start of every accepted iteration, then the final 0.
    pub c_max: Vec<f64>,
}

impl BuildTrace {
    pub fn accepted_events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.accepted)
    }

    pub(crate) fn record(&mut self, event: TraceEvent) {
        self.unconditioned_draws = self.unconditioned_draws.saturating_add(event.draws);
        if event.accepted {
            self.accepted += 1;
            self.splits += event.leaves_split;
            if let Some(c) = event.c_max {
                self.c_max.push(c);
            }
            self.events.push(event);
        } else {
            self.discarded += 1;
            if self.events.len() < MAX_TRACED_DISCARDS + self.accepted {
                self.events.push(event);
            }
        }
    }

    pub(crate) fn finish(&mut self, tracked: bool) {
        if tracked {
            self.c_max.push(0.0);
        }
    }
}

/// `c_max(t) / k^ell`; overflows of `k^ell` give 0 (never discard).
pub(crate) fn discard_threshold(c_max: f64, k: usize, ell: u32) -> f64 {
    let scale = (k as f64).powi(ell as i32);
    if scale.is_finite() {
        c_max / scale
    } else {
        0.0
    }
}

pub(crate) fn check_ell(ell: u32) -> crate::error::Result<()> {
    if ell >= 4 {
        Ok(())
    } else {
        Err(crate::error::invalid(format!("ell must be at least 4, got {ell}")))
    }
}

/// Every tree builder, by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Uniform,
    Modified,
    Lp,
    Imm,
    FastUniform,
    FastModified,
    FastLp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Self::Uniform,
        Self::Modified,
        Self::Lp,
        Self::Imm,
        Self::FastUniform,
        Self::FastModified,
        Self::FastLp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Modified => "modified",
            Self::Lp => "lp",
            Self::Imm => "imm",
            Self::FastUniform => "fast-uniform",
            Self::FastModified => "fast-modified",
            Self::FastLp => "fast-lp",
        }
    }

    /// Whether the builder needs the data points (only the min-cut baseline does).
    pub fn needs_points(self) -> bool {
        self == Self::Imm
    }

    pub fn is_randomized(self) -> bool {
        self != Self::Imm
    }

    /// Runs the builder. `p` selects the `D_p` law for the `l_p` builders and
    /// the assignment norm for the baseline; the others ignore it.
    pub fn build(
        self,
        centers: &crate::model::CenterSet,
        points: &[crate::model::Point],
        p: f64,
        ell: u32,
        rng: &mut crate::rng::RngStream,
    ) -> crate::error::Result<(crate::model::ThresholdTree, Option<BuildTrace>)> {
        use crate::fast::{build_fast, FastOptions, FastVariant};
        let mut fast = |v| build_fast(centers, v, rng, FastOptions::default());
        let (tree, trace) = match self {
            Self::Uniform => build_uniform(centers, rng)?,
            Self::Modified => build_modified(centers, rng, ell)?,
            Self::Lp => build_lp(centers, p, rng, ell)?,
            Self::Imm => return Ok((build_imm_min_cut(points, centers, p)?, None)),
            Self::FastUniform => fast(FastVariant::Uniform)?,
            Self::FastModified => fast(FastVariant::Modified { ell })?,
            Self::FastLp => fast(FastVariant::Lp { p, ell })?,
        };
        Ok((tree, Some(trace)))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| crate::error::invalid(format!("unknown algorithm {s:?}")))
    }
}
