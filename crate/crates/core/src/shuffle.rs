//! Inter-channel patch shuffling.
//!
//! During training, a fraction of channels is selected per sample, a square
//! patch is cut from each selected channel at one shared spatial location,
//! and the patches are permuted among those channels. The patch arriving
//! from another channel acts as structured noise for the receiving channel.
//! The operator is a permutation of tensor elements, so it conserves the
//! value multiset exactly and its backward pass is the inverse permutation.
//! At inference it is the identity.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Training,
    Inference,
}

/// What gets moved between the selected channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShuffleMode {
    /// Square patches of side `block_size` (clamped to the feature map).
    Patch { block_size: usize },
    /// Entire channels, permuted uniformly.
    WholeChannel,
    /// Entire channels, order reversed instead of permuted.
    WholeChannelReverse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShuffleConfig {
    /// Fraction of channels taking part, in `[0, 1]`.
    pub ch_frac: f64,
    pub mode: ShuffleMode,
}

impl ShuffleConfig {
    pub fn new(ch_frac: f64, mode: ShuffleMode) -> Result<Self> {
        let cfg = ShuffleConfig { ch_frac, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ch_frac) || self.ch_frac.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "ch_frac must be in [0, 1], got {}",
                self.ch_frac
            )));
        }
        if let ShuffleMode::Patch { block_size } = self.mode {
            if block_size == 0 {
                return Err(Error::InvalidArgument("block_size must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Spatial support of one shuffle event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanRegion {
    /// Square window: all moved patches share this origin and side.
    Window { row: usize, col: usize, size: usize },
    /// The full `H×W` extent: channels are reindexed wholesale.
    FullChannel,
}

/// A fully materialized, invertible record of one shuffle event.
///
/// `channels` is sorted ascending; `perm` is a bijection on `[0, k)`.
/// Position `t` receives the patch of `channels[perm[t]]`. A plan with
/// fewer than two channels applies as the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShufflePlan {
    channels: Vec<usize>,
    region: PlanRegion,
    perm: Vec<usize>,
}

impl ShufflePlan {
    /// Identity plan (sampled when `floor(ch_frac·C) < 2`).
    pub fn empty() -> Self {
        ShufflePlan {
            channels: Vec::new(),
            region: PlanRegion::Window {
                row: 0,
                col: 0,
                size: 0,
            },
            perm: Vec::new(),
        }
    }

    pub fn new(channels: Vec<usize>, region: PlanRegion, perm: Vec<usize>) -> Result<Self> {
        let k = channels.len();
        if perm.len() != k {
            return Err(Error::Plan(format!(
                "permutation length {} != channel count {k}",
                perm.len()
            )));
        }
        if channels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Plan("channels must be sorted and distinct".into()));
        }
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return Err(Error::Plan("perm is not a bijection on [0, k)".into()));
            }
            seen[p] = true;
        }
        Ok(ShufflePlan {
            channels,
            region,
            perm,
        })
    }

    /// Test hook: builds a plan without the bijection check so negative
    /// controls can exercise the invariant suite.
    #[doc(hidden)]
    pub fn new_unchecked(channels: Vec<usize>, region: PlanRegion, perm: Vec<usize>) -> Self {
        ShufflePlan {
            channels,
            region,
            perm,
        }
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn region(&self) -> PlanRegion {
        self.region
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// True when applying the plan is the identity.
    pub fn is_identity_plan(&self) -> bool {
        self.channels.len() < 2
    }

    /// Same channels and region, inverse permutation.
    pub fn invert(&self) -> ShufflePlan {
        let mut inv = vec![0usize; self.perm.len()];
        for (t, &p) in self.perm.iter().enumerate() {
            inv[p] = t;
        }
        ShufflePlan {
            channels: self.channels.clone(),
            region: self.region,
            perm: inv,
        }
    }

    fn check_against(&self, c: usize, h: usize, w: usize) -> Result<()> {
        if self.perm.len() != self.channels.len() {
            return Err(Error::Plan("perm/channel length mismatch".into()));
        }
        if let Some(&max) = self.channels.last() {
            if max >= c {
                return Err(Error::Plan(format!(
                    "plan channel {max} out of range for {c} channels"
                )));
            }
        }
        if let PlanRegion::Window { row, col, size } = self.region {
            if !self.is_identity_plan() && (row + size > h || col + size > w) {
                return Err(Error::Plan(format!(
                    "window {size}x{size} at ({row}, {col}) exceeds {h}x{w} map"
                )));
            }
        }
        Ok(())
    }
}

/// Number of participating channels: `floor(ch_frac·C)`.
///
/// The tiny epsilon keeps products that are integers in real arithmetic
/// (e.g. 0.6·10) from flooring one short due to binary rounding.
pub fn selected_channel_count(ch_frac: f64, channels: usize) -> usize {
    ((ch_frac * channels as f64) + 1e-9).floor() as usize
}

/// Draws one shuffle event for a `C×H×W` map.
///
/// Degenerate inputs produce the identity plan without consuming any
/// randomness, so disabled shuffling leaves the draw stream untouched.
pub fn sample_plan(
    r: &mut RandomSource,
    c: usize,
    h: usize,
    w: usize,
    cfg: &ShuffleConfig,
) -> ShufflePlan {
    let k = selected_channel_count(cfg.ch_frac, c).min(c);
    if k < 2 {
        return ShufflePlan::empty();
    }
    let channels = r
        .sample_distinct(k, c)
        .expect("k <= c by construction");
    let (region, perm) = match cfg.mode {
        ShuffleMode::Patch { block_size } => {
            let size = block_size.min(h).min(w);
            let row = r.index(h - size + 1);
            let col = r.index(w - size + 1);
            (PlanRegion::Window { row, col, size }, r.permutation(k))
        }
        ShuffleMode::WholeChannel => (PlanRegion::FullChannel, r.permutation(k)),
        ShuffleMode::WholeChannelReverse => {
            let perm: Vec<usize> = (0..k).rev().collect();
            (PlanRegion::FullChannel, perm)
        }
    };
    ShufflePlan {
        channels,
        region,
        perm,
    }
}

/// Applies a plan to one `C×H×W` map, returning the shuffled copy.
pub fn apply_plan<T: Scalar>(x: &Tensor<T>, plan: &ShufflePlan) -> Result<Tensor<T>> {
    let (c, h, w) = x.dims3()?;
    plan.check_against(c, h, w)?;
    let mut out = x.clone();
    apply_plan_into(x.data(), out.data_mut(), h, w, plan);
    Ok(out)
}

/// Core of [`apply_plan`] on flat `C×H×W` buffers. `dst` must already hold
/// a copy of `src`; only the plan's support is rewritten.
pub(crate) fn apply_plan_into<T: Copy>(
    src: &[T],
    dst: &mut [T],
    h: usize,
    w: usize,
    plan: &ShufflePlan,
) {
    if plan.is_identity_plan() {
        return;
    }
    let map = h * w;
    match plan.region {
        PlanRegion::FullChannel => {
            for (t, &p) in plan.perm.iter().enumerate() {
                let to = plan.channels[t] * map;
                let from = plan.channels[p] * map;
                dst[to..to + map].copy_from_slice(&src[from..from + map]);
            }
        }
        PlanRegion::Window { row, col, size } => {
            for (t, &p) in plan.perm.iter().enumerate() {
                let to_base = plan.channels[t] * map;
                let from_base = plan.channels[p] * map;
                for dr in 0..size {
                    let off = (row + dr) * w + col;
                    dst[to_base + off..to_base + off + size]
                        .copy_from_slice(&src[from_base + off..from_base + off + size]);
                }
            }
        }
    }
}

/// Training-time shuffle over a batch; one independent plan per sample.
///
/// At inference the input passes through bit-for-bit and no plans are
/// drawn. With `ch_frac` rounding below two channels the output is also
/// bit-identical to the input (identity plans).
pub fn shuffle_forward<T: Scalar>(
    x: &Tensor<T>,
    cfg: &ShuffleConfig,
    phase: Phase,
    r: &mut RandomSource,
) -> Result<(Tensor<T>, Vec<ShufflePlan>)> {
    let (n, c, h, w) = x.dims4()?;
    cfg.validate()?;
    if phase == Phase::Inference {
        return Ok((x.clone(), Vec::new()));
    }
    let mut out = x.clone();
    let stride = c * h * w;
    let mut plans = Vec::with_capacity(n);
    for sample in 0..n {
        let plan = sample_plan(r, c, h, w, cfg);
        let base = sample * stride;
        apply_plan_into(
            &x.data()[base..base + stride],
            &mut out.data_mut()[base..base + stride],
            h,
            w,
            &plan,
        );
        plans.push(plan);
    }
    Ok((out, plans))
}

/// Backward pass: routes each sample's gradient through the inverse plan.
///
/// An empty plan list (inference-style forward) passes the gradient
/// through unchanged; otherwise the list length must equal the batch size.
pub fn shuffle_backward<T: Scalar>(g: &Tensor<T>, plans: &[ShufflePlan]) -> Result<Tensor<T>> {
    let (n, c, h, w) = g.dims4()?;
    if plans.is_empty() {
        return Ok(g.clone());
    }
    if plans.len() != n {
        return Err(Error::Plan(format!(
            "{} plans for a batch of {n} samples",
            plans.len()
        )));
    }
    let mut out = g.clone();
    let stride = c * h * w;
    for (sample, plan) in plans.iter().enumerate() {
        plan.check_against(c, h, w)?;
        let inv = plan.invert();
        let base = sample * stride;
        apply_plan_into(
            &g.data()[base..base + stride],
            &mut out.data_mut()[base..base + stride],
            h,
            w,
            &inv,
        );
    }
    Ok(out)
}
