//! Block sequences and norm-growth experiments.
//!
//! A block sequence is an ordered family of nonzero vectors whose supports
//! are pairwise disjoint and strictly increasing. Two ambient spaces are
//! supported: plain `l_2` coordinates, and stage vectors of a built ledger
//! measured in the sup norm after extension. The experiments here track the
//! partial-sum norms `|x_1 + ... + x_n|` and fit a growth exponent `beta`
//! (with constant `c`) to the model `|S_n| ~ c * n^beta` by least squares on
//! log-log data.
//!
//! For disjointly supported `l_2` blocks the squared partial-sum norms add
//! exactly (`|S_n|^2 = sum of |x_k|^2`), which pins the exponent at `1/2` for
//! unit blocks — the comparison baseline. In the constructed stages the
//! canonical candidate family takes, for each stage with freshly appended
//! coordinates, the indicator of the first fresh coordinate; these are unit
//! sup-norm blocks with disjoint supports, and their images under the stage
//! embeddings keep sup norm exactly 1. All fits are exploratory: they
//! describe the computed finite-scale data and certify nothing.

use alloc::string::String;
use alloc::vec::Vec;

// resolves float intrinsics (sqrt/ln/exp) in builds without the standard
// library; the inherent methods shadow it otherwise
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{sq_norm, Scalar};
use crate::stages::{StageError, StageLedger, StageVector};

/// Numerators for random block entries are drawn uniformly from
/// `-RAND_SCALE..=RAND_SCALE` over the fixed denominator `RAND_SCALE`.
const RAND_SCALE: i64 = 1000;

/// Least-squares fit of `log |S_n|` against `log n` over the points `n >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    /// The partial-sum norms the fit was computed from, `n = 1..count`.
    pub norms: Vec<f64>,
    /// Fitted slope: the growth exponent `beta`.
    pub exponent: f64,
    /// Fitted multiplier: `exp` of the intercept.
    pub constant: f64,
}

/// An increasing block-index selection together with its growth fit.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsequenceFit {
    /// 1-based indices into the original block sequence, strictly increasing.
    pub indices: Vec<usize>,
    pub fit: GrowthFit,
}

/// Outcome of a growth experiment over stage-vector blocks.
#[derive(Clone, Debug)]
pub struct BdGrowthExperiment<S: Scalar> {
    /// The candidate blocks the experiment ran on.
    pub sequence: BlockSequence<S>,
    /// Sup norms of the extended partial sums, `n = 1..count`.
    pub norms: Vec<f64>,
    /// `None` when fewer than three blocks were requested (fit refused).
    pub fit: Option<GrowthFit>,
}

/// Candidate families for growth experiments in the constructed stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BdCandidate {
    /// For each stage with freshly appended coordinates, the indicator of
    /// the first fresh coordinate (a unit sup-norm block; supports are
    /// disjoint across stages).
    #[default]
    FreshIndicators,
}

impl BdCandidate {
    pub fn name(self) -> &'static str {
        match self {
            BdCandidate::FreshIndicators => "fresh-indicators",
        }
    }
}

/// Norm in which partial sums are measured.
pub enum NormChoice<'a, S: Scalar> {
    /// Euclidean norm on plain `l_2` blocks.
    L2,
    /// Sup norm of the image under the embedding chain through `top`.
    SupAfterExtend {
        ledger: &'a StageLedger<S>,
        top: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceError {
    /// A block has no nonzero coordinate (1-based index).
    ZeroBlock { index: usize },
    /// Block `index` does not start strictly after block `index - 1` ends.
    SupportsNotIncreasing { index: usize },
    /// `l_2` blocks must share one ambient length.
    AmbientMismatch { expected: usize, got: usize },
    /// Width list unusable for the requested count.
    InvalidWidths(String),
    /// Growth fits need at least three norm entries.
    TooFewPoints { got: usize },
    /// Log-log fitting needs strictly positive norms (1-based index).
    NonPositiveNorm { index: usize, value: f64 },
    /// The ledger does not hold enough stages with fresh coordinates.
    InsufficientStages {
        requested: usize,
        available: usize,
        top: usize,
    },
    /// Norm choice does not match the sequence's ambient space.
    NormMismatch {
        space: &'static str,
        norm: &'static str,
    },
    /// Bubbled-up stage error.
    Stage(StageError),
}

impl core::fmt::Display for SequenceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SequenceError::ZeroBlock { index } => write!(f, "block {index} is zero"),
            SequenceError::SupportsNotIncreasing { index } => {
                write!(f, "support of block {index} does not start after block {}", index - 1)
            }
            SequenceError::AmbientMismatch { expected, got } => {
                write!(f, "blocks must share ambient length {expected}, got {got}")
            }
            SequenceError::InvalidWidths(s) => write!(f, "invalid widths: {s}"),
            SequenceError::TooFewPoints { got } => {
                write!(f, "growth fit needs at least 3 norms, got {got}")
            }
            SequenceError::NonPositiveNorm { index, value } => {
                write!(f, "norm {index} is {value}, but log-log fitting needs positive norms")
            }
            SequenceError::InsufficientStages { requested, available, top } => write!(
                f,
                "{requested} blocks requested but only {available} stages with fresh \
                 coordinates exist up to stage {top}"
            ),
            SequenceError::NormMismatch { space, norm } => {
                write!(f, "norm choice {norm} does not apply to a {space} sequence")
            }
            SequenceError::Stage(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SequenceError {}

impl From<StageError> for SequenceError {
    fn from(e: StageError) -> Self {
        SequenceError::Stage(e)
    }
}

#[derive(Clone, Debug)]
enum Space<S: Scalar> {
    /// Dense vectors over a common ambient length; `bound_sq` is the largest
    /// squared euclidean block norm (exact in rational mode).
    L2 { blocks: Vec<Vec<S>>, bound_sq: S },
    /// Stage vectors of one ledger's stages; `bound` is the largest sup norm.
    Bd {
        blocks: Vec<StageVector<S>>,
        bound: S,
    },
}

/// An ordered family of nonzero vectors with strictly increasing supports:
/// every nonzero coordinate of a block sits strictly after every nonzero
/// coordinate of the previous block. Constructors validate both invariants.
#[derive(Clone, Debug)]
pub struct BlockSequence<S: Scalar> {
    space: Space<S>,
}

fn support_range<S: Scalar>(coords: &[S]) -> Option<(usize, usize)> {
    let mut lo = None;
    let mut hi = None;
    for (k, c) in coords.iter().enumerate() {
        if !c.is_zero() {
            if lo.is_none() {
                lo = Some(k + 1);
            }
            hi = Some(k + 1);
        }
    }
    Some((lo?, hi?))
}

fn check_supports<S: Scalar>(
    supports: &[Option<(usize, usize)>],
) -> Result<(), SequenceError> {
    let mut prev_hi = 0usize;
    for (k, s) in supports.iter().enumerate() {
        match s {
            None => return Err(SequenceError::ZeroBlock { index: k + 1 }),
            Some((lo, hi)) => {
                if *lo <= prev_hi {
                    return Err(SequenceError::SupportsNotIncreasing { index: k + 1 });
                }
                prev_hi = *hi;
            }
        }
    }
    Ok(())
}

impl<S: Scalar> BlockSequence<S> {
    /// Wraps dense `l_2` blocks over a common ambient length.
    pub fn l2(blocks: Vec<Vec<S>>) -> Result<Self, SequenceError> {
        if let Some(first) = blocks.first() {
            let ambient = first.len();
            for b in &blocks {
                if b.len() != ambient {
                    return Err(SequenceError::AmbientMismatch {
                        expected: ambient,
                        got: b.len(),
                    });
                }
            }
        }
        let supports: Vec<_> = blocks.iter().map(|b| support_range(b)).collect();
        check_supports::<S>(&supports)?;
        let mut bound_sq = S::zero();
        for b in &blocks {
            let nsq = sq_norm(b);
            if nsq > bound_sq {
                bound_sq = nsq;
            }
        }
        Ok(BlockSequence {
            space: Space::L2 { blocks, bound_sq },
        })
    }

    /// Wraps stage-vector blocks. Supports are compared in the shared
    /// coordinate numbering (stage coordinates are prefixes of later stages).
    pub fn bd(blocks: Vec<StageVector<S>>) -> Result<Self, SequenceError> {
        let supports: Vec<_> = blocks.iter().map(|b| support_range(b.coords())).collect();
        check_supports::<S>(&supports)?;
        let mut bound = S::zero();
        for b in &blocks {
            let n = b.sup_norm();
            if n > bound {
                bound = n;
            }
        }
        Ok(BlockSequence {
            space: Space::Bd { blocks, bound },
        })
    }

    pub fn len(&self) -> usize {
        match &self.space {
            Space::L2 { blocks, .. } => blocks.len(),
            Space::Bd { blocks, .. } => blocks.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn space_name(&self) -> &'static str {
        match &self.space {
            Space::L2 { .. } => "l2",
            Space::Bd { .. } => "bd-stage",
        }
    }

    /// Largest block norm (euclidean for `l_2`, sup for stage blocks).
    pub fn bound(&self) -> f64 {
        match &self.space {
            Space::L2 { bound_sq, .. } => bound_sq.to_f64().sqrt(),
            Space::Bd { bound, .. } => bound.to_f64(),
        }
    }

    /// Largest squared euclidean block norm; `None` for stage blocks.
    pub fn bound_sq(&self) -> Option<&S> {
        match &self.space {
            Space::L2 { bound_sq, .. } => Some(bound_sq),
            Space::Bd { .. } => None,
        }
    }

    pub fn l2_blocks(&self) -> Option<&[Vec<S>]> {
        match &self.space {
            Space::L2 { blocks, .. } => Some(blocks),
            Space::Bd { .. } => None,
        }
    }

    pub fn bd_blocks(&self) -> Option<&[StageVector<S>]> {
        match &self.space {
            Space::Bd { blocks, .. } => Some(blocks),
            Space::L2 { .. } => None,
        }
    }
}

/// Builds `count` deterministic pseudo-random unit `l_2` blocks with
/// consecutive disjoint supports. Block `k` occupies the next `widths[(k-1) %
/// widths.len()]` coordinates; the width list cycles when shorter than
/// `count`. Entries come from rational points mapped onto the unit sphere
/// (inverse stereographic projection), so every block has squared norm
/// exactly 1 in rational mode; width-1 blocks are standard basis vectors.
pub fn make_l2_blocks<S: Scalar>(
    count: usize,
    widths: &[usize],
    seed: u64,
) -> Result<BlockSequence<S>, SequenceError> {
    if count > 0 && widths.is_empty() {
        return Err(SequenceError::InvalidWidths("empty width list".into()));
    }
    if let Some(pos) = widths.iter().position(|w| *w == 0) {
        return Err(SequenceError::InvalidWidths(alloc::format!(
            "width {} is zero",
            pos + 1
        )));
    }
    let block_widths: Vec<usize> = (0..count).map(|k| widths[k % widths.len()]).collect();
    let ambient: usize = block_widths.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<Vec<S>> = Vec::with_capacity(count);
    let mut offset = 0usize;
    for w in block_widths {
        let unit = random_unit_vector::<S>(w, &mut rng);
        let mut coords = alloc::vec![S::zero(); ambient];
        coords[offset..offset + w].clone_from_slice(&unit);
        offset += w;
        blocks.push(coords);
    }
    BlockSequence::l2(blocks)
}

/// A point of squared norm exactly 1: the inverse stereographic image of a
/// random rational point `v`, namely `(2v, 1 - q) / (1 + q)` with `q = |v|^2`.
/// Width 1 has no free coordinates and returns `(1)`.
fn random_unit_vector<S: Scalar>(width: usize, rng: &mut ChaCha8Rng) -> Vec<S> {
    let v: Vec<S> = (0..width - 1)
        .map(|_| S::from_ratio(rng.gen_range(-RAND_SCALE..=RAND_SCALE), RAND_SCALE as u64))
        .collect();
    let q = sq_norm(&v);
    let denom = S::one() + q.clone();
    let two = S::from_int(2);
    let mut u: Vec<S> = v
        .into_iter()
        .map(|vi| two.clone() * vi / denom.clone())
        .collect();
    u.push((S::one() - q) / denom);
    u
}

/// Squared euclidean norms of the partial sums `S_n = x_1 + ... + x_n`,
/// computed from the accumulated sum vectors (exact in rational mode).
/// Defined for `l_2` sequences.
pub fn partial_sum_sq_norms<S: Scalar>(
    seq: &BlockSequence<S>,
) -> Result<Vec<S>, SequenceError> {
    let blocks = seq.l2_blocks().ok_or(SequenceError::NormMismatch {
        space: seq.space_name(),
        norm: "l2",
    })?;
    let ambient = blocks.first().map_or(0, Vec::len);
    let mut acc = alloc::vec![S::zero(); ambient];
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        for (ac, bc) in acc.iter_mut().zip(b) {
            *ac = ac.clone() + bc.clone();
        }
        out.push(sq_norm(&acc));
    }
    Ok(out)
}

/// Sup norms of the extended partial sums: each block is carried through the
/// embedding chain to stage `top`, sums accumulate there, and the sup norm is
/// taken per prefix (exact in rational mode). Defined for stage sequences.
pub fn partial_sum_sup_norms<S: Scalar>(
    seq: &BlockSequence<S>,
    ledger: &StageLedger<S>,
    top: usize,
) -> Result<Vec<S>, SequenceError> {
    let blocks = seq.bd_blocks().ok_or(SequenceError::NormMismatch {
        space: seq.space_name(),
        norm: "sup-after-extend",
    })?;
    let d_top = ledger.dim(top)?;
    let mut acc = alloc::vec![S::zero(); d_top];
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let ext = ledger.extend(b, top)?;
        for (ac, ec) in acc.iter_mut().zip(ext.coords()) {
            *ac = ac.clone() + ec.clone();
        }
        out.push(crate::scalar::sup_norm(&acc));
    }
    Ok(out)
}

/// The norms `|x_1 + ... + x_n|` for `n = 1..count` in the chosen norm, as
/// floats for reporting. Exact counterparts: [`partial_sum_sq_norms`] and
/// [`partial_sum_sup_norms`].
pub fn partial_sum_norms<S: Scalar>(
    seq: &BlockSequence<S>,
    norm: NormChoice<'_, S>,
) -> Result<Vec<f64>, SequenceError> {
    match norm {
        NormChoice::L2 => Ok(partial_sum_sq_norms(seq)?
            .iter()
            .map(|s| s.to_f64().sqrt())
            .collect()),
        NormChoice::SupAfterExtend { ledger, top } => {
            Ok(partial_sum_sup_norms(seq, ledger, top)?
                .iter()
                .map(Scalar::to_f64)
                .collect())
        }
    }
}

/// Least-squares fit of `log norms[n-1]` against `log n` over the points
/// `n >= 2`. Needs at least three strictly positive entries.
pub fn growth_exponent(norms: &[f64]) -> Result<GrowthFit, SequenceError> {
    if norms.len() < 3 {
        return Err(SequenceError::TooFewPoints { got: norms.len() });
    }
    for (k, v) in norms.iter().enumerate() {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(SequenceError::NonPositiveNorm {
                index: k + 1,
                value: *v,
            });
        }
    }
    // points (ln n, ln |S_n|) for n = 2..=count
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| (((k + 1) as f64).ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, y) in &pts {
        cov += (t - mean_t) * (y - mean_y);
        var += (t - mean_t) * (t - mean_t);
    }
    let exponent = cov / var;
    let constant = (mean_y - exponent * mean_t).exp();
    Ok(GrowthFit {
        norms: norms.to_vec(),
        exponent,
        constant,
    })
}

/// Collects the canonical candidate blocks: for each stage (in order) whose
/// dimension strictly grew, the basis vector of its first fresh coordinate.
fn fresh_indicator_blocks<S: Scalar>(
    ledger: &StageLedger<S>,
    count: usize,
) -> Result<Vec<StageVector<S>>, SequenceError> {
    let dims = ledger.dims();
    let mut blocks = Vec::with_capacity(count);
    for n in 2..=ledger.top_stage() {
        if blocks.len() == count {
            break;
        }
        if dims[n - 1] > dims[n - 2] {
            blocks.push(ledger.basis_vector(n, dims[n - 2] + 1)?);
        }
    }
    if blocks.len() < count {
        return Err(SequenceError::InsufficientStages {
            requested: count,
            available: blocks.len(),
            top: ledger.top_stage(),
        });
    }
    Ok(blocks)
}

/// Runs the growth experiment on `count` candidate blocks: partial-sum sup
/// norms after extension to the ledger's top stage, plus the log-log fit.
/// With fewer than three blocks the norms are still reported but the fit is
/// refused (`fit: None`). Exploratory output: it describes finite-scale data
/// and certifies nothing asymptotic.
pub fn bd_growth_experiment<S: Scalar>(
    ledger: &StageLedger<S>,
    candidate: BdCandidate,
    count: usize,
) -> Result<BdGrowthExperiment<S>, SequenceError> {
    let blocks = match candidate {
        BdCandidate::FreshIndicators => fresh_indicator_blocks(ledger, count)?,
    };
    let sequence = BlockSequence::bd(blocks)?;
    let top = ledger.top_stage();
    let norms: Vec<f64> = partial_sum_sup_norms(&sequence, ledger, top)?
        .iter()
        .map(Scalar::to_f64)
        .collect();
    let fit = if count >= 3 {
        Some(growth_exponent(&norms)?)
    } else {
        None
    };
    Ok(BdGrowthExperiment {
        sequence,
        norms,
        fit,
    })
}

/// Greedy scan for the increasing block subsequence with the largest fitted
/// exponent. Starting from each window of three consecutive blocks, the scan
/// repeatedly appends the later block that most improves the fitted exponent,
/// stopping when no extension improves it; the full sequence is also scored.
/// Partial sums are recomputed per selection (a subsequence's sums are sums
/// of the selected blocks, not a subset of the original norms). Returns
/// `None` when fewer than three blocks exist or no selection admits a fit.
pub fn best_subsequence_fit<S: Scalar>(
    seq: &BlockSequence<S>,
    ledger: &StageLedger<S>,
    top: usize,
) -> Result<Option<SubsequenceFit>, SequenceError> {
    let blocks = seq.bd_blocks().ok_or(SequenceError::NormMismatch {
        space: seq.space_name(),
        norm: "sup-after-extend",
    })?;
    let count = blocks.len();
    if count < 3 {
        return Ok(None);
    }
    let d_top = ledger.dim(top)?;
    let mut extended: Vec<Vec<S>> = Vec::with_capacity(count);
    for b in blocks {
        extended.push(ledger.extend(b, top)?.into_coords());
    }

    let fit_selection = |sel: &[usize]| -> Option<GrowthFit> {
        let mut acc = alloc::vec![S::zero(); d_top];
        let mut norms = Vec::with_capacity(sel.len());
        for idx in sel {
            for (ac, ec) in acc.iter_mut().zip(&extended[*idx]) {
                *ac = ac.clone() + ec.clone();
            }
            norms.push(crate::scalar::sup_norm(&acc).to_f64());
        }
        growth_exponent(&norms).ok()
    };

    // 0-based selections internally; reported 1-based
    let mut best: Option<(Vec<usize>, GrowthFit)> = None;
    let consider = |sel: &[usize], best: &mut Option<(Vec<usize>, GrowthFit)>| {
        if let Some(fit) = fit_selection(sel) {
            let better = match best {
                None => true,
                Some((_, b)) => fit.exponent > b.exponent,
            };
            if better {
                *best = Some((sel.to_vec(), fit));
            }
        }
    };

    let full: Vec<usize> = (0..count).collect();
    consider(&full, &mut best);

    for start in 0..=count - 3 {
        let mut sel: Vec<usize> = alloc::vec![start, start + 1, start + 2];
        let mut cur = fit_selection(&sel);
        loop {
            let last = *sel.last().expect("selection nonempty");
            let mut improved: Option<(usize, GrowthFit)> = None;
            for next in last + 1..count {
                let mut cand = sel.clone();
                cand.push(next);
                if let Some(fit) = fit_selection(&cand) {
                    let gain = match (&cur, &improved) {
                        (Some(c), None) => fit.exponent > c.exponent,
                        (Some(_), Some((_, i))) => fit.exponent > i.exponent,
                        (None, None) => true,
                        (None, Some((_, i))) => fit.exponent > i.exponent,
                    };
                    if gain {
                        improved = Some((next, fit));
                    }
                }
            }
            match improved {
                Some((next, fit)) => {
                    sel.push(next);
                    cur = Some(fit);
                }
                None => break,
            }
        }
        consider(&sel, &mut best);
    }

    Ok(best.map(|(sel, fit)| SubsequenceFit {
        indices: sel.iter().map(|k| k + 1).collect(),
        fit,
    }))
}
