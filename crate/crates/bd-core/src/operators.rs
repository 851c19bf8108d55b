//! Finite operators from `l_2` coordinates into the constructed stages:
//! norm brackets, compactness-defect profiles, block-witness extraction, and
//! the growth-rate contradiction bound.
//!
//! An operator is a `d_n x K` matrix: column `k` is the image of the `k`-th
//! `l_2` basis vector in stage-`n` coordinates. Measured into `l_infinity`
//! (sup norm after extension through a stage `N`), the operator norm of a
//! matrix with rows `r` is exactly `max_r |r|_2` — Cauchy–Schwarz is attained
//! per row — which makes the following quantities exactly computable:
//!
//! * the norm bracket: `lower` from the extended matrix through `N`, `upper`
//!   as `lambda` times the same formula at the target stage (the remaining
//!   embedding factors are bounded by `lambda`);
//! * the defect profile `delta_k = |T o (I - P_k)|`, the same row formula
//!   restricted to columns past `k` — the finite-scale compactness criterion
//!   (an operator is compact on the limit space iff these tail norms vanish);
//! * block witnesses: a window `(k, s]` and a vector supported there whose
//!   normalized image beats a threshold — the gliding-hump step that turns a
//!   non-vanishing defect into a bounded block sequence with `|T y| > delta`.
//!
//! Exact squared values are available in rational mode alongside the rounded
//! float reports.

use alloc::string::String;
use alloc::vec::Vec;

// resolves float intrinsics (sqrt/powf/floor) in builds without the
// standard library; the inherent methods shadow it otherwise
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float as _;

use crate::scalar::{sq_norm, Scalar};
use crate::stages::{StageError, StageLedger, StageVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Row count above which profile scans parallelize (with the `parallel`
/// feature). Reductions are elementwise maxima, so the result is identical
/// to the sequential scan.
#[cfg(feature = "parallel")]
const PAR_ROW_THRESHOLD: usize = 4096;

/// Default defect threshold for the "numerically compact at scale" flag.
pub const DEFAULT_COMPACT_THRESHOLD: f64 = 1e-8;

/// A linear map from `K`-dimensional `l_2` coordinates into stage-`n`
/// coordinates, stored as `d_n` rows of length `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteOperator<S: Scalar> {
    source_dim: usize,
    target_stage: usize,
    rows: Vec<Vec<S>>,
}

/// Tail norms `delta_k = |T o (I - P_k)|` for `k = 0..K`, measured in the
/// sup norm after extension through `extension_stage`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectProfile {
    /// `values[k] = delta_k`; nonincreasing, `values[K] = 0`, and
    /// `values[0]` is the operator-norm lower bound.
    pub values: Vec<f64>,
    pub extension_stage: usize,
}

impl DefectProfile {
    /// Source dimension `K` (the profile has `K + 1` entries).
    pub fn source_dim(&self) -> usize {
        self.values.len() - 1
    }

    /// Flags a defect already below `threshold` halfway into the columns
    /// (`k = K/2`) — the finite-scale stand-in for "tail norms vanish".
    pub fn numerically_compact(&self, threshold: f64) -> bool {
        self.values[self.source_dim() / 2] <= threshold
    }
}

/// A vector supported in the window `(k, s]` (1-based coordinates) together
/// with the norm ratio its image achieves.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessBlock<S: Scalar> {
    /// `l_2` coordinates, nonzero only inside the window. Scale-free: the
    /// achieved ratio is invariant, so the vector is left unnormalized (its
    /// entries are exact in rational mode).
    pub vector: Vec<S>,
    /// `(k, s]`: support lies strictly after `k` and within the first `s`
    /// coordinates.
    pub window: (usize, usize),
    /// `|extend(T(vector))|_inf / |vector|_2`, computed by applying the
    /// operator to the vector (not read off the search formula).
    pub achieved: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorError {
    /// Row count does not match the target stage dimension.
    RowCount { stage: usize, expected: usize, got: usize },
    /// A row's length differs from the first row's (1-based index).
    RaggedRow { row: usize, expected: usize, got: usize },
    /// Input vector length does not match the source dimension.
    SourceLength { expected: usize, got: usize },
    /// Invalid argument for the contradiction bound.
    Domain(String),
    /// The contradiction bound does not fit in a 64-bit integer.
    BoundOverflow { approx: f64 },
    /// Bubbled-up stage error.
    Stage(StageError),
}

impl core::fmt::Display for OperatorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OperatorError::RowCount { stage, expected, got } => {
                write!(f, "stage {stage} needs {expected} matrix rows, got {got}")
            }
            OperatorError::RaggedRow { row, expected, got } => {
                write!(f, "row {row} has {got} entries, expected {expected}")
            }
            OperatorError::SourceLength { expected, got } => {
                write!(f, "vector has {got} coordinates, operator expects {expected}")
            }
            OperatorError::Domain(s) => write!(f, "{s}"),
            OperatorError::BoundOverflow { approx } => {
                write!(f, "contradiction bound ~{approx:.3e} exceeds the 64-bit range")
            }
            OperatorError::Stage(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OperatorError {}

impl From<StageError> for OperatorError {
    fn from(e: StageError) -> Self {
        OperatorError::Stage(e)
    }
}

impl<S: Scalar> FiniteOperator<S> {
    /// Wraps a matrix whose row count matches the target stage dimension and
    /// whose rows share one length (the source dimension).
    pub fn new(
        ledger: &StageLedger<S>,
        target_stage: usize,
        rows: Vec<Vec<S>>,
    ) -> Result<Self, OperatorError> {
        let expected_rows = ledger.dim(target_stage)?;
        if rows.len() != expected_rows {
            return Err(OperatorError::RowCount {
                stage: target_stage,
                expected: expected_rows,
                got: rows.len(),
            });
        }
        let source_dim = rows.first().map_or(0, Vec::len);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != source_dim {
                return Err(OperatorError::RaggedRow {
                    row: r + 1,
                    expected: source_dim,
                    got: row.len(),
                });
            }
        }
        Ok(FiniteOperator {
            source_dim,
            target_stage,
            rows,
        })
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_stage(&self) -> usize {
        self.target_stage
    }

    /// Rows of the matrix (row `r` = target coordinate `r + 1`).
    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Matrix-vector product in raw stage coordinates.
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>, OperatorError> {
        if x.len() != self.source_dim {
            return Err(OperatorError::SourceLength {
                expected: self.source_dim,
                got: x.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut acc = S::zero();
                for (rc, xc) in row.iter().zip(x) {
                    acc = acc + rc.clone() * xc.clone();
                }
                acc
            })
            .collect())
    }

    /// Matrix-vector product as a stage vector of the target stage.
    pub fn apply_to_stage(
        &self,
        ledger: &StageLedger<S>,
        x: &[S],
    ) -> Result<StageVector<S>, OperatorError> {
        let coords = self.apply(x)?;
        Ok(ledger.stage_vector(self.target_stage, coords)?)
    }

    /// The matrix of `extend o T` through stage `N`: every column (the image
    /// of a source basis vector) is carried through the embedding chain.
    pub fn extended_rows(
        &self,
        ledger: &StageLedger<S>,
        extension_stage: usize,
    ) -> Result<Vec<Vec<S>>, OperatorError> {
        if extension_stage == self.target_stage {
            return Ok(self.rows.clone());
        }
        let d_big = ledger.dim(extension_stage)?;
        let mut rows = alloc::vec![alloc::vec![S::zero(); self.source_dim]; d_big];
        for k in 0..self.source_dim {
            let column: Vec<S> = self.rows.iter().map(|row| row[k].clone()).collect();
            let col_vec = ledger.stage_vector(self.target_stage, column)?;
            let extended = ledger.extend(&col_vec, extension_stage)?;
            for (r, value) in extended.into_coords().into_iter().enumerate() {
                rows[r][k] = value;
            }
        }
        Ok(rows)
    }
}

/// Largest squared row `l_2` norm — the exact squared `l_2 -> l_infinity`
/// operator norm of a matrix.
fn max_row_sq<S: Scalar>(rows: &[Vec<S>]) -> S {
    fold_rows_max(rows, |row| sq_norm(row))
}

/// Elementwise-max fold over rows of `per_row` values; parallelized when the
/// `parallel` feature is active and the matrix is tall (max is commutative
/// and associative, so the reduction order cannot change the result).
fn fold_rows_max<S: Scalar, F>(rows: &[Vec<S>], per_row: F) -> S
where
    F: Fn(&[S]) -> S + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if rows.len() >= PAR_ROW_THRESHOLD {
        return rows
            .par_iter()
            .map(|row| per_row(row))
            .reduce(S::zero, |a, b| if b > a { b } else { a });
    }
    let mut best = S::zero();
    for row in rows {
        let v = per_row(row);
        if v > best {
            best = v;
        }
    }
    best
}

/// Squared norm bracket `(lower^2, upper^2)`, exact in rational mode:
/// `lower^2` from the extended matrix, `upper^2 = lambda^2` times the target
/// -stage value.
pub fn op_norm_sq<S: Scalar>(
    t: &FiniteOperator<S>,
    ledger: &StageLedger<S>,
    extension_stage: usize,
) -> Result<(S, S), OperatorError> {
    let extended = t.extended_rows(ledger, extension_stage)?;
    let lower_sq = max_row_sq(&extended);
    let lambda = ledger.params().lambda().clone();
    let upper_sq = lambda.clone() * lambda * max_row_sq(t.rows());
    Ok((lower_sq, upper_sq))
}

/// Norm bracket `(lower, upper)` for `extend o T` into the sup norm:
/// `lower` is the exact `l_2 -> l_infinity` norm of the extended matrix
/// (attained, by Cauchy–Schwarz, at the normalized biggest row); `upper`
/// bounds the embedding factors still to come by `lambda`. The true norm of
/// the operator into the limit space lies in `[lower, upper]`.
pub fn op_norm<S: Scalar>(
    t: &FiniteOperator<S>,
    ledger: &StageLedger<S>,
    extension_stage: usize,
) -> Result<(f64, f64), OperatorError> {
    let (lower_sq, upper_sq) = op_norm_sq(t, ledger, extension_stage)?;
    Ok((lower_sq.to_f64().sqrt(), upper_sq.to_f64().sqrt()))
}

/// Squared defect profile `delta_k^2` for `k = 0..K`, exact in rational
/// mode: the largest squared row norm restricted to columns past `k`,
/// computed per row as suffix square sums.
pub fn defect_profile_sq<S: Scalar>(
    t: &FiniteOperator<S>,
    ledger: &StageLedger<S>,
    extension_stage: usize,
) -> Result<Vec<S>, OperatorError> {
    let extended = t.extended_rows(ledger, extension_stage)?;
    let k_cols = t.source_dim();
    let fold = |acc: &mut Vec<S>, row: &[S]| {
        // suffix[k] = sum of squares of entries k..K
        let mut tail = S::zero();
        for k in (0..k_cols).rev() {
            tail = tail + row[k].clone() * row[k].clone();
            if tail > acc[k] {
                acc[k] = tail.clone();
            }
        }
    };

    #[cfg(feature = "parallel")]
    if extended.len() >= PAR_ROW_THRESHOLD {
        let merged = extended
            .par_iter()
            .fold(
                || alloc::vec![S::zero(); k_cols + 1],
                |mut acc, row| {
                    fold(&mut acc, row);
                    acc
                },
            )
            .reduce(
                || alloc::vec![S::zero(); k_cols + 1],
                |mut a, b| {
                    for (av, bv) in a.iter_mut().zip(b) {
                        if bv > *av {
                            *av = bv;
                        }
                    }
                    a
                },
            );
        return Ok(merged);
    }

    let mut acc = alloc::vec![S::zero(); k_cols + 1];
    for row in &extended {
        fold(&mut acc, row);
    }
    Ok(acc)
}

/// The defect profile `delta_k = |T o (I - P_k)|` at the given extension
/// stage: nonincreasing, ending at `delta_K = 0` and starting at the
/// operator-norm lower bound.
pub fn defect_profile<S: Scalar>(
    t: &FiniteOperator<S>,
    ledger: &StageLedger<S>,
    extension_stage: usize,
) -> Result<DefectProfile, OperatorError> {
    let sq = defect_profile_sq(t, ledger, extension_stage)?;
    Ok(DefectProfile {
        values: sq.iter().map(|s| s.to_f64().sqrt()).collect(),
        extension_stage,
    })
}

/// Searches for a block vector supported strictly past column `beyond` whose
/// normalized image under `extend o T` beats `delta` in the sup norm.
///
/// The maximum of `|extend(T(y))|_inf / |y|_2` over vectors supported in
/// `(beyond, K]` is attained by the best row of the extended matrix
/// restricted to those columns (Cauchy–Schwarz, exactly as in the defect
/// formula), so the search reduces to a row scan; the reported window is
/// trimmed to the restricted row's support. Returns `None` when no such
/// vector exists — equivalently, when `delta_beyond <= delta`. Pass
/// `beyond = 0` to allow full support.
pub fn find_block_witness<S: Scalar>(
    t: &FiniteOperator<S>,
    ledger: &StageLedger<S>,
    extension_stage: usize,
    delta: f64,
    beyond: usize,
) -> Result<Option<WitnessBlock<S>>, OperatorError> {
    let k_cols = t.source_dim();
    if beyond >= k_cols {
        return Ok(None);
    }
    let extended = t.extended_rows(ledger, extension_stage)?;

    let mut best: Option<(usize, S)> = None;
    for (r, row) in extended.iter().enumerate() {
        let tail_sq = sq_norm(&row[beyond..]);
        let better = match &best {
            None => !tail_sq.is_zero(),
            Some((_, b)) => tail_sq > *b,
        };
        if better {
            best = Some((r, tail_sq));
        }
    }
    let (best_row, best_sq) = match best {
        Some(b) => b,
        None => return Ok(None), // all restricted rows are zero
    };
    if best_sq.to_f64().sqrt() <= delta {
        return Ok(None);
    }

    // witness: the best row restricted to the window, which attains the
    // Cauchy–Schwarz bound for that row
    let mut vector = alloc::vec![S::zero(); k_cols];
    vector[beyond..].clone_from_slice(&extended[best_row][beyond..]);
    let support_end = (beyond..k_cols)
        .rev()
        .find(|k| !vector[*k].is_zero())
        .map(|k| k + 1)
        .expect("restricted row has a nonzero entry");

    // achieved is recomputed honestly from the application
    let image = t.apply_to_stage(ledger, &vector)?;
    let image_sup = ledger.extend(&image, extension_stage)?.sup_norm();
    let achieved = image_sup.to_f64() / sq_norm(&vector).to_f64().sqrt();

    Ok(Some(WitnessBlock {
        vector,
        window: (beyond, support_end),
        achieved,
    }))
}

/// The largest `n` with `c1 * n^alpha <= norm_t * c2 * sqrt(n)` — i.e.
/// `floor((norm_t * c2 / c1)^(1 / (alpha - 1/2)))` with the boundary checked
/// directly (ties resolved within a relative slack of `1e-12` toward
/// inclusion). Past this `n` a lower growth bound `c1 * n^alpha` contradicts
/// an upper bound `norm_t * c2 * sqrt(n)`, which is how a norm-bounded
/// operator rules out exponent-`alpha` growth. Returns `0` when even `n = 1`
/// fails. Requires `alpha > 1/2` (otherwise no contradiction ever occurs)
/// and positive inputs.
pub fn demo_contradiction(
    norm_t: f64,
    c1: f64,
    c2: f64,
    alpha: f64,
) -> Result<u64, OperatorError> {
    for (name, v) in [("norm_t", norm_t), ("c1", c1), ("c2", c2), ("alpha", alpha)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(OperatorError::Domain(alloc::format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if alpha <= 0.5 {
        return Err(OperatorError::Domain(alloc::format!(
            "alpha must exceed 1/2 for the bounds to cross, got {alpha}"
        )));
    }
    let satisfies = |n: f64| c1 * n.powf(alpha) <= norm_t * c2 * n.sqrt() * (1.0 + 1e-12);
    let ratio = norm_t * c2 / c1;
    let raw = ratio.powf(1.0 / (alpha - 0.5));
    if !raw.is_finite() || raw >= 9.0e18 {
        return Err(OperatorError::BoundOverflow { approx: raw });
    }
    let mut n = raw.floor().max(0.0);
    while satisfies(n + 1.0) {
        n += 1.0;
    }
    while n >= 1.0 && !satisfies(n) {
        n -= 1.0;
    }
    Ok(n as u64)
}
