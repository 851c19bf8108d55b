//! Inductive finite-stage construction of the space `X_{a,b}`.
//!
//! Stage `n` carries a dimension `d_n` (with `d_1 = 1`) and an ordered table
//! of extension tuples `gamma = (m, i, j, eps1, eps2)` with `m < n`. Each
//! tuple defines a functional on stage-`n` vectors,
//!
//! ```text
//! c*_gamma(x) = eps1 * a * x_i  +  eps2 * b * (x - i_{m,n}(pi_m(x)))_j
//! ```
//!
//! and the one-step embedding `i_{n,n+1}` copies `x` and appends the values
//! `c*_gamma(x)` in canonical tuple order, so `d_{n+1} = d_n + card F_n`.
//! The maps satisfy `pi_m . i_{m,n} = id` and `i_{l,n} . i_{m,l} = i_{m,n}`,
//! and their norms are bounded by `lambda` whenever the parameter conditions
//! hold. Truncations of the limit embedding into `l_infinity` are exposed as
//! [`StageLedger::extend`].
//!
//! Dimensions grow super-exponentially (inclusive convention:
//! 1, 1, 5, 45, 1305, 272745, ...), so ledger construction refuses to cross a
//! configurable dimension cap, and embeddings evaluate functionals on demand
//! instead of materializing step matrices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::params::{Convention, Params};
use crate::scalar::{sup_norm, Scalar};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default refusal threshold for a projected stage dimension.
pub const DEFAULT_DIM_CAP: u64 = 10_000_000;

/// Table length above which per-tuple evaluation parallelizes (with the
/// `parallel` feature); results are order-restored and bit-identical to the
/// sequential path.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 4096;

/// Sign entry of an extension tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// Applies the sign to a scalar.
    pub fn apply<S: Scalar>(self, s: S) -> S {
        match self {
            Sign::Plus => s,
            Sign::Minus => -s,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "1",
            Sign::Minus => "-1",
        })
    }
}

const SIGNS: [Sign; 2] = [Sign::Plus, Sign::Minus];

/// One extension tuple `(m, i, j, eps1, eps2)` created at stage `n`.
/// All indices are 1-based, matching coordinate numbering `e_1, e_2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GammaIndex {
    /// Stage whose tuple set this belongs to (the functional acts on stage-`n` vectors).
    pub n: u32,
    /// Earlier stage, `1 <= m < n`.
    pub m: u32,
    /// Coordinate index into stage `m`: `1 <= i <= d_m` (inclusive convention)
    /// or `1 <= i < d_m` (strict convention).
    pub i: u32,
    /// Coordinate index with `1 <= j <= d_n`.
    pub j: u32,
    pub eps1: Sign,
    pub eps2: Sign,
}

/// An element of `span{e_i : 1 <= i <= d_n}` in stage-`n` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct StageVector<S> {
    stage: usize,
    coords: Vec<S>,
}

impl<S: Scalar> StageVector<S> {
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    /// Max of absolute coordinate values; exact in rational mode.
    pub fn sup_norm(&self) -> S {
        sup_norm(&self.coords)
    }
}

/// Image of a stage-`n` vector under the embedding chain up to stage `N`:
/// the first `d_N` coordinates of its image in `l_infinity`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedVector<S> {
    base_stage: usize,
    top_stage: usize,
    coords: Vec<S>,
}

impl<S: Scalar> ExtendedVector<S> {
    /// Stage the original vector lived at.
    pub fn base_stage(&self) -> usize {
        self.base_stage
    }

    /// Stage whose coordinate block this truncation covers.
    pub fn top_stage(&self) -> usize {
        self.top_stage
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn sup_norm(&self) -> S {
        sup_norm(&self.coords)
    }

    /// Reinterprets the truncation as a plain stage-`top` vector.
    pub fn into_stage_vector(self) -> StageVector<S> {
        StageVector {
            stage: self.top_stage,
            coords: self.coords,
        }
    }
}

/// Anything carrying stage-indexed coordinates; lets [`StageLedger::project`]
/// accept both plain and extended vectors.
pub trait Coordinates<S> {
    /// Stage matching the coordinate length.
    fn coord_stage(&self) -> usize;
    fn coord_slice(&self) -> &[S];
}

impl<S: Scalar> Coordinates<S> for StageVector<S> {
    fn coord_stage(&self) -> usize {
        self.stage
    }

    fn coord_slice(&self) -> &[S] {
        &self.coords
    }
}

impl<S: Scalar> Coordinates<S> for ExtendedVector<S> {
    fn coord_stage(&self) -> usize {
        self.top_stage
    }

    fn coord_slice(&self) -> &[S] {
        &self.coords
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageError {
    /// Requested stage is not recorded in the ledger.
    StageOutOfRange { stage: usize, top: usize },
    /// The source stage must be strictly below the target stage.
    NotAnEarlierStage { from: usize, to: usize },
    /// Coordinate count does not match the stage dimension.
    LengthMismatch { stage: usize, expected: usize, got: usize },
    /// Tuple and vector belong to different stages.
    GammaStageMismatch { gamma_stage: usize, vector_stage: usize },
    /// Tuple indices violate the active convention's ranges.
    GammaOutOfRange(String),
    /// Building the requested stage would cross the dimension cap.
    CapExceeded { stage: usize, projected: u128, cap: u64 },
    /// 1-based coordinate index outside the stage dimension.
    IndexOutOfRange { index: usize, dim: usize },
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageError::StageOutOfRange { stage, top } => {
                write!(f, "stage {stage} out of range (ledger holds stages 1..={top})")
            }
            StageError::NotAnEarlierStage { from, to } => {
                write!(f, "stage {from} does not precede stage {to}")
            }
            StageError::LengthMismatch { stage, expected, got } => {
                write!(f, "stage {stage} vector needs {expected} coordinates, got {got}")
            }
            StageError::GammaStageMismatch { gamma_stage, vector_stage } => {
                write!(
                    f,
                    "tuple belongs to stage {gamma_stage} but vector lives at stage {vector_stage}"
                )
            }
            StageError::GammaOutOfRange(s) => write!(f, "tuple out of range: {s}"),
            StageError::CapExceeded { stage, projected, cap } => write!(
                f,
                "stage {stage} would have dimension {projected}, above the cap {cap}; \
                 raise the cap to proceed"
            ),
            StageError::IndexOutOfRange { index, dim } => {
                write!(f, "coordinate index {index} outside 1..={dim}")
            }
        }
    }
}

impl core::error::Error for StageError {}

/// The recorded construction through a top stage `N`: dimensions
/// `d_1, ..., d_N` and the ordered tuple tables `F_1, ..., F_{N-1}`.
///
/// Immutable after construction; safe to share across threads. Construction
/// is deterministic for fixed params: tables are generated directly in the
/// canonical order (`m`, then `i`, then `j`, with `+1` before `-1` for each
/// sign slot).
#[derive(Clone, Debug, PartialEq)]
pub struct StageLedger<S: Scalar> {
    params: Params<S>,
    dims: Vec<usize>,
    tables: Vec<Vec<GammaIndex>>,
}

impl<S: Scalar> StageLedger<S> {
    /// Builds stages `1..=n_stages` under [`DEFAULT_DIM_CAP`].
    pub fn build(params: Params<S>, n_stages: usize) -> Result<Self, StageError> {
        Self::build_with_cap(params, n_stages, DEFAULT_DIM_CAP)
    }

    /// Builds stages `1..=n_stages`, refusing any stage whose projected
    /// dimension exceeds `cap`.
    pub fn build_with_cap(
        params: Params<S>,
        n_stages: usize,
        cap: u64,
    ) -> Result<Self, StageError> {
        if n_stages == 0 {
            return Err(StageError::StageOutOfRange { stage: 0, top: 0 });
        }
        let mut dims: Vec<usize> = Vec::with_capacity(n_stages);
        dims.push(1);
        let mut tables: Vec<Vec<GammaIndex>> = Vec::with_capacity(n_stages.saturating_sub(1));

        for n in 1..n_stages {
            // card F_n = 4 * d_n * sum over m < n of the i-range size
            let d_n = dims[n - 1] as u128;
            let mut range_sum: u128 = 0;
            for m in 1..n {
                range_sum += i_range_len(params.convention(), dims[m - 1]) as u128;
            }
            let card = 4u128 * d_n * range_sum;
            let projected = d_n + card;
            if projected > cap as u128 {
                return Err(StageError::CapExceeded {
                    stage: n + 1,
                    projected,
                    cap,
                });
            }

            let mut table: Vec<GammaIndex> = Vec::with_capacity(card as usize);
            for m in 1..n {
                let top_i = i_range_len(params.convention(), dims[m - 1]);
                for i in 1..=top_i {
                    for j in 1..=dims[n - 1] {
                        for eps1 in SIGNS {
                            for eps2 in SIGNS {
                                table.push(GammaIndex {
                                    n: n as u32,
                                    m: m as u32,
                                    i: i as u32,
                                    j: j as u32,
                                    eps1,
                                    eps2,
                                });
                            }
                        }
                    }
                }
            }
            debug_assert_eq!(table.len() as u128, card);
            dims.push(projected as usize);
            tables.push(table);
        }

        Ok(StageLedger {
            params,
            dims,
            tables,
        })
    }

    pub fn params(&self) -> &Params<S> {
        &self.params
    }

    /// Highest recorded stage `N`.
    pub fn top_stage(&self) -> usize {
        self.dims.len()
    }

    /// All recorded dimensions `d_1, ..., d_N`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension `d_n`.
    pub fn dim(&self, stage: usize) -> Result<usize, StageError> {
        self.check_stage(stage)?;
        Ok(self.dims[stage - 1])
    }

    fn check_stage(&self, stage: usize) -> Result<(), StageError> {
        if stage == 0 || stage > self.dims.len() {
            return Err(StageError::StageOutOfRange {
                stage,
                top: self.dims.len(),
            });
        }
        Ok(())
    }

    /// The ordered tuple table `F_n`, defined for `1 <= n < N`.
    pub fn gamma_table(&self, stage: usize) -> Result<&[GammaIndex], StageError> {
        if stage == 0 || stage >= self.dims.len() {
            return Err(StageError::StageOutOfRange {
                stage,
                top: self.dims.len(),
            });
        }
        Ok(&self.tables[stage - 1])
    }

    /// `card F_n`.
    pub fn gamma_count(&self, stage: usize) -> Result<usize, StageError> {
        Ok(self.gamma_table(stage)?.len())
    }

    /// Wraps raw coordinates as a stage vector, checking the length.
    pub fn stage_vector(
        &self,
        stage: usize,
        coords: Vec<S>,
    ) -> Result<StageVector<S>, StageError> {
        let expected = self.dim(stage)?;
        if coords.len() != expected {
            return Err(StageError::LengthMismatch {
                stage,
                expected,
                got: coords.len(),
            });
        }
        Ok(StageVector { stage, coords })
    }

    /// The basis vector `e_index` (1-based) at the given stage.
    pub fn basis_vector(&self, stage: usize, index: usize) -> Result<StageVector<S>, StageError> {
        let dim = self.dim(stage)?;
        if index == 0 || index > dim {
            return Err(StageError::IndexOutOfRange { index, dim });
        }
        let mut coords = alloc::vec![S::zero(); dim];
        coords[index - 1] = S::one();
        Ok(StageVector { stage, coords })
    }

    /// Natural projection onto the first `d_m` coordinates.
    pub fn project<V: Coordinates<S>>(
        &self,
        m: usize,
        v: &V,
    ) -> Result<StageVector<S>, StageError> {
        self.check_stage(v.coord_stage())?;
        if m > v.coord_stage() {
            return Err(StageError::StageOutOfRange {
                stage: m,
                top: v.coord_stage(),
            });
        }
        let d_m = self.dim(m)?;
        Ok(StageVector {
            stage: m,
            coords: v.coord_slice()[..d_m].to_vec(),
        })
    }

    /// Evaluates the extension functional `c*_gamma` on a stage-`n` vector:
    /// `eps1 * a * x_i + eps2 * b * r_j` with `r = x - i_{m,n}(pi_m(x))`.
    /// Exact in rational mode.
    pub fn eval_functional(
        &self,
        gamma: &GammaIndex,
        x: &StageVector<S>,
    ) -> Result<S, StageError> {
        let n = gamma.n as usize;
        if n != x.stage {
            return Err(StageError::GammaStageMismatch {
                gamma_stage: n,
                vector_stage: x.stage,
            });
        }
        self.check_gamma(gamma)?;
        let residual = self.residual(gamma.m as usize, x)?;
        Ok(self.apply_gamma(gamma, &x.coords, &residual))
    }

    fn check_gamma(&self, gamma: &GammaIndex) -> Result<(), StageError> {
        let (n, m, i, j) = (
            gamma.n as usize,
            gamma.m as usize,
            gamma.i as usize,
            gamma.j as usize,
        );
        self.check_stage(n)?;
        if m == 0 || m >= n {
            return Err(StageError::GammaOutOfRange(alloc::format!(
                "need 1 <= m < n, got m={m}, n={n}"
            )));
        }
        let d_m = self.dims[m - 1];
        let top_i = i_range_len(self.params.convention(), d_m);
        if i == 0 || i > top_i {
            return Err(StageError::GammaOutOfRange(alloc::format!(
                "i={i} outside 1..={top_i} at m={m} (d_m={d_m}, {} convention)",
                self.params.convention()
            )));
        }
        let d_n = self.dims[n - 1];
        if j == 0 || j > d_n {
            return Err(StageError::GammaOutOfRange(alloc::format!(
                "j={j} outside 1..={d_n} at n={n}"
            )));
        }
        Ok(())
    }

    /// `x - i_{m,n}(pi_m(x))` as a full stage-`n` coordinate vector.
    ///
    /// Its first `d_m` coordinates vanish, since `pi_m . i_{m,n} = id`.
    pub fn residual(&self, m: usize, x: &StageVector<S>) -> Result<Vec<S>, StageError> {
        let n = x.stage;
        if m >= n {
            return Err(StageError::NotAnEarlierStage { from: m, to: n });
        }
        let prefix = self.project(m, x)?;
        let embedded = self.embed(m, n, &prefix)?;
        Ok(x.coords
            .iter()
            .zip(embedded.coords)
            .map(|(xc, ec)| xc.clone() - ec)
            .collect())
    }

    fn apply_gamma(&self, gamma: &GammaIndex, coords: &[S], residual: &[S]) -> S {
        let a_part = gamma
            .eps1
            .apply(self.params.a().clone() * coords[gamma.i as usize - 1].clone());
        let b_part = gamma
            .eps2
            .apply(self.params.b().clone() * residual[gamma.j as usize - 1].clone());
        a_part + b_part
    }

    /// One-step embedding `i_{n,n+1}`: copies `x` and appends `c*_gamma(x)`
    /// for every tuple of `F_n` in canonical order.
    pub fn embed_step(&self, x: &StageVector<S>) -> Result<StageVector<S>, StageError> {
        let n = x.stage;
        self.check_vector(x)?;
        let table = self.gamma_table(n)?;
        let d_next = self.dims[n];
        let mut out: Vec<S> = Vec::with_capacity(d_next);
        out.extend_from_slice(&x.coords);

        if !table.is_empty() {
            // one residual vector per earlier stage, shared by all tuples
            let mut residuals: Vec<Vec<S>> = Vec::with_capacity(n - 1);
            for m in 1..n {
                residuals.push(self.residual(m, x)?);
            }
            self.append_gamma_values(table, &x.coords, &residuals, &mut out);
        }
        Ok(StageVector {
            stage: n + 1,
            coords: out,
        })
    }

    #[cfg(feature = "parallel")]
    fn append_gamma_values(
        &self,
        table: &[GammaIndex],
        coords: &[S],
        residuals: &[Vec<S>],
        out: &mut Vec<S>,
    ) {
        if table.len() >= PAR_THRESHOLD {
            let values: Vec<S> = table
                .par_iter()
                .map(|g| self.apply_gamma(g, coords, &residuals[g.m as usize - 1]))
                .collect();
            out.extend(values);
        } else {
            for g in table {
                out.push(self.apply_gamma(g, coords, &residuals[g.m as usize - 1]));
            }
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn append_gamma_values(
        &self,
        table: &[GammaIndex],
        coords: &[S],
        residuals: &[Vec<S>],
        out: &mut Vec<S>,
    ) {
        for g in table {
            out.push(self.apply_gamma(g, coords, &residuals[g.m as usize - 1]));
        }
    }

    fn check_vector(&self, x: &StageVector<S>) -> Result<(), StageError> {
        let expected = self.dim(x.stage)?;
        if x.coords.len() != expected {
            return Err(StageError::LengthMismatch {
                stage: x.stage,
                expected,
                got: x.coords.len(),
            });
        }
        Ok(())
    }

    /// Composite embedding `i_{m,l}`, the chain of one-step embeddings.
    pub fn embed(
        &self,
        m: usize,
        l: usize,
        x: &StageVector<S>,
    ) -> Result<StageVector<S>, StageError> {
        if x.stage != m {
            return Err(StageError::GammaStageMismatch {
                gamma_stage: m,
                vector_stage: x.stage,
            });
        }
        if m >= l {
            return Err(StageError::NotAnEarlierStage { from: m, to: l });
        }
        self.check_stage(l)?;
        let mut cur = x.clone();
        while cur.stage < l {
            cur = self.embed_step(&cur)?;
        }
        Ok(cur)
    }

    /// Truncated limit embedding: the first `d_N` coordinates of the image of
    /// `x` in `l_infinity`. `N = x.stage()` returns `x` unchanged.
    pub fn extend(&self, x: &StageVector<S>, top: usize) -> Result<ExtendedVector<S>, StageError> {
        self.check_vector(x)?;
        self.check_stage(top)?;
        if top < x.stage {
            return Err(StageError::NotAnEarlierStage {
                from: x.stage,
                to: top,
            });
        }
        let base_stage = x.stage;
        let coords = if top == x.stage {
            x.coords.clone()
        } else {
            self.embed(x.stage, top, x)?.coords
        };
        Ok(ExtendedVector {
            base_stage,
            top_stage: top,
            coords,
        })
    }
}

fn i_range_len(convention: Convention, d_m: usize) -> usize {
    match convention {
        Convention::Inclusive => d_m,
        Convention::PaperStrict => d_m - 1,
    }
}
