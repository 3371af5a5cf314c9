//! Quantum horse lotteries.
//!
//! A lottery over `m` prizes on an `n`-dimensional system is a list of `m`
//! Hermitian blocks `Q_1, ..., Q_m` forming a POVM: every block is positive
//! semi-definite and the blocks sum to the identity. Measuring along a unit
//! vector `π` yields the prize distribution `p(k) = π† Q_k π`. The last prize
//! is the worst outcome `z`.
//!
//! [`project`](QHLottery::project) drops the `z` block and turns differences
//! of lotteries into gambles on `D^{m-1} ⊗ H^n`; [`lift_gamble`] inverts it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{BlockDiag, HermitianMatrix, OrthogonalDecomposition, Projector};

/// Minimum eigenvalue accepted for a lottery block.
pub const POVM_PSD_TOL: f64 = 1e-9;
/// Max-norm tolerance on `Σ_j Q_j − I`.
pub const POVM_SUM_TOL: f64 = 1e-9;
/// Entries of a pmf may dip this far below zero before rejection.
pub const PMF_NEG_TOL: f64 = 1e-12;
pub const PMF_SUM_TOL: f64 = 1e-9;

/// A gamble on `D^{m-1} ⊗ H^n`: the image of a lottery difference under projection.
pub type ProjectedGamble = BlockDiag;

/// Prize labels; the last one is the worst outcome `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrizeSpace {
    labels: Vec<String>,
}

impl PrizeSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidInput(format!("a prize space needs at least 2 prizes, got {}", labels.len())));
        }
        Ok(Self { labels })
    }

    /// Prizes `x1, ..., x{m-1}, z`.
    pub fn numbered(m: usize) -> Result<Self> {
        let mut labels: Vec<String> = (1..m).map(|i| format!("x{i}")).collect();
        labels.push("z".into());
        Self::new(labels)
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Zero-based index of `z`.
    pub fn worst_index(&self) -> usize {
        self.labels.len() - 1
    }
}

/// A probability mass function over prizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PrizePmf {
    weights: Vec<f64>,
}

impl PrizePmf {
    /// Validates, clamps entries in `[-1e-12, 0)` to zero and renormalises
    /// when the sum drifts by more than `1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty pmf".into()));
        }
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = weights.iter().sum();
        if !(min >= -PMF_NEG_TOL) || !((sum - 1.0).abs() <= PMF_SUM_TOL) {
            return Err(Error::NotColumnStochastic { column: 0, sum, min });
        }
        Ok(Self::clamped(weights))
    }

    fn clamped(mut weights: Vec<f64>) -> Self {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 && sum > 0.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { weights }
    }

    /// Point mass on prize `k` out of `m`.
    pub fn degenerate(m: usize, k: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[k] = 1.0;
        Self { weights }
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl<'de> Deserialize<'de> for PrizePmf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Vec::<f64>::deserialize(d)?;
        PrizePmf::new(w).map_err(serde::de::Error::custom)
    }
}

/// Why a block list fails to be a lottery.
#[derive(Debug, Clone, PartialEq)]
pub enum LotteryViolation {
    TooFewPrizes { m: usize },
    NegativeBlock { block: usize, eigenvalue: f64 },
    SumResidual { residual: f64 },
}

impl fmt::Display for LotteryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LotteryViolation::TooFewPrizes { m } => write!(f, "need at least 2 prizes, got {m}"),
            LotteryViolation::NegativeBlock { block, eigenvalue } => {
                write!(f, "block {} has eigenvalue {eigenvalue:.6e} < 0", block + 1)
            }
            LotteryViolation::SumResidual { residual } => {
                write!(f, "blocks sum to the identity only up to {residual:.6e} (max-norm)")
            }
        }
    }
}

impl std::error::Error for LotteryViolation {}

/// A validated quantum horse lottery.
#[derive(Debug, Clone, PartialEq)]
pub struct QHLottery {
    n: usize,
    blocks: Vec<HermitianMatrix>,
}

impl QHLottery {
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &HermitianMatrix {
        &self.blocks[k]
    }

    /// `Diag(Q_1, ..., Q_{m-1})`.
    pub fn project(&self) -> ProjectedGamble {
        project_blocks(&self.blocks)
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: other.m() });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// `P − Q` as a balanced difference.
    pub fn difference(&self, other: &Self) -> Result<LotteryDifference> {
        LotteryDifference::from_pair(1.0, self, other)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max)
    }
}

fn project_blocks(blocks: &[HermitianMatrix]) -> ProjectedGamble {
    BlockDiag::new(blocks[..blocks.len() - 1].to_vec()).expect("lotteries have at least two blocks")
}

/// Check the POVM criterion: PSD blocks (min eigenvalue ≥ −1e-9) summing to `I_n` (max-norm 1e-9).
pub fn validate_qh_lottery(blocks: Vec<HermitianMatrix>) -> Result<QHLottery> {
    if blocks.len() < 2 {
        return Err(LotteryViolation::TooFewPrizes { m: blocks.len() }.into());
    }
    let n = blocks[0].n();
    if let Some(b) = blocks.iter().find(|b| b.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: b.n() });
    }
    let mut sum = HermitianMatrix::scaled_identity(n, -1.0);
    for b in &blocks {
        sum = &sum + b;
    }
    let residual = sum.max_abs();
    if residual > POVM_SUM_TOL {
        return Err(LotteryViolation::SumResidual { residual }.into());
    }
    for (k, b) in blocks.iter().enumerate() {
        let lo = b.eig()?.min();
        if lo < -POVM_PSD_TOL {
            return Err(LotteryViolation::NegativeBlock { block: k, eigenvalue: lo }.into());
        }
    }
    Ok(QHLottery { n, blocks })
}

/// `Q = Σ_j q_j ⊗ V_j` for one pmf per projector of the decomposition.
pub fn make_simple_lottery(pmfs: &[PrizePmf], od: &OrthogonalDecomposition) -> Result<QHLottery> {
    let n = od.n();
    if pmfs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pmfs.len() });
    }
    let m = pmfs[0].len();
    if let Some(p) = pmfs.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: p.len() });
    }
    let mut blocks = vec![HermitianMatrix::zeros(n); m];
    for (pmf, proj) in pmfs.iter().zip(od.projectors()) {
        let v = proj.matrix();
        for (k, w) in pmf.weights().iter().enumerate() {
            if *w != 0.0 {
                blocks[k] = blocks[k].add_scaled(*w, &v)?;
            }
        }
    }
    validate_qh_lottery(blocks)
}

/// `p(k) = π† Q_k π`.
pub fn measure_lottery(q: &QHLottery, pi: &Projector) -> Result<PrizePmf> {
    let w = q.blocks.iter().map(|b| b.quadratic_form(pi.vector())).collect::<Result<Vec<_>>>()?;
    Ok(PrizePmf::clamped(w))
}

/// `Z = p_z ⊗ I_n`: all mass on the worst prize.
pub fn worst_lottery(m: usize, n: usize) -> Result<QHLottery> {
    check_dims(m, n)?;
    let mut blocks = vec![HermitianMatrix::zeros(n); m];
    blocks[m - 1] = HermitianMatrix::identity(n);
    Ok(QHLottery { n, blocks })
}

/// All blocks equal to `I_n / m`.
pub fn uniform_lottery(m: usize, n: usize) -> Result<QHLottery> {
    check_dims(m, n)?;
    Ok(QHLottery { n, blocks: vec![HermitianMatrix::scaled_identity(n, 1.0 / m as f64); m] })
}

/// `u ⊗ I_n` for a prize pmf `u`: the lottery ignoring the quantum system.
pub fn constant_lottery(pmf: &PrizePmf, n: usize) -> Result<QHLottery> {
    check_dims(pmf.len(), n)?;
    Ok(QHLottery { n, blocks: pmf.weights().iter().map(|&w| HermitianMatrix::scaled_identity(n, w)).collect() })
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m < 2 {
        return Err(LotteryViolation::TooFewPrizes { m }.into());
    }
    if n < 1 {
        return Err(Error::InvalidInput("quantum dimension must be at least 1".into()));
    }
    Ok(())
}

/// `aP + (1 − a)R` for `a ∈ (0, 1]`.
pub fn mixture(a: f64, p: &QHLottery, r: &QHLottery) -> Result<QHLottery> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Range { value: a, range: "(0, 1]" });
    }
    p.same_shape(r)?;
    let blocks = p
        .blocks
        .iter()
        .zip(&r.blocks)
        .map(|(x, y)| x.scale(a).add_scaled(1.0 - a, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(QHLottery { n: p.n, blocks })
}

/// Lottery with diagonal blocks `Q_k = diag(table[k][0], ..., table[k][n-1])`;
/// each column of the `m x n` table is a pmf over prizes.
pub fn classical_lottery(table: &[Vec<f64>]) -> Result<QHLottery> {
    let m = table.len();
    if m < 2 {
        return Err(LotteryViolation::TooFewPrizes { m }.into());
    }
    let n = table[0].len();
    if let Some(row) = table.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: row.len() });
    }
    for col in 0..n {
        let sum: f64 = table.iter().map(|r| r[col]).sum();
        let min = table.iter().map(|r| r[col]).fold(f64::INFINITY, f64::min);
        if !(min >= -PMF_NEG_TOL) || !((sum - 1.0).abs() <= PMF_SUM_TOL) {
            return Err(Error::NotColumnStochastic { column: col, sum, min });
        }
    }
    validate_qh_lottery(table.iter().map(|row| HermitianMatrix::from_real_diagonal(row)).collect())
}

/// A scaled difference `λ(P − Q)`: `m` blocks summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LotteryDifference {
    blocks: Vec<HermitianMatrix>,
    provenance: Option<Box<(f64, QHLottery, QHLottery)>>,
}

impl LotteryDifference {
    /// Requires the blocks to sum to zero within `1e-9 * max(1, max block norm)`.
    pub fn new(blocks: Vec<HermitianMatrix>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(LotteryViolation::TooFewPrizes { m: blocks.len() }.into());
        }
        let n = blocks[0].n();
        if let Some(b) = blocks.iter().find(|b| b.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: b.n() });
        }
        let scale = blocks.iter().map(HermitianMatrix::max_abs).fold(1.0, f64::max);
        let mut sum = HermitianMatrix::zeros(n);
        for b in &blocks {
            sum = &sum + b;
        }
        if sum.max_abs() > POVM_SUM_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "difference blocks must sum to zero, residual {:.3e}",
                sum.max_abs()
            )));
        }
        Ok(Self { blocks, provenance: None })
    }

    pub fn from_pair(lambda: f64, p: &QHLottery, q: &QHLottery) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Range { value: lambda, range: "(0, inf)" });
        }
        p.same_shape(q)?;
        let blocks = p.blocks.iter().zip(&q.blocks).map(|(a, b)| (a - b).scale(lambda)).collect();
        Ok(Self { blocks, provenance: Some(Box::new((lambda, p.clone(), q.clone()))) })
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    /// The `(λ, P, Q)` this difference was built from, when known.
    pub fn provenance(&self) -> Option<(f64, &QHLottery, &QHLottery)> {
        self.provenance.as_ref().map(|b| (b.0, &b.1, &b.2))
    }

    pub fn project(&self) -> ProjectedGamble {
        project_blocks(&self.blocks)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: other.m() });
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add_scaled(1.0, b)).collect::<Result<_>>()?;
        Ok(Self { blocks, provenance: None })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.scale(c)).collect(), provenance: None }
    }
}

/// Result of [`lift_gamble`]: `Proj(λ(P − Q)) = W`.
#[derive(Debug, Clone)]
pub struct Lift {
    pub lambda: f64,
    pub p: QHLottery,
    pub q: QHLottery,
}

/// Split every block into positive and negative spectral parts `W_j = W_j⁺ − W_j⁻`,
/// set `λ = (m−1)(max_j λmax(W_j⁺) + max_j λmax(W_j⁻))` and return
/// `P = Diag(W⁺_1/λ, ..., I − Σ W⁺_j/λ)`, `Q = Diag(W⁻_1/λ, ..., I − Σ W⁻_j/λ)`.
pub fn lift_gamble(w: &ProjectedGamble) -> Result<Lift> {
    let n = w.n();
    let k = w.count();
    let mut pos = Vec::with_capacity(k);
    let mut neg = Vec::with_capacity(k);
    let (mut top_pos, mut top_neg) = (0.0f64, 0.0f64);
    for b in w.blocks() {
        let e = b.eig()?;
        let wp: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
        let wn: Vec<f64> = e.values.iter().map(|v| (-v).max(0.0)).collect();
        top_pos = top_pos.max(wp.iter().copied().fold(0.0, f64::max));
        top_neg = top_neg.max(wn.iter().copied().fold(0.0, f64::max));
        // Keep the block exactly when it is already one-signed.
        if e.min() >= 0.0 {
            pos.push(b.clone());
            neg.push(HermitianMatrix::zeros(n));
        } else if e.max() <= 0.0 {
            pos.push(HermitianMatrix::zeros(n));
            neg.push(b.scale(-1.0));
        } else {
            pos.push(e.recompose_with(&wp));
            neg.push(e.recompose_with(&wn));
        }
    }
    let lambda = k as f64 * (top_pos + top_neg);
    if !(lambda > 0.0) {
        return Err(Error::ZeroGamble);
    }
    let build = |parts: &[HermitianMatrix]| -> QHLottery {
        let mut blocks: Vec<HermitianMatrix> = parts.iter().map(|b| b.scale(1.0 / lambda)).collect();
        let mut last = HermitianMatrix::identity(n);
        for b in &blocks {
            last = &last - b;
        }
        blocks.push(last);
        QHLottery { n, blocks }
    };
    Ok(Lift { lambda, p: build(&pos), q: build(&neg) })
}

/// JSON form of a lottery: `{"m", "n", "blocks": [matrix, ...]}` or the
/// classical `{"m", "n", "table": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LotteryJson {
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<HermitianMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
}

impl LotteryJson {
    /// Shape checks against the declared `m`, `n`, then the POVM criterion.
    pub fn into_lottery(self) -> Result<QHLottery> {
        match (self.blocks, self.table) {
            (Some(blocks), None) => {
                if blocks.len() != self.m {
                    return Err(Error::DimensionMismatch { expected: self.m, found: blocks.len() });
                }
                if let Some(b) = blocks.iter().find(|b| b.n() != self.n) {
                    return Err(Error::DimensionMismatch { expected: self.n, found: b.n() });
                }
                validate_qh_lottery(blocks)
            }
            (None, Some(table)) => {
                if table.len() != self.m {
                    return Err(Error::DimensionMismatch { expected: self.m, found: table.len() });
                }
                if let Some(r) = table.iter().find(|r| r.len() != self.n) {
                    return Err(Error::DimensionMismatch { expected: self.n, found: r.len() });
                }
                classical_lottery(&table)
            }
            _ => Err(Error::InvalidInput("a lottery needs exactly one of \"blocks\" or \"table\"".into())),
        }
    }
}

impl From<&QHLottery> for LotteryJson {
    fn from(q: &QHLottery) -> Self {
        LotteryJson { m: q.m(), n: q.n, blocks: Some(q.blocks.clone()), table: None }
    }
}

impl Serialize for QHLottery {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LotteryJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QHLottery {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        LotteryJson::deserialize(d)?.into_lottery().map_err(serde::de::Error::custom)
    }
}
