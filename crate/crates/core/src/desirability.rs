//! Sets of desirable gambles on `D^{m-1} ⊗ H^n` and their dual states.
//!
//! A [`DesirableGambleSet`] stores finitely many assessed gambles; the cone
//! of positive semi-definite non-zero gambles is always implied and never
//! stored. Its dual is the credal set of block-diagonal trace-one positive
//! matrices `R` with `Tr(G_i R) ≥ 0`. A maximal set is represented by its
//! unique dual state, a [`JointStateMatrix`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{self, CoherenceVerdict, ConeSettings, LossCertificate, Shape, StrictVerdict};
use crate::error::{Error, Result};
use crate::hermitian::{default_psd_tol, BlockDiag, HermitianMatrix, OrthogonalDecomposition};
use crate::lottery::ProjectedGamble;
use crate::sampling;
use crate::updating::ConditionalSet;

/// Relative strictness tolerance of `Tr(G R) > 0` for state-backed membership.
pub const STATE_STRICT_TOL: f64 = 1e-9;
/// Diameter below which the credal set counts as a single state.
pub const MAXIMALITY_DIAMETER: f64 = 1e-6;
/// Random probe directions added to the matrix-unit basis.
pub const RANDOM_PROBES: usize = 20;
const PROBE_SEED: u64 = 0x5eed;

/// A finitely generated set of desirable gambles.
#[derive(Debug, Clone)]
pub struct DesirableGambleSet {
    shape: Shape,
    generators: Vec<ProjectedGamble>,
    coherence: Option<CoherenceVerdict>,
    settings: ConeSettings,
}

/// Outcome of [`DesirableGambleSet::assert_gamble`].
#[derive(Debug, Clone)]
pub enum AssertOutcome {
    Accepted(DesirableGambleSet),
    Rejected(LossCertificate),
}

impl DesirableGambleSet {
    /// The vacuous set: only the positive gambles are desirable.
    pub fn vacuous(m: usize, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 prizes, got {m}")));
        }
        let shape = Shape::new(m - 1, n)?;
        Ok(Self { shape, generators: vec![], coherence: None, settings: ConeSettings::default() })
    }

    /// Collect assessments without checking coherence; the check runs on demand.
    pub fn from_generators(m: usize, n: usize, generators: Vec<ProjectedGamble>) -> Result<Self> {
        let mut set = Self::vacuous(m, n)?;
        for g in &generators {
            set.shape.check(g)?;
            if g.frobenius_norm() == 0.0 {
                return Err(Error::ZeroGamble);
            }
        }
        set.generators = generators;
        Ok(set)
    }

    /// Like [`Self::from_generators`] but fails with [`Error::Incoherent`] unless coherent.
    pub fn coherent(m: usize, n: usize, generators: Vec<ProjectedGamble>) -> Result<Self> {
        let mut set = Self::from_generators(m, n, generators)?;
        let v = set.coherence()?;
        if !v.is_coherent() {
            return Err(Error::Incoherent);
        }
        set.coherence = Some(v);
        Ok(set)
    }

    pub fn with_settings(mut self, settings: ConeSettings) -> Self {
        self.settings = settings;
        self.coherence = None;
        self
    }

    pub fn settings(&self) -> &ConeSettings {
        &self.settings
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of prizes.
    pub fn m(&self) -> usize {
        self.shape.blocks + 1
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn generators(&self) -> &[ProjectedGamble] {
        &self.generators
    }

    /// Cached verdict, or a fresh coherence check.
    pub fn coherence(&self) -> Result<CoherenceVerdict> {
        match &self.coherence {
            Some(v) => Ok(v.clone()),
            None => cone::check_avoiding_partial_loss_with(self.shape, &self.generators, &self.settings),
        }
    }

    /// Add `g` if the extended set still avoids partial loss.
    pub fn assert_gamble(&self, g: &ProjectedGamble) -> Result<AssertOutcome> {
        self.shape.check(g)?;
        let norm = g.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::ZeroGamble);
        }
        let class = g.psd_class()?;
        if class == crate::PsdClass::Zero {
            return Err(Error::ZeroGamble);
        }
        let mut generators = self.generators.clone();
        if !class.is_psdnz() {
            generators.push(g.clone());
        } else if let Some(v @ CoherenceVerdict::Coherent(_)) = &self.coherence {
            // Positive gambles are already implied.
            return Ok(AssertOutcome::Accepted(Self { coherence: Some(v.clone()), ..self.clone() }));
        }
        match cone::check_avoiding_partial_loss_with(self.shape, &generators, &self.settings)? {
            v @ CoherenceVerdict::Coherent(_) => Ok(AssertOutcome::Accepted(Self {
                shape: self.shape,
                generators,
                coherence: Some(v),
                settings: self.settings.clone(),
            })),
            CoherenceVerdict::Incoherent(cert) => Ok(AssertOutcome::Rejected(cert)),
        }
    }

    /// Strict desirability of `g`: `g ⪈ 0`, or `g − εI` in the generated cone for some `ε > 0`.
    pub fn is_strictly_desirable(&self, g: &ProjectedGamble) -> Result<StrictVerdict> {
        cone::strict_membership_with(self.shape, &self.generators, g, None, &self.settings)
    }

    /// As [`Self::is_strictly_desirable`] with slack `g − εΔ` for a positive definite `Δ`.
    pub fn is_strictly_desirable_with_slack(&self, g: &ProjectedGamble, slack: &BlockDiag) -> Result<StrictVerdict> {
        cone::strict_membership_with(self.shape, &self.generators, g, Some(slack), &self.settings)
    }

    /// `min Tr(C R)` over the credal set, with the minimiser.
    pub fn lower_prevision(&self, c: &BlockDiag) -> Result<cone::LowerPrevision> {
        cone::lower_prevision(self.shape, &self.generators, c, None, &self.settings.sdp)
    }
}

/// JSON form `{"m", "n", "gambles": [{"blocks": [...]}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessmentJson {
    pub m: usize,
    pub n: usize,
    pub gambles: Vec<ProjectedGamble>,
}

impl AssessmentJson {
    pub fn into_set(self) -> Result<DesirableGambleSet> {
        DesirableGambleSet::from_generators(self.m, self.n, self.gambles)
    }
}

impl From<&DesirableGambleSet> for AssessmentJson {
    fn from(k: &DesirableGambleSet) -> Self {
        AssessmentJson { m: k.m(), n: k.n(), gambles: k.generators.clone() }
    }
}

/// Block-diagonal trace-one positive matrix `Diag(R_1, ..., R_{m-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStateMatrix {
    blocks: BlockDiag,
}

/// Tolerances for accepting a joint state.
pub const STATE_PSD_TOL: f64 = 1e-9;
pub const STATE_TRACE_TOL: f64 = 1e-9;

impl JointStateMatrix {
    pub fn new(blocks: BlockDiag) -> Result<Self> {
        let t = blocks.trace();
        if (t - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidInput(format!("joint state must have unit trace, found {t}")));
        }
        for (j, b) in blocks.blocks().iter().enumerate() {
            let lo = b.eig()?.min();
            if lo < -STATE_PSD_TOL {
                return Err(Error::InvalidInput(format!("block {} of the joint state has eigenvalue {lo:.3e}", j + 1)));
            }
        }
        Ok(Self { blocks })
    }

    /// A density matrix `ρ` as the single-block state (two prizes).
    pub fn from_density(rho: HermitianMatrix) -> Result<Self> {
        Self::new(BlockDiag::from(rho))
    }

    /// `p ⊗ ρ = Diag(p_1 ρ, ..., p_{m-1} ρ)`.
    pub fn product(p: &[f64], rho: &HermitianMatrix) -> Result<Self> {
        Self::new(crate::hermitian::tensor_diag_hermitian(p, rho))
    }

    pub(crate) fn from_blocks_unchecked(blocks: BlockDiag) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &BlockDiag {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &HermitianMatrix {
        self.blocks.block(j)
    }

    pub fn shape(&self) -> Shape {
        Shape::of(&self.blocks)
    }

    /// Number of prizes.
    pub fn m(&self) -> usize {
        self.blocks.count() + 1
    }

    pub fn n(&self) -> usize {
        self.blocks.n()
    }

    /// `Σ_j Tr(G_j R_j)`.
    pub fn expectation(&self, g: &BlockDiag) -> Result<f64> {
        self.blocks.inner(g)
    }
}

impl Serialize for JointStateMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointStateMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let b = BlockDiag::deserialize(d)?;
        JointStateMatrix::new(b).map_err(serde::de::Error::custom)
    }
}

/// Membership oracle for the maximal set induced by a state.
#[derive(Debug, Clone)]
pub struct MaximalSet {
    state: JointStateMatrix,
    strict_tol: f64,
}

/// `G ∈ (R)°` iff `G ⪈ 0` or `Tr(G R) > 0`.
pub fn maximal_from_state(r: &JointStateMatrix) -> MaximalSet {
    MaximalSet { state: r.clone(), strict_tol: STATE_STRICT_TOL }
}

impl MaximalSet {
    pub fn state(&self) -> &JointStateMatrix {
        &self.state
    }

    pub fn with_strict_tol(mut self, tol: f64) -> Self {
        self.strict_tol = tol;
        self
    }

    /// Three-valued membership; `margin` is `Tr(G R)`.
    pub fn verdict(&self, g: &BlockDiag) -> Result<StrictVerdict> {
        let t = self.state.expectation(g)?;
        let norm = g.frobenius_norm();
        let (lo, hi) = g.spectrum_bounds()?;
        let class = crate::hermitian::classify_spectrum(lo, hi, default_psd_tol(norm));
        if class.is_psdnz() {
            return Ok(StrictVerdict::StrictlyDesirable { margin: t });
        }
        if class.is_nsdnz() || class == crate::PsdClass::Zero {
            return Ok(StrictVerdict::NotDesirable { margin: t });
        }
        let rel = t / norm;
        Ok(if rel > self.strict_tol {
            StrictVerdict::StrictlyDesirable { margin: t }
        } else if rel > -self.strict_tol {
            StrictVerdict::Boundary { margin: t }
        } else {
            StrictVerdict::NotDesirable { margin: t }
        })
    }

    pub fn contains(&self, g: &BlockDiag) -> Result<bool> {
        Ok(self.verdict(g)?.is_strict())
    }
}

/// Outcome of [`state_from_maximal`].
#[derive(Debug, Clone)]
pub enum MaximalityVerdict {
    Maximal { state: JointStateMatrix, diameter: f64 },
    NotMaximal { diameter: f64, extreme_points: (BlockDiag, BlockDiag) },
}

/// Directions used to probe the credal set: for every block the diagonal
/// units, then the symmetrised real and imaginary off-diagonal units, then
/// seeded random Hermitian directions.
pub fn probe_directions(shape: Shape) -> Vec<BlockDiag> {
    let n = shape.n;
    let zero = || vec![HermitianMatrix::zeros(n); shape.blocks];
    let mut dirs = Vec::new();
    let unit = |j: usize, m: HermitianMatrix| {
        let mut blocks = zero();
        blocks[j] = m;
        BlockDiag::new(blocks).expect("non-empty block list")
    };
    for j in 0..shape.blocks {
        for a in 0..n {
            let mut d = vec![0.0; n];
            d[a] = 1.0;
            dirs.push(unit(j, HermitianMatrix::from_real_diagonal(&d)));
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..shape.blocks {
        for a in 0..n {
            for b in (a + 1)..n {
                let mut re = vec![vec![0.0; n]; n];
                re[a][b] = s;
                re[b][a] = s;
                dirs.push(unit(j, HermitianMatrix::from_parts(&re, None).expect("symmetric")));
                let zeros = vec![vec![0.0; n]; n];
                let mut im = vec![vec![0.0; n]; n];
                im[a][b] = -s;
                im[b][a] = s;
                dirs.push(unit(j, HermitianMatrix::from_parts(&zeros, Some(&im)).expect("antisymmetric")));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for _ in 0..RANDOM_PROBES {
        let blocks: Vec<HermitianMatrix> = (0..shape.blocks).map(|_| sampling::random_hermitian(&mut rng, n)).collect();
        let d = BlockDiag::new(blocks).expect("non-empty block list");
        let norm = d.frobenius_norm();
        dirs.push(d.scale(1.0 / norm));
    }
    dirs
}

/// Recover the dual state of a (numerically) maximal set.
///
/// The credal set is probed by minimising and maximising `Tr(E R)` along
/// every direction of [`probe_directions`]; it is declared a single state
/// when all extreme points found lie within `1e-6` of each other.
pub fn state_from_maximal(k: &DesirableGambleSet) -> Result<MaximalityVerdict> {
    let shape = k.shape();
    let mut points: Vec<BlockDiag> = Vec::new();
    for dir in probe_directions(shape) {
        for sign in [-1.0, 1.0] {
            let lp = k.lower_prevision(&dir.scale(sign))?;
            points.push(lp.argmin);
        }
    }
    let mut best = (0.0f64, 0usize, 0usize);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = points[i].sub(&points[j])?.frobenius_norm();
            if d > best.0 + 1e-9 {
                best = (d, i, j);
            }
        }
    }
    let (diameter, i, j) = best;
    if diameter <= MAXIMALITY_DIAMETER {
        let mut avg = BlockDiag::zeros(shape.blocks, shape.n);
        for p in &points {
            avg = avg.add_scaled(1.0 / points.len() as f64, p)?;
        }
        let state = JointStateMatrix::new(project_to_states(&avg)?)?;
        return Ok(MaximalityVerdict::Maximal { state, diameter });
    }
    Ok(MaximalityVerdict::NotMaximal {
        diameter,
        extreme_points: (clean_point(&points[i])?, clean_point(&points[j])?),
    })
}

fn clean_point(p: &BlockDiag) -> Result<BlockDiag> {
    project_to_states(p)
}

/// Nearest-in-spirit joint state: clip negative eigenvalues, rescale to unit trace.
pub(crate) fn project_to_states(r: &BlockDiag) -> Result<BlockDiag> {
    let mut blocks = Vec::with_capacity(r.count());
    for b in r.blocks() {
        let e = b.eig()?;
        let clipped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
        blocks.push(e.recompose_with(&clipped));
    }
    let out = BlockDiag::new(blocks)?;
    let t = out.trace();
    if !(t > 0.0) {
        return Err(Error::InvalidInput("matrix has no positive part".into()));
    }
    Ok(out.scale(1.0 / t))
}

/// Payoffs `γ_i = π_i† G π_i` along the projectors of `od`.
pub fn evaluate_payoff(g: &HermitianMatrix, od: &OrthogonalDecomposition) -> Result<Vec<f64>> {
    if g.n() != od.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), found: od.n() });
    }
    od.projectors().iter().map(|p| g.quadratic_form(p.vector())).collect()
}

/// Empirical payoff statistics of one assessed gamble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffStats {
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    /// Exact expectation `Tr(G R)`.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub seed: u64,
    pub gambles: Vec<PayoffStats>,
}

/// Born-rule Monte Carlo of the assessed gambles under `state`.
///
/// Outcomes are the eigenvectors of each block of the state, drawn with
/// probability equal to their eigenvalue; a gamble pays `v† G_j v` on
/// outcome `(j, v)`.
pub fn simulate_no_sure_loss(
    k: &DesirableGambleSet,
    state: &JointStateMatrix,
    trials: usize,
    seed: u64,
) -> Result<SimulationReport> {
    k.shape().check(state.blocks())?;
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let mut worst = f64::INFINITY;
    for g in k.generators() {
        let t = state.expectation(g)?;
        worst = worst.min(t / g.frobenius_norm());
    }
    if worst < -STATE_STRICT_TOL {
        return Err(Error::StateNotInDual { min_payoff: worst });
    }
    let mut weights = Vec::new();
    let mut outcomes = Vec::new();
    for (j, b) in state.blocks().blocks().iter().enumerate() {
        let e = b.eig()?;
        for (val, vec) in e.values.iter().zip(e.vectors) {
            weights.push(val.max(0.0));
            outcomes.push((j, vec));
        }
    }
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidInput(format!("state weights: {e}")))?;
    let table: Vec<Vec<f64>> = k
        .generators()
        .iter()
        .map(|g| outcomes.iter().map(|(j, v)| g.block(*j).quadratic_form(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = vec![0.0; table.len()];
    let mut sq = vec![0.0; table.len()];
    let mut mins = vec![f64::INFINITY; table.len()];
    for _ in 0..trials {
        let o = dist.sample(&mut rng);
        for (g, row) in table.iter().enumerate() {
            let x = row[o];
            sums[g] += x;
            sq[g] += x * x;
            mins[g] = mins[g].min(x);
        }
    }
    let nt = trials as f64;
    let gambles = k
        .generators()
        .iter()
        .enumerate()
        .map(|(g, gamble)| {
            let mean = sums[g] / nt;
            let var = if trials > 1 { ((sq[g] - nt * mean * mean) / (nt - 1.0)).max(0.0) } else { 0.0 };
            Ok(PayoffStats { mean, std_error: (var / nt).sqrt(), min: mins[g], expected: state.expectation(gamble)? })
        })
        .collect::<Result<_>>()?;
    Ok(SimulationReport { trials, seed, gambles })
}

/// What a preference relation or conditional set consults for strict desirability.
#[derive(Debug, Clone)]
pub enum BeliefModel {
    /// Finitely generated assessments (possibly incomplete).
    Assessments(DesirableGambleSet),
    /// The maximal set of a joint state (complete).
    Maximal(JointStateMatrix),
    /// A set conditioned on a projective event.
    Conditional(Box<ConditionalSet>),
}

impl BeliefModel {
    pub fn shape(&self) -> Shape {
        match self {
            BeliefModel::Assessments(k) => k.shape(),
            BeliefModel::Maximal(r) => r.shape(),
            BeliefModel::Conditional(c) => c.shape(),
        }
    }

    pub fn verdict(&self, g: &BlockDiag) -> Result<StrictVerdict> {
        match self {
            BeliefModel::Assessments(k) => k.is_strictly_desirable(g),
            BeliefModel::Maximal(r) => maximal_from_state(r).verdict(g),
            BeliefModel::Conditional(c) => c.verdict(g),
        }
    }

    /// Upper probability `max Tr((I ⊗ Π) R)` of a projective event over the credal set.
    pub fn upper_probability(&self, event: &crate::hermitian::Projector) -> Result<f64> {
        let shape = self.shape();
        let pi = event.matrix();
        let e = BlockDiag::new(vec![pi; shape.blocks])?;
        match self {
            BeliefModel::Maximal(r) => r.expectation(&e),
            BeliefModel::Assessments(k) => Ok(-k.lower_prevision(&e.scale(-1.0))?.value),
            BeliefModel::Conditional(c) => Ok(c.upper_probability(event)),
        }
    }
}
