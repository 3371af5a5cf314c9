//! Feasibility and optimisation over `cone(G_1, ..., G_k) + PSD`.
//!
//! Every question reduces to one of two semidefinite programs over
//! block-diagonal trace-one matrices `R` (blocks of size `n`, one per prize
//! slot), solved on the real symmetric embedding:
//!
//! * **max-min margin**: `max_R min_i Tr(G_i R)`, whose dual is
//!   `min_{λ ∈ simplex} λmax(Σ λ_i G_i)`. A positive optimum certifies that
//!   the assessments avoid partial loss (a density `R` witnesses it); a
//!   non-positive one yields weights `λ` with `Σ λ_i G_i ⪯ 0`.
//! * **lower prevision**: `min Tr(C R)` over the credal set
//!   `{R ⪰ 0, Tr(N R) = 1, Tr(G_i R) ≥ 0}`; with `C = G` this is the largest
//!   `ε` such that `G − ε N` lies in the closed cone.

use crate::error::{Error, Result};
use crate::hermitian::{default_psd_tol, BlockDiag, HermitianMatrix, PsdClass};
use crate::sdp::{solve_sdp, BlockVector, SdpProblem, SdpSettings, SdpStatus, Structure};

/// Normalised margin a coherent set must exceed.
pub const COHERENCE_TOL: f64 = 1e-9;
/// Default relative strictness threshold for desirability.
pub const DEFAULT_EPS_MIN: f64 = 1e-8;
/// Relative tolerance for re-validating certificates.
pub const CERTIFICATE_TOL: f64 = 1e-7;

/// Number of blocks and block dimension shared by all gambles of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub blocks: usize,
    pub n: usize,
}

impl Shape {
    pub fn new(blocks: usize, n: usize) -> Result<Self> {
        if blocks == 0 || n == 0 {
            return Err(Error::InvalidInput("gambles need at least one block of positive dimension".into()));
        }
        Ok(Self { blocks, n })
    }

    pub fn of(g: &BlockDiag) -> Self {
        Self { blocks: g.count(), n: g.n() }
    }

    pub fn check(&self, g: &BlockDiag) -> Result<()> {
        if g.count() != self.blocks {
            return Err(Error::DimensionMismatch { expected: self.blocks, found: g.count() });
        }
        if g.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: g.n() });
        }
        Ok(())
    }

    /// `I_{blocks} ⊗ I_n`.
    pub fn identity(&self) -> BlockDiag {
        BlockDiag::identity(self.blocks, self.n)
    }

    /// Total dimension `blocks * n`.
    pub fn dim(&self) -> usize {
        self.blocks * self.n
    }
}

#[derive(Debug, Clone)]
pub struct ConeSettings {
    pub coherence_tol: f64,
    pub eps_min: f64,
    pub sdp: SdpSettings,
}

impl Default for ConeSettings {
    fn default() -> Self {
        Self { coherence_tol: COHERENCE_TOL, eps_min: DEFAULT_EPS_MIN, sdp: SdpSettings::default() }
    }
}

/// A trace-one positive `R` together with `min_i Tr(G_i R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub rho: BlockDiag,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `Σ λ_i G_i` is negative semi-definite and non-zero.
    PartialLoss,
    /// `Σ λ_i G_i = 0`: the cone contains the origin.
    Pointed,
}

/// Nonnegative weights whose combination of the assessments is `⪯ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossCertificate {
    pub weights: Vec<f64>,
    pub combo: BlockDiag,
    pub kind: LossKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoherenceVerdict {
    Coherent(DualCertificate),
    Incoherent(LossCertificate),
}

impl CoherenceVerdict {
    pub fn is_coherent(&self) -> bool {
        matches!(self, CoherenceVerdict::Coherent(_))
    }
}

/// Three-valued answer to "is `G − εI` in the cone for some `ε > 0`?".
///
/// `margin` is the optimal `ε` (in the units of `G`); for positive
/// semi-definite gambles it is the smallest eigenvalue, a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrictVerdict {
    StrictlyDesirable { margin: f64 },
    Boundary { margin: f64 },
    NotDesirable { margin: f64 },
}

impl StrictVerdict {
    pub fn margin(&self) -> f64 {
        match *self {
            StrictVerdict::StrictlyDesirable { margin }
            | StrictVerdict::Boundary { margin }
            | StrictVerdict::NotDesirable { margin } => margin,
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, StrictVerdict::StrictlyDesirable { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            StrictVerdict::StrictlyDesirable { .. } => "StrictlyDesirable",
            StrictVerdict::Boundary { .. } => "Boundary",
            StrictVerdict::NotDesirable { .. } => "NotDesirable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMode {
    AvoidPartialLoss,
    Membership,
    DualCertificate,
}

/// A finitely generated cone question.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    pub shape: Shape,
    pub generators: Vec<BlockDiag>,
    pub target: Option<BlockDiag>,
    pub mode: ConeMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeAnswer {
    Coherence(CoherenceVerdict),
    Membership(StrictVerdict),
    Certificate(DualCertificate),
}

impl ConeProblem {
    pub fn solve(&self, settings: &ConeSettings) -> Result<ConeAnswer> {
        match self.mode {
            ConeMode::AvoidPartialLoss => {
                check_avoiding_partial_loss_with(self.shape, &self.generators, settings).map(ConeAnswer::Coherence)
            }
            ConeMode::DualCertificate => {
                best_dual_certificate_with(self.shape, &self.generators, settings).map(ConeAnswer::Certificate)
            }
            ConeMode::Membership => {
                let target = self
                    .target
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("membership needs a target gamble".into()))?;
                strict_membership_with(self.shape, &self.generators, target, None, settings).map(ConeAnswer::Membership)
            }
        }
    }
}

/// `½ · scale · embedding(G_j)` for every block.
fn embedded_blocks(g: &BlockDiag, scale: f64) -> Vec<Vec<f64>> {
    g.blocks().iter().map(|b| b.real_embedding().into_iter().map(|v| 0.5 * scale * v).collect()).collect()
}

fn extract_state(x: &BlockVector, n: usize) -> BlockDiag {
    BlockDiag::new(x.psd.iter().map(|w| HermitianMatrix::from_real_embedding(w, n)).collect())
        .expect("solver blocks match the problem shape")
}

/// Clip negative eigenvalues and rescale to unit trace.
fn clean_state(r: &BlockDiag) -> Result<BlockDiag> {
    let mut blocks = Vec::with_capacity(r.count());
    for b in r.blocks() {
        let e = b.eig()?;
        let clipped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
        blocks.push(e.recompose_with(&clipped));
    }
    let out = BlockDiag::new(blocks)?;
    let t = out.trace();
    if !(t > 0.0) {
        return Err(Error::SolverNumericalFailure {
            reason: "recovered state has no positive part".into(),
            gap: f64::NAN,
            primal_res: f64::NAN,
            dual_res: f64::NAN,
        });
    }
    Ok(out.scale(1.0 / t))
}

fn check_generators(shape: Shape, generators: &[BlockDiag]) -> Result<()> {
    for g in generators {
        shape.check(g)?;
    }
    Ok(())
}

struct MarginSolution {
    /// Optimal value for the generators scaled by `1/scale`.
    normalized_margin: f64,
    state: BlockDiag,
    lambda: Vec<f64>,
}

/// `max_R min_i Tr(G_i R) / s` with `s = max_i ‖G_i‖_F`.
fn solve_margin(shape: Shape, generators: &[BlockDiag], settings: &SdpSettings) -> Result<MarginSolution> {
    let k = generators.len();
    let scale = generators.iter().map(BlockDiag::frobenius_norm).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::ZeroGamble);
    }
    let structure = Structure { psd: vec![2 * shape.n; shape.blocks], lp: k };
    let last = embedded_blocks(&generators[k - 1], 1.0 / scale);
    let mut c = BlockVector::zeros(&structure);
    c.psd = last.iter().map(|b| b.iter().map(|v| -v).collect()).collect();
    c.lp[k - 1] = 1.0;

    let mut constraints = Vec::with_capacity(k);
    let mut a_tau = BlockVector::identity(&structure).scaled(-0.5);
    a_tau.lp.iter_mut().for_each(|v| *v = 0.0);
    constraints.push(a_tau);
    for (i, g) in generators[..k - 1].iter().enumerate() {
        let mut a = BlockVector::zeros(&structure);
        a.psd = embedded_blocks(g, 1.0 / scale)
            .into_iter()
            .zip(&last)
            .map(|(gi, gk)| gi.iter().zip(gk).map(|(x, y)| x - y).collect())
            .collect();
        a.lp[i] = -1.0;
        a.lp[k - 1] = 1.0;
        constraints.push(a);
    }
    let mut b = vec![0.0; k];
    b[0] = -1.0;
    let problem = SdpProblem { structure, c, constraints, b };
    let sol = solve_sdp(&problem, settings)?;
    if sol.status != SdpStatus::Optimal {
        // Both sides of this program are strictly feasible by construction.
        return Err(Error::SolverNumericalFailure {
            reason: format!("margin program reported {:?}", sol.status),
            gap: sol.gap,
            primal_res: sol.primal_residual,
            dual_res: sol.dual_residual,
        });
    }
    let mut lambda: Vec<f64> = sol.y[1..].to_vec();
    lambda.push(1.0 - lambda.iter().sum::<f64>());
    Ok(MarginSolution { normalized_margin: sol.y[0], state: extract_state(&sol.x, shape.n), lambda })
}

/// Decide whether `cone(generators) + PSDNZ` avoids partial loss (and is non-pointed).
pub fn check_avoiding_partial_loss(shape: Shape, generators: &[BlockDiag]) -> Result<CoherenceVerdict> {
    check_avoiding_partial_loss_with(shape, generators, &ConeSettings::default())
}

pub fn check_avoiding_partial_loss_with(
    shape: Shape,
    generators: &[BlockDiag],
    settings: &ConeSettings,
) -> Result<CoherenceVerdict> {
    check_generators(shape, generators)?;
    if generators.is_empty() {
        return Ok(CoherenceVerdict::Coherent(vacuous_certificate(shape)));
    }
    let sol = solve_margin(shape, generators, &settings.sdp)?;
    if sol.normalized_margin > settings.coherence_tol {
        let cert = certificate_from(&sol.state, generators)?;
        validate_dual_certificate(&cert, generators)?;
        if cert.margin <= 0.0 {
            return Err(Error::SolverNumericalFailure {
                reason: format!("positive optimal margin but certificate margin {:.3e}", cert.margin),
                gap: f64::NAN,
                primal_res: f64::NAN,
                dual_res: f64::NAN,
            });
        }
        return Ok(CoherenceVerdict::Coherent(cert));
    }
    loss_certificate(&sol.lambda, generators).map(CoherenceVerdict::Incoherent)
}

fn vacuous_certificate(shape: Shape) -> DualCertificate {
    DualCertificate { rho: shape.identity().scale(1.0 / shape.dim() as f64), margin: 1.0 }
}

fn certificate_from(state: &BlockDiag, generators: &[BlockDiag]) -> Result<DualCertificate> {
    let rho = clean_state(state)?;
    let margin = generators.iter().map(|g| g.inner_unchecked(&rho)).fold(f64::INFINITY, f64::min);
    Ok(DualCertificate { rho, margin })
}

/// Re-check trace, positivity and margin consistency with the eigensolver.
pub fn validate_dual_certificate(cert: &DualCertificate, generators: &[BlockDiag]) -> Result<()> {
    let fail = |reason: String| Error::SolverNumericalFailure { reason, gap: f64::NAN, primal_res: f64::NAN, dual_res: f64::NAN };
    if (cert.rho.trace() - 1.0).abs() > 1e-9 {
        return Err(fail(format!("certificate trace {}", cert.rho.trace())));
    }
    let (lo, _) = cert.rho.spectrum_bounds()?;
    if lo < -1e-9 {
        return Err(fail(format!("certificate has eigenvalue {lo:.3e}")));
    }
    if !generators.is_empty() {
        let m = generators.iter().map(|g| g.inner_unchecked(&cert.rho)).fold(f64::INFINITY, f64::min);
        let scale = generators.iter().map(BlockDiag::frobenius_norm).fold(1.0, f64::max);
        if (m - cert.margin).abs() > 1e-8 * scale {
            return Err(fail(format!("certificate margin {} inconsistent with state ({m})", cert.margin)));
        }
    }
    Ok(())
}

fn loss_certificate(lambda: &[f64], generators: &[BlockDiag]) -> Result<LossCertificate> {
    let mut weights: Vec<f64> = lambda.iter().map(|v| v.max(0.0)).collect();
    let top = weights.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::SolverNumericalFailure {
            reason: "dual weights vanished".into(),
            gap: f64::NAN,
            primal_res: f64::NAN,
            dual_res: f64::NAN,
        });
    }
    weights.iter_mut().for_each(|w| {
        *w /= top;
        if *w < 1e-12 {
            *w = 0.0;
        }
    });
    let mut combo = BlockDiag::zeros(generators[0].count(), generators[0].n());
    for (w, g) in weights.iter().zip(generators) {
        if *w > 0.0 {
            combo = combo.add_scaled(*w, g)?;
        }
    }
    let cert = LossCertificate { kind: LossKind::PartialLoss, weights, combo };
    let kind = validate_loss_certificate(&cert, generators)?;
    Ok(LossCertificate { kind, ..cert })
}

/// Confirm `Σ λ_i G_i ⪯ 0` up to `1e-7 · Σ λ_i ‖G_i‖_F` and classify the loss.
pub fn validate_loss_certificate(cert: &LossCertificate, generators: &[BlockDiag]) -> Result<LossKind> {
    let fail = |reason: String| Error::SolverNumericalFailure { reason, gap: f64::NAN, primal_res: f64::NAN, dual_res: f64::NAN };
    if cert.weights.len() != generators.len() || cert.weights.iter().any(|w| *w < 0.0) {
        return Err(fail("loss weights must be nonnegative, one per generator".into()));
    }
    let mass: f64 = cert.weights.iter().zip(generators).map(|(w, g)| w * g.frobenius_norm()).sum();
    if !(mass > 0.0) {
        return Err(fail("loss weights are all zero".into()));
    }
    let band = CERTIFICATE_TOL * mass;
    let (_, hi) = cert.combo.spectrum_bounds()?;
    if hi > band {
        return Err(fail(format!("combination has eigenvalue {hi:.3e} above band {band:.3e}")));
    }
    if cert.combo.frobenius_norm() <= band {
        Ok(LossKind::Pointed)
    } else {
        Ok(LossKind::PartialLoss)
    }
}

/// The trace-one positive `R` maximising `min_i Tr(G_i R)`, with that value.
///
/// An empty generator list returns `I / dim` with the sentinel margin `+1`.
pub fn best_dual_certificate(shape: Shape, generators: &[BlockDiag]) -> Result<DualCertificate> {
    best_dual_certificate_with(shape, generators, &ConeSettings::default())
}

pub fn best_dual_certificate_with(shape: Shape, generators: &[BlockDiag], settings: &ConeSettings) -> Result<DualCertificate> {
    check_generators(shape, generators)?;
    if generators.is_empty() {
        return Ok(vacuous_certificate(shape));
    }
    let sol = solve_margin(shape, generators, &settings.sdp)?;
    let cert = certificate_from(&sol.state, generators)?;
    validate_dual_certificate(&cert, generators)?;
    Ok(cert)
}

/// Optimum of `min Tr(C R)` over the credal set.
#[derive(Debug, Clone)]
pub struct LowerPrevision {
    pub value: f64,
    pub argmin: BlockDiag,
}

/// `min Tr(C R)` subject to `Tr(N R) = 1`, `Tr(G_i R) ≥ 0`, `R ⪰ 0`.
///
/// `normalizer` defaults to the identity. Fails with [`Error::Incoherent`]
/// when the constraint set is empty.
pub fn lower_prevision(
    shape: Shape,
    generators: &[BlockDiag],
    objective: &BlockDiag,
    normalizer: Option<&BlockDiag>,
    settings: &SdpSettings,
) -> Result<LowerPrevision> {
    check_generators(shape, generators)?;
    shape.check(objective)?;
    let ident = shape.identity();
    let normalizer = normalizer.unwrap_or(&ident);
    shape.check(normalizer)?;
    let k = generators.len();
    let structure = Structure { psd: vec![2 * shape.n; shape.blocks], lp: k };

    let c_scale = objective.frobenius_norm();
    let mut c = BlockVector::zeros(&structure);
    if c_scale > 0.0 {
        c.psd = embedded_blocks(objective, 1.0 / c_scale);
    }
    let mut constraints = Vec::with_capacity(k + 1);
    let mut a0 = BlockVector::zeros(&structure);
    a0.psd = embedded_blocks(normalizer, 1.0);
    constraints.push(a0);
    for (i, g) in generators.iter().enumerate() {
        let mut a = BlockVector::zeros(&structure);
        let s = g.frobenius_norm();
        if !(s > 0.0) {
            return Err(Error::ZeroGamble);
        }
        a.psd = embedded_blocks(g, 1.0 / s);
        a.lp[i] = -1.0;
        constraints.push(a);
    }
    let mut b = vec![0.0; k + 1];
    b[0] = 1.0;
    let problem = SdpProblem { structure, c, constraints, b };
    let sol = solve_sdp(&problem, settings)?;
    match sol.status {
        SdpStatus::Optimal => {
            let scale = if c_scale > 0.0 { c_scale } else { 1.0 };
            Ok(LowerPrevision {
                value: 0.5 * (sol.primal_objective + sol.dual_objective) * scale,
                argmin: extract_state(&sol.x, shape.n),
            })
        }
        SdpStatus::PrimalInfeasible => Err(Error::Incoherent),
        SdpStatus::DualInfeasible => Err(Error::SolverNumericalFailure {
            reason: "lower prevision unbounded below".into(),
            gap: sol.gap,
            primal_res: sol.primal_residual,
            dual_res: sol.dual_residual,
        }),
    }
}

/// Is `G − εI` in `cone(generators) + PSD` for some `ε ≥ eps_min · ‖G‖_F`?
pub fn strict_membership(shape: Shape, generators: &[BlockDiag], g: &BlockDiag, eps_min: f64) -> Result<StrictVerdict> {
    let settings = ConeSettings { eps_min, ..ConeSettings::default() };
    strict_membership_with(shape, generators, g, None, &settings)
}

/// Strict membership with slack direction `slack` (`I` when `None`).
pub fn strict_membership_with(
    shape: Shape,
    generators: &[BlockDiag],
    g: &BlockDiag,
    slack: Option<&BlockDiag>,
    settings: &ConeSettings,
) -> Result<StrictVerdict> {
    if !(settings.eps_min > 0.0) {
        return Err(Error::Range { value: settings.eps_min, range: "(0, inf)" });
    }
    check_generators(shape, generators)?;
    shape.check(g)?;
    let norm = g.frobenius_norm();
    let (lo, hi) = g.spectrum_bounds()?;
    match crate::hermitian::classify_spectrum(lo, hi, default_psd_tol(norm)) {
        PsdClass::Zero => return Ok(StrictVerdict::NotDesirable { margin: 0.0 }),
        c if c.is_psdnz() => return Ok(StrictVerdict::StrictlyDesirable { margin: lo.max(0.0) }),
        c if c.is_nsdnz() => return Ok(StrictVerdict::NotDesirable { margin: hi.min(0.0) }),
        _ => {}
    }
    let lp = lower_prevision(shape, generators, g, slack, &settings.sdp)?;
    let rel = lp.value / norm;
    Ok(if rel >= settings.eps_min {
        StrictVerdict::StrictlyDesirable { margin: lp.value }
    } else if rel > -settings.eps_min {
        StrictVerdict::Boundary { margin: lp.value }
    } else {
        StrictVerdict::NotDesirable { margin: lp.value }
    })
}
