//! Coherent preferences over quantum horse lotteries.
//!
//! `P ≻ Q` holds exactly when `Proj(P − Q)` is strictly desirable in the
//! backing model. A relation backed by a joint state is complete; one backed
//! by finitely many assessments is in general partial.

use serde::{Deserialize, Serialize};

use crate::cone::StrictVerdict;
use crate::desirability::{AssessmentJson, BeliefModel, DesirableGambleSet, JointStateMatrix};
use crate::error::{Error, Result};
use crate::hermitian::{classify_spectrum, default_psd_tol, BlockDiag, HermitianMatrix, OrthogonalDecomposition};
use crate::lottery::{
    make_simple_lottery, mixture, uniform_lottery, validate_qh_lottery, worst_lottery, PrizePmf, QHLottery,
};
use crate::cone::LossCertificate;
use crate::sampling;

/// Bisection steps used by [`weak_archimedean_witness`].
pub const WITNESS_BISECTION_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreferenceTag {
    Prefers,
    NotPrefers,
    Boundary,
}

/// Which test decided the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    /// `Proj(P − Q) ⪈ 0`.
    Objective,
    /// Strict membership in a finitely generated cone.
    Strict,
    /// Sign of `Tr(Proj(P − Q) R)` for a representing state.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVerdict {
    #[serde(rename = "verdict")]
    pub tag: PreferenceTag,
    pub channel: Channel,
    pub margin: f64,
}

impl PreferenceVerdict {
    pub fn is_prefers(&self) -> bool {
        self.tag == PreferenceTag::Prefers
    }
}

/// Anything that answers "is `P` strictly preferred to `Q`?".
pub trait PreferenceOracle {
    /// `(m, n)`.
    fn dims(&self) -> (usize, usize);
    fn prefers(&self, p: &QHLottery, q: &QHLottery) -> Result<PreferenceVerdict>;
}

fn check_dims(dims: (usize, usize), p: &QHLottery, q: &QHLottery) -> Result<()> {
    for l in [p, q] {
        if l.m() != dims.0 {
            return Err(Error::DimensionMismatch { expected: dims.0, found: l.m() });
        }
        if l.n() != dims.1 {
            return Err(Error::DimensionMismatch { expected: dims.1, found: l.n() });
        }
    }
    Ok(())
}

fn objective_class(g: &BlockDiag) -> Result<crate::PsdClass> {
    let (lo, hi) = g.spectrum_bounds()?;
    Ok(classify_spectrum(lo, hi, default_psd_tol(g.frobenius_norm())))
}

/// `Proj(P − Q) ⪈ 0`.
pub fn objectively_prefers(p: &QHLottery, q: &QHLottery) -> Result<bool> {
    let diff = p.difference(q)?.project();
    Ok(objective_class(&diff)?.is_psdnz())
}

/// The objective relation `⊳`, included in every coherent relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveRelation {
    pub m: usize,
    pub n: usize,
}

impl PreferenceOracle for ObjectiveRelation {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn prefers(&self, p: &QHLottery, q: &QHLottery) -> Result<PreferenceVerdict> {
        check_dims(self.dims(), p, q)?;
        let diff = p.difference(q)?.project();
        let (lo, hi) = diff.spectrum_bounds()?;
        let objective = classify_spectrum(lo, hi, default_psd_tol(diff.frobenius_norm())).is_psdnz();
        let tag = if objective { PreferenceTag::Prefers } else { PreferenceTag::NotPrefers };
        Ok(PreferenceVerdict { tag, channel: Channel::Objective, margin: lo })
    }
}

/// A coherent preference relation backed by a belief model.
#[derive(Debug, Clone)]
pub struct PreferenceRelation {
    backing: BeliefModel,
}

impl PreferenceRelation {
    /// Partial relation from coherent assessments; [`Error::Incoherent`] otherwise.
    pub fn from_assessments(k: DesirableGambleSet) -> Result<Self> {
        if !k.coherence()?.is_coherent() {
            return Err(Error::Incoherent);
        }
        Ok(Self { backing: BeliefModel::Assessments(k) })
    }

    pub(crate) fn from_model(backing: BeliefModel) -> Self {
        Self { backing }
    }

    pub fn backing(&self) -> &BeliefModel {
        &self.backing
    }

    pub fn is_complete(&self) -> bool {
        match &self.backing {
            BeliefModel::Maximal(_) => true,
            BeliefModel::Assessments(_) => false,
            BeliefModel::Conditional(c) => c.updated_state().is_some(),
        }
    }

    pub fn m(&self) -> usize {
        self.backing.shape().blocks + 1
    }

    pub fn n(&self) -> usize {
        self.backing.shape().n
    }
}

/// Complete relation `P ≻ Q ⟺ P ⊳ Q or Tr(Proj(P − Q) R) > 0`.
pub fn represent_complete(r: &JointStateMatrix) -> PreferenceRelation {
    PreferenceRelation { backing: BeliefModel::Maximal(r.clone()) }
}

impl PreferenceOracle for PreferenceRelation {
    fn dims(&self) -> (usize, usize) {
        (self.m(), self.n())
    }

    fn prefers(&self, p: &QHLottery, q: &QHLottery) -> Result<PreferenceVerdict> {
        prefers(self, p, q)
    }
}

/// Decide `P ≻ Q`.
pub fn prefers(rel: &PreferenceRelation, p: &QHLottery, q: &QHLottery) -> Result<PreferenceVerdict> {
    check_dims(rel.dims(), p, q)?;
    let fallback = if rel.is_complete() { Channel::Dual } else { Channel::Strict };
    let diff = p.difference(q)?.project();
    if diff.frobenius_norm() == 0.0 {
        return Ok(PreferenceVerdict { tag: PreferenceTag::NotPrefers, channel: fallback, margin: 0.0 });
    }
    let objective = objective_class(&diff)?.is_psdnz();
    let verdict = rel.backing.verdict(&diff)?;
    let tag = match verdict {
        StrictVerdict::StrictlyDesirable { .. } => PreferenceTag::Prefers,
        StrictVerdict::Boundary { .. } => PreferenceTag::Boundary,
        StrictVerdict::NotDesirable { .. } => PreferenceTag::NotPrefers,
    };
    let channel = if objective { Channel::Objective } else { fallback };
    Ok(PreferenceVerdict { tag, channel, margin: verdict.margin() })
}

/// Outcome of [`relation_from_pairs`].
#[derive(Debug, Clone)]
pub enum PairsOutcome {
    Coherent(PreferenceRelation),
    Incoherent(LossCertificate),
}

/// Relation generated by asserted strict preferences `P ≻ Q`.
pub fn relation_from_pairs(pairs: &[(QHLottery, QHLottery)]) -> Result<PairsOutcome> {
    let (first, _) = pairs.first().ok_or_else(|| Error::InvalidInput("no preference pairs given".into()))?;
    let (m, n) = (first.m(), first.n());
    let mut generators = Vec::with_capacity(pairs.len());
    for (i, (p, q)) in pairs.iter().enumerate() {
        check_dims((m, n), p, q)?;
        let g = p.difference(q)?.project();
        if g.frobenius_norm() == 0.0 {
            return Err(Error::PreconditionViolated(format!("pair {i} compares a lottery with itself")));
        }
        generators.push(g);
    }
    let k = DesirableGambleSet::from_generators(m, n, generators)?;
    match k.coherence()? {
        crate::cone::CoherenceVerdict::Coherent(_) => Ok(PairsOutcome::Coherent(PreferenceRelation::from_assessments(k)?)),
        crate::cone::CoherenceVerdict::Incoherent(cert) => Ok(PairsOutcome::Incoherent(cert)),
    }
}

/// Outcome of [`weak_archimedean_witness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WitnessOutcome {
    /// `αP + (1 − α)Z ≻ Q`.
    Witness { alpha: f64 },
    /// No α found at the bisection resolution; `boundary` marks a zero-margin comparison.
    NoWitness { boundary: bool },
}

/// Find `α ∈ (0, 1)` with `αP + (1 − α)Z ≻ Q` for `P ≻ Q`, `P ⋫ Q`.
pub fn weak_archimedean_witness(rel: &dyn PreferenceOracle, p: &QHLottery, q: &QHLottery) -> Result<WitnessOutcome> {
    if objectively_prefers(p, q)? {
        return Err(Error::PreconditionViolated("P is objectively preferred to Q".into()));
    }
    match rel.prefers(p, q)?.tag {
        PreferenceTag::Prefers => {}
        PreferenceTag::Boundary => return Ok(WitnessOutcome::NoWitness { boundary: true }),
        PreferenceTag::NotPrefers => return Err(Error::PreconditionViolated("P is not preferred to Q".into())),
    }
    let z = worst_lottery(p.m(), p.n())?;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..WITNESS_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if rel.prefers(&mixture(mid, p, &z)?, q)?.is_prefers() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi < 1.0 {
        Ok(WitnessOutcome::Witness { alpha: hi })
    } else {
        Ok(WitnessOutcome::NoWitness { boundary: false })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    Irreflexivity,
    Asymmetry,
    Transitivity,
    MixtureIndependence,
    WeakArchimedean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// Re-running the sampler with this seed reproduces the triple.
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub seed: u64,
    /// Number of applicable checks per axiom.
    pub checks: Vec<(Axiom, usize)>,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.checks.iter().find(|(a, _)| *a == axiom).map_or(0, |(_, c)| *c)
    }
}

/// A sampled triple `(P, Q, R)` with mixing weight `α`.
#[derive(Debug, Clone)]
pub struct AxiomSample {
    pub p: QHLottery,
    pub q: QHLottery,
    pub r: QHLottery,
    pub alpha: f64,
}

/// Draw the triple used for sample `seed`: random POVMs and simple lotteries mixed.
pub fn sample_triple(m: usize, n: usize, seed: u64) -> Result<AxiomSample> {
    use rand::Rng;
    let mut rng = sampling::rng(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<QHLottery> {
        if rng.random_bool(0.5) {
            sampling::random_lottery(rng, m, n)
        } else {
            sampling::random_simple_lottery(rng, m, n)
        }
    };
    let p = draw(&mut rng)?;
    let q = draw(&mut rng)?;
    let r = draw(&mut rng)?;
    let alpha = 1.0 - rng.random::<f64>();
    Ok(AxiomSample { p, q, r, alpha })
}

/// Sampled check of irreflexivity, asymmetry, transitivity, mixture
/// independence (both directions) and weak Archimedeanity. Report only.
pub fn check_axioms_sampled(rel: &dyn PreferenceOracle, count: usize, seed: u64) -> Result<AxiomReport> {
    let (m, n) = rel.dims();
    let mut checks = [0usize; 5];
    let mut violations = Vec::new();
    let mut flag = |axiom: Axiom, s: u64, detail: String| violations.push(AxiomViolation { axiom, seed: s, detail });
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let AxiomSample { p, q, r, alpha } = sample_triple(m, n, s)?;
        checks[0] += 1;
        if rel.prefers(&p, &p)?.is_prefers() {
            flag(Axiom::Irreflexivity, s, "P ≻ P".into());
        }
        let pq = rel.prefers(&p, &q)?;
        let qp = rel.prefers(&q, &p)?;
        checks[1] += 1;
        if pq.is_prefers() && qp.is_prefers() {
            flag(Axiom::Asymmetry, s, format!("P ≻ Q and Q ≻ P (margins {}, {})", pq.margin, qp.margin));
        }
        let qr = rel.prefers(&q, &r)?;
        if pq.is_prefers() && qr.is_prefers() {
            checks[2] += 1;
            let pr = rel.prefers(&p, &r)?;
            if !pr.is_prefers() {
                flag(Axiom::Transitivity, s, format!("P ≻ Q ≻ R but P vs R is {:?} (margin {})", pr.tag, pr.margin));
            }
        }
        let mp = mixture(alpha, &p, &r)?;
        let mq = mixture(alpha, &q, &r)?;
        let mixed = rel.prefers(&mp, &mq)?;
        if pq.tag != PreferenceTag::Boundary && mixed.tag != PreferenceTag::Boundary {
            checks[3] += 1;
            if pq.is_prefers() != mixed.is_prefers() {
                flag(
                    Axiom::MixtureIndependence,
                    s,
                    format!("α = {alpha}: P vs Q is {:?} but mixtures give {:?}", pq.tag, mixed.tag),
                );
            }
        }
        if pq.is_prefers() && pq.channel != Channel::Objective && !objectively_prefers(&p, &q)? {
            checks[4] += 1;
            if let WitnessOutcome::NoWitness { .. } = weak_archimedean_witness(rel, &p, &q)? {
                flag(Axiom::WeakArchimedean, s, format!("no α for P ≻ Q (margin {})", pq.margin));
            }
        }
    }
    let axioms = [Axiom::Irreflexivity, Axiom::Asymmetry, Axiom::Transitivity, Axiom::MixtureIndependence, Axiom::WeakArchimedean];
    Ok(AxiomReport { samples: count, seed, checks: axioms.into_iter().zip(checks).collect(), violations })
}

/// Lotteries showing that `⊳` violates full Archimedeanity.
#[derive(Debug, Clone)]
pub struct ArchimedeanCounterexample {
    /// Preferred lottery of the premise `P ⊳ Q`.
    pub p: QHLottery,
    /// Middle lottery: `Q ⊳ Z`.
    pub q: QHLottery,
    pub z: QHLottery,
    /// Mixing weights checked: none gives `βP + (1 − β)Z ⊳ Q`.
    pub betas: Vec<f64>,
    /// Largest `λ_min(Proj(βP + (1 − β)Z − Q))` over the checked weights; negative when valid.
    pub worst_gap: f64,
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub enum ArchimedeanOutcome {
    Counterexample(ArchimedeanCounterexample),
    /// `m = 2, n = 1`: `⊳` is Archimedean; `triples` random chains all admitted weights.
    NotApplicable { triples: usize, all_passed: bool },
}

fn beta_grid() -> Vec<f64> {
    let mut betas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    betas.extend([0.999, 0.9999, 1.0 - 1e-6]);
    betas
}

/// Build the standard counterexample to Archimedeanity of `⊳`.
pub fn archimedean_counterexample(m: usize, n: usize) -> Result<ArchimedeanOutcome> {
    if m < 2 || n == 0 {
        return Err(Error::InvalidInput(format!("need m ≥ 2 and n ≥ 1, got m={m}, n={n}")));
    }
    let od = OrthogonalDecomposition::computational(n);
    let z = worst_lottery(m, n)?;
    let (p, q) = if m >= 3 {
        let eps = 1.0 / (2.0 * m as f64);
        let mut w = vec![1.0 / m as f64; m];
        w[0] += eps;
        w[m - 1] -= eps;
        let shifted = PrizePmf::new(w)?;
        let p = make_simple_lottery(&vec![shifted; n], &od)?;
        (p, uniform_lottery(m, n)?)
    } else if n >= 2 {
        let half = PrizePmf::uniform(2);
        let mut pp = vec![PrizePmf::degenerate(2, 0)];
        let mut qq = vec![PrizePmf::degenerate(2, 1)];
        pp.extend(std::iter::repeat_n(half.clone(), n - 1));
        qq.extend(std::iter::repeat_n(half, n - 1));
        (make_simple_lottery(&pp, &od)?, make_simple_lottery(&qq, &od)?)
    } else {
        return archimedean_holds_scalar();
    };
    let mut valid = objectively_prefers(&p, &q)? && objectively_prefers(&q, &z)?;
    let betas = beta_grid();
    let mut worst_gap = f64::NEG_INFINITY;
    for &b in &betas {
        let mix = mixture(b, &p, &z)?;
        let diff = mix.difference(&q)?.project();
        worst_gap = worst_gap.max(diff.spectrum_bounds()?.0);
        if objectively_prefers(&mix, &q)? {
            valid = false;
        }
    }
    Ok(ArchimedeanOutcome::Counterexample(ArchimedeanCounterexample { p, q, z, betas, worst_gap, valid }))
}

/// `m = 2, n = 1`: `P ⊳ Q ⟺ p(1) > q(1)`; check both mixing weights exist on random chains.
fn archimedean_holds_scalar() -> Result<ArchimedeanOutcome> {
    use rand::Rng;
    let mut rng = sampling::rng(0x0a3c);
    let scalar = |x: f64| validate_qh_lottery(vec![HermitianMatrix::from_real_diagonal(&[x]), HermitianMatrix::from_real_diagonal(&[1.0 - x])]);
    let triples = 100;
    let mut all_passed = true;
    for _ in 0..triples {
        let mut v: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let (p, q, r) = (scalar(v[0])?, scalar(v[1])?, scalar(v[2])?);
        if !(objectively_prefers(&p, &q)? && objectively_prefers(&q, &r)?) {
            continue;
        }
        let t = (v[1] - v[2]) / (v[0] - v[2]);
        let alpha = 0.5 * (1.0 + t);
        let beta = 0.5 * t;
        let upper = objectively_prefers(&mixture(alpha, &p, &r)?, &q)?;
        let lower = objectively_prefers(&q, &mixture(beta, &p, &r)?)?;
        all_passed &= upper && lower;
    }
    Ok(ArchimedeanOutcome::NotApplicable { triples, all_passed })
}

/// Write `Proj(U) + F` as `Proj(U) + λ Proj(P − U)` for a lottery `P`.
///
/// `P = U + μ D` where `D` completes `F` with the block `−Σ F_j`, and
/// `μ` is small enough to keep every block positive. Returns `(P, λ = 1/μ)`.
pub fn lottery_through_uniform(f: &BlockDiag) -> Result<(QHLottery, f64)> {
    let m = f.count() + 1;
    let n = f.n();
    let mut full: Vec<HermitianMatrix> = f.blocks().to_vec();
    let mut last = HermitianMatrix::zeros(n);
    for b in f.blocks() {
        last = &last - b;
    }
    full.push(last);
    let mut spread: f64 = 0.0;
    for b in &full {
        let e = b.eig()?;
        spread = spread.max(e.min().abs()).max(e.max().abs());
    }
    if spread == 0.0 {
        return Err(Error::ZeroGamble);
    }
    let mu = 1.0 / (2.0 * m as f64 * spread);
    let u = uniform_lottery(m, n)?;
    let blocks = u.blocks().iter().zip(&full).map(|(ub, d)| ub.add_scaled(mu, d)).collect::<Result<Vec<_>>>()?;
    Ok((validate_qh_lottery(blocks)?, 1.0 / mu))
}

/// JSON relation: `{"kind":"sdg","assessments":…}` or `{"kind":"state","R":…}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RelationJson {
    Sdg { assessments: AssessmentJson },
    State {
        #[serde(rename = "R")]
        r: JointStateMatrix,
    },
}

impl RelationJson {
    pub fn into_relation(self) -> Result<PreferenceRelation> {
        match self {
            RelationJson::Sdg { assessments } => PreferenceRelation::from_assessments(assessments.into_set()?),
            RelationJson::State { r } => Ok(represent_complete(&r)),
        }
    }
}

/// `{"relation": …, "P": lottery, "Q": lottery}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreferenceQuery {
    pub relation: RelationJson,
    #[serde(rename = "P")]
    pub p: QHLottery,
    #[serde(rename = "Q")]
    pub q: QHLottery,
}
