//! Updating on projective events, prize marginals and state independence.
//!
//! Conditioning on a rank-one event `Π = π π†` keeps a gamble `G` when
//! `G ⪈ 0` or its compression `(I ⊗ Π) G (I ⊗ Π)` is strictly desirable in
//! the base model. Compressions have the form `g ⊗ Π` with
//! `g_j = π† G_j π`, so every conditional state is `q ⊗ Π` for a prize
//! distribution `q`; gambles whose compression vanishes are called off.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::{Shape, StrictVerdict};
use crate::desirability::{maximal_from_state, BeliefModel, DesirableGambleSet, JointStateMatrix, STATE_STRICT_TOL};
use crate::error::{Error, Result};
use crate::hermitian::{default_psd_tol, classify_spectrum, BlockDiag, HermitianMatrix, OrthogonalDecomposition, Projector};
use crate::lottery::{PrizePmf, QHLottery};
use crate::preference::PreferenceRelation;
use crate::sampling;

/// Upper probabilities at or below this make an event unconditionable.
pub const EVENT_PROBABILITY_TOL: f64 = 1e-9;
/// Default Frobenius tolerance for agreeing per-block states.
pub const FACTORIZATION_TOL: f64 = 1e-8;
pub const DEFAULT_IRRELEVANCE_ODS: usize = 25;
pub const DEFAULT_IRRELEVANCE_PROBES: usize = 40;

/// A belief model conditioned on a rank-one projective event.
#[derive(Debug, Clone)]
pub struct ConditionalSet {
    base: BeliefModel,
    event: Projector,
    upper: f64,
    witness: JointStateMatrix,
    updated_state: Option<JointStateMatrix>,
}

/// Condition a finitely generated set; see [`condition_model`].
pub fn condition_set(k: &DesirableGambleSet, event: &Projector) -> Result<ConditionalSet> {
    condition_model(&BeliefModel::Assessments(k.clone()), event)
}

/// `(π† R_j π)_j ⊗ Π`, normalised to unit trace.
pub fn condition_state(r: &JointStateMatrix, event: &Projector) -> Result<JointStateMatrix> {
    let compressed = r.blocks().compress(event)?;
    let t = compressed.trace();
    if t <= EVENT_PROBABILITY_TOL {
        return Err(Error::UndefinedConditional { upper: t });
    }
    Ok(JointStateMatrix::from_blocks_unchecked(compressed.scale(1.0 / t)))
}

/// Condition any belief model on `event`.
///
/// Fails with [`Error::UndefinedConditional`] when no state of the credal
/// set gives the event positive probability, and with [`Error::Incoherent`]
/// when the base assessments are incoherent.
pub fn condition_model(base: &BeliefModel, event: &Projector) -> Result<ConditionalSet> {
    let shape = base.shape();
    if event.n() != shape.n {
        return Err(Error::DimensionMismatch { expected: shape.n, found: event.n() });
    }
    let pi = event.matrix();
    let indicator = BlockDiag::new(vec![pi; shape.blocks])?;
    let (upper, carrier) = match base {
        BeliefModel::Maximal(r) => (r.expectation(&indicator)?, r.clone()),
        BeliefModel::Assessments(k) => {
            if !k.coherence()?.is_coherent() {
                return Err(Error::Incoherent);
            }
            let lp = k.lower_prevision(&indicator.scale(-1.0))?;
            (-lp.value, JointStateMatrix::from_blocks_unchecked(lp.argmin))
        }
        BeliefModel::Conditional(c) => (c.upper_probability(event), c.witness.clone()),
    };
    if upper <= EVENT_PROBABILITY_TOL {
        return Err(Error::UndefinedConditional { upper });
    }
    let witness = condition_state(&carrier, event)?;
    let updated_state = match base {
        BeliefModel::Maximal(_) => Some(witness.clone()),
        BeliefModel::Conditional(c) if c.updated_state.is_some() => Some(witness.clone()),
        _ => None,
    };
    Ok(ConditionalSet { base: base.clone(), event: event.clone(), upper, witness, updated_state })
}

impl ConditionalSet {
    pub fn shape(&self) -> Shape {
        self.base.shape()
    }

    pub fn base(&self) -> &BeliefModel {
        &self.base
    }

    pub fn event(&self) -> &Projector {
        &self.event
    }

    /// Upper probability of the conditioning event under the base model.
    pub fn event_upper_probability(&self) -> f64 {
        self.upper
    }

    /// A state of the conditional credal set.
    pub fn witness(&self) -> &JointStateMatrix {
        &self.witness
    }

    /// The compressed and renormalised state when the base is state-backed.
    pub fn updated_state(&self) -> Option<&JointStateMatrix> {
        self.updated_state.as_ref()
    }

    /// Conditional states are `q ⊗ Π`, so any further event `Π'` has probability `|⟨π, π'⟩|²`.
    pub fn upper_probability(&self, other: &Projector) -> f64 {
        self.event.overlap(other)
    }

    /// Conditional strict desirability.
    ///
    /// For a state-backed base the margin is `Tr(G R')` under the updated
    /// state; otherwise it is the base margin of the compression.
    pub fn verdict(&self, g: &BlockDiag) -> Result<StrictVerdict> {
        self.shape().check(g)?;
        let norm = g.frobenius_norm();
        let (lo, hi) = g.spectrum_bounds()?;
        if classify_spectrum(lo, hi, default_psd_tol(norm)).is_psdnz() {
            let margin = match &self.updated_state {
                Some(r) => r.expectation(g)?,
                None => lo,
            };
            return Ok(StrictVerdict::StrictlyDesirable { margin });
        }
        let c = g.compress(&self.event)?;
        let cn = c.frobenius_norm();
        if cn <= 1e-12 * norm.max(1.0) {
            return Ok(StrictVerdict::NotDesirable { margin: 0.0 });
        }
        match &self.updated_state {
            Some(r) => {
                let t = r.expectation(g)?;
                let (clo, chi) = c.spectrum_bounds()?;
                let class = classify_spectrum(clo, chi, default_psd_tol(cn));
                if class.is_psdnz() {
                    return Ok(StrictVerdict::StrictlyDesirable { margin: t });
                }
                Ok(match maximal_from_state(r).with_strict_tol(STATE_STRICT_TOL).verdict(&c)? {
                    StrictVerdict::StrictlyDesirable { .. } => StrictVerdict::StrictlyDesirable { margin: t },
                    StrictVerdict::Boundary { .. } => StrictVerdict::Boundary { margin: t },
                    StrictVerdict::NotDesirable { .. } => StrictVerdict::NotDesirable { margin: t },
                })
            }
            None => self.base.verdict(&c),
        }
    }

    pub fn contains(&self, g: &BlockDiag) -> Result<bool> {
        Ok(self.verdict(g)?.is_strict())
    }
}

/// Condition a preference-backing model; the returned model compares
/// lotteries through the conditional set.
pub fn condition_belief(base: &BeliefModel, event: &Projector) -> Result<BeliefModel> {
    Ok(BeliefModel::Conditional(Box::new(condition_model(base, event)?)))
}

/// `≻_Π`: compare lotteries through the conditional set.
pub fn condition_preference(rel: &PreferenceRelation, event: &Projector) -> Result<PreferenceRelation> {
    Ok(PreferenceRelation::from_model(condition_belief(rel.backing(), event)?))
}

/// Oracle for the prize marginal `{g : g ⊗ I_n strictly desirable}`.
#[derive(Debug, Clone)]
pub struct PrizeMarginal<'a> {
    model: &'a BeliefModel,
}

pub fn marg_prize(model: &BeliefModel) -> PrizeMarginal<'_> {
    PrizeMarginal { model }
}

impl PrizeMarginal<'_> {
    pub fn verdict(&self, g: &[f64]) -> Result<StrictVerdict> {
        let shape = self.model.shape();
        if g.len() != shape.blocks {
            return Err(Error::DimensionMismatch { expected: shape.blocks, found: g.len() });
        }
        let gamble = crate::hermitian::tensor_diag_hermitian(g, &HermitianMatrix::identity(shape.n));
        self.model.verdict(&gamble)
    }

    pub fn contains(&self, g: &[f64]) -> Result<bool> {
        Ok(self.verdict(g)?.is_strict())
    }
}

/// Outcome of [`check_epistemic_irrelevance`].
#[derive(Debug, Clone, PartialEq)]
pub enum IrrelevanceVerdict {
    /// All probes agreed; `skipped` counts zero-probability events.
    Irrelevant { events_checked: usize, probes: usize, skipped: usize },
    ViolationWitness { event: Projector, gamble: Vec<f64>, unconditional: StrictVerdict, conditional: StrictVerdict },
}

impl IrrelevanceVerdict {
    pub fn is_irrelevant(&self) -> bool {
        matches!(self, IrrelevanceVerdict::Irrelevant { .. })
    }
}

/// Sampled check that conditioning on every projector of every `od` leaves
/// the prize marginal unchanged.
pub fn check_epistemic_irrelevance(
    model: &BeliefModel,
    ods: &[OrthogonalDecomposition],
    probe_count: usize,
    seed: u64,
) -> Result<IrrelevanceVerdict> {
    let shape = model.shape();
    let mut rng = sampling::rng(seed);
    let probes: Vec<Vec<f64>> = (0..probe_count)
        .map(|_| (0..shape.blocks).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let marginal = marg_prize(model);
    let unconditional: Vec<StrictVerdict> = probes.iter().map(|g| marginal.verdict(g)).collect::<Result<_>>()?;
    let mut checked = 0;
    let mut skipped = 0;
    for od in ods {
        for event in od.projectors() {
            let cond = match condition_belief(model, event) {
                Ok(c) => c,
                Err(Error::UndefinedConditional { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            checked += 1;
            let cm = marg_prize(&cond);
            for (g, u) in probes.iter().zip(&unconditional) {
                let c = cm.verdict(g)?;
                if c.is_strict() != u.is_strict() {
                    return Ok(IrrelevanceVerdict::ViolationWitness {
                        event: event.clone(),
                        gamble: g.clone(),
                        unconditional: *u,
                        conditional: c,
                    });
                }
            }
        }
    }
    Ok(IrrelevanceVerdict::Irrelevant { events_checked: checked, probes: probe_count, skipped })
}

/// `R = p ⊗ ρ` with the Frobenius residual of the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFactorization {
    pub p: PrizePmf,
    pub rho: HermitianMatrix,
    pub residual: f64,
    /// Only one block carries weight, so the factorization is trivially exact.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factorization {
    Factorized(StateFactorization),
    /// Largest Frobenius distance between normalised blocks.
    NotFactorizable { max_deviation: f64, p: PrizePmf },
}

/// Split a joint state into prize weights and a common density matrix.
pub fn factorize_state(r: &JointStateMatrix, tol: f64) -> Result<Factorization> {
    if !(tol >= 0.0) {
        return Err(Error::Range { value: tol, range: "[0, inf)" });
    }
    let traces: Vec<f64> = r.blocks().blocks().iter().map(|b| b.trace().max(0.0)).collect();
    let total: f64 = traces.iter().sum();
    let p = PrizePmf::new(traces.iter().map(|t| t / total).collect())?;
    let normalized: Vec<(f64, HermitianMatrix)> = r
        .blocks()
        .blocks()
        .iter()
        .zip(p.weights())
        .filter(|(_, &w)| w > tol)
        .map(|(b, &w)| (w, b.scale(1.0 / w)))
        .collect();
    let mut max_deviation: f64 = 0.0;
    for i in 0..normalized.len() {
        for j in (i + 1)..normalized.len() {
            max_deviation = max_deviation.max((&normalized[i].1 - &normalized[j].1).frobenius_norm());
        }
    }
    if max_deviation > tol {
        return Ok(Factorization::NotFactorizable { max_deviation, p });
    }
    let weight: f64 = normalized.iter().map(|(w, _)| w).sum();
    let mut rho = HermitianMatrix::zeros(r.n());
    for (w, b) in &normalized {
        rho = rho.add_scaled(w / weight, b)?;
    }
    let fitted = crate::hermitian::tensor_diag_hermitian(p.weights(), &rho);
    let residual = r.blocks().sub(&fitted)?.frobenius_norm();
    let degenerate = traces.len() > 1 && normalized.len() == 1;
    Ok(Factorization::Factorized(StateFactorization { p, rho, residual, degenerate }))
}

/// `u(P) = Σ_i p_i P_i` over the first `m − 1` blocks.
pub fn utility_operator(lottery: &QHLottery, p: &[f64]) -> Result<HermitianMatrix> {
    if p.len() != lottery.m() - 1 {
        return Err(Error::DimensionMismatch { expected: lottery.m() - 1, found: p.len() });
    }
    let mut u = HermitianMatrix::zeros(lottery.n());
    for (w, b) in p.iter().zip(lottery.blocks()) {
        u = u.add_scaled(*w, b)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lottery::{make_simple_lottery, uniform_lottery};
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(v)
    }

    fn state_model(rho: &[f64]) -> BeliefModel {
        BeliefModel::Maximal(JointStateMatrix::from_density(diag(rho)).unwrap())
    }

    #[test]
    fn conditioning_a_state() {
        let c = condition_model(&state_model(&[0.6, 0.4]), &Projector::basis(2, 0)).unwrap();
        let r = c.updated_state().unwrap();
        assert!(r.blocks().sub(&BlockDiag::from(diag(&[1.0, 0.0]))).unwrap().frobenius_norm() < 1e-15);
        for (g1, g2) in [(0.5, -3.0), (-0.5, 3.0), (0.0, 1.0), (0.0, -1.0), (2.0, 0.0)] {
            let g = BlockDiag::from(diag(&[g1, g2]));
            let expected = g1 > 0.0 || (g1 >= 0.0 && g2 >= 0.0 && (g1, g2) != (0.0, 0.0));
            assert_eq!(c.contains(&g).unwrap(), expected, "({g1}, {g2})");
        }
        let e = condition_model(&state_model(&[1.0, 0.0]), &Projector::basis(2, 1));
        assert!(matches!(e, Err(Error::UndefinedConditional { .. })));
    }

    #[test]
    fn conditioning_assessments() {
        let k = DesirableGambleSet::coherent(2, 2, vec![BlockDiag::from(diag(&[1.0, -1.0]))]).unwrap();
        let c = condition_set(&k, &Projector::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(c.event_upper_probability(), 0.5, epsilon = 1e-6);
        assert!(c.contains(&BlockDiag::from(diag(&[-5.0, 1.0]))).unwrap());
        assert!(!c.contains(&BlockDiag::from(diag(&[5.0, -1.0]))).unwrap());
        assert!(c.contains(&BlockDiag::from(diag(&[0.0, 1.0]))).unwrap());
        let sharp = DesirableGambleSet::coherent(2, 2, vec![BlockDiag::from(diag(&[1.0, -1e6]))]).unwrap();
        assert!(condition_set(&sharp, &Projector::basis(2, 1)).is_ok());
    }

    #[test]
    fn conditioning_preferences() {
        use crate::lottery::validate_qh_lottery;
        use crate::preference::{check_axioms_sampled, prefers, represent_complete, PreferenceOracle};
        let rel = represent_complete(&JointStateMatrix::from_density(diag(&[0.6, 0.4])).unwrap());
        let cond = condition_preference(&rel, &Projector::basis(2, 0)).unwrap();
        let p = validate_qh_lottery(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        let q = validate_qh_lottery(vec![diag(&[0.0, 1.0]), diag(&[1.0, 0.0])]).unwrap();
        let v = prefers(&cond, &p, &q).unwrap();
        assert!(v.is_prefers());
        assert_abs_diff_eq!(v.margin, 1.0, epsilon = 1e-15);
        assert!(check_axioms_sampled(&cond, 200, 4).unwrap().passed());

        let certain = represent_complete(&JointStateMatrix::from_density(diag(&[1.0, 0.0])).unwrap());
        let same = condition_preference(&certain, &Projector::basis(2, 0)).unwrap();
        for s in 0..50 {
            let t = crate::preference::sample_triple(2, 2, s).unwrap();
            assert_eq!(certain.prefers(&t.p, &t.q).unwrap().tag, same.prefers(&t.p, &t.q).unwrap().tag);
        }
    }

    #[test]
    fn marginal_examples() {
        let p = [0.3, 0.7];
        let rho = diag(&[0.6, 0.4]);
        let model = BeliefModel::Maximal(JointStateMatrix::product(&p, &rho).unwrap());
        let marg = marg_prize(&model);
        assert!(marg.contains(&[1.0, -0.4]).unwrap());
        assert!(!marg.contains(&[1.0, -0.5]).unwrap());
        let vac = BeliefModel::Assessments(DesirableGambleSet::vacuous(3, 2).unwrap());
        assert!(marg_prize(&vac).contains(&[0.0, 1.0]).unwrap());
        assert!(!marg_prize(&vac).contains(&[-1.0, 0.0]).unwrap());
    }

    #[test]
    fn irrelevance_examples() {
        let mut rng = sampling::rng(1);
        let ods: Vec<_> = (0..5).map(|_| sampling::random_od(&mut rng, 2)).collect();
        let product = state_model(&[0.7, 0.3]);
        assert!(check_epistemic_irrelevance(&product, &ods, 40, 3).unwrap().is_irrelevant());

        let split = BlockDiag::new(vec![diag(&[0.5, 0.0]), diag(&[0.0, 0.5])]).unwrap();
        let model = BeliefModel::Maximal(JointStateMatrix::new(split).unwrap());
        let ods = vec![OrthogonalDecomposition::computational(2)];
        assert!(!check_epistemic_irrelevance(&model, &ods, 40, 3).unwrap().is_irrelevant());

        let vac = BeliefModel::Assessments(DesirableGambleSet::vacuous(3, 2).unwrap());
        let ods = vec![OrthogonalDecomposition::computational(2)];
        assert!(check_epistemic_irrelevance(&vac, &ods, 10, 3).unwrap().is_irrelevant());
    }

    #[test]
    fn factorization_examples() {
        let r = JointStateMatrix::product(&[0.5, 0.5], &diag(&[0.6, 0.4])).unwrap();
        let Factorization::Factorized(f) = factorize_state(&r, FACTORIZATION_TOL).unwrap() else { panic!() };
        assert_eq!(f.p.weights(), &[0.5, 0.5]);
        assert!((&f.rho - &diag(&[0.6, 0.4])).frobenius_norm() < 1e-15);
        assert!(f.residual < 1e-15);

        let split = BlockDiag::new(vec![diag(&[0.5, 0.0]), diag(&[0.0, 0.5])]).unwrap();
        match factorize_state(&JointStateMatrix::new(split).unwrap(), FACTORIZATION_TOL).unwrap() {
            Factorization::NotFactorizable { max_deviation, .. } => assert_abs_diff_eq!(max_deviation, 2f64.sqrt(), epsilon = 1e-15),
            f => panic!("{f:?}"),
        }

        let single = JointStateMatrix::from_density(diag(&[0.2, 0.8])).unwrap();
        let Factorization::Factorized(f) = factorize_state(&single, FACTORIZATION_TOL).unwrap() else { panic!() };
        assert_eq!(f.p.weights(), &[1.0]);
        assert!(!f.degenerate);
    }

    #[test]
    fn utility_operator_examples() {
        let od = OrthogonalDecomposition::computational(2);
        let p = make_simple_lottery(&[PrizePmf::degenerate(2, 0), PrizePmf::degenerate(2, 1)], &od).unwrap();
        assert_eq!(utility_operator(&p, &[1.0]).unwrap(), diag(&[1.0, 0.0]));
        for m in 2..5 {
            let u = uniform_lottery(m, 3).unwrap();
            let w = vec![1.0 / (m - 1) as f64; m - 1];
            let got = utility_operator(&u, &w).unwrap();
            assert!((&got - &HermitianMatrix::scaled_identity(3, 1.0 / m as f64)).frobenius_norm() < 1e-14);
        }
        assert!(matches!(utility_operator(&p, &[0.5, 0.5]), Err(Error::DimensionMismatch { .. })));
    }
}
