//! Seeded property suites behind `qrdt properties`.
//!
//! Case `i` of a suite draws everything from the seed `base + i`, so any
//! failing case can be replayed alone. Cases fan out over a worker pool and
//! results are reported in case order.

use qrdt::cone::{
    best_dual_certificate, check_avoiding_partial_loss, validate_dual_certificate, validate_loss_certificate, CoherenceVerdict,
    Shape, CERTIFICATE_TOL,
};
use qrdt::desirability::{maximal_from_state, state_from_maximal, BeliefModel, DesirableGambleSet, JointStateMatrix, MaximalityVerdict};
use qrdt::lottery::{lift_gamble, make_simple_lottery, measure_lottery, validate_qh_lottery, worst_lottery};
use qrdt::preference::{
    archimedean_counterexample, check_axioms_sampled, objectively_prefers, prefers, represent_complete, ArchimedeanOutcome,
    PreferenceRelation,
};
use qrdt::sampling::{self, random_density, random_gamble, random_joint_state, random_lottery};
use qrdt::updating::{check_epistemic_irrelevance, condition_model, condition_state};
use qrdt::{BlockDiag, HermitianMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Cones,
    Duality,
    Lotteries,
    Preferences,
    Updating,
    Archimedean,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Cones, Suite::Duality, Suite::Lotteries, Suite::Preferences, Suite::Updating, Suite::Archimedean],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Cones => "cones",
            Suite::Duality => "duality",
            Suite::Lotteries => "lotteries",
            Suite::Preferences => "preferences",
            Suite::Updating => "updating",
            Suite::Archimedean => "archimedean",
            Suite::All => "all",
        }
    }

    fn default_cases(self) -> usize {
        match self {
            Suite::Cones => 60,
            Suite::Duality => 12,
            Suite::Lotteries => 200,
            Suite::Preferences => 12,
            Suite::Updating => 40,
            Suite::Archimedean => 3,
            Suite::All => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub suite: &'static str,
    pub case: usize,
    pub seed: u64,
    pub passed: bool,
    pub detail: String,
}

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn dims(i: usize) -> (usize, usize) {
    [(2, 2), (2, 3), (3, 2), (3, 3)][i % 4]
}

/// Run `suite` with `cases` cases per member suite (`None` for the defaults).
pub fn run(suite: Suite, cases: Option<usize>, seed: u64, workers: usize) -> Vec<CaseResult> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    let mut out = Vec::new();
    for s in suite.members() {
        let count = if s == Suite::Archimedean { s.default_cases() } else { cases.unwrap_or(s.default_cases()) };
        let results: Vec<CaseResult> = pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let case_seed = seed.wrapping_add(i as u64);
                    let check = run_case(s, i, case_seed);
                    let (passed, detail) = match check {
                        Ok(d) => (true, d),
                        Err(d) => (false, d),
                    };
                    CaseResult { suite: s.name(), case: i, seed: case_seed, passed, detail }
                })
                .collect()
        });
        out.extend(results);
    }
    out
}

fn run_case(suite: Suite, i: usize, seed: u64) -> Check {
    match suite {
        Suite::Cones => cones_case(i, seed),
        Suite::Duality => duality_case(i, seed),
        Suite::Lotteries => lotteries_case(i, seed),
        Suite::Preferences => preferences_case(i, seed),
        Suite::Updating => updating_case(i, seed),
        Suite::Archimedean => archimedean_case(i),
        Suite::All => unreachable!("expanded by Suite::members"),
    }
}

fn psd_gamble(rng: &mut impl Rng, blocks: usize, n: usize) -> BlockDiag {
    BlockDiag::new((0..blocks).map(|_| random_density(rng, n)).collect()).expect("non-empty")
}

fn gamble_with_margin(rng: &mut impl Rng, r: &JointStateMatrix, margin: f64) -> BlockDiag {
    let h = random_gamble(rng, r.m() - 1, r.n());
    let t = r.expectation(&h).expect("shapes match");
    h.add_scaled(margin - t, &BlockDiag::identity(r.m() - 1, r.n())).expect("shapes match")
}

fn coherent_set(rng: &mut impl Rng, m: usize, n: usize) -> std::result::Result<DesirableGambleSet, String> {
    let r = random_joint_state(rng, m, n);
    let gens = (0..rng.random_range(1..=4)).map(|_| {
        let margin = rng.random_range(0.01..0.3);
        gamble_with_margin(rng, &r, margin)
    });
    DesirableGambleSet::coherent(m, n, gens.collect()).map_err(e)
}

fn cones_case(i: usize, seed: u64) -> Check {
    let (m, n) = dims(i);
    let mut rng = sampling::rng(seed);
    let shape = Shape::new(m - 1, n).map_err(e)?;
    let gens: Vec<BlockDiag> = (0..rng.random_range(1..=5)).map(|_| random_gamble(&mut rng, m - 1, n)).collect();
    let verdict = check_avoiding_partial_loss(shape, &gens).map_err(e)?;
    match &verdict {
        CoherenceVerdict::Coherent(cert) => validate_dual_certificate(cert, &gens).map_err(e)?,
        CoherenceVerdict::Incoherent(cert) => {
            validate_loss_certificate(cert, &gens).map_err(e)?;
        }
    }
    let margin = best_dual_certificate(shape, &gens).map_err(e)?.margin;
    if margin.abs() > CERTIFICATE_TOL {
        ensure(verdict.is_coherent() == (margin > 0.0), || format!("coherence {} but dual margin {margin:.3e}", verdict.is_coherent()))?;
    }
    let scaled: Vec<BlockDiag> = gens.iter().map(|g| g.scale(7.5)).collect();
    let again = check_avoiding_partial_loss(shape, &scaled).map_err(e)?;
    ensure(again.is_coherent() == verdict.is_coherent(), || "scaling the generators changed the verdict".into())?;
    if verdict.is_coherent() {
        let k = DesirableGambleSet::from_generators(m, n, gens).map_err(e)?;
        let g = psd_gamble(&mut rng, m - 1, n);
        ensure(k.is_strictly_desirable(&g).map_err(e)?.is_strict(), || "positive gamble not strictly desirable".into())?;
        ensure(!k.is_strictly_desirable(&g.scale(-1.0)).map_err(e)?.is_strict(), || "negative gamble strictly desirable".into())?;
    }
    Ok(format!("m={m} n={n} coherent={} margin={margin:.3e}", verdict.is_coherent()))
}

/// Orthonormal basis of traceless block-diagonal Hermitian directions.
fn traceless_basis(rng: &mut impl Rng, blocks: usize, n: usize) -> Vec<BlockDiag> {
    let id = BlockDiag::identity(blocks, n);
    let id = id.scale(1.0 / id.frobenius_norm());
    let d = blocks * n * n - 1;
    let mut basis: Vec<BlockDiag> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = random_gamble(rng, blocks, n);
        for _ in 0..2 {
            for b in std::iter::once(&id).chain(basis.iter()) {
                let c = v.inner(b).expect("shapes match");
                v = v.add_scaled(-c, b).expect("shapes match");
            }
        }
        let norm = v.frobenius_norm();
        if norm > 1e-3 {
            basis.push(v.scale(1.0 / norm));
        }
    }
    basis
}

/// Assessments pinning a random density up to a `5e-8` cube must give it back.
fn duality_case(i: usize, seed: u64) -> Check {
    let n = 2 + i % 2;
    let mut rng = sampling::rng(seed);
    let r = JointStateMatrix::from_density(random_density(&mut rng, n)).map_err(e)?;
    let oracle = maximal_from_state(&r);
    let id = BlockDiag::identity(1, n);
    let mut gens = Vec::new();
    for dir in traceless_basis(&mut rng, 1, n) {
        for s in [1.0, -1.0] {
            let g = dir.scale(s);
            let t = r.expectation(&g).map_err(e)?;
            gens.push(g.add_scaled(5e-8 - t, &id).map_err(e)?);
        }
    }
    for g in &gens {
        ensure(oracle.contains(g).map_err(e)?, || "assessment outside the maximal set of the state".into())?;
    }
    let k = DesirableGambleSet::from_generators(2, n, gens).map_err(e)?;
    match state_from_maximal(&k).map_err(e)? {
        MaximalityVerdict::Maximal { state, .. } => {
            let err = state.blocks().sub(r.blocks()).map_err(e)?.frobenius_norm();
            ensure(err <= 1e-6, || format!("recovered state off by {err:.3e}"))?;
            Ok(format!("n={n} recovery error {err:.2e}"))
        }
        MaximalityVerdict::NotMaximal { diameter, .. } => Err(format!("n={n} not maximal, diameter {diameter:.3e}")),
    }
}

fn lotteries_case(i: usize, seed: u64) -> Check {
    let (m, n) = dims(i);
    let mut rng = sampling::rng(seed);
    let q = random_lottery(&mut rng, m, n).map_err(e)?;
    let mut perturbed = q.blocks().to_vec();
    perturbed[0] = perturbed[0].add_scaled(1e-3, &HermitianMatrix::identity(n)).map_err(e)?;
    ensure(validate_qh_lottery(perturbed).is_err(), || "perturbed block list accepted".into())?;
    for _ in 0..5 {
        let pi = sampling::random_projector(&mut rng, n);
        let pmf = measure_lottery(&q, &pi).map_err(e)?;
        let total: f64 = pmf.weights().iter().sum();
        ensure(pmf.weights().iter().all(|w| *w >= 0.0) && (total - 1.0).abs() <= 1e-9, || format!("measured pmf {:?}", pmf.weights()))?;
    }
    let od = sampling::random_od(&mut rng, n);
    let pmfs: Vec<_> = (0..n).map(|_| sampling::random_pmf(&mut rng, m)).collect();
    let simple = make_simple_lottery(&pmfs, &od).map_err(e)?;
    for (j, pmf) in pmfs.iter().enumerate() {
        let got = measure_lottery(&simple, od.projector(j)).map_err(e)?;
        let dev = got.weights().iter().zip(pmf.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(dev <= 1e-10, || format!("simple lottery pmf {j} off by {dev:.3e}"))?;
    }
    let w = random_gamble(&mut rng, m - 1, n);
    let lift = lift_gamble(&w).map_err(e)?;
    let back = lift.p.difference(&lift.q).map_err(e)?.project().scale(lift.lambda);
    let err = back.sub(&w).map_err(e)?.frobenius_norm();
    ensure(err <= 1e-10 * w.frobenius_norm().max(1.0), || format!("lift round trip error {err:.3e}"))?;
    Ok(format!("m={m} n={n} lift error {err:.1e}"))
}

fn preferences_case(i: usize, seed: u64) -> Check {
    let (m, n) = dims(i / 2);
    let mut rng = sampling::rng(seed);
    let rel = if i.is_multiple_of(2) {
        PreferenceRelation::from_assessments(coherent_set(&mut rng, m, n)?).map_err(e)?
    } else {
        represent_complete(&random_joint_state(&mut rng, m, n))
    };
    let report = check_axioms_sampled(&rel, 20, seed).map_err(e)?;
    if let Some(v) = report.violations.first() {
        return Err(format!("{:?} violated (seed {}): {}", v.axiom, v.seed, v.detail));
    }
    let z = worst_lottery(m, n).map_err(e)?;
    for _ in 0..5 {
        let p = random_lottery(&mut rng, m, n).map_err(e)?;
        ensure(prefers(&rel, &p, &z).map_err(e)?.is_prefers(), || "a lottery is not preferred to the worst outcome".into())?;
    }
    let lift = lift_gamble(&psd_gamble(&mut rng, m - 1, n)).map_err(e)?;
    ensure(objectively_prefers(&lift.p, &lift.q).map_err(e)?, || "positive difference not objectively preferred".into())?;
    ensure(prefers(&rel, &lift.p, &lift.q).map_err(e)?.is_prefers(), || "objective preference not included".into())?;
    Ok(format!("m={m} n={n} complete={} axioms checked on {} samples", rel.is_complete(), report.samples))
}

fn updating_case(i: usize, seed: u64) -> Check {
    let (m, n) = dims(i);
    let mut rng = sampling::rng(seed);
    let k = coherent_set(&mut rng, m, n)?;
    let event = sampling::random_projector(&mut rng, n);
    let cond = condition_model(&BeliefModel::Assessments(k), &event).map_err(e)?;
    let g = psd_gamble(&mut rng, m - 1, n);
    ensure(cond.verdict(&g).map_err(e)?.is_strict(), || "positive gamble not desirable after conditioning".into())?;
    ensure(!cond.verdict(&g.scale(-1.0)).map_err(e)?.is_strict(), || "negative gamble desirable after conditioning".into())?;

    let r = random_joint_state(&mut rng, m, n);
    let updated = condition_state(&r, &event).map_err(e)?;
    let weights: Vec<f64> = r.blocks().blocks().iter().map(|b| b.quadratic_form(event.vector()).expect("shapes match")).collect();
    let total: f64 = weights.iter().sum();
    let expected = BlockDiag::new(weights.iter().map(|w| event.matrix().scale(w / total)).collect()).map_err(e)?;
    let err = updated.blocks().sub(&expected).map_err(e)?.frobenius_norm();
    ensure(err <= 1e-10, || format!("updated state off by {err:.3e}"))?;

    let p = sampling::random_pmf(&mut rng, m - 1);
    let product = JointStateMatrix::product(p.weights(), &random_density(&mut rng, n)).map_err(e)?;
    let ods: Vec<_> = (0..5).map(|_| sampling::random_od(&mut rng, n)).collect();
    let verdict = check_epistemic_irrelevance(&BeliefModel::Maximal(product), &ods, 10, seed).map_err(e)?;
    ensure(verdict.is_irrelevant(), || format!("product state not irrelevant: {verdict:?}"))?;
    Ok(format!("m={m} n={n} event probability {:.3}", cond.event_upper_probability()))
}

fn archimedean_case(i: usize) -> Check {
    let (m, n) = [(3, 1), (2, 2), (2, 1)][i];
    match archimedean_counterexample(m, n).map_err(e)? {
        ArchimedeanOutcome::Counterexample(c) if (m, n) != (2, 1) => {
            ensure(c.valid, || format!("({m},{n}) counterexample invalid, worst gap {:.3e}", c.worst_gap))?;
            Ok(format!("({m},{n}) counterexample, worst gap {:.3e}", c.worst_gap))
        }
        ArchimedeanOutcome::NotApplicable { triples, all_passed } if (m, n) == (2, 1) => {
            ensure(all_passed, || "(2,1) chain without an Archimedean weight".into())?;
            Ok(format!("(2,1) not applicable, {triples} chains admitted weights"))
        }
        other => Err(format!("({m},{n}) gave {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_deterministic() {
        for suite in [Suite::Cones, Suite::Lotteries, Suite::Archimedean] {
            let a = run(suite, Some(4), 7, 1);
            let b = run(suite, Some(4), 7, 2);
            assert!(a.iter().all(|c| c.passed), "{a:?}");
            let summary = |v: &[CaseResult]| v.iter().map(|c| (c.case, c.passed, c.detail.clone())).collect::<Vec<_>>();
            assert_eq!(summary(&a), summary(&b));
        }
    }
}
