//! Command implementations: read inputs, call the library, shape the verdict.

use std::path::Path;

use num_complex::Complex64;
use qrdt::cone::{
    check_avoiding_partial_loss_with, validate_dual_certificate, validate_loss_certificate, CoherenceVerdict, ConeSettings,
    LossKind, StrictVerdict,
};
use qrdt::desirability::{
    simulate_no_sure_loss, state_from_maximal, AssessmentJson, BeliefModel, DesirableGambleSet, JointStateMatrix,
    MaximalityVerdict,
};
use qrdt::lottery::{LotteryJson, LotteryViolation};
use qrdt::preference::{objectively_prefers, prefers, represent_complete, PreferenceRelation, PreferenceTag, RelationJson};
use qrdt::sdp::SdpSettings;
use qrdt::updating::{condition_model, factorize_state, Factorization, FACTORIZATION_TOL};
use qrdt::{BlockDiag, Projector};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result, EXIT_INCOHERENT, EXIT_INVALID_LOTTERY, EXIT_NEGATIVE, EXIT_OK, EXIT_VIOLATIONS};
use crate::report::{sha256_hex, InputDigest};

/// Options shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub psd_tol: f64,
    pub strict_eps: f64,
    pub dual_gap: f64,
    pub seed: u64,
    pub verbose: bool,
    pub strict_exit: bool,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cone = ConeSettings::default();
        Self {
            psd_tol: cone.coherence_tol,
            strict_eps: cone.eps_min,
            dual_gap: cone.sdp.tol,
            seed: 0,
            verbose: false,
            strict_exit: false,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("--tol-psd", self.psd_tol), ("--eps-strict", self.strict_eps), ("--gap", self.dual_gap)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be a positive number, got {v}")));
            }
        }
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cone_settings(&self) -> ConeSettings {
        let defaults = SdpSettings::default();
        ConeSettings {
            coherence_tol: self.psd_tol,
            eps_min: self.strict_eps,
            sdp: SdpSettings { tol: self.dual_gap, accept_tol: defaults.accept_tol.max(self.dual_gap), ..defaults },
        }
    }

    pub fn settings_json(&self) -> Value {
        json!({
            "tol_psd": self.psd_tol,
            "eps_strict": self.strict_eps,
            "gap": self.dual_gap,
            "seed": self.seed,
        })
    }

    fn negative(&self) -> i32 {
        if self.strict_exit {
            EXIT_NEGATIVE
        } else {
            EXIT_OK
        }
    }
}

/// What a command produced, before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: String,
    pub result: Value,
    pub exit: i32,
    pub inputs: Vec<InputDigest>,
}

impl Outcome {
    fn new(verdict: &str, result: Value, exit: i32, inputs: Vec<InputDigest>) -> Self {
        Self { verdict: verdict.into(), result, exit, inputs }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, InputDigest)> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let digest = InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok((value, digest))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialise")
}

fn verdict_json(v: &StrictVerdict) -> Value {
    json!({"verdict": v.tag(), "margin": v.margin()})
}

fn assessments(a: AssessmentJson, cfg: &RunConfig) -> Result<DesirableGambleSet> {
    Ok(a.into_set()?.with_settings(cfg.cone_settings()))
}

fn violation_json(v: &LotteryViolation) -> Value {
    match v {
        LotteryViolation::TooFewPrizes { m } => json!({"kind": "too-few-prizes", "m": m, "message": v.to_string()}),
        LotteryViolation::NegativeBlock { block, eigenvalue } => {
            json!({"kind": "negative-block", "block": block + 1, "eigenvalue": eigenvalue, "message": v.to_string()})
        }
        LotteryViolation::SumResidual { residual } => {
            json!({"kind": "sum-residual", "residual": residual, "message": v.to_string()})
        }
    }
}

/// `qrdt validate`: the POVM criterion for a lottery file.
pub fn validate(path: &Path) -> Result<Outcome> {
    let (raw, digest): (LotteryJson, _) = read_json(path)?;
    let (m, n) = (raw.m, raw.n);
    match raw.into_lottery() {
        Ok(lottery) => Ok(Outcome::new("valid", json!({"m": m, "n": n, "lottery": to_value(&lottery)}), EXIT_OK, vec![digest])),
        Err(qrdt::Error::InvalidLottery(v)) => Ok(Outcome::new(
            "invalid",
            json!({"m": m, "n": n, "violation": violation_json(&v)}),
            EXIT_INVALID_LOTTERY,
            vec![digest],
        )),
        Err(e) => Err(e.into()),
    }
}

/// `qrdt coherence`: avoiding partial loss, with a re-validated certificate.
pub fn coherence(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (raw, digest): (AssessmentJson, _) = read_json(path)?;
    let k = assessments(raw, cfg)?;
    let verdict = check_avoiding_partial_loss_with(k.shape(), k.generators(), &cfg.cone_settings())?;
    match verdict {
        CoherenceVerdict::Coherent(cert) => {
            validate_dual_certificate(&cert, k.generators())?;
            Ok(Outcome::new(
                "coherent",
                json!({"generators": k.generators().len(), "certificate": {"rho": to_value(&cert.rho), "margin": cert.margin}}),
                EXIT_OK,
                vec![digest],
            ))
        }
        CoherenceVerdict::Incoherent(cert) => {
            let kind = validate_loss_certificate(&cert, k.generators())?;
            let kind = match kind {
                LossKind::PartialLoss => "partial-loss",
                LossKind::Pointed => "pointed",
            };
            Ok(Outcome::new(
                "incoherent",
                json!({
                    "generators": k.generators().len(),
                    "certificate": {"weights": cert.weights, "combination": to_value(&cert.combo), "kind": kind},
                }),
                EXIT_INCOHERENT,
                vec![digest],
            ))
        }
    }
}

#[derive(Debug, Deserialize)]
struct PreferRequest {
    relation: RelationJson,
    #[serde(rename = "P")]
    p: LotteryJson,
    #[serde(rename = "Q")]
    q: LotteryJson,
}

fn relation(r: RelationJson, cfg: &RunConfig) -> Result<PreferenceRelation> {
    Ok(match r {
        RelationJson::Sdg { assessments: a } => PreferenceRelation::from_assessments(assessments(a, cfg)?)?,
        RelationJson::State { r } => represent_complete(&r),
    })
}

/// `qrdt prefer`: is `P` strictly preferred to `Q`?
pub fn prefer(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (raw, digest): (PreferRequest, _) = read_json(path)?;
    let p = raw.p.into_lottery()?;
    let q = raw.q.into_lottery()?;
    let rel = relation(raw.relation, cfg)?;
    let v = prefers(&rel, &p, &q)?;
    let (label, exit) = match v.tag {
        PreferenceTag::Prefers => ("prefers", EXIT_OK),
        PreferenceTag::NotPrefers => ("not-prefers", cfg.negative()),
        PreferenceTag::Boundary => ("boundary", cfg.negative()),
    };
    let result = json!({
        "channel": to_value(&v.channel),
        "margin": v.margin,
        "objective": objectively_prefers(&p, &q)?,
        "complete": rel.is_complete(),
    });
    Ok(Outcome::new(label, result, exit, vec![digest]))
}

/// Vector entry: a real number or an `[re, im]` pair.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Deserialize)]
struct EventJson {
    vector: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionRequest {
    #[serde(default)]
    assessments: Option<AssessmentJson>,
    #[serde(default)]
    state: Option<JointStateMatrix>,
    event: EventJson,
    /// Gambles whose conditional verdicts are reported.
    #[serde(default)]
    gambles: Vec<BlockDiag>,
}

/// `qrdt condition`: update on a projective event and query the result.
pub fn condition(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (raw, digest): (ConditionRequest, _) = read_json(path)?;
    let base = match (raw.assessments, raw.state) {
        (Some(a), None) => BeliefModel::Assessments(assessments(a, cfg)?),
        (None, Some(r)) => BeliefModel::Maximal(r),
        _ => {
            return Err(qrdt::Error::InvalidInput("the request needs exactly one of \"assessments\" and \"state\"".into()).into())
        }
    };
    let vector: Vec<Complex64> = raw
        .event
        .vector
        .iter()
        .map(|e| match e {
            Entry::Real(x) => Complex64::new(*x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(*re, *im),
        })
        .collect();
    let event = Projector::new(vector)?;
    let cond = condition_model(&base, &event)?;
    let verdicts = raw.gambles.iter().map(|g| Ok(verdict_json(&cond.verdict(g)?))).collect::<Result<Vec<_>>>()?;
    let mut result = json!({
        "event_upper_probability": cond.event_upper_probability(),
        "witness": to_value(cond.witness()),
        "verdicts": verdicts,
    });
    if let Some(r) = cond.updated_state() {
        result["updated_state"] = to_value(r);
    }
    Ok(Outcome::new("conditioned", result, EXIT_OK, vec![digest]))
}

/// `qrdt represent`: the state of a maximal assessment, when it exists.
pub fn represent(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (raw, digest): (AssessmentJson, _) = read_json(path)?;
    let k = assessments(raw, cfg)?;
    if let CoherenceVerdict::Incoherent(_) = k.coherence()? {
        return Err(qrdt::Error::Incoherent.into());
    }
    match state_from_maximal(&k)? {
        MaximalityVerdict::Maximal { state, diameter } => {
            Ok(Outcome::new("maximal", json!({"R": to_value(&state), "diameter": diameter}), EXIT_OK, vec![digest]))
        }
        MaximalityVerdict::NotMaximal { diameter, extreme_points } => Ok(Outcome::new(
            "not-maximal",
            json!({"diameter": diameter, "extreme_points": [to_value(&extreme_points.0), to_value(&extreme_points.1)]}),
            cfg.negative(),
            vec![digest],
        )),
    }
}

/// `qrdt factorize`: split a joint state into prize weights and a density.
pub fn factorize(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (r, digest): (JointStateMatrix, _) = read_json(path)?;
    match factorize_state(&r, FACTORIZATION_TOL)? {
        Factorization::Factorized(f) => Ok(Outcome::new(
            "factorized",
            json!({"p": to_value(&f.p), "rho": to_value(&f.rho), "residual": f.residual, "degenerate": f.degenerate}),
            EXIT_OK,
            vec![digest],
        )),
        Factorization::NotFactorizable { max_deviation, p } => Ok(Outcome::new(
            "not-factorizable",
            json!({"p": to_value(&p), "max_deviation": max_deviation}),
            cfg.negative(),
            vec![digest],
        )),
    }
}

#[derive(Debug, Deserialize)]
struct SimulateRequest {
    assessments: AssessmentJson,
    state: JointStateMatrix,
}

/// `qrdt simulate`: Monte Carlo payoffs of the assessments under a state.
pub fn simulate(path: &Path, trials: usize, cfg: &RunConfig) -> Result<Outcome> {
    let (raw, digest): (SimulateRequest, _) = read_json(path)?;
    let k = assessments(raw.assessments, cfg)?;
    let report = simulate_no_sure_loss(&k, &raw.state, trials, cfg.seed)?;
    let losing = report.gambles.iter().filter(|s| s.mean < -3.0 * s.std_error - 1e-9).count();
    let (verdict, exit) = if losing == 0 { ("no-sure-loss", EXIT_OK) } else { ("loss-detected", EXIT_VIOLATIONS) };
    let mut result = to_value(&report);
    result["losing_gambles"] = json!(losing);
    Ok(Outcome::new(verdict, result, exit, vec![digest]))
}
