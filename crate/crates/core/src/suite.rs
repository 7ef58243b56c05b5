//! Configuration-driven verification runs with JSON reports.
//!
//! A run is described by a [`RunConfig`]; each task produces one report entry
//! with an `ok` flag. Tasks run in parallel but entries keep the config order,
//! and all maps serialize with sorted keys, so a report is a pure function of
//! its config and seed.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{normalize, parse_scalar, ExprError};
use crate::fiber::{endo_splitting_check, full_matrix_rep, word_span_dim, FiberAlgebra, FiberError, FiberPoint};
use crate::field::{CycField, CycScalar, FieldError};
use crate::gamma::{hamiltonian_reduce, invariant_blocks, verify_qmm_gamma, GammaError, GammaGrading};
use crate::lattice::{quiver_to_embedding, LatticeError, QuiverData};
use crate::linalg::Matrix;
use crate::pbw::{DqAlgebra, EmbeddingError, Generator, PbwElement, QmmGenerator, TorusEmbedding};
use crate::quiver_examples::quiver_suite;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("in {what}: {source}")]
    Expr { what: String, source: ExprError },
    #[error(transparent)]
    Fiber(#[from] FiberError),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    /// Required when `matrix` is absent (trivial torus).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub form: Option<Vec<Vec<i64>>>,
}

/// A scalar given as an integer or as text in the expression grammar.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ScalarSpec {
    Int(i64),
    Text(String),
}

impl ScalarSpec {
    fn eval(&self, field: &Arc<CycField>, what: &str) -> Result<CycScalar, SuiteError> {
        match self {
            ScalarSpec::Int(v) => Ok(field.from_int(*v)),
            ScalarSpec::Text(s) => parse_scalar(s, field).map_err(|source| SuiteError::Expr {
                what: what.to_string(),
                source,
            }),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FiberPointSpec {
    /// Pairs `(c_i, w_i)`.
    pub lambda: Vec<(ScalarSpec, ScalarSpec)>,
    #[serde(default)]
    pub b: Option<Vec<Option<ScalarSpec>>>,
    pub gamma: Vec<ScalarSpec>,
}

impl FiberPointSpec {
    pub fn build(&self, field: &Arc<CycField>) -> Result<FiberPoint, SuiteError> {
        let lambda = self
            .lambda
            .iter()
            .map(|(c, w)| Ok((c.eval(field, "lambda")?, w.eval(field, "lambda")?)))
            .collect::<Result<Vec<_>, SuiteError>>()?;
        let b = match &self.b {
            None => vec![None; lambda.len()],
            Some(bs) => bs
                .iter()
                .map(|b| b.as_ref().map(|s| s.eval(field, "b")).transpose())
                .collect::<Result<_, _>>()?,
        };
        let gamma = self
            .gamma
            .iter()
            .map(|g| g.eval(field, "gamma"))
            .collect::<Result<_, _>>()?;
        Ok(FiberPoint::new(lambda, b, gamma)?)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Normalize {
        exprs: Vec<String>,
    },
    CenterCheck {
        /// Bound on each exponent; defaults to `2ℓ`.
        #[serde(default)]
        max_exp: Option<u32>,
    },
    FiberRep {
        points: Vec<FiberPointSpec>,
    },
    Reduce {
        /// Defaults to the origin.
        #[serde(default)]
        point: Option<FiberPointSpec>,
        eta: Vec<ScalarSpec>,
    },
    QuiverSuite {},
    QmmCheck {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_max_degree")]
        max_degree: u32,
    },
}

fn default_samples() -> usize {
    16
}

fn default_max_degree() -> u32 {
    3
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Normalize { .. } => "normalize",
            Task::CenterCheck { .. } => "center-check",
            Task::FiberRep { .. } => "fiber-rep",
            Task::Reduce { .. } => "reduce",
            Task::QuiverSuite {} => "quiver-suite",
            Task::QmmCheck { .. } => "qmm-check",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ell: u32,
    #[serde(default)]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default)]
    pub quiver: Option<QuiverData>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub tasks: Vec<Task>,
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<Self, SuiteError> {
        let cfg: RunConfig = serde_json::from_str(src)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.ell < 3 || self.ell % 2 == 0 {
            return Err(SuiteError::Config(format!("ell must be odd and > 1, got {}", self.ell)));
        }
        match (&self.embedding, &self.quiver) {
            (Some(_), Some(_)) => Err(SuiteError::Config("give either embedding or quiver, not both".into())),
            (None, None) => Err(SuiteError::Config("missing embedding or quiver".into())),
            (Some(e), None) if e.matrix.is_none() && e.n.is_none() => {
                Err(SuiteError::Config("embedding needs n or matrix".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn torus_embedding(&self) -> Result<TorusEmbedding, SuiteError> {
        if let Some(q) = &self.quiver {
            return Ok(quiver_to_embedding(q)?);
        }
        let spec = self
            .embedding
            .as_ref()
            .ok_or_else(|| SuiteError::Config("missing embedding or quiver".into()))?;
        match &spec.matrix {
            None => Ok(TorusEmbedding::trivial(spec.n.unwrap_or(0))?),
            Some(m) => {
                let n = spec.n.unwrap_or(m.len());
                let d = m.first().map_or(0, Vec::len);
                let form = spec.form.clone().unwrap_or_else(|| {
                    (0..d).map(|a| (0..d).map(|b| i64::from(a == b)).collect()).collect()
                });
                Ok(TorusEmbedding::new(n, m.clone(), form)?)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub ell: u32,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub ok: bool,
    pub tasks: Vec<Value>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Ctx {
    field: Arc<CycField>,
    emb: TorusEmbedding,
    alg: Arc<DqAlgebra>,
}

/// Runs every task; `seed` overrides the config seed.
pub fn run_suite(cfg: &RunConfig, seed: Option<u64>) -> Result<Report, SuiteError> {
    cfg.validate()?;
    let field = CycField::new(cfg.ell as u64)?;
    let emb = cfg.torus_embedding()?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx {
        alg: Arc::new(DqAlgebra::new(field.clone(), emb.clone())),
        field,
        emb,
    };
    let tasks: Vec<Value> = cfg
        .tasks
        .par_iter()
        .enumerate()
        .map(|(k, task)| {
            let body = run_task(&ctx, task, seed.wrapping_add(k as u64));
            let (ok, mut body) = match body {
                Ok((ok, v)) => (ok, v),
                Err(e) => (false, json!({ "error": e.to_string() })),
            };
            body["task"] = json!(task.name());
            body["ok"] = json!(ok);
            body
        })
        .collect();
    Ok(Report {
        ell: cfg.ell,
        n: ctx.emb.n(),
        d: ctx.emb.d(),
        seed,
        ok: tasks.iter().all(|t| t["ok"] == json!(true)),
        tasks,
    })
}

fn run_task(ctx: &Ctx, task: &Task, seed: u64) -> Result<(bool, Value), SuiteError> {
    match task {
        Task::Normalize { exprs } => Ok(task_normalize(ctx, exprs)),
        Task::CenterCheck { max_exp } => Ok(task_center(ctx, max_exp.unwrap_or(2 * ctx.field.ell()))),
        Task::FiberRep { points } => task_fiber_rep(ctx, points),
        Task::Reduce { point, eta } => task_reduce(ctx, point.as_ref(), eta),
        Task::QuiverSuite {} => match quiver_suite(&ctx.field) {
            Ok(r) => Ok((r.holds, serde_json::to_value(&r)?)),
            Err(e) => Ok((false, json!({ "error": e.to_string() }))),
        },
        Task::QmmCheck { samples, max_degree } => Ok(task_qmm(ctx, *samples, *max_degree, seed)),
    }
}

fn task_normalize(ctx: &Ctx, exprs: &[String]) -> (bool, Value) {
    let mut ok = true;
    let results: Vec<Value> = exprs
        .iter()
        .map(|src| match normalize(src, &ctx.alg) {
            Ok(e) => json!({ "input": src, "normal_form": e.to_string() }),
            Err(err) => {
                ok = false;
                json!({ "input": src, "error": err.to_string() })
            }
        })
        .collect();
    (ok, json!({ "results": results }))
}

/// Centralizer of the generators in the exponent box, compared with the span
/// of monomials whose exponents are all multiples of `ℓ`.
fn task_center(ctx: &Ctx, max_exp: u32) -> (bool, Value) {
    let ell = ctx.field.ell();
    let basis = ctx.alg.centralizer_in_box(max_exp);
    let per_slot = (max_exp / ell + 1) as usize;
    let expected_dim = per_slot.pow(2 * ctx.alg.n() as u32);
    let only_ell_multiples = basis.iter().all(|e| {
        e.terms()
            .keys()
            .all(|m| m.x.iter().chain(&m.d).all(|a| a % ell == 0))
    });
    let ok = basis.len() == expected_dim && only_ell_multiples;
    (
        ok,
        json!({
            "max_exp": max_exp,
            "dim": basis.len(),
            "expected_dim": expected_dim,
            "only_ell_multiples": only_ell_multiples,
            "basis": basis.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
    )
}

fn generator_pairs(n: usize) -> Vec<(Generator, Generator)> {
    let gens: Vec<Generator> = (0..n).flat_map(|i| [Generator::X(i), Generator::D(i)]).collect();
    gens.iter().flat_map(|&a| gens.iter().map(move |&b| (a, b))).collect()
}

fn task_fiber_rep(ctx: &Ctx, points: &[FiberPointSpec]) -> Result<(bool, Value), SuiteError> {
    let mut all_ok = true;
    let mut entries = Vec::new();
    for spec in points {
        let p = spec.build(&ctx.field)?;
        let (ok, v) = fiber_point_report(ctx, &p)?;
        all_ok &= ok;
        entries.push(v);
    }
    Ok((all_ok, json!({ "points": entries })))
}

fn fiber_point_report(ctx: &Ctx, p: &FiberPoint) -> Result<(bool, Value), SuiteError> {
    let field = &ctx.field;
    let n = ctx.emb.n();
    if p.n() != n {
        return Err(FiberError::LengthMismatch { got: p.n(), n }.into());
    }
    let fa = FiberAlgebra::new(ctx.alg.clone(), p.clone())?;
    if let Some(i) = p.locus_violation() {
        // Outside the locus: α_i generates a proper nonzero two-sided ideal.
        let gens: Vec<PbwElement> = vec![ctx.alg.euler(i).expect("index in range")];
        let ideal = fa.two_sided_ideal(&gens).dim();
        let ok = ideal > 0 && ideal < fa.dim();
        return Ok((
            ok,
            json!({
                "in_locus": false,
                "violating_index": i + 1,
                "fiber_dim": fa.dim(),
                "alpha_ideal_dim": ideal,
                "alpha_ideal_proper_nonzero": ok,
            }),
        ));
    }
    let rep = full_matrix_rep(field, &ctx.emb, p)?;
    let mut residuals = 0;
    for (a, b) in generator_pairs(n) {
        let prod = ctx.alg.normal_form(&[(a, 1), (b, 1)]).expect("index in range");
        let lhs = rep.apply(&ctx.alg.generator_power(a, 1).expect("index in range"))
            .mul(&rep.apply(&ctx.alg.generator_power(b, 1).expect("index in range")));
        if !lhs.sub(&rep.apply(&prod)).is_zero() {
            residuals += 1;
        }
    }
    let g = GammaGrading::new(&ctx.emb, field.ell());
    let alpha_ok = (0..n).all(|i| {
        let want = Matrix::diag(
            field,
            (0..g.size())
                .map(|r| p.gamma(i).mul_qpow(-2 * g.vector(r)[i] as i64))
                .collect(),
        );
        rep.alpha[i] == want
    });
    let target = (field.ell() as usize).pow(2 * n as u32);
    let span = word_span_dim(field, &rep.generators(), 2 * field.ell() as usize * n);
    let endo = endo_splitting_check(&fa)?;
    let ok = residuals == 0 && alpha_ok && span == target && endo.bijective;
    Ok((
        ok,
        json!({
            "in_locus": true,
            "relation_residuals": residuals,
            "alpha_diagonal": alpha_ok,
            "alpha": rep.alpha.iter().map(|a| a.diagonal().iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "span_dim": span,
            "target_dim": target,
            "endo_splitting": serde_json::to_value(&endo)?,
        }),
    ))
}

fn task_reduce(ctx: &Ctx, point: Option<&FiberPointSpec>, eta: &[ScalarSpec]) -> Result<(bool, Value), SuiteError> {
    let p = match point {
        Some(s) => s.build(&ctx.field)?,
        None => FiberPoint::origin(&ctx.field, ctx.emb.n()),
    };
    let eta: Vec<CycScalar> = eta
        .iter()
        .map(|e| e.eval(&ctx.field, "eta"))
        .collect::<Result<_, _>>()?;
    let blocks = invariant_blocks(&GammaGrading::new(&ctx.emb, ctx.field.ell()), &ctx.emb);
    let gamma_ok = verify_qmm_gamma(&ctx.field, &ctx.emb);
    match hamiltonian_reduce(&ctx.field, &ctx.alg, &p, &eta) {
        Ok(r) => {
            let ok = r.is_matrix_algebra
                && r.checks.exact
                && r.checks.module_cyclic
                && r.checks.module_action_bijective
                && gamma_ok.holds;
            let mut v = serde_json::to_value(&r)?;
            v["blocks"] = serde_json::to_value(&blocks)?;
            v["qmm_gamma"] = serde_json::to_value(&gamma_ok)?;
            Ok((ok, v))
        }
        Err(GammaError::EmptyReduction { admissible }) => Ok((
            false,
            json!({
                "eta_admissible": false,
                "admissible_eta": admissible,
                "blocks": serde_json::to_value(&blocks)?,
            }),
        )),
        Err(e @ GammaError::EtaPower { .. }) => Ok((
            false,
            json!({ "eta_admissible": false, "error": e.to_string() }),
        )),
        Err(e) => Ok((false, json!({ "error": e.to_string() }))),
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> (Vec<u32>, Vec<u32>) {
    let mut x = vec![0; n];
    let mut d = vec![0; n];
    let total = rng.gen_range(0..=max_degree);
    for _ in 0..total {
        let i = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            x[i] += 1;
        } else {
            d[i] += 1;
        }
    }
    (x, d)
}

/// `y_i` and `z_j` against every generator, then `samples` random pairs of a
/// monomial and an exponent vector, plus the Γ-graded check.
fn task_qmm(ctx: &Ctx, samples: usize, max_degree: u32, seed: u64) -> (bool, Value) {
    let n = ctx.emb.n();
    let d = ctx.emb.d();
    let unit = |len: usize, i: usize| -> Vec<i64> { (0..len).map(|k| i64::from(k == i)).collect() };
    let mut hs: Vec<QmmGenerator> = (0..n).map(|i| QmmGenerator::Y(unit(n, i))).collect();
    hs.extend((0..d).map(|j| QmmGenerator::Z(unit(d, j))));
    let gens: Vec<PbwElement> = (0..n)
        .flat_map(|i| [ctx.alg.x(i).expect("index in range"), ctx.alg.d(i).expect("index in range")])
        .collect();
    let mut cases: Vec<(QmmGenerator, PbwElement)> = hs
        .iter()
        .flat_map(|h| gens.iter().map(move |a| (h.clone(), a.clone())))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (x, dd) = random_monomial(&mut rng, n, max_degree);
        let h = if d > 0 && rng.gen_bool(0.5) {
            QmmGenerator::Z((0..d).map(|_| rng.gen_range(-2..=2)).collect())
        } else {
            QmmGenerator::Y((0..n).map(|_| rng.gen_range(-2..=2)).collect())
        };
        cases.push((h, ctx.alg.monomial(x, dd)));
    }
    let mut failures = Vec::new();
    for (h, a) in &cases {
        match ctx.alg.verify_qmm(h, a) {
            Ok(c) if c.holds => {}
            Ok(c) => failures.push(json!({ "h": format!("{h:?}"), "a": a.to_string(), "scalar": c.scalar.to_string() })),
            Err(e) => failures.push(json!({ "h": format!("{h:?}"), "a": a.to_string(), "error": e.to_string() })),
        }
    }
    let gamma = verify_qmm_gamma(&ctx.field, &ctx.emb);
    let ok = failures.is_empty() && gamma.holds;
    (
        ok,
        json!({
            "checked": cases.len(),
            "failures": failures,
            "qmm_gamma": serde_json::to_value(&gamma).expect("serializable"),
        }),
    )
}
