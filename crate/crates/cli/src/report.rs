use std::fmt::Write as _;

use minindex::classify::{self, IndexClass};
use minindex::dimension::{norm_diagnostics, NormDiagnostics};
use minindex::matrix::Matrix;
use minindex::multimatrix::{self, BratteliDiagram, ExtremalityReport, MarkovTraceData, SuperExtremality};
use minindex::spectral::{self, CanonicalStates, ExpectationMatrix, PfConfig, PfData, StandardSolutionWeights};
use minindex::{decompose_connected, DimensionMatrix};
use serde::Serialize;
use serde_json::Value;

use crate::input::{Inclusion, InclusionSpec};
use crate::CliError;

pub const SCHEMA: &str = "minindex-report/1";
pub const NOT_CONNECTED_WARNING: &str = "input not connected";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Power-iteration residual bound.
    pub pf: f64,
    /// Distance to the Jones discrete series.
    pub classify: f64,
    /// Super-extremality and state comparisons.
    pub extremal: f64,
    /// Perron-Frobenius vector comparison in compositions.
    pub eigvec: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pf: PfConfig::default().tol,
            classify: classify::DEFAULT_TOL,
            extremal: multimatrix::DEFAULT_CLASS_TOL,
            eigvec: minindex::calculus::EIGVEC_TOL,
        }
    }
}

impl Tolerances {
    /// Every comparison tolerance set to `t`.
    pub fn uniform(t: f64) -> Self {
        Self {
            pf: t,
            classify: t,
            extremal: t,
            eigvec: t,
        }
    }

    pub fn pf_config(&self) -> PfConfig {
        PfConfig {
            tol: self.pf,
            ..PfConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationSection {
    #[serde(flatten)]
    pub matrices: ExpectationMatrix,
    pub stochasticity_residual: f64,
    /// `max |c_ij − c λ_ij λ'_ji|`.
    pub factorization_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatesSection {
    #[serde(flatten)]
    pub states: CanonicalStates,
    pub marginal_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BratteliSection {
    pub beta: Vec<u64>,
    pub alpha: Vec<u64>,
    pub markov_trace: MarkovTraceData,
    pub minimal_projection_traces: Vec<f64>,
    pub super_extremality: SuperExtremality,
    pub extremality: ExtremalityReport,
}

/// Everything computed for one connected matrix dimension.
#[derive(Debug, Clone, Serialize)]
pub struct BlockAnalysis {
    pub pf: PfData,
    pub minimal_index: f64,
    pub classification: IndexClass,
    pub expectation: ExpectationSection,
    pub canonical_states: StatesSection,
    pub weighted_additivity_residual: f64,
    pub standard_solution: StandardSolutionWeights,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bratteli: Option<BratteliSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(rename = "D")]
    pub d: Matrix,
    pub analysis: BlockAnalysis,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub input: InclusionSpec,
    pub shape: (usize, usize),
    pub connected: bool,
    pub tolerances: Tolerances,
    pub norms: NormDiagnostics,
    /// Scalar dimension of each connected block, in block order.
    pub vector_dimension: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<BlockAnalysis>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockReport>,
    pub warnings: Vec<String>,
}

pub fn analyze_block(d: &DimensionMatrix, bratteli: Option<&BratteliDiagram>, tol: &Tolerances) -> Result<BlockAnalysis, CliError> {
    let pf = spectral::pf_data(d, &tol.pf_config())?;
    let index = pf.index();
    let lambda = spectral::minimal_expectation(d, &pf)?;
    let expectation = ExpectationSection {
        stochasticity_residual: lambda.stochasticity_residual(),
        factorization_residual: spectral::index_factorization_residual(d, &pf, &lambda),
        matrices: lambda,
    };
    let states = spectral::canonical_states(d, &pf)?;
    let canonical_states = StatesSection {
        marginal_residual: states.marginal_residual(),
        states,
    };
    let bratteli = match bratteli {
        Some(diag) => {
            let markov_trace = multimatrix::markov_trace(diag, &pf)?;
            Some(BratteliSection {
                beta: diag.beta().to_vec(),
                alpha: diag.alpha().to_vec(),
                minimal_projection_traces: markov_trace.minimal_projection_traces(diag),
                markov_trace,
                super_extremality: multimatrix::super_extremality(diag, tol.extremal)?,
                extremality: multimatrix::extremality_report(diag, &pf, tol.extremal),
            })
        }
        None => None,
    };
    Ok(BlockAnalysis {
        minimal_index: index,
        classification: classify::classify_index(index, tol.classify),
        expectation,
        canonical_states,
        weighted_additivity_residual: spectral::weighted_additivity_check(d, &pf),
        standard_solution: spectral::standard_solution_weights(d, &pf)?,
        bratteli,
        pf,
    })
}

pub fn analyze(inc: &Inclusion, tol: &Tolerances) -> Result<AnalysisReport, CliError> {
    let d = &inc.matrix;
    let decomposition = decompose_connected(d);
    let norms = norm_diagnostics(d)?;
    let vector_dimension = decomposition.vector_dimension(&tol.pf_config())?;
    let connected = decomposition.is_connected();
    let mut warnings = Vec::new();
    let (analysis, blocks) = if connected {
        (Some(analyze_block(d, inc.bratteli.as_ref(), tol)?), Vec::new())
    } else {
        warnings.push(NOT_CONNECTED_WARNING.to_string());
        let mut blocks = Vec::with_capacity(decomposition.blocks.len());
        for block in decomposition.blocks {
            let sub = match &inc.bratteli {
                Some(diag) => Some(multimatrix::validate_bratteli(
                    block.matrix.clone(),
                    block.cols.iter().map(|&j| diag.beta()[j]).collect(),
                    block.rows.iter().map(|&i| diag.alpha()[i]).collect(),
                )?),
                None => None,
            };
            let analysis = analyze_block(&block.matrix, sub.as_ref(), tol)?;
            blocks.push(BlockReport {
                rows: block.rows,
                cols: block.cols,
                d: block.matrix.as_matrix().clone(),
                analysis,
            });
        }
        (None, blocks)
    };
    Ok(AnalysisReport {
        schema: SCHEMA,
        input: inc.spec.clone(),
        shape: d.shape(),
        connected,
        tolerances: *tol,
        norms,
        vector_dimension,
        analysis,
        blocks,
        warnings,
    })
}

/// Rounds every float to 15 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            let r: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Wraps a payload with the schema tag and rounds it.
pub fn envelope<T: Serialize>(kind: &str, payload: &T) -> Value {
    let body = serde_json::to_value(payload).expect("report types serialize");
    let mut obj = serde_json::Map::new();
    obj.insert("schema".into(), Value::String(SCHEMA.into()));
    obj.insert("kind".into(), Value::String(kind.into()));
    match body {
        Value::Object(fields) => {
            for (k, v) in fields {
                if k != "schema" {
                    obj.insert(k, v);
                }
            }
        }
        other => {
            obj.insert("result".into(), other);
        }
    }
    round_floats(Value::Object(obj))
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Array(a) if a.iter().all(is_scalar) => {
            Some(format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")))
        }
        v if is_scalar(v) => Some(scalar(v)),
        _ => None,
    }
}

fn render(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(o) => {
            for (k, v) in o {
                match inline(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(out, v, depth + 1);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (idx, item) in a.iter().enumerate() {
                match inline(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}- [{idx}]");
                        render(out, item, depth + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other));
        }
    }
}

/// Indented `key: value` rendering of a JSON report.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    render(&mut out, v, 0);
    out
}
