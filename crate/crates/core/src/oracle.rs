//! Direct numerical minimisation of the index functional
//!
//! ```text
//! ‖Ind(E)‖ = max_i Σ_j c_ij / λ_ij,   c_ij = d_ij²,
//! ```
//!
//! over column-stochastic weight matrices supported on the support of `D`.
//! None of this touches the Perron-Frobenius machinery in
//! [`crate::spectral`]; it exists to check the closed form against an
//! independent route.
//!
//! The max is replaced by a shifted log-sum-exp
//! `F(λ) = T log Σ_i u_i exp(g_i(λ)/T)` and minimised by exponentiated
//! gradient steps, one simplex per column, with backtracking on the step.
//! The temperature `T` is halved for a fixed number of stages; after each
//! stage the shift `u` is replaced by the current softmax weights
//! (exponential method of multipliers), which removes the `O(T)` smoothing
//! bias without driving `T` to zero.
//!
//! Any row weighting `w` in the simplex gives the lower bound
//! `min_λ Σ_i w_i g_i(λ) = Σ_j (Σ_i (w_i c_ij)^{1/2})²`, so every stage
//! comes with a certified duality gap. Once a run converges, a fixed-point
//! pass on `w` equalises the row values and sharpens the minimiser.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimension::DimensionMatrix;
use crate::error::{Error, Result};
use crate::graph;
use crate::matrix::Matrix;
use crate::spectral::{self, PfConfig};

/// Column-sum tolerance accepted by [`index_of_expectation`].
pub const STOCHASTIC_TOL: f64 = 1e-8;
const LAMBDA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Bound on the relative KKT residual of the smoothed problem.
    pub tol: f64,
    /// Bound on the relative certified duality gap.
    pub gap_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Half-width of the multiplicative noise on the uniform start.
    pub noise: f64,
    /// Number of temperature halvings.
    pub anneal_stages: usize,
    /// Cap on mirror-descent steps per stage.
    pub steps_per_stage: usize,
    /// Cap on stages in total, annealing plus multiplier updates.
    pub max_stages: usize,
    /// Worker threads for restarts.
    pub jobs: usize,
    pub record_trajectory: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            gap_tol: 1e-9,
            restarts: 5,
            seed: 0,
            noise: 0.1,
            anneal_stages: 8,
            steps_per_stage: 2000,
            max_stages: 400,
            jobs: 1,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePoint {
    pub stage: usize,
    pub temperature: f64,
    pub objective: f64,
    pub dual_bound: f64,
    pub kkt_residual: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub min_value: f64,
    pub argmin: Matrix,
    /// Relative stationarity residual of the smoothed objective.
    pub kkt_residual: f64,
    /// Best certified lower bound on the minimum.
    pub dual_bound: f64,
    pub restarts: usize,
    pub best_restart: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<Vec<StagePoint>>>,
}

/// Per-row sums `Σ_j c_ij/λ_ij` of the index of an expectation with weights `λ`.
pub fn index_row_sums(d: &DimensionMatrix, lambda: &Matrix) -> Result<Vec<f64>> {
    if lambda.shape() != d.shape() {
        return Err(Error::ShapeMismatch {
            expected: d.shape(),
            got: lambda.shape(),
        });
    }
    for (i, j, x) in lambda.iter_indexed() {
        if (d.get(i, j) > 0.0) != (x > 0.0) || x < 0.0 || !x.is_finite() {
            return Err(Error::SupportMismatch(i, j));
        }
    }
    for (j, s) in lambda.col_sums().into_iter().enumerate() {
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic(j, s));
        }
    }
    Ok(row_values(&squares(d), lambda))
}

/// `max_i Σ_j d_ij²/λ_ij`.
pub fn index_of_expectation(d: &DimensionMatrix, lambda: &Matrix) -> Result<f64> {
    Ok(index_row_sums(d, lambda)?.into_iter().fold(0.0, f64::max))
}

fn squares(d: &DimensionMatrix) -> Matrix {
    Matrix::from_fn(d.rows(), d.cols(), |i, j| d.get(i, j).powi(2))
}

fn row_values(c: &Matrix, lambda: &Matrix) -> Vec<f64> {
    (0..c.rows())
        .map(|i| {
            c.row(i)
                .iter()
                .zip(lambda.row(i))
                .filter(|(&cij, _)| cij > 0.0)
                .map(|(cij, l)| cij / l)
                .sum()
        })
        .collect()
}

/// `(F, w)` for the shifted log-sum-exp of `g` at temperature `t`.
fn smoothed_max(g: &[f64], log_u: &[f64], t: f64) -> (f64, Vec<f64>) {
    let z: Vec<f64> = g.iter().zip(log_u).map(|(g, lu)| g / t + lu).collect();
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|z| (z - zmax).exp()).collect();
    let s: f64 = e.iter().sum();
    let f = t * (zmax + s.ln());
    (f, e.into_iter().map(|x| x / s).collect())
}

/// `Σ_j (Σ_i (w_i c_ij)^{1/2})²`, a lower bound on the minimum.
fn dual_bound(c: &Matrix, w: &[f64]) -> f64 {
    (0..c.cols())
        .map(|j| {
            (0..c.rows())
                .map(|i| (w[i] * c[(i, j)]).sqrt())
                .sum::<f64>()
                .powi(2)
        })
        .sum()
}

struct Problem {
    c: Matrix,
    /// Row indices of the support, per column.
    support: Vec<Vec<usize>>,
    scale: f64,
}

impl Problem {
    fn new(d: &DimensionMatrix) -> Self {
        let c = squares(d);
        let support = (0..d.cols()).map(|j| d.support().col_support(j)).collect();
        let scale = c.row_sums().into_iter().fold(0.0, f64::max);
        Self { c, support, scale }
    }

    fn gradient(&self, lambda: &Matrix, w: &[f64]) -> Matrix {
        let mut g = Matrix::zeros(self.c.rows(), self.c.cols());
        for (j, rows) in self.support.iter().enumerate() {
            for &i in rows {
                g[(i, j)] = -w[i] * self.c[(i, j)] / lambda[(i, j)].powi(2);
            }
        }
        g
    }

    /// Entropic stationarity measure `max λ_ij |G_ij − Σ_k λ_kj G_kj|`,
    /// relative to the objective.
    fn kkt(&self, lambda: &Matrix, grad: &Matrix, f: f64) -> f64 {
        let mut r: f64 = 0.0;
        for (j, rows) in self.support.iter().enumerate() {
            let mean: f64 = rows.iter().map(|&i| lambda[(i, j)] * grad[(i, j)]).sum();
            for &i in rows {
                r = r.max(lambda[(i, j)] * (grad[(i, j)] - mean).abs());
            }
        }
        r / f
    }

    /// Exponentiated-gradient step on every column simplex.
    fn step(&self, lambda: &Matrix, grad: &Matrix, eta: f64) -> Matrix {
        let mut out = lambda.clone();
        for (j, rows) in self.support.iter().enumerate() {
            if rows.len() == 1 {
                continue;
            }
            let shift = rows.iter().map(|&i| -eta * grad[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for &i in rows {
                let v = (lambda[(i, j)] * (-eta * grad[(i, j)] - shift).exp()).max(LAMBDA_FLOOR);
                out[(i, j)] = v;
                total += v;
            }
            for &i in rows {
                out[(i, j)] /= total;
            }
        }
        out
    }

    fn uniform_start(&self, rng: &mut ChaCha8Rng, noise: f64) -> Matrix {
        let mut lambda = Matrix::zeros(self.c.rows(), self.c.cols());
        for (j, rows) in self.support.iter().enumerate() {
            let mut total = 0.0;
            for &i in rows {
                let v = 1.0 + noise * rng.random_range(-1.0..=1.0);
                lambda[(i, j)] = v;
                total += v;
            }
            for &i in rows {
                lambda[(i, j)] /= total;
            }
        }
        lambda
    }
}

/// Column-wise minimiser of `Σ_i w_i g_i(λ)`: `λ_ij ∝ (w_i c_ij)^{1/2}`.
fn weighted_argmin(p: &Problem, w: &[f64]) -> Matrix {
    let mut lambda = Matrix::zeros(p.c.rows(), p.c.cols());
    for (j, rows) in p.support.iter().enumerate() {
        let total: f64 = rows.iter().map(|&i| (w[i] * p.c[(i, j)]).sqrt()).sum();
        for &i in rows {
            lambda[(i, j)] = ((w[i] * p.c[(i, j)]).sqrt() / total).max(LAMBDA_FLOOR);
        }
    }
    lambda
}

const POLISH_ITERS: usize = 2000;

/// Equalises the row values by rescaling the dual weights,
/// `w_i ← w_i g_i / Σ_k w_k g_k`, keeping the best primal point seen.
fn polish(p: &Problem, w0: &[f64], value: &mut f64, best: &mut Matrix, dual: &mut f64) {
    let mut w: Vec<f64> = w0.iter().map(|&x| x.max(1e-300)).collect();
    for _ in 0..POLISH_ITERS {
        let lambda = weighted_argmin(p, &w);
        let g = row_values(&p.c, &lambda);
        let objective = g.iter().copied().fold(0.0, f64::max);
        let total: f64 = w.iter().sum();
        *dual = dual.max(dual_bound(&p.c, &w) / total);
        if objective < *value {
            *value = objective;
            *best = lambda;
        }
        if (*value - *dual) <= 1e-15 * *value {
            break;
        }
        let mean: f64 = w.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        w = w.iter().zip(&g).map(|(a, b)| a * b / mean).collect();
    }
}

struct RunOutcome {
    value: f64,
    argmin: Matrix,
    kkt: f64,
    dual: f64,
    converged: bool,
    trace: Vec<StagePoint>,
}

fn run_once(p: &Problem, cfg: &OracleConfig, restart: usize) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let m = p.c.rows();
    let mut lambda = p.uniform_start(&mut rng, cfg.noise);
    let mut log_u = vec![-(m as f64).ln(); m];
    let mut temperature = p.scale;
    let mut eta = 1.0 / p.scale;

    let mut best_value = f64::INFINITY;
    let mut best = lambda.clone();
    let mut best_dual: f64 = 0.0;
    let mut kkt = f64::INFINITY;
    let mut trace = Vec::new();

    for stage in 0..cfg.max_stages {
        let g = row_values(&p.c, &lambda);
        let (mut f, mut w) = smoothed_max(&g, &log_u, temperature);
        let mut grad = p.gradient(&lambda, &w);
        let mut steps = 0;
        let inner_tol = cfg.tol * 1e-3;
        while steps < cfg.steps_per_stage {
            kkt = p.kkt(&lambda, &grad, f);
            if kkt <= inner_tol {
                break;
            }
            let cand = p.step(&lambda, &grad, eta);
            let (fc, wc) = smoothed_max(&row_values(&p.c, &cand), &log_u, temperature);
            let linear: f64 = grad
                .as_slice()
                .iter()
                .zip(cand.as_slice().iter().zip(lambda.as_slice()))
                .map(|(gr, (a, b))| gr * (a - b))
                .sum();
            // Armijo test along the mirror path; once the predicted decrease
            // drops below rounding level of F no further progress is possible.
            if -linear <= 1e-15 * f.abs() {
                break;
            }
            if fc <= f + 0.5 * linear {
                lambda = cand;
                f = fc;
                w = wc;
                grad = p.gradient(&lambda, &w);
                eta *= 1.5;
            } else {
                eta *= 0.5;
            }
            steps += 1;
        }
        kkt = p.kkt(&lambda, &grad, f);

        let objective = row_values(&p.c, &lambda).into_iter().fold(0.0, f64::max);
        let lower = dual_bound(&p.c, &w);
        best_dual = best_dual.max(lower);
        if objective < best_value {
            best_value = objective;
            best = lambda.clone();
        }
        if cfg.record_trajectory {
            trace.push(StagePoint {
                stage,
                temperature,
                objective,
                dual_bound: lower,
                kkt_residual: kkt,
                steps,
            });
        }
        let gap = (best_value - best_dual) / best_value;
        if gap <= cfg.gap_tol && kkt <= cfg.tol {
            polish(p, &w, &mut best_value, &mut best, &mut best_dual);
            return RunOutcome {
                value: best_value,
                argmin: best,
                kkt,
                dual: best_dual,
                converged: true,
                trace,
            };
        }

        // Multiplier update, then anneal.
        log_u = w.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
        if stage < cfg.anneal_stages {
            temperature *= 0.5;
        }
    }
    RunOutcome {
        value: best_value,
        argmin: best,
        kkt,
        dual: best_dual,
        converged: false,
        trace,
    }
}

/// Minimises the index over all expectation matrices supported on `D`.
pub fn minimize_index(d: &DimensionMatrix, cfg: &OracleConfig) -> Result<OracleResult> {
    if !graph::is_connected(d) {
        return Err(Error::NotConnected);
    }
    let problem = Problem::new(d);
    let restarts = cfg.restarts.max(1);
    let jobs = cfg.jobs.clamp(1, restarts);

    let mut outcomes: Vec<Option<RunOutcome>> = (0..restarts).map(|_| None).collect();
    if jobs == 1 {
        for (r, slot) in outcomes.iter_mut().enumerate() {
            *slot = Some(run_once(&problem, cfg, r));
        }
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..jobs)
                .map(|worker| {
                    let problem = &problem;
                    s.spawn(move || {
                        (worker..restarts)
                            .step_by(jobs)
                            .map(|r| (r, run_once(problem, cfg, r)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (r, out) in h.join().expect("oracle worker panicked") {
                    outcomes[r] = Some(out);
                }
            }
        });
    }
    let outcomes: Vec<RunOutcome> = outcomes.into_iter().map(|o| o.expect("every restart ran")).collect();

    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .expect("at least one restart");
    if !outcomes.iter().any(|o| o.converged) {
        return Err(Error::OracleNoConvergence(restarts));
    }
    let dual_bound = outcomes.iter().map(|o| o.dual).fold(0.0, f64::max);
    let converged = (best.value - dual_bound) / best.value <= cfg.gap_tol;
    Ok(OracleResult {
        min_value: best.value,
        argmin: best.argmin.clone(),
        kkt_residual: best.kkt,
        dual_bound,
        restarts,
        best_restart,
        converged,
        trajectories: cfg
            .record_trajectory
            .then(|| outcomes.iter().map(|o| o.trace.clone()).collect()),
    })
}

pub const VALUE_GAP_THRESHOLD: f64 = 1e-4;
pub const ARGMIN_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub closed_form: f64,
    pub oracle: f64,
    pub gap: f64,
    pub argmin_distance: f64,
    pub passed: bool,
}

/// Compares the oracle minimum and minimiser with `‖D‖²` and the closed-form weights.
pub fn cross_validate(d: &DimensionMatrix, cfg: &OracleConfig) -> Result<CrossValidation> {
    let pf = spectral::pf_data(d, &PfConfig::default())?;
    let closed = spectral::minimal_expectation(d, &pf)?;
    let result = minimize_index(d, cfg)?;
    let closed_form = pf.index();
    let gap = (result.min_value - closed_form).abs();
    let argmin_distance = result.argmin.max_abs_diff(&closed.lambda);
    Ok(CrossValidation {
        closed_form,
        oracle: result.min_value,
        gap,
        argmin_distance,
        passed: gap <= VALUE_GAP_THRESHOLD && argmin_distance <= ARGMIN_THRESHOLD,
    })
}
