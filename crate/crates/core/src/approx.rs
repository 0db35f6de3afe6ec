//! Closest stabilizer-simulable channel to a target, subject to the model
//! being no more faithful than the target.
//!
//! The model χ is affine in the probabilities,
//! `χ(p) = χ_I + Σ_a p_a (χ_a − χ_I)`, so the distance is a convex quadratic
//! `‖A p − b‖²/8` where the columns of `A` are the real and imaginary parts of
//! `χ_a − χ_I` and `b` those of `χ_target − χ_I`.
//!
//! * Average-fidelity constraint: `F_av(I, model) = 1 − Σ_a (1 − c_a) p_a` is
//!   linear, so the whole problem is one convex QP and is solved exactly.
//! * Worst-fidelity constraint: `F_w(I, model(p)) = min_r [1 − Σ_a p_a (1 − q_a(r))]`
//!   where `q_a(r)` is the worst-case integrand of generator `a` at Bloch
//!   vector `r`. The constraint `F_w ≤ F_target` holds iff some `r` satisfies
//!   the linear constraint with weights `1 − q_a(r)`, so the optimum is
//!   `min_r QP(r)`: a three-dimensional search over the Bloch ball with an
//!   exact convex QP inside.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::catalog::{enumerate_generators, identity_fidelity_coefficients, mixture_chi, Generator, MixtureParams, ModelKind};
use crate::channel::{chi_to_kraus, kraus_to_chi, validate_cptp, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::metrics::{hs_distance, worst_fidelity_in, ConstraintKind, FidelityQuadratic, StateDomain};
use crate::qp::{LeastSquaresQp, QpSolution};

/// Probabilities above this are reported as support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

/// Slack allowed on `f_model ≤ f_target`.
pub const FIDELITY_SLACK: f64 = 1e-8;

/// A target channel with the model family and constraint to approximate it by.
#[derive(Debug, Clone)]
pub struct ApproximationProblem {
    target_chi: ChiMatrix<f64>,
    target_kraus: Option<KrausChannel<f64>>,
    pub model: ModelKind,
    pub constraint: ConstraintKind,
    /// States over which worst-case fidelities are minimized.
    pub domain: StateDomain,
}

impl ApproximationProblem {
    pub fn from_kraus(target: KrausChannel<f64>, model: ModelKind, constraint: ConstraintKind) -> Result<Self> {
        let target_chi = kraus_to_chi(&target)?;
        Ok(Self {
            target_chi,
            target_kraus: Some(target),
            model,
            constraint,
            domain: StateDomain::default(),
        })
    }

    /// Target given only as a process matrix. The worst-fidelity constraint
    /// needs a Kraus form, which is derived from the eigen-decomposition.
    pub fn from_chi(target: ChiMatrix<f64>, model: ModelKind, constraint: ConstraintKind) -> Result<Self> {
        let report = validate_cptp(&target);
        if !report.is_valid() {
            let list: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("{} ({:e})", v.constraint, v.magnitude))
                .collect();
            return Err(Error::InvalidTarget(format!("not CPTP: {}", list.join(", "))));
        }
        let target_kraus = match constraint {
            ConstraintKind::WorstFidelity => Some(chi_to_kraus(&target)?),
            ConstraintKind::AverageFidelity => None,
        };
        Ok(Self {
            target_chi: target,
            target_kraus,
            model,
            constraint,
            domain: StateDomain::default(),
        })
    }

    pub fn with_domain(mut self, domain: StateDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn target_chi(&self) -> &ChiMatrix<f64> {
        &self.target_chi
    }

    pub fn target_kraus(&self) -> Option<&KrausChannel<f64>> {
        self.target_kraus.as_ref()
    }

    /// Identity fidelity of the target under this problem's constraint.
    pub fn target_fidelity(&self) -> Result<f64> {
        match self.constraint {
            ConstraintKind::AverageFidelity => Ok(average_from_chi(&self.target_chi)),
            ConstraintKind::WorstFidelity => {
                let ch = self
                    .target_kraus
                    .as_ref()
                    .ok_or_else(|| Error::InvalidTarget("worst-case constraint needs a Kraus form".into()))?;
                Ok(worst_fidelity_in(&ComplexMatrix::identity(2), ch, self.domain)?.value)
            }
        }
    }
}

/// `F_av(I, ·) = χ₀₀ / 2`.
fn average_from_chi(chi: &ChiMatrix<f64>) -> f64 {
    chi.get(0, 0).re / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverDiagnostics {
    /// Active-set iterations summed over every QP solved.
    pub iterations: usize,
    /// Local searches started (worst-case path); 1 for the average path.
    pub restarts: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ApproximationResult {
    pub params: MixtureParams<f64>,
    pub distance: f64,
    pub f_target: f64,
    pub f_model: f64,
    pub constraint: ConstraintKind,
    pub support: Vec<(Generator, f64)>,
    pub diagnostics: SolverDiagnostics,
}

impl ApproximationResult {
    pub fn model(&self) -> ModelKind {
        self.params.model()
    }

    pub fn channel(&self) -> Result<KrausChannel<f64>> {
        crate::catalog::build_mixture(&self.params)
    }

    pub fn prob_of(&self, generator: Generator) -> f64 {
        self.params
            .labeled()
            .into_iter()
            .find(|(g, _)| *g == generator)
            .map_or(0.0, |(_, p)| p)
    }
}

/// Generators with probability above `threshold`, largest first.
pub fn extract_support(result: &ApproximationResult, threshold: f64) -> Vec<(Generator, f64)> {
    let mut out: Vec<(Generator, f64)> = result
        .params
        .labeled()
        .into_iter()
        .filter(|(_, p)| *p > threshold)
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Distance objective and simplex constraints for one model and target.
struct Design {
    model: ModelKind,
    generators: Vec<Generator>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

fn flatten(m: &ComplexMatrix<f64>) -> Vec<f64> {
    m.entries().iter().flat_map(|z| [z.re, z.im]).collect()
}

impl Design {
    fn new(model: ModelKind, target: &ChiMatrix<f64>) -> Self {
        let generators = enumerate_generators(model);
        let id = ChiMatrix::<f64>::identity().into_matrix();
        let cols: Vec<DVector<f64>> = generators
            .iter()
            .map(|g| DVector::from_vec(flatten(&(&g.chi::<f64>().into_matrix() - &id))))
            .collect();
        let a = DMatrix::from_columns(&cols);
        let b = DVector::from_vec(flatten(&(target.matrix() - &id)));
        Self {
            model,
            generators,
            a,
            b,
        }
    }

    fn dim(&self) -> usize {
        self.generators.len()
    }

    /// QP with `p ≥ 0`, `Σp ≤ 1` and `Σ w_a p_a ≥ need`.
    fn qp(&self, weights: &[f64], need: f64) -> LeastSquaresQp {
        let n = self.dim();
        let mut g = DMatrix::zeros(n + 2, n);
        let mut h = DVector::zeros(n + 2);
        for i in 0..n {
            g[(i, i)] = -1.0;
            g[(n, i)] = 1.0;
            g[(n + 1, i)] = -weights[i];
        }
        h[n] = 1.0;
        h[n + 1] = -need;
        LeastSquaresQp::new(self.a.clone(), self.b.clone(), g, h)
    }

    /// Vertex start: all weight on the most effective generator. `None` when
    /// no feasible point exists.
    fn feasible_start(&self, weights: &[f64], need: f64) -> Option<DVector<f64>> {
        let n = self.dim();
        if need <= 0.0 {
            return Some(DVector::zeros(n));
        }
        let (k, &wk) = weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        if wk < need {
            return None;
        }
        let mut x = DVector::zeros(n);
        x[k] = need / wk;
        Some(x)
    }

    /// `x` scaled so that `Σ w_a x_a ≥ need`, if that keeps `Σ x ≤ 1`.
    fn scaled_start(&self, x: &DVector<f64>, weights: &[f64], need: f64) -> Option<DVector<f64>> {
        let achieved: f64 = x.iter().zip(weights).map(|(p, w)| p * w).sum();
        if achieved >= need {
            return Some(x.clone());
        }
        if achieved <= 0.0 {
            return None;
        }
        let scaled = x * (need / achieved);
        (scaled.sum() <= 1.0).then_some(scaled)
    }

    fn params(&self, x: &DVector<f64>) -> Result<MixtureParams<f64>> {
        let mut probs: Vec<f64> = x.iter().map(|&p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if total > 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        MixtureParams::new(self.model, probs)
    }
}

/// Solves one approximation problem.
pub fn solve(problem: &ApproximationProblem) -> Result<ApproximationResult> {
    let design = Design::new(problem.model, &problem.target_chi);
    let f_target = problem.target_fidelity()?;
    let (x, diagnostics) = match problem.constraint {
        ConstraintKind::AverageFidelity => {
            let weights: Vec<f64> = identity_fidelity_coefficients::<f64>(problem.model)
                .into_iter()
                .map(|c| 1.0 - c)
                .collect();
            let sol = solve_linear(&design, &weights, 1.0 - f_target, None)?;
            let diagnostics = SolverDiagnostics {
                iterations: sol.iterations,
                restarts: 1,
                converged: true,
            };
            (sol.x, diagnostics)
        }
        ConstraintKind::WorstFidelity => solve_worst(&design, f_target, problem.domain)?,
    };
    finish(problem, &design, &x, f_target, diagnostics)
}

/// Average-constraint solve from an explicit feasible start; used to check
/// that the optimum does not depend on where the iteration begins.
pub fn solve_average_from(problem: &ApproximationProblem, start: &[f64]) -> Result<ApproximationResult> {
    let design = Design::new(problem.model, &problem.target_chi);
    let f_target = average_from_chi(&problem.target_chi);
    let weights: Vec<f64> = identity_fidelity_coefficients::<f64>(problem.model)
        .into_iter()
        .map(|c| 1.0 - c)
        .collect();
    let x0 = DVector::from_column_slice(start);
    let sol = solve_linear(&design, &weights, 1.0 - f_target, Some(x0))?;
    let diagnostics = SolverDiagnostics {
        iterations: sol.iterations,
        restarts: 1,
        converged: true,
    };
    let mut fixed = problem.clone();
    fixed.constraint = ConstraintKind::AverageFidelity;
    finish(&fixed, &design, &sol.x, f_target, diagnostics)
}

fn solve_linear(design: &Design, weights: &[f64], need: f64, start: Option<DVector<f64>>) -> Result<QpSolution> {
    let x0 = match start {
        Some(x) => x,
        None => design.feasible_start(weights, need).ok_or_else(|| Error::Convergence {
            what: "feasible starting point".into(),
            best: f64::INFINITY,
        })?,
    };
    design.qp(weights, need).solve_from(x0)
}

fn finish(
    problem: &ApproximationProblem,
    design: &Design,
    x: &DVector<f64>,
    f_target: f64,
    diagnostics: SolverDiagnostics,
) -> Result<ApproximationResult> {
    let params = design.params(x)?;
    let model_chi = mixture_chi(&params);
    let distance = hs_distance(&problem.target_chi, &model_chi);
    let f_model = match problem.constraint {
        ConstraintKind::AverageFidelity => average_from_chi(&model_chi),
        ConstraintKind::WorstFidelity => {
            let ch = crate::catalog::build_mixture(&params)?;
            worst_fidelity_in(&ComplexMatrix::identity(2), &ch, problem.domain)?.value
        }
    };
    if f_model > f_target + FIDELITY_SLACK {
        return Err(Error::Convergence {
            what: format!("fidelity constraint (model {f_model} > target {f_target})"),
            best: distance,
        });
    }
    let mut result = ApproximationResult {
        params,
        distance,
        f_target,
        f_model,
        constraint: problem.constraint,
        support: Vec::new(),
        diagnostics,
    };
    result.support = extract_support(&result, SUPPORT_THRESHOLD);
    Ok(result)
}

/// Value of the inner QP at one point of the outer search.
struct Probe {
    value: f64,
    coords: Vec<f64>,
    bloch: [f64; 3],
    x: DVector<f64>,
}

struct WorstSearch<'a> {
    design: &'a Design,
    quadratics: Vec<FidelityQuadratic<f64>>,
    need: f64,
    domain: StateDomain,
    iterations: Cell<usize>,
}

impl WorstSearch<'_> {
    /// Pure states are searched in polar angles `(θ, φ)`, mixed states in
    /// Cartesian coordinates clamped to the ball.
    fn to_bloch(&self, coords: &[f64]) -> [f64; 3] {
        match self.domain {
            StateDomain::Pure => {
                let (t, p) = (coords[0], coords[1]);
                [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
            }
            StateDomain::Mixed => {
                let r = [coords[0], coords[1], coords[2]];
                let n = norm3(&r);
                if n > 1.0 {
                    r.map(|v| v / n)
                } else {
                    r
                }
            }
        }
    }

    fn coords_of(&self, r: [f64; 3]) -> Vec<f64> {
        match self.domain {
            StateDomain::Pure => {
                let n = norm3(&r);
                vec![(r[2] / n).clamp(-1.0, 1.0).acos(), r[1].atan2(r[0])]
            }
            StateDomain::Mixed => r.to_vec(),
        }
    }

    /// Solves the inner QP at `coords`, starting from `warm` (scaled up to
    /// feasibility) when given.
    fn probe(&self, coords: Vec<f64>, warm: Option<&DVector<f64>>) -> Probe {
        let bloch = self.to_bloch(&coords);
        let weights: Vec<f64> = self.quadratics.iter().map(|q| 1.0 - q.eval(&bloch)).collect();
        let infeasible = |coords| Probe {
            value: f64::INFINITY,
            coords,
            bloch,
            x: DVector::zeros(self.design.dim()),
        };
        let start = warm
            .and_then(|x| self.design.scaled_start(x, &weights, self.need))
            .or_else(|| self.design.feasible_start(&weights, self.need));
        let Some(x0) = start else {
            return infeasible(coords);
        };
        match self.design.qp(&weights, self.need).solve_from(x0) {
            Ok(sol) => {
                self.iterations.set(self.iterations.get() + sol.iterations);
                Probe {
                    value: sol.objective,
                    coords,
                    bloch,
                    x: sol.x,
                }
            }
            Err(_) => infeasible(coords),
        }
    }

    /// Nelder-Mead on the search coordinates.
    fn polish(&self, start: Vec<f64>, warm: Option<&DVector<f64>>, size: f64) -> Probe {
        let dim = start.len();
        let first = self.probe(start.clone(), warm);
        let mut simplex: Vec<Probe> = vec![first];
        for axis in 0..dim {
            let mut c = start.clone();
            c[axis] += size;
            let p = self.probe(c, Some(&simplex[0].x));
            simplex.push(p);
        }
        for _ in 0..NM_MAX_ITER {
            simplex.sort_by(|a, b| a.value.total_cmp(&b.value));
            let diam = simplex[1..]
                .iter()
                .map(|p| dist(&p.bloch, &simplex[0].bloch))
                .fold(0.0, f64::max);
            if diam <= NM_TOL {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|i| simplex[..dim].iter().map(|p| p.coords[i]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].coords.clone();
            let hint = simplex[0].x.clone();
            let warm = simplex[0].value.is_finite().then_some(&hint);
            let along = |t: f64| -> Vec<f64> { (0..dim).map(|i| centroid[i] + t * (worst[i] - centroid[i])).collect() };

            let reflected = self.probe(along(-1.0), warm);
            if reflected.value < simplex[0].value {
                let expanded = self.probe(along(-2.0), warm);
                simplex[dim] = if expanded.value < reflected.value { expanded } else { reflected };
            } else if reflected.value < simplex[dim - 1].value {
                simplex[dim] = reflected;
            } else {
                let t = if reflected.value < simplex[dim].value { -0.5 } else { 0.5 };
                let contracted = self.probe(along(t), warm);
                if contracted.value < simplex[dim].value.min(reflected.value) {
                    simplex[dim] = contracted;
                } else {
                    let best = simplex[0].coords.clone();
                    for p in simplex.iter_mut().skip(1) {
                        let c: Vec<f64> = (0..dim).map(|i| best[i] + 0.5 * (p.coords[i] - best[i])).collect();
                        *p = self.probe(c, warm);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.value.total_cmp(&b.value));
        simplex.swap_remove(0)
    }
}

const NM_MAX_ITER: usize = 600;
const NM_TOL: f64 = 1e-10;

fn norm3(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// The 26 nonzero directions of the cube lattice `{−1, 0, 1}³`, normalized.
fn lattice_directions() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) != (0, 0, 0) {
                    let v = [i, j, k].map(f64::from);
                    let n = norm3(&v);
                    out.push(v.map(|c| c / n));
                }
            }
        }
    }
    out
}

/// Starting points of the outer search. Pure states: the lattice directions
/// and a 64-point Fibonacci sphere. Mixed states: the origin plus the lattice
/// directions at radii 1/3, 2/3 and 1.
fn outer_grid(domain: StateDomain) -> Vec<[f64; 3]> {
    let dirs = lattice_directions();
    match domain {
        StateDomain::Pure => {
            let n = 64;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let fib = (0..n).map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let s = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                [s * a.cos(), s * a.sin(), z]
            });
            dirs.into_iter().chain(fib).collect()
        }
        StateDomain::Mixed => std::iter::once([0.0; 3])
            .chain([1.0 / 3.0, 2.0 / 3.0, 1.0].into_iter().flat_map(|radius| {
                dirs.iter().map(move |d| d.map(|c| radius * c))
            }))
            .collect(),
    }
}

/// Local searches started from the best grid points.
const WORST_RESTARTS: usize = 4;

fn solve_worst(design: &Design, f_target: f64, domain: StateDomain) -> Result<(DVector<f64>, SolverDiagnostics)> {
    let id = ComplexMatrix::identity(2);
    let quadratics = design
        .generators
        .iter()
        .map(|g| FidelityQuadratic::from_operators(&id, &g.kraus::<f64>()))
        .collect();
    let search = WorstSearch {
        design,
        quadratics,
        need: 1.0 - f_target,
        domain,
        iterations: Cell::new(0),
    };

    let mut grid: Vec<Probe> = outer_grid(domain)
        .into_iter()
        .map(|r| search.probe(search.coords_of(r), None))
        .collect();
    grid.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut seeds: Vec<&Probe> = Vec::new();
    for p in &grid {
        if !p.value.is_finite() || seeds.len() == WORST_RESTARTS {
            break;
        }
        if seeds.iter().all(|s| dist(&s.bloch, &p.bloch) > 1e-6) {
            seeds.push(p);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Convergence {
            what: "worst-case feasible region search".into(),
            best: f64::INFINITY,
        });
    }

    let size = match domain {
        StateDomain::Pure => 0.3,
        StateDomain::Mixed => 0.2,
    };
    let restarts = seeds.len();
    let locals: Vec<Probe> = seeds.iter().map(|s| search.polish(s.coords.clone(), Some(&s.x), size)).collect();
    let best = locals
        .into_iter()
        .chain(std::iter::once(grid.swap_remove(0)))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one candidate");
    let diagnostics = SolverDiagnostics {
        iterations: search.iterations.get(),
        restarts,
        converged: best.value.is_finite(),
    };
    Ok((best.x, diagnostics))
}

/// One entry of [`solve_batch`].
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub target_index: usize,
    pub model: ModelKind,
    pub result: Result<ApproximationResult>,
}

/// Solves every `(target, model)` pair, in parallel. Output is ordered by
/// target, then by model in the order given; failures are kept per item.
pub fn solve_batch(targets: &[ChiMatrix<f64>], models: &[ModelKind], constraint: ConstraintKind) -> Vec<BatchItem> {
    solve_batch_with(targets, models, constraint, StateDomain::default())
}

/// [`solve_batch`] with an explicit worst-case state domain.
pub fn solve_batch_with(
    targets: &[ChiMatrix<f64>],
    models: &[ModelKind],
    constraint: ConstraintKind,
    domain: StateDomain,
) -> Vec<BatchItem> {
    let jobs: Vec<(usize, ModelKind)> = (0..targets.len())
        .flat_map(|t| models.iter().map(move |&m| (t, m)))
        .collect();
    jobs.into_par_iter()
        .map(|(t, model)| BatchItem {
            target_index: t,
            model,
            result: ApproximationProblem::from_chi(targets[t].clone(), model, constraint)
                .and_then(|p| solve(&p.with_domain(domain))),
        })
        .collect()
}
