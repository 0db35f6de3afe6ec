//! Primal active-set solver for linearly constrained least squares,
//!
//! ```text
//!     minimize    ½‖A x − b‖²
//!     subject to  G x ≤ h
//! ```
//!
//! `AᵀA` may be singular. Each step solves the equality-constrained
//! subproblem on the working set with a minimum-norm least-squares solve, so
//! no step moves along directions that leave the residual unchanged.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const NULL_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-13;
const MULTIPLIER_TOL: f64 = 1e-12;
const ACTIVE_TOL: f64 = 1e-12;
const LSTSQ_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct LeastSquaresQp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// `½‖A x − b‖²`
    pub objective: f64,
    pub iterations: usize,
    /// Indices of constraints in the final working set.
    pub active: Vec<usize>,
    /// Multipliers matching `active`.
    pub multipliers: Vec<f64>,
    /// `‖Aᵀ(Ax − b) + G_Wᵀ λ‖∞`
    pub kkt_residual: f64,
}

impl LeastSquaresQp {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>) -> Self {
        assert_eq!(a.nrows(), b.len());
        assert_eq!(g.nrows(), h.len());
        assert_eq!(a.ncols(), g.ncols());
        Self { a, b, g, h }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }

    /// Largest constraint violation `max_j (G_j x − h_j)⁺`.
    pub fn infeasibility(&self, x: &DVector<f64>) -> f64 {
        (&self.g * x - &self.h).iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Runs the active-set iteration from a feasible starting point.
    pub fn solve_from(&self, x0: DVector<f64>) -> Result<QpSolution> {
        let n = self.dim();
        let m = self.g.nrows();
        let viol = self.infeasibility(&x0);
        if viol > 1e-9 {
            return Err(Error::InvalidParameters(format!(
                "starting point violates constraints by {viol:e}"
            )));
        }

        let mut x = x0;
        let mut working: Vec<usize> = Vec::new();
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let slack = &self.h - &self.g * &x;
        for j in 0..m {
            if slack[j].abs() > ACTIVE_TOL {
                continue;
            }
            // keep only rows independent of those already chosen
            let row = self.g.row(j).transpose();
            let mut r = row.clone();
            for q in &basis {
                r -= q * q.dot(&row);
            }
            let norm = r.norm();
            if norm > 1e-9 * row.norm() {
                basis.push(r / norm);
                working.push(j);
            }
        }

        let max_iter = 50 * (n + m) + 100;
        for iter in 1..=max_iter {
            let residual = &self.a * &x - &self.b;
            let z = self.null_space(&working);
            let d = if z.ncols() == 0 {
                DVector::zeros(n)
            } else {
                let az = &self.a * &z;
                &z * min_norm_lstsq(&az, &(-&residual))
            };

            if d.amax() <= STEP_TOL {
                let grad = self.a.transpose() * &residual;
                let (lambda, kkt) = self.multipliers(&working, &grad);
                match lambda
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l < -MULTIPLIER_TOL)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                {
                    Some((pos, _)) => {
                        working.remove(pos);
                    }
                    None => {
                        return Ok(QpSolution {
                            objective: self.objective(&x),
                            x,
                            iterations: iter,
                            active: working,
                            multipliers: lambda,
                            kkt_residual: kkt,
                        });
                    }
                }
                continue;
            }

            let gd = &self.g * &d;
            let gx = &self.g * &x;
            let mut alpha = 1.0;
            let mut blocking = None;
            for j in 0..m {
                if working.contains(&j) || gd[j] <= 1e-15 {
                    continue;
                }
                let step = ((self.h[j] - gx[j]).max(0.0)) / gd[j];
                if step < alpha {
                    alpha = step;
                    blocking = Some(j);
                }
            }
            x += alpha * &d;
            if let Some(j) = blocking {
                working.push(j);
            }
        }
        Err(Error::Convergence {
            what: "active-set QP".into(),
            best: self.objective(&x),
        })
    }

    fn rows(&self, set: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(set.len(), self.dim(), |i, k| self.g[(set[i], k)])
    }

    /// Orthonormal basis of `{d : G_W d = 0}`.
    fn null_space(&self, set: &[usize]) -> DMatrix<f64> {
        let n = self.dim();
        if set.is_empty() {
            return DMatrix::identity(n, n);
        }
        let gw = self.rows(set);
        let eig = SymmetricEigen::new(gw.transpose() * &gw);
        let scale = eig.eigenvalues.amax().max(1.0);
        let cols: Vec<DVector<f64>> = (0..n)
            .filter(|&k| eig.eigenvalues[k] <= NULL_TOL * scale)
            .map(|k| eig.eigenvectors.column(k).into_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    fn multipliers(&self, set: &[usize], grad: &DVector<f64>) -> (Vec<f64>, f64) {
        if set.is_empty() {
            return (Vec::new(), grad.amax());
        }
        let gwt = self.rows(set).transpose();
        let lambda = min_norm_lstsq(&gwt, &(-grad));
        let kkt = (grad + &gwt * &lambda).amax();
        (lambda.iter().copied().collect(), kkt)
    }
}

/// Minimum-norm solution of `min ‖M y − r‖`, through the eigen-decomposition
/// of the normal matrix `MᵀM` with small eigenvalues treated as zero.
fn min_norm_lstsq(m: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let rhs = m.transpose() * r;
    let cutoff = eig.eigenvalues.amax() * LSTSQ_CUTOFF;
    let mut y = DVector::zeros(m.ncols());
    for k in 0..m.ncols() {
        let lam = eig.eigenvalues[k];
        if lam > cutoff && lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            y += v * (v.dot(&rhs) / lam);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle for strictly convex problems: enumerate every
    /// subset of constraints held with equality, minimize on its affine hull,
    /// keep the best feasible candidate.
    fn enumerate(qp: &LeastSquaresQp) -> f64 {
        let n = qp.dim();
        let m = qp.g.nrows();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            let set: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
            if set.len() > n {
                continue;
            }
            let gs = qp.rows(&set);
            let hs = DVector::from_iterator(set.len(), set.iter().map(|&j| qp.h[j]));
            // x = xp + Z y with G_S xp = h_S
            let xp = if set.is_empty() {
                DVector::zeros(n)
            } else {
                min_norm_lstsq(&gs, &hs)
            };
            if !set.is_empty() && (&gs * &xp - &hs).amax() > 1e-9 {
                continue;
            }
            let z = qp.null_space(&set);
            let x = if z.ncols() == 0 {
                xp
            } else {
                let y = min_norm_lstsq(&(&qp.a * &z), &(&qp.b - &qp.a * &xp));
                xp + z * y
            };
            if qp.infeasibility(&x) <= 1e-9 {
                best = best.min(qp.objective(&x));
            }
        }
        best
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> LeastSquaresQp {
        let rows = n + 3;
        let a = DMatrix::from_fn(rows, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(rows, |_, _| rng.random_range(-2.0..2.0));
        // x ≥ 0, Σx ≤ 1, w·x ≥ t
        let mut g = DMatrix::zeros(n + 2, n);
        let mut h = DVector::zeros(n + 2);
        for i in 0..n {
            g[(i, i)] = -1.0;
            g[(n, i)] = 1.0;
            g[(n + 1, i)] = -rng.random_range(0.2..1.0);
        }
        h[n] = 1.0;
        h[n + 1] = -rng.random_range(0.0..0.15);
        LeastSquaresQp::new(a, b, g, h)
    }

    fn feasible_start(qp: &LeastSquaresQp) -> DVector<f64> {
        let n = qp.dim();
        let w: Vec<f64> = (0..n).map(|i| -qp.g[(n + 1, i)]).collect();
        let need = -qp.h[n + 1];
        let (k, wk) = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let mut x = DVector::zeros(n);
        x[k] = need / wk;
        x
    }

    #[test]
    fn agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(2..=4);
            let qp = random_problem(&mut rng, n);
            let sol = qp.solve_from(feasible_start(&qp)).unwrap();
            let oracle = enumerate(&qp);
            assert!(qp.infeasibility(&sol.x) < 1e-12);
            assert!((sol.objective - oracle).abs() < 1e-10, "{} vs {oracle}", sol.objective);
            assert!(sol.kkt_residual < 1e-9);
            assert!(sol.multipliers.iter().all(|&l| l >= -1e-10));
        }
    }

    #[test]
    fn handles_singular_hessian() {
        // two identical columns: infinitely many minimizers
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[0.4, 0.4]);
        let g = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let h = DVector::from_row_slice(&[0.0, 0.0, 1.0]);
        let qp = LeastSquaresQp::new(a, b, g, h);
        let sol = qp.solve_from(DVector::zeros(2)).unwrap();
        assert!(sol.objective < 1e-24);
        assert!((sol.x.sum() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_infeasible_start() {
        let qp = LeastSquaresQp::new(
            DMatrix::identity(1, 1),
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 0.5),
        );
        assert!(qp.solve_from(DVector::from_element(1, 1.0)).is_err());
        let sol = qp.solve_from(DVector::zeros(1)).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-14);
        assert!((sol.multipliers[0] - 0.5).abs() < 1e-12);
    }
}
