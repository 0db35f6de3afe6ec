//! Distance and fidelity functionals on one-qubit channels.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::{paulis, ComplexMatrix};
use crate::scalar::{Real, C};

/// Which fidelity bounds the approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    AverageFidelity,
    WorstFidelity,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 2] = [ConstraintKind::AverageFidelity, ConstraintKind::WorstFidelity];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::AverageFidelity => "avg",
            ConstraintKind::WorstFidelity => "worst",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" | "average" => Ok(ConstraintKind::AverageFidelity),
            "worst" => Ok(ConstraintKind::WorstFidelity),
            other => Err(Error::InvalidParameters(format!("unknown constraint {other:?}"))),
        }
    }
}

/// Normalized Hilbert-Schmidt distance `‖χ₁ − χ₂‖²_HS / 8`.
pub fn hs_distance<T: Real>(a: &ChiMatrix<T>, b: &ChiMatrix<T>) -> T {
    (a.matrix() - b.matrix()).norm_sqr() / T::lit(8.0)
}

fn check_unitary<T: Real>(v: &ComplexMatrix<T>) -> Result<()> {
    if v.rows() != 2 || v.cols() != 2 {
        return Err(Error::Dimension {
            expected: "2x2 unitary".into(),
            found: format!("{}x{}", v.rows(), v.cols()),
        });
    }
    let deviation = v.unitarity_defect();
    if deviation > T::default_tol() {
        return Err(Error::NotUnitary {
            deviation: deviation.as_f64(),
        });
    }
    Ok(())
}

/// `F_av(V, K) = ¼ Σᵢ |Tr(V† Kᵢ)|²`.
pub fn avg_fidelity<T: Real>(v: &ComplexMatrix<T>, ch: &KrausChannel<T>) -> Result<T> {
    check_unitary(v)?;
    let vd = v.adjoint();
    Ok(ch
        .ops()
        .iter()
        .map(|k| (&vd * k).trace().norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        / T::lit(4.0))
}

/// `r ↦ Σᵢ |Tr(V† Kᵢ ρ(r))|²` written as the quadratic `rᵀHr + 2gᵀr + c`.
///
/// With `Mᵢ = V†Kᵢ`, `Tr(Mᵢ ρ) = αᵢ + βᵢ·r` where `αᵢ = Tr Mᵢ / 2` and
/// `βᵢⱼ = Tr(Mᵢ σⱼ)/2`, so `H = Σ Re(β̄ βᵀ)` is positive semidefinite and the
/// function is convex on the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityQuadratic<T: Real> {
    pub h: [[T; 3]; 3],
    pub g: [T; 3],
    pub c: T,
}

impl<T: Real> FidelityQuadratic<T> {
    pub fn new(v: &ComplexMatrix<T>, ch: &KrausChannel<T>) -> Result<Self> {
        check_unitary(v)?;
        Ok(Self::from_operators(&v.adjoint(), ch.ops()))
    }

    /// Quadratic for `Σ |Tr(left · Kᵢ ρ)|²` with no unitarity requirement.
    pub fn from_operators(left: &ComplexMatrix<T>, ops: &[ComplexMatrix<T>]) -> Self {
        let [_, x, y, z] = paulis::<T>();
        let half = T::lit(0.5);
        let mut h = [[T::zero(); 3]; 3];
        let mut g = [T::zero(); 3];
        let mut c = T::zero();
        for k in ops {
            let m = left * k;
            let alpha = m.trace().scale(half);
            let beta: [C<T>; 3] = [&x, &y, &z].map(|s| (&m * s).trace().scale(half));
            c += alpha.norm_sqr();
            for i in 0..3 {
                g[i] += (alpha.conj() * beta[i]).re;
                for j in 0..3 {
                    h[i][j] += (beta[i].conj() * beta[j]).re;
                }
            }
        }
        Self { h, g, c }
    }

    pub fn eval(&self, r: &[T; 3]) -> T {
        let mut v = self.c;
        for i in 0..3 {
            v += T::lit(2.0) * self.g[i] * r[i];
            for j in 0..3 {
                v += r[i] * self.h[i][j] * r[j];
            }
        }
        v
    }

    /// Exact minimum over the unit ball (a trust-region subproblem with a
    /// positive semidefinite Hessian).
    pub fn minimize_on_ball(&self) -> Result<BallMinimum<T>> {
        self.minimize(StateDomain::Mixed)
    }

    /// Exact minimum over the unit sphere, i.e. over pure states.
    pub fn minimize_on_sphere(&self) -> Result<BallMinimum<T>> {
        self.minimize(StateDomain::Pure)
    }

    pub fn minimize(&self, domain: StateDomain) -> Result<BallMinimum<T>> {
        let hm = ComplexMatrix::from_row_major(
            3,
            3,
            self.h.iter().flatten().map(|&x| C::new(x, T::zero())).collect(),
        )?;
        let eig = hm.hermitian_eigen()?;
        let q = |i: usize, k: usize| eig.vectors[(i, k)].re;
        // On the sphere rᵀr = 1, so shifting H by its smallest eigenvalue only
        // adds a constant and leaves a PSD problem whose ball minimizer can be
        // pushed to the boundary along the flat direction.
        let shift = match domain {
            StateDomain::Mixed => T::zero(),
            StateDomain::Pure => eig.values[0],
        };
        let lam: Vec<T> = eig.values.iter().map(|&l| (l - shift).max(T::zero())).collect();
        let gt: Vec<T> = (0..3)
            .map(|k| (0..3).map(|i| q(i, k) * self.g[i]).fold(T::zero(), |a, b| a + b))
            .collect();

        let lam_max = lam.iter().copied().fold(T::zero(), T::max);
        let g_norm = gt.iter().map(|v| *v * *v).fold(T::zero(), |a, b| a + b).sqrt();
        let eps = T::epsilon() * T::lit(64.0);
        let flat = |l: T| l <= eps * lam_max.max(T::one());

        let interior = (0..3).all(|k| !flat(lam[k]) || gt[k].abs() <= eps * g_norm.max(T::one()));
        let step = |mu: T| -> Vec<T> {
            (0..3)
                .map(|k| {
                    let d = lam[k] + mu;
                    if d > T::zero() {
                        -gt[k] / d
                    } else {
                        T::zero()
                    }
                })
                .collect()
        };
        let norm = |v: &[T]| v.iter().map(|x| *x * *x).fold(T::zero(), |a, b| a + b).sqrt();

        let mut rt = step(T::zero());
        if !interior || norm(&rt) > T::one() {
            // φ(μ) = |r(μ)| decreases from > 1 to ≤ 1 on [0, |g|]
            let (mut lo, mut hi) = (T::zero(), g_norm.max(T::min_positive_value()));
            for _ in 0..300 {
                let mid = (lo + hi) * T::lit(0.5);
                if norm(&step(mid)) > T::one() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::epsilon() * hi {
                    break;
                }
            }
            rt = step(hi);
            let n = norm(&rt);
            if n > T::zero() {
                rt.iter_mut().for_each(|x| *x /= n);
            }
        }
        if domain == StateDomain::Pure {
            let n2 = rt.iter().map(|x| *x * *x).fold(T::zero(), |a, b| a + b);
            if n2 < T::one() {
                let pad = (T::one() - n2).sqrt();
                rt[0] = if rt[0] < T::zero() { rt[0] - pad } else { rt[0] + pad };
                let n = norm(&rt);
                rt.iter_mut().for_each(|x| *x /= n);
            }
        }
        let bloch: [T; 3] =
            std::array::from_fn(|i| (0..3).map(|k| q(i, k) * rt[k]).fold(T::zero(), |a, b| a + b));
        let value = self.eval(&bloch);
        if !value.is_finite() {
            return Err(Error::Convergence {
                what: "Bloch-ball minimization".into(),
                best: value.as_f64(),
            });
        }
        Ok(BallMinimum { value, bloch })
    }
}

/// States over which the worst-case fidelity is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StateDomain {
    /// Pure states, the surface of the Bloch ball.
    #[default]
    Pure,
    /// All density matrices, the full Bloch ball.
    Mixed,
}

impl StateDomain {
    pub const ALL: [StateDomain; 2] = [StateDomain::Pure, StateDomain::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            StateDomain::Pure => "pure",
            StateDomain::Mixed => "mixed",
        }
    }
}

impl fmt::Display for StateDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(StateDomain::Pure),
            "mixed" => Ok(StateDomain::Mixed),
            other => Err(Error::InvalidParameters(format!("unknown state domain {other:?}"))),
        }
    }
}

/// Minimum of a [`FidelityQuadratic`] and the Bloch vector attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMinimum<T: Real> {
    pub value: T,
    pub bloch: [T; 3],
}

/// `F_w(V, K) = min_ρ Σᵢ |Tr(V† Kᵢ ρ)|²` over pure states.
pub fn worst_fidelity<T: Real>(v: &ComplexMatrix<T>, ch: &KrausChannel<T>) -> Result<BallMinimum<T>> {
    worst_fidelity_in(v, ch, StateDomain::Pure)
}

/// Worst-case fidelity with the minimization domain chosen explicitly.
pub fn worst_fidelity_in<T: Real>(
    v: &ComplexMatrix<T>,
    ch: &KrausChannel<T>,
    domain: StateDomain,
) -> Result<BallMinimum<T>> {
    FidelityQuadratic::new(v, ch)?.minimize(domain)
}

/// Fidelity of `ch` against the identity under the given constraint kind.
pub fn identity_fidelity<T: Real>(ch: &KrausChannel<T>, kind: ConstraintKind, domain: StateDomain) -> Result<T> {
    let id = ComplexMatrix::identity(2);
    match kind {
        ConstraintKind::AverageFidelity => avg_fidelity(&id, ch),
        ConstraintKind::WorstFidelity => Ok(worst_fidelity_in(&id, ch, domain)?.value),
    }
}
