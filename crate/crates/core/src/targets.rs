//! Channels to be approximated: amplitude damping, polarization along an axis
//! in the X-Y plane, and random trace-preserving process matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::channel::{validate_cptp, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::{paulis, ComplexMatrix};
use crate::scalar::{cr, Real, C};

/// Retry budget of [`random_chi`].
pub const MAX_ATTEMPTS: usize = 100_000;

/// Amplitude damping with strength `gamma ∈ [0, 1]`:
/// `{|0⟩⟨0| + √(1−γ)|1⟩⟨1|, √γ|0⟩⟨1|}`.
pub fn adc<T: Real>(gamma: T) -> Result<KrausChannel<T>> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::InvalidTarget(format!("damping strength {gamma} outside [0, 1]")));
    }
    let (o, l) = (T::zero(), T::one());
    let e0 = ComplexMatrix::from_2x2(cr(l), cr(o), cr(o), cr((l - gamma).sqrt()));
    let e1 = ComplexMatrix::from_2x2(cr(o), cr(gamma.sqrt()), cr(o), cr(o));
    KrausChannel::new(vec![e0, e1])
}

/// Polarization along the X-Y plane axis at angle `phi` from X, with error
/// probability `p`: `{√(1−p) I, √p (cos φ X + sin φ Y)}`.
pub fn pol_xy<T: Real>(phi: T, p: T) -> Result<KrausChannel<T>> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidTarget(format!("error probability {p} outside [0, 1]")));
    }
    if !phi.is_finite() {
        return Err(Error::InvalidTarget(format!("angle {phi} is not finite")));
    }
    let two_pi = T::lit(std::f64::consts::TAU);
    let phi = phi - (phi / two_pi).floor() * two_pi;
    let [id, x, y, _] = paulis::<T>();
    let axis = &x.scale_real(phi.cos()) + &y.scale_real(phi.sin());
    KrausChannel::new(vec![
        id.scale_real((T::one() - p).sqrt()),
        axis.scale_real(p.sqrt()),
    ])
}

/// Haar-random 4×4 unitary: Gram-Schmidt on a complex Gaussian matrix. The
/// implied triangular factor has a positive real diagonal, which is the phase
/// correction that makes the distribution uniform.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix<f64> {
    let mut cols: Vec<Vec<C<f64>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C::new(re, im)
                })
                .collect()
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let q = &done[k];
            let proj: C<f64> = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (v, qi) in rest[0].iter_mut().zip(q) {
                *v -= proj * qi;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

/// Enforces the three trace-preservation relations by splitting each
/// discrepancy evenly between the two entries involved, then restores
/// Hermiticity. The diagonal is left untouched.
pub fn project_tp(m: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
    let mut m = m.hermitian_part();
    // (re entry, im entry, sign): Re m[a] = sign · Im m[b]
    let pairs = [((0, 1), (2, 3), -1.0), ((0, 2), (1, 3), 1.0), ((0, 3), (1, 2), -1.0)];
    for ((a, b), sign) in pairs.iter().map(|&(a, b, s)| ((a, b), s)) {
        let re = m[a].re;
        let im = m[b].im;
        let r = 0.5 * (re + sign * im);
        m[a] = C::new(r, m[a].im);
        m[b] = C::new(m[b].re, sign * r);
        m[(a.1, a.0)] = m[a].conj();
        m[(b.1, b.0)] = m[b].conj();
    }
    m
}

/// One random CPTP process matrix: `M = U D U†` with Haar `U` and a diagonal
/// drawn uniformly from the simplex `{dᵢ ≥ 0, Σ dᵢ = 2}`, projected onto the
/// trace-preservation constraints, and kept only if still positive.
pub fn random_chi<R: Rng + ?Sized>(rng: &mut R) -> Result<ChiMatrix<f64>> {
    for _ in 0..MAX_ATTEMPTS {
        let w: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
        let total: f64 = w.iter().sum();
        let d = ComplexMatrix::from_diagonal(&w.map(|x| cr(2.0 * x / total)));
        let u = haar_unitary(rng, 4);
        let m = &(&u * &d) * &u.adjoint();
        let chi = ChiMatrix::from_matrix(project_tp(&m))?;
        if validate_cptp(&chi).is_valid() {
            return Ok(chi);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// Random stream for batch item `index`: ChaCha8 seeded with `seed + index`.
pub fn stream_for(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// `count` random process matrices, item `i` drawn from [`stream_for`]`(seed, i)`.
/// Order and values do not depend on the thread pool.
pub fn random_chi_batch(seed: u64, count: usize) -> Result<Vec<ChiMatrix<f64>>> {
    (0..count)
        .into_par_iter()
        .map(|i| random_chi(&mut stream_for(seed, i)))
        .collect()
}
