//! One-qubit channel representations: Kraus sets, process (χ) matrices in the
//! normalized Pauli basis `{I, X, Y, Z}/√2`, and Bloch-vector states.
//!
//! The χ matrix of a map `ρ ↦ Σᵢ Kᵢ ρ Kᵢ†` has entries
//! `χ_mn = Σᵢ Tr(B_m† Kᵢ) Tr(B_n† Kᵢ)*`, so that the same map reads
//! `ρ ↦ Σ_mn χ_mn B_m ρ B_n†`. Trace preservation becomes `Tr χ = 2` plus three
//! linear conditions on the off-diagonal entries, listed in [`validate_cptp`].

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{paulis, ComplexMatrix};
use crate::scalar::{cr, Real, C};

/// The four normalized Pauli basis operators `σ_m/√2`, order `I, X, Y, Z`.
pub fn pauli_basis<T: Real>() -> [ComplexMatrix<T>; 4] {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    paulis::<T>().map(|p| p.scale_real(s))
}

/// A completely positive map given by its Kraus operators.
///
/// Each operator already carries its `√p` weight. Construction via
/// [`KrausChannel::new`] enforces `Σ K†K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<T: Real> {
    ops: Vec<ComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    /// Trace-preserving channel; fails when `Σ K†K` deviates from `I` by more
    /// than the scalar's default tolerance.
    pub fn new(ops: Vec<ComplexMatrix<T>>) -> Result<Self> {
        Self::with_tolerance(ops, T::default_tol())
    }

    pub fn with_tolerance(ops: Vec<ComplexMatrix<T>>, tol: T) -> Result<Self> {
        let ch = Self::new_unchecked(ops)?;
        let deviation = ch.completeness_defect();
        if deviation > tol {
            return Err(Error::NotTracePreserving {
                deviation: deviation.as_f64(),
            });
        }
        Ok(ch)
    }

    /// Checks only shapes, not completeness.
    pub fn new_unchecked(ops: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptyChannel);
        }
        if let Some(bad) = ops.iter().find(|k| k.rows() != 2 || k.cols() != 2) {
            return Err(Error::Dimension {
                expected: "2x2 Kraus operator".into(),
                found: format!("{}x{}", bad.rows(), bad.cols()),
            });
        }
        Ok(Self { ops })
    }

    pub fn identity() -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(2)],
        }
    }

    /// Single unitary conjugation `ρ ↦ UρU†`.
    pub fn unitary(u: ComplexMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn ops(&self) -> &[ComplexMatrix<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest entry of `Σ K†K − I`.
    pub fn completeness_defect(&self) -> T {
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&k.adjoint() * k));
        (&sum - &ComplexMatrix::identity(2)).max_abs()
    }

    /// Probabilistic mixture: union of the Kraus sets, each scaled by `√wⱼ`.
    pub fn mixture(parts: &[(T, &KrausChannel<T>)]) -> Result<Self> {
        let ops = parts
            .iter()
            .filter(|(w, _)| *w > T::zero())
            .flat_map(|(w, ch)| ch.ops.iter().map(move |k| k.scale_real(w.sqrt())))
            .collect();
        Self::new(ops)
    }
}

/// Process matrix in the normalized Pauli basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix<T: Real> {
    m: ComplexMatrix<T>,
}

impl<T: Real> ChiMatrix<T> {
    /// Wraps a 4×4 matrix without checking any channel invariant; see
    /// [`validate_cptp`].
    pub fn from_matrix(m: ComplexMatrix<T>) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::Dimension {
                expected: "4x4 process matrix".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        Ok(Self { m })
    }

    pub fn from_row_major(entries: Vec<C<T>>) -> Result<Self> {
        Self::from_matrix(ComplexMatrix::from_row_major(4, 4, entries)?)
    }

    /// χ of the identity channel, `diag(2, 0, 0, 0)`.
    pub fn identity() -> Self {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = cr(T::lit(2.0));
        Self { m }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> C<T> {
        self.m.trace()
    }

    /// `Σ_mn χ_mn B_m ρ B_n†` for an arbitrary 2×2 operator `ρ`.
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let basis = pauli_basis::<T>();
        let mut out = ComplexMatrix::zeros(2, 2);
        for (mi, bm) in basis.iter().enumerate() {
            let left = bm * rho;
            for (ni, bn) in basis.iter().enumerate() {
                let coeff = self.m[(mi, ni)];
                if coeff.is_zero() {
                    continue;
                }
                out = &out + &(&left * &bn.adjoint()).scale(coeff);
            }
        }
        out
    }

    /// `(1 − s)·self + s·other`, the χ of a probabilistic mixture.
    pub fn lerp(&self, other: &Self, s: T) -> Self {
        Self {
            m: &self.m.scale_real(T::one() - s) + &other.m.scale_real(s),
        }
    }
}

impl<T: Real> fmt::Display for ChiMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|j| {
                    let z = self.m[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// One-qubit state `ρ = (I + r·σ)/2` stored by its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T: Real> {
    bloch: [T; 3],
}

impl<T: Real> DensityMatrix<T> {
    /// Fails for `|r| > 1` beyond the default tolerance.
    pub fn from_bloch(bloch: [T; 3]) -> Result<Self> {
        let norm = bloch_norm(&bloch);
        if norm.is_nan() || norm > T::one() + T::default_tol() {
            return Err(Error::Unphysical {
                norm: norm.as_f64(),
            });
        }
        Ok(Self { bloch })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            bloch: [T::zero(); 3],
        }
    }

    pub fn bloch(&self) -> [T; 3] {
        self.bloch
    }

    pub fn is_pure(&self, tol: T) -> bool {
        (bloch_norm(&self.bloch) - T::one()).abs() <= tol
    }

    pub fn to_matrix(&self) -> ComplexMatrix<T> {
        bloch_to_operator(&self.bloch)
    }

    /// The four probe states `|0⟩, |1⟩, |+⟩, |+i⟩`, which span operator space.
    pub fn probes() -> [Self; 4] {
        let (o, l) = (T::zero(), T::one());
        [[o, o, l], [o, o, -l], [l, o, o], [o, l, o]].map(|bloch| Self { bloch })
    }
}

fn bloch_norm<T: Real>(r: &[T; 3]) -> T {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// `(I + r·σ)/2` without any physicality check.
pub fn bloch_to_operator<T: Real>(r: &[T; 3]) -> ComplexMatrix<T> {
    let [id, x, y, z] = paulis::<T>();
    let half = T::lit(0.5);
    let sum = &(&(&id + &x.scale_real(r[0])) + &y.scale_real(r[1])) + &z.scale_real(r[2]);
    sum.scale_real(half)
}

/// Bloch components `Tr(ρσ_j)` of a 2×2 operator.
pub fn operator_to_bloch<T: Real>(rho: &ComplexMatrix<T>) -> [T; 3] {
    let [_, x, y, z] = paulis::<T>();
    [x, y, z].map(|s| (rho * &s).trace().re)
}

/// Converts a Kraus set to its process matrix.
pub fn kraus_to_chi<T: Real>(ch: &KrausChannel<T>) -> Result<ChiMatrix<T>> {
    let deviation = ch.completeness_defect();
    if deviation > T::default_tol() {
        return Err(Error::NotTracePreserving {
            deviation: deviation.as_f64(),
        });
    }
    Ok(kraus_to_chi_unchecked(ch))
}

/// Process matrix of any Kraus set, trace preserving or not.
pub fn kraus_to_chi_unchecked<T: Real>(ch: &KrausChannel<T>) -> ChiMatrix<T> {
    let basis = pauli_basis::<T>();
    let mut m = ComplexMatrix::zeros(4, 4);
    for k in ch.ops() {
        let coeffs: Vec<C<T>> = basis.iter().map(|b| (&b.adjoint() * k).trace()).collect();
        m = &m + &ComplexMatrix::outer(&coeffs, &coeffs);
    }
    ChiMatrix { m }
}

/// Recovers a Kraus set from a positive process matrix via its eigenvectors.
/// Eigenvalues below the default tolerance are dropped, slightly negative
/// ones included.
pub fn chi_to_kraus<T: Real>(chi: &ChiMatrix<T>) -> Result<KrausChannel<T>> {
    let eig = chi.m.hermitian_eigen()?;
    let basis = pauli_basis::<T>();
    let tol = T::default_tol();
    if let Some(&lowest) = eig.values.first() {
        if lowest < -tol {
            return Err(Error::InvalidTarget(format!(
                "process matrix is not positive (eigenvalue {lowest})"
            )));
        }
    }
    let ops: Vec<ComplexMatrix<T>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam > tol)
        .map(|(idx, &lam)| {
            let w = lam.sqrt();
            basis
                .iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(2, 2), |acc, (m, b)| {
                    &acc + &b.scale(eig.vectors[(m, idx)] * cr(w))
                })
        })
        .collect();
    KrausChannel::with_tolerance(ops, T::lit(100.0) * tol)
}

/// `Σ K ρ K†` on an arbitrary 2×2 operator.
pub fn apply_kraus<T: Real>(ch: &KrausChannel<T>, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ch.ops().iter().fold(ComplexMatrix::zeros(2, 2), |acc, k| {
        &acc + &(&(k * rho) * &k.adjoint())
    })
}

/// Output state of the channel for input `rho`.
pub fn apply_channel<T: Real>(ch: &KrausChannel<T>, rho: &DensityMatrix<T>) -> ComplexMatrix<T> {
    apply_kraus(ch, &rho.to_matrix())
}

/// Bloch vector of the channel output for Bloch input `r_in`.
pub fn bloch_image<T: Real>(ch: &KrausChannel<T>, r_in: [T; 3]) -> Result<[T; 3]> {
    let rho = DensityMatrix::from_bloch(r_in)?;
    Ok(operator_to_bloch(&apply_channel(ch, &rho)))
}

/// Which process-matrix invariant a [`Violation`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Hermiticity,
    Positivity,
    Trace,
    /// `Re χ01 = −Im χ23`
    OffDiagonalX,
    /// `Re χ02 = Im χ13`
    OffDiagonalY,
    /// `Re χ03 = −Im χ12`
    OffDiagonalZ,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::Hermiticity => "hermiticity",
            Constraint::Positivity => "positivity",
            Constraint::Trace => "trace",
            Constraint::OffDiagonalX => "tp-offdiag-x",
            Constraint::OffDiagonalY => "tp-offdiag-y",
            Constraint::OffDiagonalZ => "tp-offdiag-z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub magnitude: f64,
}

/// Outcome of [`validate_cptp`]: empty iff the matrix is a valid CPTP χ.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn get(&self, constraint: Constraint) -> Option<&Violation> {
        self.violations.iter().find(|v| v.constraint == constraint)
    }
}

/// Checks Hermiticity, positivity, `Tr χ = 2` and the three trace-preservation
/// relations between off-diagonal entries, each at the scalar's default
/// tolerance. Violations are reported with their magnitudes.
pub fn validate_cptp<T: Real>(chi: &ChiMatrix<T>) -> ValidationReport {
    validate_cptp_with(chi, T::default_tol())
}

pub fn validate_cptp_with<T: Real>(chi: &ChiMatrix<T>, tol: T) -> ValidationReport {
    let m = &chi.m;
    let mut violations = Vec::new();
    let mut push = |constraint, magnitude: T| {
        if magnitude > tol || magnitude.is_nan() {
            violations.push(Violation {
                constraint,
                magnitude: magnitude.as_f64(),
            });
        }
    };

    push(Constraint::Hermiticity, m.hermiticity_defect());
    let lowest = m
        .hermitian_eigen()
        .ok()
        .and_then(|e| e.values.first().copied())
        .unwrap_or_else(T::nan);
    push(Constraint::Positivity, -lowest);
    let tr = m.trace();
    push(Constraint::Trace, (tr - cr(T::lit(2.0))).norm());
    push(Constraint::OffDiagonalX, (m[(0, 1)].re + m[(2, 3)].im).abs());
    push(Constraint::OffDiagonalY, (m[(0, 2)].re - m[(1, 3)].im).abs());
    push(Constraint::OffDiagonalZ, (m[(0, 3)].re + m[(1, 2)].im).abs());
    ValidationReport { violations }
}

impl<T: Real> From<&KrausChannel<T>> for ChiMatrix<T> {
    fn from(ch: &KrausChannel<T>) -> Self {
        kraus_to_chi_unchecked(ch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use crate::targets::adc;

    fn ket0() -> ComplexMatrix<f64> {
        ComplexMatrix::from_2x2(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    #[test]
    fn identity_and_x_chi() {
        let chi = kraus_to_chi(&KrausChannel::<f64>::identity()).unwrap();
        assert!(chi.matrix().approx_eq(ChiMatrix::identity().matrix(), 1e-14));
        let x = paulis::<f64>()[1].clone();
        let chi = kraus_to_chi(&KrausChannel::unitary(x).unwrap()).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(chi.matrix().approx_eq(&expected, 1e-14));
    }

    /// Oracle: the χ action and the Kraus action agree on the probe states,
    /// and the expected χ reproduces the same outputs.
    #[test]
    fn full_damping_chi() {
        let ch = adc::<f64>(1.0).unwrap();
        let chi = kraus_to_chi(&ch).unwrap();
        let h = 0.5;
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(h, 0.0);
        expected[(3, 3)] = c(h, 0.0);
        expected[(0, 3)] = c(h, 0.0);
        expected[(3, 0)] = c(h, 0.0);
        expected[(1, 1)] = c(h, 0.0);
        expected[(2, 2)] = c(h, 0.0);
        expected[(1, 2)] = c(0.0, -h);
        expected[(2, 1)] = c(0.0, h);
        let expected = ChiMatrix::from_matrix(expected).unwrap();
        for probe in DensityMatrix::probes() {
            let rho = probe.to_matrix();
            let via_kraus = apply_kraus(&ch, &rho);
            assert!(expected.apply(&rho).approx_eq(&via_kraus, 1e-14));
            assert!(via_kraus.approx_eq(&ket0(), 1e-14));
        }
        assert!(chi.matrix().approx_eq(expected.matrix(), 1e-14));
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let half = ComplexMatrix::<f64>::identity(2).scale_real(0.5);
        let ch = KrausChannel::new_unchecked(vec![half.clone()]).unwrap();
        assert!(matches!(kraus_to_chi(&ch), Err(Error::NotTracePreserving { .. })));
        assert!(KrausChannel::new(vec![half]).is_err());
        assert_eq!(KrausChannel::<f64>::new(vec![]), Err(Error::EmptyChannel));
    }

    #[test]
    fn apply_damping_to_excited_state() {
        for gamma in [0.0, 0.1, 0.25, 0.7, 1.0] {
            let ch = adc::<f64>(gamma).unwrap();
            let rho = DensityMatrix::from_bloch([0.0, 0.0, -1.0]).unwrap();
            let out = apply_channel(&ch, &rho);
            let expected = ComplexMatrix::from_diagonal(&[c(gamma, 0.0), c(1.0 - gamma, 0.0)]);
            assert!(out.approx_eq(&expected, 1e-14));
        }
    }

    #[test]
    fn full_damping_resets_every_state() {
        let ch = adc::<f64>(1.0).unwrap();
        for r in [[0.3, -0.2, 0.1], [0.0, 0.0, -1.0], [0.6, 0.8, 0.0]] {
            let out = apply_channel(&ch, &DensityMatrix::from_bloch(r).unwrap());
            assert!(out.approx_eq(&ket0(), 1e-14));
        }
    }

    #[test]
    fn bloch_images() {
        let id = KrausChannel::<f64>::identity();
        assert_eq!(bloch_image(&id, [0.0, 0.0, 1.0]).unwrap(), [0.0, 0.0, 1.0]);
        let g = 0.3;
        let ch = adc::<f64>(g).unwrap();
        let r = bloch_image(&ch, [0.0, 0.0, -1.0]).unwrap();
        assert!((r[2] - (2.0 * g - 1.0)).abs() < 1e-14 && r[0].abs() < 1e-15);
        let r = bloch_image(&ch, [0.0, 0.0, 0.0]).unwrap();
        assert!((r[2] - g).abs() < 1e-14);
        assert!(matches!(
            bloch_image(&ch, [1.0, 1.0, 0.0]),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn validation_flags_constructed_violations() {
        let chi = kraus_to_chi(&adc::<f64>(0.3).unwrap()).unwrap();
        assert!(validate_cptp(&chi).is_valid());

        let mut m = ChiMatrix::<f64>::identity().into_matrix();
        m[(0, 1)] = c(0.1, 0.0);
        let report = validate_cptp(&ChiMatrix::from_matrix(m).unwrap());
        let v = report.get(Constraint::OffDiagonalX).unwrap();
        assert!((v.magnitude - 0.1).abs() < 1e-15);

        let m = ComplexMatrix::from_diagonal(&[c::<f64>(3.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let report = validate_cptp(&ChiMatrix::from_matrix(m).unwrap());
        assert!((report.get(Constraint::Positivity).unwrap().magnitude - 1.0).abs() < 1e-12);
        assert!(report.get(Constraint::Trace).is_none(), "trace of diag(3,-1,0,0) is 2");
    }

    #[test]
    fn chi_to_kraus_round_trip() {
        let ch = adc::<f64>(0.4).unwrap();
        let chi = kraus_to_chi(&ch).unwrap();
        let back = chi_to_kraus(&chi).unwrap();
        let chi2 = kraus_to_chi(&back).unwrap();
        assert!(chi.matrix().approx_eq(chi2.matrix(), 1e-12));
    }

    #[test]
    fn single_precision_conversion() {
        let ch = adc::<f32>(0.5).unwrap();
        let chi = kraus_to_chi(&ch).unwrap();
        assert!(validate_cptp(&chi).is_valid());
        assert!((chi.trace().re - 2.0).abs() < 1e-6);
    }
}
