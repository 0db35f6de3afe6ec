//! Error operators that a stabilizer simulator can insert at random: the 24
//! one-qubit Cliffords and the six reset-like "translations" toward a Pauli
//! eigenstate, grouped into the four approximation models.
//!
//! Every model has the identity as its implicit first element. The remaining
//! generators appear in a fixed canonical order, which is also the order of
//! the probability vector in [`MixtureParams`]:
//!
//! 1. Paulis `X, Y, Z`
//! 2. S-like `exp(∓iπ/4 σ_j)` by axis, `+` before `−`
//! 3. Hadamard-like `exp(−iπ/2 (σ_j ± σ_k)/√2)` for `(x,y), (x,z), (y,z)`, `+` before `−`
//! 4. face rotations `exp(−iπ/3 F·σ)`, `F = (±1,±1,±1)/√3`, sign triples in
//!    lexicographic order with `+` before `−`
//! 5. translations toward `|0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩`

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{kraus_to_chi_unchecked, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::{paulis, ComplexMatrix};
use crate::scalar::{c, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        self as usize
    }

    fn lower(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// One of the 24 single-qubit Clifford unitaries (modulo phase).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CliffordLabel {
    Identity,
    Pauli(Axis),
    SLike(Axis, Sign),
    /// Axis pair with `first < second`.
    HadamardLike(Axis, Axis, Sign),
    Face([Sign; 3]),
}

impl CliffordLabel {
    /// All 24 labels in canonical order, identity first.
    pub fn all() -> Vec<CliffordLabel> {
        let mut out = vec![CliffordLabel::Identity];
        out.extend(Axis::ALL.map(CliffordLabel::Pauli));
        for axis in Axis::ALL {
            for sign in Sign::ALL {
                out.push(CliffordLabel::SLike(axis, sign));
            }
        }
        for (j, k) in [(Axis::X, Axis::Y), (Axis::X, Axis::Z), (Axis::Y, Axis::Z)] {
            for sign in Sign::ALL {
                out.push(CliffordLabel::HadamardLike(j, k, sign));
            }
        }
        for a in Sign::ALL {
            for b in Sign::ALL {
                for c in Sign::ALL {
                    out.push(CliffordLabel::Face([a, b, c]));
                }
            }
        }
        out
    }

    /// The unitary exactly as the defining exponential, including its phase.
    pub fn matrix<T: Real>(&self) -> ComplexMatrix<T> {
        let p = paulis::<T>();
        match *self {
            CliffordLabel::Identity => p[0].clone(),
            CliffordLabel::Pauli(a) => p[a.index() + 1].clone(),
            CliffordLabel::SLike(a, s) => {
                let mut n = [0.0; 3];
                n[a.index()] = s.value();
                rotation(FRAC_PI_4, n)
            }
            CliffordLabel::HadamardLike(j, k, s) => {
                let mut n = [0.0; 3];
                n[j.index()] = FRAC_1_SQRT_2;
                n[k.index()] = s.value() * FRAC_1_SQRT_2;
                rotation(FRAC_PI_2, n)
            }
            CliffordLabel::Face(signs) => {
                let r = 1.0 / 3f64.sqrt();
                rotation(FRAC_PI_3, signs.map(|s| s.value() * r))
            }
        }
    }
}

/// `exp(−iθ n·σ) = cos θ I − i sin θ n·σ` for a unit vector `n`.
fn rotation<T: Real>(theta: f64, n: [f64; 3]) -> ComplexMatrix<T> {
    let [id, x, y, z] = paulis::<T>();
    let ns = &(&x.scale_real(T::lit(n[0])) + &y.scale_real(T::lit(n[1]))) + &z.scale_real(T::lit(n[2]));
    &id.scale_real(T::lit(theta.cos())) + &ns.scale(c(0.0, -theta.sin()))
}

impl fmt::Display for CliffordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CliffordLabel::Identity => write!(f, "I"),
            CliffordLabel::Pauli(a) => write!(f, "{}", a.lower().to_ascii_uppercase()),
            CliffordLabel::SLike(a, s) => write!(f, "S{}{}", s.symbol(), a.lower()),
            CliffordLabel::HadamardLike(j, k, s) => {
                write!(f, "H({},{}){}", j.lower(), k.lower(), s.symbol())
            }
            CliffordLabel::Face([a, b, c]) => {
                write!(f, "F({},{},{})", a.symbol(), b.symbol(), c.symbol())
            }
        }
    }
}

/// A Pauli eigenstate, the destination of a measurement-induced translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eigenstate {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Eigenstate {
    pub const ALL: [Eigenstate; 6] = [
        Eigenstate::Zero,
        Eigenstate::One,
        Eigenstate::Plus,
        Eigenstate::Minus,
        Eigenstate::PlusI,
        Eigenstate::MinusI,
    ];

    pub fn ket<T: Real>(self) -> [C<T>; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            Eigenstate::Zero => [c(1.0, 0.0), c(0.0, 0.0)],
            Eigenstate::One => [c(0.0, 0.0), c(1.0, 0.0)],
            Eigenstate::Plus => [c(h, 0.0), c(h, 0.0)],
            Eigenstate::Minus => [c(h, 0.0), c(-h, 0.0)],
            Eigenstate::PlusI => [c(h, 0.0), c(0.0, h)],
            Eigenstate::MinusI => [c(h, 0.0), c(0.0, -h)],
        }
    }

    pub fn orthogonal(self) -> Eigenstate {
        match self {
            Eigenstate::Zero => Eigenstate::One,
            Eigenstate::One => Eigenstate::Zero,
            Eigenstate::Plus => Eigenstate::Minus,
            Eigenstate::Minus => Eigenstate::Plus,
            Eigenstate::PlusI => Eigenstate::MinusI,
            Eigenstate::MinusI => Eigenstate::PlusI,
        }
    }

    pub fn bloch(self) -> [f64; 3] {
        match self {
            Eigenstate::Zero => [0.0, 0.0, 1.0],
            Eigenstate::One => [0.0, 0.0, -1.0],
            Eigenstate::Plus => [1.0, 0.0, 0.0],
            Eigenstate::Minus => [-1.0, 0.0, 0.0],
            Eigenstate::PlusI => [0.0, 1.0, 0.0],
            Eigenstate::MinusI => [0.0, -1.0, 0.0],
        }
    }

    fn ket_label(self) -> &'static str {
        match self {
            Eigenstate::Zero => "|0>",
            Eigenstate::One => "|1>",
            Eigenstate::Plus => "|+>",
            Eigenstate::Minus => "|->",
            Eigenstate::PlusI => "|+i>",
            Eigenstate::MinusI => "|-i>",
        }
    }
}

/// Translation toward `|f⟩`: the Kraus pair `{|f⟩⟨f|, |f⟩⟨f⊥|}` sharing one
/// probability. Applied alone it replaces any state by `|f⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TranslationLabel(pub Eigenstate);

impl TranslationLabel {
    pub fn kraus<T: Real>(&self) -> [ComplexMatrix<T>; 2] {
        let f = self.0.ket::<T>();
        let perp = self.0.orthogonal().ket::<T>();
        [ComplexMatrix::outer(&f, &f), ComplexMatrix::outer(&f, &perp)]
    }
}

impl fmt::Display for TranslationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0.ket_label())
    }
}

/// A non-identity generator of an approximation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Clifford(CliffordLabel),
    Translation(TranslationLabel),
}

impl Generator {
    /// Unweighted Kraus operators of the generator applied with probability one.
    pub fn kraus<T: Real>(&self) -> Vec<ComplexMatrix<T>> {
        match self {
            Generator::Clifford(l) => vec![l.matrix()],
            Generator::Translation(t) => t.kraus().to_vec(),
        }
    }

    pub fn channel<T: Real>(&self) -> KrausChannel<T> {
        KrausChannel::new_unchecked(self.kraus()).expect("catalog operators are 2x2")
    }

    pub fn chi<T: Real>(&self) -> ChiMatrix<T> {
        kraus_to_chi_unchecked(&self.channel())
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Clifford(l) => l.fmt(f),
            Generator::Translation(t) => t.fmt(f),
        }
    }
}

/// The four approximation channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Paulis.
    Pc,
    /// Paulis and translations.
    Pmc,
    /// All Cliffords.
    Cc,
    /// All Cliffords and translations.
    Cmc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Pc, ModelKind::Pmc, ModelKind::Cc, ModelKind::Cmc];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Pc => "pc",
            ModelKind::Pmc => "pmc",
            ModelKind::Cc => "cc",
            ModelKind::Cmc => "cmc",
        }
    }

    /// Number of free probabilities (identity excluded).
    pub fn free_parameters(self) -> usize {
        match self {
            ModelKind::Pc => 3,
            ModelKind::Pmc => 9,
            ModelKind::Cc => 23,
            ModelKind::Cmc => 29,
        }
    }

    pub fn has_translations(self) -> bool {
        matches!(self, ModelKind::Pmc | ModelKind::Cmc)
    }

    pub fn has_all_cliffords(self) -> bool {
        matches!(self, ModelKind::Cc | ModelKind::Cmc)
    }

    /// Models whose generator set is contained in this one's.
    pub fn contains(self, other: ModelKind) -> bool {
        (self.has_all_cliffords() || !other.has_all_cliffords())
            && (self.has_translations() || !other.has_translations())
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pc" => Ok(ModelKind::Pc),
            "pmc" => Ok(ModelKind::Pmc),
            "cc" => Ok(ModelKind::Cc),
            "cmc" => Ok(ModelKind::Cmc),
            other => Err(Error::InvalidParameters(format!("unknown model {other:?}"))),
        }
    }
}

/// Non-identity generators of `model` in canonical order.
pub fn enumerate_generators(model: ModelKind) -> Vec<Generator> {
    let cliffords = CliffordLabel::all().into_iter().skip(1);
    let mut out: Vec<Generator> = if model.has_all_cliffords() {
        cliffords.map(Generator::Clifford).collect()
    } else {
        cliffords
            .filter(|l| matches!(l, CliffordLabel::Pauli(_)))
            .map(Generator::Clifford)
            .collect()
    };
    if model.has_translations() {
        out.extend(
            Eigenstate::ALL
                .into_iter()
                .map(|e| Generator::Translation(TranslationLabel(e))),
        );
    }
    out
}

/// Probabilities of a model's non-identity generators; the identity carries
/// the remainder `1 − Σ p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams<T: Real> {
    model: ModelKind,
    probs: Vec<T>,
}

impl<T: Real> MixtureParams<T> {
    pub fn new(model: ModelKind, probs: Vec<T>) -> Result<Self> {
        if probs.len() != model.free_parameters() {
            return Err(Error::InvalidParameters(format!(
                "{model} takes {} probabilities, got {}",
                model.free_parameters(),
                probs.len()
            )));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| p.is_nan() || **p < T::zero()) {
            return Err(Error::InvalidParameters(format!(
                "probability {i} is negative or NaN ({p})"
            )));
        }
        let total = probs.iter().fold(T::zero(), |a, &b| a + b);
        if total > T::one() + T::default_tol() {
            return Err(Error::InvalidParameters(format!(
                "probabilities sum to {total} > 1"
            )));
        }
        Ok(Self { model, probs })
    }

    pub fn zero(model: ModelKind) -> Self {
        Self {
            model,
            probs: vec![T::zero(); model.free_parameters()],
        }
    }

    /// Single generator with probability `p`, all others zero.
    pub fn single(model: ModelKind, generator: Generator, p: T) -> Result<Self> {
        let idx = enumerate_generators(model)
            .iter()
            .position(|g| *g == generator)
            .ok_or_else(|| {
                Error::InvalidParameters(format!("{generator} is not part of {model}"))
            })?;
        let mut probs = vec![T::zero(); model.free_parameters()];
        probs[idx] = p;
        Self::new(model, probs)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Identity probability `1 − Σ p`, clamped at zero.
    pub fn identity_prob(&self) -> T {
        let total = self.probs.iter().fold(T::zero(), |a, &b| a + b);
        (T::one() - total).max(T::zero())
    }

    /// `(generator, probability)` pairs in canonical order.
    pub fn labeled(&self) -> Vec<(Generator, T)> {
        enumerate_generators(self.model)
            .into_iter()
            .zip(self.probs.iter().copied())
            .collect()
    }
}

/// Kraus channel `{√p₀ I} ∪ {√p_a E : E ∈ generator a}`.
pub fn build_mixture<T: Real>(params: &MixtureParams<T>) -> Result<KrausChannel<T>> {
    let mut ops = Vec::new();
    let p0 = params.identity_prob();
    if p0 > T::zero() {
        ops.push(ComplexMatrix::identity(2).scale_real(p0.sqrt()));
    }
    for (generator, p) in params.labeled() {
        if p > T::zero() {
            let w = p.sqrt();
            ops.extend(generator.kraus::<T>().into_iter().map(|k| k.scale_real(w)));
        }
    }
    KrausChannel::new(ops)
}

/// χ of the mixture, assembled linearly from the generator χ matrices.
pub fn mixture_chi<T: Real>(params: &MixtureParams<T>) -> ChiMatrix<T> {
    let mut m = ChiMatrix::<T>::identity()
        .into_matrix()
        .scale_real(params.identity_prob());
    for (generator, p) in params.labeled() {
        if p > T::zero() {
            m = &m + &generator.chi::<T>().into_matrix().scale_real(p);
        }
    }
    ChiMatrix::from_matrix(m).expect("4x4")
}

/// Coefficients `c_a` with `F_av(I, mixture) = p₀ + Σ c_a p_a`, where
/// `c_a = Σ_{E ∈ a} |Tr E|²/4`.
pub fn identity_fidelity_coefficients<T: Real>(model: ModelKind) -> Vec<T> {
    enumerate_generators(model)
        .iter()
        .map(|g| {
            g.kraus::<T>()
                .iter()
                .map(|k| k.trace().norm_sqr())
                .fold(T::zero(), |a, b| a + b)
                / T::lit(4.0)
        })
        .collect()
}

/// One Monte Carlo draw from a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampledError {
    Identity,
    Gate(CliffordLabel),
    /// Discard the state and prepare the given eigenstate.
    Reset(Eigenstate),
}

impl fmt::Display for SampledError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampledError::Identity => write!(f, "I"),
            SampledError::Gate(l) => l.fmt(f),
            SampledError::Reset(e) => TranslationLabel(*e).fmt(f),
        }
    }
}

/// Draws the error event to insert: generator `a` with probability `p_a`,
/// otherwise the identity.
pub fn sample_error<T: Real, R: Rng + ?Sized>(
    params: &MixtureParams<T>,
    rng: &mut R,
) -> Result<SampledError> {
    MixtureParams::new(params.model, params.probs.clone())?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (generator, p) in params.labeled() {
        acc += p.as_f64();
        if u < acc {
            return Ok(match generator {
                Generator::Clifford(l) => SampledError::Gate(l),
                Generator::Translation(TranslationLabel(e)) => SampledError::Reset(e),
            });
        }
    }
    Ok(SampledError::Identity)
}
