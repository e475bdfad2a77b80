//! Initial qubit states and post-selection vectors.
//!
//! Basis convention: every qubit is written in the ordered basis
//! `(|1>, |0>)`, where `|1>` and `|0>` are the sigma_3 eigenstates with
//! eigenvalues +1 and -1. sigma_3 is therefore `diag(+1, -1)`. Multi-qubit
//! registers are ordered target first (`a`, then `b`, then `e`).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, WvaError};
use crate::linalg::{pauli, CMatrix, QubitReduction};
use crate::scalar::Real;

/// Bell-diagonal two-qubit state `(I + sum_j c_j sigma_j (x) sigma_j) / 4`.
///
/// Only physical triples (inside the tetrahedron) can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BdTriple<T>",
    into = "BdTriple<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct BellDiagonalState<T = f64> {
    c: [T; 3],
}

/// Unchecked correlation triple, the serialised form of a BD state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdTriple<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

/// Outcome of [`validate_bd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BdVerdict<T> {
    Valid,
    /// `index` is 0-based into the [`bd_eigenvalues`] ordering.
    Invalid { index: usize, eigenvalue: T },
}

impl<T> BdVerdict<T> {
    pub fn is_valid(&self) -> bool {
        matches!(self, BdVerdict::Valid)
    }
}

/// Spectrum of a BD triple in the fixed order
/// `((1-c1-c2-c3), (1-c1+c2+c3), (1+c1-c2+c3), (1+c1+c2-c3)) / 4`.
pub fn bd_eigenvalues<T: Real>(c1: T, c2: T, c3: T) -> [T; 4] {
    let q = T::lit(0.25);
    [
        (T::one() - c1 - c2 - c3) * q,
        (T::one() - c1 + c2 + c3) * q,
        (T::one() + c1 - c2 + c3) * q,
        (T::one() + c1 + c2 - c3) * q,
    ]
}

/// Accepts a triple iff every eigenvalue is at least `-psd_tolerance`.
pub fn validate_bd<T: Real>(c1: T, c2: T, c3: T) -> BdVerdict<T> {
    if !(c1.is_finite() && c2.is_finite() && c3.is_finite()) {
        return BdVerdict::Invalid {
            index: 0,
            eigenvalue: T::nan(),
        };
    }
    let lambdas = bd_eigenvalues(c1, c2, c3);
    let (index, &eigenvalue) = lambdas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalues"))
        .expect("four eigenvalues");
    if eigenvalue >= -T::psd_tolerance() {
        BdVerdict::Valid
    } else {
        BdVerdict::Invalid { index, eigenvalue }
    }
}

impl<T: Real> BellDiagonalState<T> {
    pub fn new(c1: T, c2: T, c3: T) -> Result<Self> {
        match validate_bd(c1, c2, c3) {
            BdVerdict::Valid => Ok(Self { c: [c1, c2, c3] }),
            BdVerdict::Invalid { index, eigenvalue } => Err(WvaError::InvalidBellDiagonal {
                c1: c1.to_f64_lossy(),
                c2: c2.to_f64_lossy(),
                c3: c3.to_f64_lossy(),
                index,
                eigenvalue: eigenvalue.to_f64_lossy(),
            }),
        }
    }

    /// Werner family `(1-c) I/4 + c |Psi-><Psi-|`, i.e. `c_j = -c`.
    pub fn werner(c: T) -> Result<Self> {
        check_range("werner c", c.to_f64_lossy(), c >= T::zero() && c <= T::one(), "[0, 1]")?;
        Self::new(-c, -c, -c)
    }

    /// `|Phi+> = (|00> + |11>)/sqrt(2)`, i.e. `(1, -1, 1)`.
    pub fn bell_phi_plus() -> Self {
        Self {
            c: [T::one(), -T::one(), T::one()],
        }
    }

    pub fn maximally_mixed() -> Self {
        Self { c: [T::zero(); 3] }
    }

    /// Classically correlated state on one Cartesian axis, e.g. `(+-1, 0, 0)`.
    /// `axis` is 1, 2 or 3.
    pub fn classical_axis(axis: usize, value: T) -> Result<Self> {
        check_range("axis", axis as f64, (1..=3).contains(&axis), "{1, 2, 3}")?;
        let mut c = [T::zero(); 3];
        c[axis - 1] = value;
        Self::new(c[0], c[1], c[2])
    }

    pub fn c1(&self) -> T {
        self.c[0]
    }
    pub fn c2(&self) -> T {
        self.c[1]
    }
    pub fn c3(&self) -> T {
        self.c[2]
    }
    pub fn coefficients(&self) -> [T; 3] {
        self.c
    }

    pub fn eigenvalues(&self) -> [T; 4] {
        bd_eigenvalues(self.c[0], self.c[1], self.c[2])
    }

    pub fn density_matrix(&self) -> TwoQubitDensity<T> {
        bd_density_matrix(self)
    }
}

impl<T: Real> TryFrom<BdTriple<T>> for BellDiagonalState<T> {
    type Error = WvaError;
    fn try_from(t: BdTriple<T>) -> Result<Self> {
        Self::new(t.c1, t.c2, t.c3)
    }
}

impl<T: Real> From<BellDiagonalState<T>> for BdTriple<T> {
    fn from(s: BellDiagonalState<T>) -> Self {
        BdTriple {
            c1: s.c[0],
            c2: s.c[1],
            c3: s.c[2],
        }
    }
}

/// `(I + sum_j c_j sigma_j (x) sigma_j) / 4` in the `(|1>, |0>)` product basis.
pub fn bd_density_matrix<T: Real>(state: &BellDiagonalState<T>) -> TwoQubitDensity<T> {
    let mut m = CMatrix::identity(4);
    for (j, &cj) in state.c.iter().enumerate() {
        let s = pauli::<T>(j + 1);
        m = &m + &s.kron(&s).scale(Complex::new(cj, T::zero()));
    }
    TwoQubitDensity {
        m: m.scale(Complex::new(T::lit(0.25), T::zero())),
    }
}

/// Validated 4x4 two-qubit density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity<T = f64> {
    m: CMatrix<T>,
}

impl<T: Real> TwoQubitDensity<T> {
    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.dim() != 4 {
            return Err(WvaError::InvalidDensity(format!("dimension {} != 4", m.dim())));
        }
        if !m.is_hermitian(T::norm_tolerance()) {
            return Err(WvaError::InvalidDensity("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > T::norm_tolerance() || tr.im.abs() > T::norm_tolerance() {
            return Err(WvaError::InvalidDensity(format!("trace {tr}")));
        }
        let min = m.hermitian_eigenvalues()[0];
        if min < -T::psd_tolerance() {
            return Err(WvaError::InvalidDensity(format!("eigenvalue {min}")));
        }
        Ok(Self { m })
    }

    /// Pure state density `|psi><psi|`.
    pub fn from_pure(psi: &TwoQubitPure<T>) -> Self {
        Self {
            m: CMatrix::outer(&psi.amplitudes),
        }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    /// Reduced state of the qubit that is kept (`0` = a, `1` = b).
    pub fn reduced(&self, keep: usize) -> CMatrix<T> {
        assert!(keep < 2);
        self.m.reduce_qubit(2, 1 - keep, QubitReduction::Trace)
    }
}

/// Pure two-qubit state, amplitudes in the `(|1>, |0>)` product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitPure<T = f64> {
    amplitudes: [Complex<T>; 4],
}

impl<T: Real> TwoQubitPure<T> {
    pub fn new(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if (norm - T::one()).abs() > T::norm_tolerance() {
            return Err(WvaError::NotNormalised(norm.to_f64_lossy()));
        }
        Ok(Self { amplitudes })
    }

    /// `(|0> + |1>)_a / sqrt(2) (x) |0>_b`: a coherent target with no
    /// correlations to the control.
    pub fn uncorrelated_plus_zero() -> Self {
        let h = T::half().sqrt();
        let z = Complex::new(T::zero(), T::zero());
        // |1 0> -> index 1, |0 0> -> index 3
        Self {
            amplitudes: [z, Complex::new(h, T::zero()), z, Complex::new(h, T::zero())],
        }
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amplitudes
    }
}

/// Projective post-selection `cos(theta/2)|1> + sin(theta/2) e^{i phi}|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "AnglePair<T>",
    into = "AnglePair<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct PostSelection<T = f64> {
    theta: T,
    phi: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> PostSelection<T> {
    /// `theta` in `[0, pi]`, `phi` in `[0, 2 pi)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        check_range(
            "theta",
            theta.to_f64_lossy(),
            theta >= T::zero() && theta <= T::PI(),
            "[0, pi]",
        )?;
        check_range(
            "phi",
            phi.to_f64_lossy(),
            phi >= T::zero() && phi < T::TAU(),
            "[0, 2 pi)",
        )?;
        Ok(Self { theta, phi })
    }

    /// Like [`PostSelection::new`] but reduces `phi` modulo `2 pi` first.
    pub fn wrapped(theta: T, phi: T) -> Result<Self> {
        let mut p = phi % T::TAU();
        if p < T::zero() {
            p += T::TAU();
        }
        if p >= T::TAU() {
            p = T::zero();
        }
        Self::new(theta, p)
    }

    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn vector(&self) -> [Complex<T>; 2] {
        postselection_vector(self)
    }
}

impl<T: Real> TryFrom<AnglePair<T>> for PostSelection<T> {
    type Error = WvaError;
    fn try_from(p: AnglePair<T>) -> Result<Self> {
        Self::new(p.theta, p.phi)
    }
}

impl<T: Real> From<PostSelection<T>> for AnglePair<T> {
    fn from(p: PostSelection<T>) -> Self {
        AnglePair {
            theta: p.theta,
            phi: p.phi,
        }
    }
}

/// `(cos(theta/2), sin(theta/2) e^{i phi})` in the `(|1>, |0>)` basis.
pub fn postselection_vector<T: Real>(ps: &PostSelection<T>) -> [Complex<T>; 2] {
    let h = ps.theta * T::half();
    [
        Complex::new(h.cos(), T::zero()),
        Complex::from_polar(h.sin(), ps.phi),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ThreeQubitTag {
    Ghz,
    W,
    Custom,
}

/// Pure state of target `a` and controls `b`, `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeQubitPure<T = f64> {
    amplitudes: [Complex<T>; 8],
    tag: ThreeQubitTag,
}

/// Basis index of `|x_a x_b x_e>` where each `x` is a sigma_3 label, 1 or 0.
pub fn three_qubit_index(labels: [u8; 3]) -> usize {
    labels
        .iter()
        .fold(0, |acc, &l| (acc << 1) | usize::from(l == 0))
}

impl<T: Real> ThreeQubitPure<T> {
    pub fn custom(amplitudes: [Complex<T>; 8]) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if (norm - T::one()).abs() > T::norm_tolerance() {
            return Err(WvaError::NotNormalised(norm.to_f64_lossy()));
        }
        Ok(Self {
            amplitudes,
            tag: ThreeQubitTag::Custom,
        })
    }

    /// `(|000> + |111>)/sqrt(2)`
    pub fn ghz() -> Self {
        let h = Complex::new(T::half().sqrt(), T::zero());
        let mut amplitudes = [Complex::new(T::zero(), T::zero()); 8];
        amplitudes[three_qubit_index([0, 0, 0])] = h;
        amplitudes[three_qubit_index([1, 1, 1])] = h;
        Self {
            amplitudes,
            tag: ThreeQubitTag::Ghz,
        }
    }

    /// `(|100> + |010> + |001>)/sqrt(3)`
    pub fn w() -> Self {
        let t = Complex::new(T::one() / T::lit(3.0).sqrt(), T::zero());
        let mut amplitudes = [Complex::new(T::zero(), T::zero()); 8];
        for labels in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            amplitudes[three_qubit_index(labels)] = t;
        }
        Self {
            amplitudes,
            tag: ThreeQubitTag::W,
        }
    }

    pub fn tag(&self) -> ThreeQubitTag {
        self.tag
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 8] {
        &self.amplitudes
    }

    pub fn density(&self) -> CMatrix<T> {
        CMatrix::outer(&self.amplitudes)
    }
}
