//! Dense complex linear algebra on qubit Hilbert spaces.
//!
//! Everything here is dense and row-major. Dimensions are powers of two in
//! practice (`2^Q`), and qubit `q = 1` is the least-significant bit of a
//! computational-basis index, so in a Kronecker product `A_Q ⊗ … ⊗ A_1` the
//! first qubit is the rightmost factor.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used for unitarity checks of constructed gates and circuits.
pub const UNITARY_TOL: f64 = 1e-12;

/// A square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != dim * dim`.
    pub fn new(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix needs dim² entries");
        Self { dim, data }
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        Self::new(dim, data.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = v;
        }
        m
    }

    /// 2×2 matrix from its rows.
    pub fn two_by_two(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { dim: 2, data: vec![a, b, c, d] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        matmul(&dagger(self), self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&dagger(self)) <= tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks_exact(self.dim) {
            let cells: Vec<String> =
                row.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let dim = da * db;
    let mut out = vec![ZERO; dim * dim];
    for ar in 0..da {
        for ac in 0..da {
            let s = a.data[ar * da + ac];
            if s == ZERO {
                continue;
            }
            for br in 0..db {
                let row = (ar * db + br) * dim + ac * db;
                let brow = &b.data[br * db..(br + 1) * db];
                for (o, &bv) in out[row..row + db].iter_mut().zip(brow) {
                    *o = s * bv;
                }
            }
        }
    }
    ComplexMatrix { dim, data: out }
}

/// Kronecker product of a list, leftmost factor first.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, m))
}

/// Standard matrix product `a · b`.
///
/// Panics on a dimension mismatch; see [`try_matmul`] for a checked variant.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    try_matmul(a, b).expect("matmul dimension mismatch")
}

pub fn try_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    let d = a.dim;
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        let orow = &mut out[i * d..(i + 1) * d];
        for k in 0..d {
            let s = a.data[i * d + k];
            if s == ZERO {
                continue;
            }
            for (o, &bv) in orow.iter_mut().zip(&b.data[k * d..(k + 1) * d]) {
                *o += s * bv;
            }
        }
    }
    Ok(ComplexMatrix { dim: d, data: out })
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim;
    let mut out = vec![ZERO; d * d];
    for r in 0..d {
        for c in 0..d {
            out[c * d + r] = a.data[r * d + c].conj();
        }
    }
    ComplexMatrix { dim: d, data: out }
}

/// `e† · m · e`.
pub fn conjugate_by(m: &ComplexMatrix, e: &ComplexMatrix) -> ComplexMatrix {
    matmul(&dagger(e), &matmul(m, e))
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    amplitudes: Vec<C64>,
}

impl QuantumState {
    /// `|0…0⟩` in a space of dimension `dim`.
    pub fn ground(dim: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[0] = ONE;
        Self { amplitudes }
    }

    /// Wraps amplitudes, rejecting vectors whose norm deviates from one by more than 1e-12.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_amplitudes_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Applies a full-space operator.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self { amplitudes: u.apply(&self.amplitudes) }
    }
}

/// `⟨ψ|m|ψ⟩`.
pub fn expectation(state: &QuantumState, m: &ComplexMatrix) -> C64 {
    assert_eq!(state.dim(), m.dim(), "state and operator dimensions differ");
    let mv = m.apply(&state.amplitudes);
    state.amplitudes.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
}

/// Expectation value demanded to be real; the imaginary residue must stay below 1e-10.
pub fn expectation_real(state: &QuantumState, m: &ComplexMatrix) -> Result<f64> {
    let z = expectation(state, m);
    if z.im.abs() > 1e-10 {
        return Err(Error::NotReal(z.im));
    }
    Ok(z.re)
}

/// Single-qubit Pauli basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::two_by_two(ZERO, ONE, ONE, ZERO),
            Pauli::Y => ComplexMatrix::two_by_two(ZERO, -I, I, ZERO),
            Pauli::Z => ComplexMatrix::two_by_two(ONE, ZERO, ZERO, -ONE),
        }
    }

    /// Coefficient vector `(u_o, u_x, u_y, u_z)`.
    pub fn coefficients(self) -> [f64; 4] {
        match self {
            Pauli::I => [1.0, 0.0, 0.0, 0.0],
            Pauli::X => [0.0, 1.0, 0.0, 0.0],
            Pauli::Y => [0.0, 0.0, 1.0, 0.0],
            Pauli::Z => [0.0, 0.0, 0.0, 1.0],
        }
    }
}

/// `u_o I + u_x σx + u_y σy + u_z σz`.
pub fn pauli_combination(u: [f64; 4]) -> ComplexMatrix {
    let [o, x, y, z] = u;
    ComplexMatrix::two_by_two(
        C64::new(o + z, 0.0),
        C64::new(x, -y),
        C64::new(x, y),
        C64::new(o - z, 0.0),
    )
}

/// Lifts a 2×2 operator acting on `qubit` (1-based) to the full `2^qubits` space.
pub fn embed_single(op: &ComplexMatrix, qubit: usize, qubits: usize) -> ComplexMatrix {
    assert!(qubit >= 1 && qubit <= qubits, "qubit index out of range");
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> =
        (1..=qubits).rev().map(|q| if q == qubit { op } else { &id }).collect();
    kron_all(factors)
}

/// In-place application of a 2×2 gate to `qubit` (0-based bit position) of a state vector.
#[inline]
pub(crate) fn apply_single_inplace(amps: &mut [C64], gate: &[C64; 4], bit: usize) {
    let stride = 1usize << bit;
    let n = amps.len();
    let mut base = 0;
    while base < n {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = gate[0] * a0 + gate[1] * a1;
            amps[i + stride] = gate[2] * a0 + gate[3] * a1;
        }
        base += stride << 1;
    }
}

/// In-place application of a 4×4 gate to the bit pair `(hi, lo)`; the gate's
/// local index is `2·b_hi + b_lo`.
#[inline]
pub(crate) fn apply_pair_inplace(amps: &mut [C64], gate: &[C64; 16], hi: usize, lo: usize) {
    let (mh, ml) = (1usize << hi, 1usize << lo);
    for base in 0..amps.len() {
        if base & (mh | ml) != 0 {
            continue;
        }
        let idx = [base, base | ml, base | mh, base | mh | ml];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &target) in idx.iter().enumerate() {
            amps[target] = gate[4 * r] * v[0]
                + gate[4 * r + 1] * v[1]
                + gate[4 * r + 2] * v[2]
                + gate[4 * r + 3] * v[3];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn z_kron_z_is_diagonal() {
        let z = Pauli::Z.matrix();
        let zz = kron(&z, &z);
        assert_eq!(zz, ComplexMatrix::diagonal(&[ONE, -ONE, -ONE, ONE]));
    }

    #[test]
    fn x_kron_y_on_ground() {
        // σx|0⟩ = |1⟩, σy|0⟩ = i|1⟩, so (σx⊗σy)|00⟩ = i|11⟩.
        let xy = kron(&Pauli::X.matrix(), &Pauli::Y.matrix());
        let out = QuantumState::ground(4).evolve(&xy);
        assert_eq!(out.amplitudes(), &[ZERO, ZERO, ZERO, I]);
    }

    #[test]
    fn pauli_products() {
        let x = Pauli::X.matrix();
        let y = Pauli::Y.matrix();
        let a = ComplexMatrix::from_real(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(matmul(&a, &ComplexMatrix::identity(2)), a);
        assert_eq!(matmul(&x, &x), ComplexMatrix::identity(2));
        assert_eq!(matmul(&x, &y), Pauli::Z.matrix().scale(I));
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = try_matmul(&ComplexMatrix::identity(2), &ComplexMatrix::identity(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn simple_expectations() {
        let g = QuantumState::ground(2);
        assert_eq!(expectation(&g, &Pauli::Z.matrix()), ONE);
        assert_eq!(expectation(&g, &Pauli::X.matrix()), ZERO);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = QuantumState::from_amplitudes(vec![c(s, 0.0), c(0.0, -s)]).unwrap();
        assert!(expectation(&psi, &Pauli::Z.matrix()).norm() < 1e-15);
    }

    #[test]
    fn expectation_real_flags_non_hermitian() {
        let g = QuantumState::ground(2);
        let m = ComplexMatrix::two_by_two(I, ZERO, ZERO, ZERO);
        assert!(matches!(expectation_real(&g, &m), Err(Error::NotReal(_))));
        assert_eq!(expectation_real(&g, &Pauli::Z.matrix()).unwrap(), 1.0);
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(dagger(&ComplexMatrix::identity(2)), ComplexMatrix::identity(2));
        assert_eq!(dagger(&Pauli::Y.matrix()), Pauli::Y.matrix());
        let n = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(dagger(&n), ComplexMatrix::from_real(2, &[0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn state_normalization_is_checked() {
        assert!(QuantumState::from_amplitudes(vec![ONE, ONE]).is_err());
    }

    #[test]
    fn pauli_combination_matches_sum() {
        let u = [0.3, -0.5, 0.7, 1.1];
        let mut sum = ComplexMatrix::zeros(2);
        for (p, w) in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].iter().zip(u) {
            sum = &sum + &p.matrix().scale(c(w, 0.0));
        }
        assert!(pauli_combination(u).max_abs_diff(&sum) < 1e-15);
    }

    #[test]
    fn in_place_kernels_match_dense() {
        let h = ComplexMatrix::new(2, vec![c(0.6, 0.1), c(0.2, -0.3), c(-0.4, 0.0), c(0.1, 0.9)]);
        let amps: Vec<C64> = (0..8).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.2)).collect();
        for q in 1..=3 {
            let dense = embed_single(&h, q, 3).apply(&amps);
            let mut fast = amps.clone();
            let g = [h.get(0, 0), h.get(0, 1), h.get(1, 0), h.get(1, 1)];
            apply_single_inplace(&mut fast, &g, q - 1);
            for (a, b) in dense.iter().zip(&fast) {
                assert!((a - b).norm() < 1e-14);
            }
        }
        let two = kron(&Pauli::X.matrix(), &h);
        let dense = kron(&ComplexMatrix::identity(2), &two).apply(&amps);
        let mut g = [ZERO; 16];
        g.copy_from_slice(two.as_slice());
        let mut fast = amps.clone();
        apply_pair_inplace(&mut fast, &g, 1, 0);
        for (a, b) in dense.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    fn arb_matrix() -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
            .prop_map(|v| ComplexMatrix::new(2, v.into_iter().map(|(r, i)| c(r, i)).collect()))
    }

    fn arb_int_matrix() -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-4i32..5, -4i32..5), 4).prop_map(|v| {
            ComplexMatrix::new(2, v.into_iter().map(|(r, i)| c(r as f64, i as f64)).collect())
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_matrix(), b in arb_matrix(), d in arb_matrix()) {
            let left = kron(&kron(&a, &b), &d);
            let right = kron(&a, &kron(&b, &d));
            prop_assert!(left.max_abs_diff(&right) < 1e-15);
        }

        #[test]
        fn kron_is_exactly_associative_on_integers(a in arb_int_matrix(), b in arb_int_matrix(), d in arb_int_matrix()) {
            prop_assert_eq!(kron(&kron(&a, &b), &d), kron(&a, &kron(&b, &d)));
        }

        #[test]
        fn mixed_product_property(a in arb_matrix(), b in arb_matrix(), cm in arb_matrix(), d in arb_matrix()) {
            let lhs = matmul(&kron(&a, &b), &kron(&cm, &d));
            let rhs = kron(&matmul(&a, &cm), &matmul(&b, &d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }

        #[test]
        fn dagger_is_involution(a in arb_matrix()) {
            prop_assert_eq!(dagger(&dagger(&a)), a);
        }

        #[test]
        fn diagonal_expectation_in_spectrum(
            d in proptest::collection::vec(-3.0f64..3.0, 4),
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let raw: Vec<C64> = amps.iter().map(|&(r, i)| c(r, i)).collect();
            let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let psi = QuantumState::from_amplitudes(raw.iter().map(|z| z / norm).collect()).unwrap();
            let m = ComplexMatrix::diagonal(&d.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
            let e = expectation(&psi, &m);
            prop_assert!(e.im.abs() < 1e-10);
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(e.re >= lo - 1e-12 && e.re <= hi + 1e-12);
        }
    }
}
