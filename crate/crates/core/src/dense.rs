//! Dense state-vector and operator kernels.
//!
//! Basis index convention: qubit 1 is the most significant bit of an n-qubit
//! basis index. A two-qubit gate on `(a, b)` uses the local index
//! `2·bit_a + bit_b`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::pauli_clifford::{Pauli, PauliString};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type Gate4 = Matrix4<C64>;
pub type Gate2 = Matrix2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
fn qubit_bit(n: usize, q: usize) -> usize {
    1 << (n - q)
}

/// Row `r` of `m` mixed by `g` on wires (a, b): `m ← E(g) · m`.
pub fn apply_two_qubit_left(m: &mut CMatrix, n: usize, a: usize, b: usize, g: &Gate4) {
    let dim = 1usize << n;
    debug_assert_eq!(m.nrows(), dim);
    let (ba, bb) = (qubit_bit(n, a), qubit_bit(n, b));
    let offsets = [0, bb, ba, ba | bb];
    let cols = m.ncols();
    let data = m.as_mut_slice();
    for base in (0..dim).filter(|r| r & (ba | bb) == 0) {
        for c in 0..cols {
            let col = c * dim;
            let v = offsets.map(|o| data[col + base + o]);
            for (i, o) in offsets.iter().enumerate() {
                data[col + base + o] =
                    g[(i, 0)] * v[0] + g[(i, 1)] * v[1] + g[(i, 2)] * v[2] + g[(i, 3)] * v[3];
            }
        }
    }
}

/// `m ← m · E(g)`.
pub fn apply_two_qubit_right(m: &mut CMatrix, n: usize, a: usize, b: usize, g: &Gate4) {
    let dim = 1usize << n;
    debug_assert_eq!(m.ncols(), dim);
    let (ba, bb) = (qubit_bit(n, a), qubit_bit(n, b));
    let offsets = [0, bb, ba, ba | bb];
    let rows = m.nrows();
    let data = m.as_mut_slice();
    for base in (0..dim).filter(|c| c & (ba | bb) == 0) {
        let cols = offsets.map(|o| (base + o) * rows);
        for r in 0..rows {
            let v = cols.map(|c| data[c + r]);
            for j in 0..4 {
                data[cols[j] + r] =
                    v[0] * g[(0, j)] + v[1] * g[(1, j)] + v[2] * g[(2, j)] + v[3] * g[(3, j)];
            }
        }
    }
}

pub fn apply_two_qubit_vec(v: &mut CVector, n: usize, a: usize, b: usize, g: &Gate4) {
    let dim = 1usize << n;
    let (ba, bb) = (qubit_bit(n, a), qubit_bit(n, b));
    let offsets = [0, bb, ba, ba | bb];
    for base in (0..dim).filter(|r| r & (ba | bb) == 0) {
        let x = offsets.map(|o| v[base + o]);
        for (i, o) in offsets.iter().enumerate() {
            v[base + o] = g[(i, 0)] * x[0] + g[(i, 1)] * x[1] + g[(i, 2)] * x[2] + g[(i, 3)] * x[3];
        }
    }
}

pub fn apply_single_left(m: &mut CMatrix, n: usize, q: usize, g: &Gate2) {
    let dim = 1usize << n;
    let bq = qubit_bit(n, q);
    let cols = m.ncols();
    let data = m.as_mut_slice();
    for base in (0..dim).filter(|r| r & bq == 0) {
        for c in 0..cols {
            let col = c * dim;
            let (v0, v1) = (data[col + base], data[col + base + bq]);
            data[col + base] = g[(0, 0)] * v0 + g[(0, 1)] * v1;
            data[col + base + bq] = g[(1, 0)] * v0 + g[(1, 1)] * v1;
        }
    }
}

pub fn pauli_2x2(p: Pauli) -> Gate2 {
    match p {
        Pauli::I => Gate2::identity(),
        Pauli::X => Gate2::new(ZERO, ONE, ONE, ZERO),
        Pauli::Y => Gate2::new(ZERO, -I, I, ZERO),
        Pauli::Z => Gate2::new(ONE, ZERO, ZERO, -ONE),
    }
}

pub fn kron2(a: &Gate2, b: &Gate2) -> Gate4 {
    Gate4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// The 15 nontrivial two-qubit Paulis `α ⊗ β` in the order
/// `k = 4·rank(α) + rank(β) − 1`, with `α` on the gate's first wire.
pub fn two_qubit_pauli_basis() -> [(Pauli, Pauli); 15] {
    std::array::from_fn(|k| {
        (
            Pauli::from_rank(((k + 1) / 4) as u8),
            Pauli::from_rank(((k + 1) % 4) as u8),
        )
    })
}

pub fn two_qubit_pauli_matrix(alpha: Pauli, beta: Pauli) -> Gate4 {
    kron2(&pauli_2x2(alpha), &pauli_2x2(beta))
}

/// Dense `2^n × 2^n` matrix of a Pauli string, prefactor included.
pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    let n = p.num_qubits();
    let dim = 1usize << n;
    let (xm, zm) = p.basis_masks();
    let pre = i_pow(p.phase_exp() as u32 + p.y_count() as u32);
    let mut m = CMatrix::zeros(dim, dim);
    // i^{|x∧z|} X^x Z^z |s⟩ = i^{|x∧z|} (−1)^{z·s} |s ⊕ x⟩
    for s in 0..dim {
        let sign = if ((zm as usize & s).count_ones()) % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        m[(s ^ xm as usize, s)] = pre * sign;
    }
    m
}

pub fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    let prod = m.adjoint() * m;
    max_abs_diff(&prod, &CMatrix::identity(m.nrows(), m.ncols())) < tol
}

/// In-place unnormalized Walsh–Hadamard transform.
pub fn walsh_hadamard(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Real Pauli-basis coefficients `2^{-n} tr(σ M)` of a Hermitian matrix,
/// indexed by `x_mask · 2^n + z_mask` (see [`pauli_row`]).
pub fn pauli_coefficients(m: &CMatrix, n: usize, out: &mut [f64]) {
    let dim = 1usize << n;
    debug_assert_eq!(out.len(), dim * dim);
    let scale = 1.0 / dim as f64;
    let mut buf = vec![ZERO; dim];
    for x in 0..dim {
        // tr(σ M) = i^{|x∧z|} Σ_s (−1)^{z·s} M[s, s⊕x]
        for (s, slot) in buf.iter_mut().enumerate() {
            *slot = m[(s, s ^ x)];
        }
        walsh_hadamard(&mut buf);
        for (z, val) in buf.iter().enumerate() {
            let coeff = i_pow((x & z).count_ones()) * val;
            out[x * dim + z] = coeff.re * scale;
        }
    }
}

/// Row of a Pauli string in [`pauli_coefficients`] output.
pub fn pauli_row(p: &PauliString) -> usize {
    let (xm, zm) = p.basis_masks();
    ((xm as usize) << p.num_qubits()) | zm as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_matrices_compose() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let prod = x.multiply(&z).unwrap();
        let dense = pauli_matrix(&x) * pauli_matrix(&z);
        assert!(max_abs_diff(&dense, &pauli_matrix(&prod)) < 1e-15);
        let xy: PauliString = "XY".parse().unwrap();
        let kron = two_qubit_pauli_matrix(Pauli::X, Pauli::Y);
        let as_dyn = CMatrix::from_fn(4, 4, |r, c| kron[(r, c)]);
        assert!(max_abs_diff(&pauli_matrix(&xy), &as_dyn) < 1e-15);
    }

    #[test]
    fn coefficients_recover_pauli_strings() {
        for text in ["IXZ", "-YYI", "ZIX", "XYZ"] {
            let p: PauliString = text.parse().unwrap();
            let mut out = vec![0.0; 64];
            pauli_coefficients(&pauli_matrix(&p), 3, &mut out);
            let row = pauli_row(&p);
            let sign = if p.phase_exp() == 2 { -1.0 } else { 1.0 };
            for (i, c) in out.iter().enumerate() {
                let expect = if i == row { sign } else { 0.0 };
                assert!((c - expect).abs() < 1e-14, "{text}: row {i} = {c}");
            }
        }
    }

    #[test]
    fn left_and_right_embeddings_agree() {
        let g = two_qubit_pauli_matrix(Pauli::Y, Pauli::X)
            * kron2(&pauli_2x2(Pauli::Z), &Gate2::identity());
        let mut left = CMatrix::identity(8, 8);
        apply_two_qubit_left(&mut left, 3, 3, 1, &g);
        let mut right = CMatrix::identity(8, 8);
        apply_two_qubit_right(&mut right, 3, 3, 1, &g);
        assert!(max_abs_diff(&left, &right) < 1e-15);
        let mut v = CVector::from_fn(8, |i, _| C64::new(i as f64, 0.5));
        let expect = &left * &v;
        apply_two_qubit_vec(&mut v, 3, 3, 1, &g);
        assert!((v - expect).norm() < 1e-13);
    }
}
