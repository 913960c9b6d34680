//! Clifford circuits over {H, S, CNOT, SWAP, CZ}, their tableaux, and the
//! two-qubit routing gadget that moves a Pauli pair onto `1 ⊗ Z`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CliffordError, Pauli, PauliString};
use crate::dense::{self, CMatrix, Gate2, Gate4, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
    Cz(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) => (q, None),
            CliffordGate::Cnot(a, b) | CliffordGate::Swap(a, b) | CliffordGate::Cz(a, b) => {
                (a, Some(b))
            }
        }
    }

    fn relabel(&self, map: impl Fn(usize) -> usize) -> Self {
        match *self {
            CliffordGate::H(q) => CliffordGate::H(map(q)),
            CliffordGate::S(q) => CliffordGate::S(map(q)),
            CliffordGate::Cnot(a, b) => CliffordGate::Cnot(map(a), map(b)),
            CliffordGate::Swap(a, b) => CliffordGate::Swap(map(a), map(b)),
            CliffordGate::Cz(a, b) => CliffordGate::Cz(map(a), map(b)),
        }
    }

    /// `P ← g P g†`.
    pub fn conjugate(&self, p: &mut PauliString) {
        match *self {
            CliffordGate::H(q) => p.conjugate_h(q),
            CliffordGate::S(q) => p.conjugate_s(q),
            CliffordGate::Cnot(c, t) => p.conjugate_cnot(c, t),
            CliffordGate::Swap(a, b) => p.conjugate_swap(a, b),
            CliffordGate::Cz(a, b) => p.conjugate_cz(a, b),
        }
    }

    /// `P ← g† P g`.
    pub fn conjugate_inverse(&self, p: &mut PauliString) {
        match *self {
            CliffordGate::S(q) => p.conjugate_s_dag(q),
            _ => self.conjugate(p),
        }
    }

    fn apply_dense_left(&self, m: &mut CMatrix, n: usize) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            CliffordGate::H(q) => {
                let g = Gate2::new(ONE * h, ONE * h, ONE * h, -ONE * h);
                dense::apply_single_left(m, n, q, &g);
            }
            CliffordGate::S(q) => {
                dense::apply_single_left(m, n, q, &Gate2::new(ONE, ZERO, ZERO, I))
            }
            CliffordGate::Cnot(a, b) => dense::apply_two_qubit_left(m, n, a, b, &cnot_matrix()),
            CliffordGate::Swap(a, b) => dense::apply_two_qubit_left(m, n, a, b, &swap_matrix()),
            CliffordGate::Cz(a, b) => dense::apply_two_qubit_left(m, n, a, b, &cz_matrix()),
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CliffordGate::H(q) => write!(f, "H({q})"),
            CliffordGate::S(q) => write!(f, "S({q})"),
            CliffordGate::Cnot(a, b) => write!(f, "CNOT({a}->{b})"),
            CliffordGate::Swap(a, b) => write!(f, "SWAP({a},{b})"),
            CliffordGate::Cz(a, b) => write!(f, "CZ({a},{b})"),
        }
    }
}

pub fn cnot_matrix() -> Gate4 {
    let mut g = Gate4::zeros();
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        g[(r, c)] = ONE;
    }
    g
}

pub fn swap_matrix() -> Gate4 {
    let mut g = Gate4::zeros();
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        g[(r, c)] = ONE;
    }
    g
}

pub fn cz_matrix() -> Gate4 {
    Gate4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE, -ONE))
}

/// Gates applied first-to-last: the circuit's unitary is `g_k ⋯ g_1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    pub n: usize,
    pub gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<CliffordGate>) -> Result<Self, CliffordError> {
        let circuit = Self { n, gates };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<(), CliffordError> {
        for g in &self.gates {
            let (a, b) = g.qubits();
            let bad = |q: usize| q == 0 || q > self.n;
            if bad(a) || b.is_some_and(|b| bad(b) || b == a) {
                return Err(CliffordError::InvalidGate(format!(
                    "{g} on {} qubits",
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn push(&mut self, gate: CliffordGate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &CliffordCircuit) {
        self.gates.extend_from_slice(&other.gates);
    }

    /// Same gates with qubit labels mapped through `map`, on `n` qubits.
    pub fn relabeled(&self, n: usize, map: impl Fn(usize) -> usize) -> Self {
        Self {
            n,
            gates: self.gates.iter().map(|g| g.relabel(&map)).collect(),
        }
    }

    /// `C P C†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString, CliffordError> {
        if p.num_qubits() != self.n {
            return Err(CliffordError::DimensionMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        let mut out = p.clone();
        self.conjugate_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn conjugate_in_place(&self, p: &mut PauliString) {
        for g in &self.gates {
            g.conjugate(p);
        }
    }

    /// `C† P C`.
    pub(crate) fn conjugate_inverse_in_place(&self, p: &mut PauliString) {
        for g in self.gates.iter().rev() {
            g.conjugate_inverse(p);
        }
    }

    pub fn tableau(&self) -> CliffordTableau {
        let mut t = CliffordTableau::identity(self.n);
        for image in t.images.iter_mut() {
            self.conjugate_in_place(image);
        }
        t
    }

    /// Dense `2^n × 2^n` unitary.
    pub fn to_unitary(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = CMatrix::identity(dim, dim);
        for g in &self.gates {
            g.apply_dense_left(&mut m, self.n);
        }
        m
    }

    /// Dense 4×4 unitary of a two-qubit circuit.
    pub fn to_gate4(&self) -> Gate4 {
        assert_eq!(self.n, 2, "to_gate4 needs a two-qubit circuit");
        let m = self.to_unitary();
        Gate4::from_fn(|r, c| m[(r, c)])
    }
}

/// Images of `X_1 … X_n, Z_1 … Z_n` under conjugation by a Clifford.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordTableau {
    n: usize,
    images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let images = (1..=n)
            .map(|q| PauliString::single(n, q, Pauli::X))
            .chain((1..=n).map(|q| PauliString::single(n, q, Pauli::Z)))
            .collect();
        Self { n, images }
    }

    pub fn from_images(images: Vec<PauliString>) -> Result<Self, CliffordError> {
        if images.len() % 2 == 1 {
            return Err(CliffordError::InvalidGate("tableau needs 2n images".into()));
        }
        let n = images.len() / 2;
        if let Some(bad) = images.iter().find(|p| p.num_qubits() != n) {
            return Err(CliffordError::DimensionMismatch {
                left: n,
                right: bad.num_qubits(),
            });
        }
        let t = Self { n, images };
        if !t.is_symplectic() {
            return Err(CliffordError::NotSymplectic);
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.images[q - 1]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.images[self.n + q - 1]
    }

    /// Images are Hermitian and reproduce the canonical commutation relations.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        if self
            .images
            .iter()
            .any(|p| !p.is_hermitian() || p.is_identity())
        {
            return false;
        }
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let should_commute = !(j == i + n && i < n);
                let commutes = self.images[i]
                    .commutes_with(&self.images[j])
                    .unwrap_or(false);
                if commutes != should_commute {
                    return false;
                }
            }
        }
        true
    }

    /// `C P C†`, composed from generator images.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString, CliffordError> {
        if p.num_qubits() != self.n {
            return Err(CliffordError::DimensionMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        // i^k ⊗σ_q = i^{k + #Y} ∏_q X_q^{x_q} Z_q^{z_q}
        let mut out = PauliString::identity(self.n)
            .with_phase(((p.phase_exp() as usize + p.y_count()) % 4) as u8);
        for q in 1..=self.n {
            let (x, z) = p.get(q).bits();
            if x {
                out.mul_assign_right(self.x_image(q));
            }
            if z {
                out.mul_assign_right(self.z_image(q));
            }
        }
        Ok(out)
    }

    /// Tableau of "apply `first`, then `self`".
    pub fn compose(&self, first: &CliffordTableau) -> Result<CliffordTableau, CliffordError> {
        if first.n != self.n {
            return Err(CliffordError::DimensionMismatch {
                left: self.n,
                right: first.n,
            });
        }
        let images = first
            .images
            .iter()
            .map(|img| self.conjugate(img))
            .collect::<Result<_, _>>()?;
        Ok(Self { n: self.n, images })
    }
}

/// Single-qubit circuit on `qubit` mapping `sign · factor` to `+Z`.
/// `negative` selects the sign −1. Costs: Z 0/4, X 1/3, Y 3/2 gates.
pub(crate) fn normalize_to_z(factor: Pauli, negative: bool, qubit: usize) -> Vec<CliffordGate> {
    use CliffordGate::{H, S};
    match (factor, negative) {
        (Pauli::Z, false) => vec![],
        (Pauli::Z, true) => vec![H(qubit), S(qubit), S(qubit), H(qubit)],
        (Pauli::X, false) => vec![H(qubit)],
        (Pauli::X, true) => vec![S(qubit), S(qubit), H(qubit)],
        (Pauli::Y, false) => vec![H(qubit), S(qubit), H(qubit)],
        (Pauli::Y, true) => vec![S(qubit), H(qubit)],
        (Pauli::I, _) => unreachable!("identity factor has no Z normal form"),
    }
}

fn normalize_cost(factor: Pauli, negative: bool) -> usize {
    normalize_to_z(factor, negative, 1).len()
}

/// Two-qubit Clifford `C` on qubits (1, 2) with `C P C† = 1 ⊗ Z`, phase 0.
///
/// Each nontrivial factor is sent to ±Z by single-qubit gates (signs chosen
/// to cancel the input sign at the lowest gate count), then CNOT(1→2) folds
/// `Z ⊗ Z` onto the second wire, or SWAP moves a lone first-wire `Z` across.
/// At most six gates for any Hermitian input.
pub fn routing_clifford_2q(p: &PauliString) -> Result<CliffordCircuit, CliffordError> {
    if p.num_qubits() != 2 {
        return Err(CliffordError::DimensionMismatch {
            left: 2,
            right: p.num_qubits(),
        });
    }
    if p.is_identity() {
        return Err(CliffordError::TrivialPauli);
    }
    if !p.is_hermitian() {
        return Err(CliffordError::NonHermitian(p.to_string()));
    }
    let negative = p.phase_exp() == 2;
    let (f1, f2) = (p.get(1), p.get(2));
    let mut gates = Vec::new();
    match (f1, f2) {
        (Pauli::I, f) => gates.extend(normalize_to_z(f, negative, 2)),
        (f, Pauli::I) => {
            gates.extend(normalize_to_z(f, negative, 1));
            gates.push(CliffordGate::Swap(1, 2));
        }
        (a, b) => {
            // Signs (s1, s2) with s1·s2 equal to the input sign.
            let options = [(false, negative), (true, !negative)];
            let (s1, s2) = options
                .into_iter()
                .min_by_key(|&(s1, s2)| normalize_cost(a, s1) + normalize_cost(b, s2))
                .expect("two options");
            gates.extend(normalize_to_z(a, s1, 1));
            gates.extend(normalize_to_z(b, s2, 2));
            gates.push(CliffordGate::Cnot(1, 2));
        }
    }
    Ok(CliffordCircuit { n: 2, gates })
}

/// Dense-matrix check that `U P U† = image`, entrywise within `tol`.
pub fn dense_conjugation_matches(
    u: &CMatrix,
    p: &PauliString,
    image: &PauliString,
    tol: f64,
) -> bool {
    let lhs = u * dense::pauli_matrix(p) * u.adjoint();
    dense::max_abs_diff(&lhs, &dense::pauli_matrix(image)) < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn standard_update_rules() {
        let cnot = CliffordCircuit::from_gates(2, vec![CliffordGate::Cnot(1, 2)]).unwrap();
        assert_eq!(cnot.conjugate(&p("XI")).unwrap(), p("XX"));
        assert_eq!(cnot.conjugate(&p("ZZ")).unwrap(), p("IZ"));
        let h = CliffordCircuit::from_gates(1, vec![CliffordGate::H(1)]).unwrap();
        assert_eq!(h.conjugate(&p("Z")).unwrap(), p("X"));
        assert!(h.conjugate(&p("ZZ")).is_err());
    }

    #[test]
    fn circuit_validation() {
        assert!(CliffordCircuit::from_gates(2, vec![CliffordGate::Cnot(1, 1)]).is_err());
        assert!(CliffordCircuit::from_gates(2, vec![CliffordGate::H(3)]).is_err());
    }

    #[test]
    fn empty_and_hadamard_unitaries() {
        let empty = CliffordCircuit::new(2);
        assert!(dense::max_abs_diff(&empty.to_unitary(), &CMatrix::identity(4, 4)) < 1e-15);
        let h = CliffordCircuit::from_gates(1, vec![CliffordGate::H(1)])
            .unwrap()
            .to_unitary();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CMatrix::from_row_slice(2, 2, &[ONE * s, ONE * s, ONE * s, -ONE * s]);
        assert!(dense::max_abs_diff(&h, &expect) < 1e-15);
    }

    fn all_two_qubit() -> Vec<PauliString> {
        (1..16)
            .map(|k| PauliString::nth_lexicographic(2, k))
            .collect()
    }

    #[test]
    fn elementary_gates_agree_with_dense_conjugation() {
        let gates = [
            CliffordGate::H(1),
            CliffordGate::H(2),
            CliffordGate::S(1),
            CliffordGate::S(2),
            CliffordGate::Cnot(1, 2),
            CliffordGate::Cnot(2, 1),
            CliffordGate::Swap(1, 2),
            CliffordGate::Cz(1, 2),
        ];
        for g in gates {
            let c = CliffordCircuit::from_gates(2, vec![g]).unwrap();
            let u = c.to_unitary();
            assert!(dense::is_unitary(&u, 1e-12));
            for q in all_two_qubit() {
                let image = c.conjugate(&q).unwrap();
                assert!(
                    dense_conjugation_matches(&u, &q, &image, 1e-12),
                    "{g} on {q}"
                );
                let mut back = image.clone();
                c.conjugate_inverse_in_place(&mut back);
                assert_eq!(back, q);
            }
        }
    }

    #[test]
    fn routing_special_cases() {
        assert!(routing_clifford_2q(&p("IZ")).unwrap().is_empty());
        assert_eq!(
            routing_clifford_2q(&p("ZI")).unwrap().gates,
            vec![CliffordGate::Swap(1, 2)]
        );
        assert_eq!(
            routing_clifford_2q(&p("II")),
            Err(CliffordError::TrivialPauli)
        );
        assert!(matches!(
            routing_clifford_2q(&p("iXY")),
            Err(CliffordError::NonHermitian(_))
        ));
    }

    #[test]
    fn routing_all_fifteen_with_both_signs() {
        let target = p("IZ");
        for q in all_two_qubit() {
            for sign in [0u8, 2] {
                let input = q.clone().with_phase(sign);
                let c = routing_clifford_2q(&input).unwrap();
                assert!(c.len() <= 6, "{input}: {} gates", c.len());
                let image = c.conjugate(&input).unwrap();
                assert_eq!(image, target, "{input}");
                assert!(dense_conjugation_matches(
                    &c.to_unitary(),
                    &input,
                    &target,
                    1e-12
                ));
            }
        }
    }

    #[test]
    fn tableau_images_and_symplectic_check() {
        let c = CliffordCircuit::from_gates(2, vec![CliffordGate::H(1), CliffordGate::Cnot(1, 2)])
            .unwrap();
        let t = c.tableau();
        assert!(t.is_symplectic());
        assert_eq!(t.z_image(1).to_string(), "XX");
        let bad = CliffordTableau::from_images(vec![p("X"), p("X")]);
        assert_eq!(bad, Err(CliffordError::NotSymplectic));
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = CliffordGate> {
        (0u8..5, 1..=n, 1..n).prop_map(move |(kind, a, off)| {
            let b = (a - 1 + off) % n + 1;
            match kind {
                0 => CliffordGate::H(a),
                1 => CliffordGate::S(a),
                2 => CliffordGate::Cnot(a, b),
                3 => CliffordGate::Swap(a, b),
                _ => CliffordGate::Cz(a, b),
            }
        })
    }

    fn arb_circuit(n: usize, len: usize) -> impl Strategy<Value = CliffordCircuit> {
        proptest::collection::vec(arb_gate(n), 0..len)
            .prop_map(move |gates| CliffordCircuit { n, gates })
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(ranks, phase)| {
            let paulis: Vec<_> = ranks.into_iter().map(Pauli::from_rank).collect();
            PauliString::from_paulis(&paulis).with_phase(phase)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn tableau_composition_is_a_homomorphism(
            c1 in arb_circuit(4, 12), c2 in arb_circuit(4, 12), q in arb_pauli(4)
        ) {
            let (t1, t2) = (c1.tableau(), c2.tableau());
            let composed = t2.compose(&t1).unwrap();
            let direct = t2.conjugate(&t1.conjugate(&q).unwrap()).unwrap();
            prop_assert_eq!(composed.conjugate(&q).unwrap(), direct.clone());
            let mut joined = c1.clone();
            joined.extend(&c2);
            prop_assert_eq!(joined.conjugate(&q).unwrap(), direct);
        }

        #[test]
        fn conjugation_preserves_structure(c in arb_circuit(3, 10), a in arb_pauli(3), b in arb_pauli(3)) {
            let (ca, cb) = (c.conjugate(&a).unwrap(), c.conjugate(&b).unwrap());
            prop_assert_eq!(ca.is_identity(), a.is_identity());
            prop_assert_eq!(ca.commutes_with(&cb).unwrap(), a.commutes_with(&b).unwrap());
            prop_assert!(c.tableau().is_symplectic());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dense_unitary_matches_tableau(c in arb_circuit(3, 6)) {
            let u = c.to_unitary();
            prop_assert!(dense::is_unitary(&u, 1e-12));
            let t = c.tableau();
            for q in 1..=3 {
                for (gen, image) in [
                    (PauliString::single(3, q, Pauli::X), t.x_image(q)),
                    (PauliString::single(3, q, Pauli::Z), t.z_image(q)),
                ] {
                    prop_assert!(dense_conjugation_matches(&u, &gen, image, 1e-12));
                }
            }
        }
    }
}
