//! n-qubit Pauli strings in symplectic form.
//!
//! A string is `i^phase · σ_1 ⊗ … ⊗ σ_n` where the bit pair `(x_q, z_q)`
//! selects `I, X, Z, Y` for `(0,0), (1,0), (0,1), (1,1)`. Qubit 1 is the
//! leftmost character of the text form.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CliffordError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Position in the order I < X < Y < Z.
    pub fn rank(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_rank(rank: u8) -> Self {
        match rank & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

/// Phase-free identity of a Pauli string, for set membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliKey {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Self {
            n,
            x: vec![0; words],
            z: vec![0; words],
            phase: 0,
        }
    }

    /// A single non-identity factor on 1-indexed `qubit`.
    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, pauli);
        p
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut p = Self::identity(paulis.len());
        for (i, &s) in paulis.iter().enumerate() {
            p.set(i + 1, s);
        }
        p
    }

    /// The `index`-th string in lexicographic order over I < X < Y < Z with
    /// qubit 1 most significant; index 0 is the identity.
    pub fn nth_lexicographic(n: usize, mut index: u64) -> Self {
        let mut p = Self::identity(n);
        let mut q = n;
        while index > 0 && q > 0 {
            p.set(q, Pauli::from_rank((index & 3) as u8));
            index >>= 2;
            q -= 1;
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = Self::locate(qubit);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) {
        assert!(
            qubit >= 1 && qubit <= self.n,
            "qubit {qubit} outside [1, {}]",
            self.n
        );
        let (w, b) = Self::locate(qubit);
        let (x, z) = pauli.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    fn locate(qubit: usize) -> (usize, usize) {
        ((qubit - 1) / WORD, (qubit - 1) % WORD)
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones() as usize)
            .sum()
    }

    /// Hermitian iff the prefactor is ±1.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn key(&self) -> PauliKey {
        PauliKey {
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }

    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Support as (qubit, factor) pairs, qubits ascending.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        (1..=self.n)
            .map(|q| (q, self.get(q)))
            .filter(|&(_, p)| p != Pauli::I)
            .collect()
    }

    /// Bit masks over a basis-state index with qubit 1 most significant.
    /// Only meaningful for `n <= 64`.
    pub fn basis_masks(&self) -> (u64, u64) {
        let mut xm = 0u64;
        let mut zm = 0u64;
        for q in 1..=self.n {
            let (x, z) = self.get(q).bits();
            let bit = 1u64 << (self.n - q);
            if x {
                xm |= bit;
            }
            if z {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool, CliffordError> {
        self.check_dims(other)?;
        let odd = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum::<u32>()
            % 2;
        Ok(odd == 0)
    }

    fn check_dims(&self, other: &Self) -> Result<(), CliffordError> {
        if self.n != other.n {
            return Err(CliffordError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// `self · other` with the phase tracked mod 4.
    pub fn multiply(&self, other: &Self) -> Result<Self, CliffordError> {
        self.check_dims(other)?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`; dimensions must already agree.
    pub(crate) fn mul_assign_right(&mut self, other: &Self) {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (a_x, a_y, a_z) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (b_x, b_y, b_z) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reversed products give -i.
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_y & b_x) | (a_z & b_y) | (a_x & b_z)).count_ones();
            self.x[w] = x1 ^ x2;
            self.z[w] = z1 ^ z2;
        }
        let delta = (plus as i64 - minus as i64).rem_euclid(4) as u8;
        self.phase = (self.phase + other.phase + delta) & 3;
    }

    fn bit(&self, qubit: usize) -> (bool, bool) {
        self.get(qubit).bits()
    }

    fn set_bits(&mut self, qubit: usize, x: bool, z: bool) {
        self.set(qubit, Pauli::from_bits(x, z));
    }

    fn flip_sign(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    /// `P ← H P H†`.
    pub fn conjugate_h(&mut self, q: usize) {
        let (x, z) = self.bit(q);
        if x && z {
            self.flip_sign();
        }
        self.set_bits(q, z, x);
    }

    /// `P ← S P S†`.
    pub fn conjugate_s(&mut self, q: usize) {
        let (x, z) = self.bit(q);
        if x && z {
            self.flip_sign();
        }
        self.set_bits(q, x, z ^ x);
    }

    /// `P ← S† P S`.
    pub fn conjugate_s_dag(&mut self, q: usize) {
        let (x, z) = self.bit(q);
        if x && !z {
            self.flip_sign();
        }
        self.set_bits(q, x, z ^ x);
    }

    /// `P ← CNOT P CNOT` with control `c`, target `t`.
    pub fn conjugate_cnot(&mut self, c: usize, t: usize) {
        let (xc, zc) = self.bit(c);
        let (xt, zt) = self.bit(t);
        if xc && zt && (xt == zc) {
            self.flip_sign();
        }
        self.set_bits(t, xt ^ xc, zt);
        self.set_bits(c, xc, zc ^ zt);
    }

    pub fn conjugate_cz(&mut self, a: usize, b: usize) {
        self.conjugate_h(b);
        self.conjugate_cnot(a, b);
        self.conjugate_h(b);
    }

    pub fn conjugate_swap(&mut self, a: usize, b: usize) {
        let pa = self.get(a);
        let pb = self.get(b);
        self.set(a, pb);
        self.set(b, pa);
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 1..=self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = CliffordError;

    /// Accepts an optional `+`, `-`, `+i`, `-i` or `i` prefix (the Unicode
    /// minus sign is also accepted) followed by letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (sign, rest) = if let Some(r) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            (2u8, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let (imag, body) = match rest.strip_prefix('i') {
            Some(r) => (1u8, r),
            None => (0, rest),
        };
        let paulis = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(CliffordError::Parse(format!(
                    "unexpected character {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if paulis.is_empty() {
            return Err(CliffordError::Parse(format!("empty Pauli string {s:?}")));
        }
        Ok(Self::from_paulis(&paulis).with_phase(sign + imag))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let prod = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(prod.get(1), Pauli::Y);
        assert_eq!(prod.phase_exp(), 3);
        assert_eq!(prod.to_string(), "-iY");
    }

    #[test]
    fn identity_and_squares() {
        let a = p("XYZI");
        assert_eq!(a.multiply(&PauliString::identity(4)).unwrap(), a);
        let sq = a.multiply(&a).unwrap();
        assert!(sq.is_identity());
        assert_eq!(sq.phase_exp(), 0);
        assert!(p("XZ").multiply(&p("XYZ")).is_err());
    }

    #[test]
    fn text_form() {
        let a = p("−iXYZI");
        assert_eq!(a.phase_exp(), 3);
        assert_eq!(a.to_string(), "-iXYZI");
        assert_eq!(p("+iZ").phase_exp(), 1);
        assert_eq!(p("+XX").to_string(), "XX");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("-".parse::<PauliString>().is_err());
    }

    #[test]
    fn weight_and_lexicographic_order() {
        assert_eq!(p("XIYZ").weight(), 3);
        assert_eq!(PauliString::nth_lexicographic(2, 0).to_string(), "II");
        assert_eq!(PauliString::nth_lexicographic(2, 1).to_string(), "IX");
        assert_eq!(PauliString::nth_lexicographic(2, 4).to_string(), "XI");
        assert_eq!(PauliString::nth_lexicographic(2, 15).to_string(), "ZZ");
    }

    #[test]
    fn wide_strings_cross_word_boundaries() {
        let mut a = PauliString::identity(130);
        a.set(64, Pauli::X);
        a.set(65, Pauli::Y);
        a.set(130, Pauli::Z);
        assert_eq!(a.weight(), 3);
        let mut b = a.clone();
        b.conjugate_cnot(64, 65);
        b.conjugate_cnot(64, 65);
        assert_eq!(a, b);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(ranks, phase)| {
            let paulis: Vec<_> = ranks.into_iter().map(Pauli::from_rank).collect();
            PauliString::from_paulis(&paulis).with_phase(phase)
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_pauli(5), b in arb_pauli(5), c in arb_pauli(5)) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn text_round_trip(a in arb_pauli(7)) {
            prop_assert_eq!(a.to_string().parse::<PauliString>().unwrap(), a);
        }

        #[test]
        fn commutation_matches_products(a in arb_pauli(4), b in arb_pauli(4)) {
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            prop_assert_eq!(a.commutes_with(&b).unwrap(), ab == ba);
        }
    }
}
