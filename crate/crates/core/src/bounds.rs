//! Closed-form complexity and dimension bounds.
//!
//! Integer inputs are evaluated in exact rational arithmetic; only the
//! `e^{-n}` probability terms use `f64`.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::architecture::Architecture;
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Rational = Ratio<i128>;

fn rational_as_string<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `T/9 − n/3` with `T = ⌊R/L⌋`, clamped at zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityBound {
    #[serde(serialize_with = "rational_as_string")]
    pub value: Rational,
    pub slices: u64,
    /// `R` was not a multiple of `L`; `⌊R/L⌋` slices were used.
    pub floored: bool,
    /// The raw value was negative and has been replaced by 0.
    pub clamped: bool,
}

pub fn complexity_lower_bound(
    gates: u64,
    slice_len: u64,
    n: u64,
) -> Result<ComplexityBound, BoundsError> {
    if slice_len == 0 {
        return Err(BoundsError::InvalidParameter(
            "slice length L must be >= 1".into(),
        ));
    }
    let slices = gates / slice_len;
    let raw = Rational::new(slices as i128, 9) - Rational::new(n as i128, 3);
    let clamped = raw < Rational::from_integer(0);
    Ok(ComplexityBound {
        value: if clamped {
            Rational::from_integer(0)
        } else {
            raw
        },
        slices,
        floored: !gates.is_multiple_of(slice_len),
        clamped,
    })
}

/// `4^n − 1` for unitaries, `2^{n+1} − 1` for states; saturates at `u128::MAX`.
pub fn saturation_threshold(n: u32, mode: Mode) -> u128 {
    let exponent = match mode {
        Mode::Unitary => 2 * n,
        Mode::State => n + 1,
    };
    1u128.checked_shl(exponent).map_or(u128::MAX, |v| v - 1)
}

/// `min(15R, 9R + 3·touched)`: free parameters after removing one SU(2)
/// gauge copy per internal wire.
pub fn parameter_count_bound(gates: usize, touched: usize) -> u128 {
    let r = gates as u128;
    (15 * r).min(9 * r + 3 * touched as u128)
}

/// Unitary-mode dimension ceiling `min(15R, 9R + 3·touched, 4^n − 1)`.
pub fn dimension_upper_bound(arch: &Architecture) -> u128 {
    dimension_upper_bound_for(arch, Mode::Unitary)
}

pub fn dimension_upper_bound_for(arch: &Architecture, mode: Mode) -> u128 {
    parameter_count_bound(arch.gate_count(), arch.touched_qubits())
        .min(saturation_threshold(arch.n() as u32, mode))
}

/// `max(0, 1 − (n−1)e^{−n}/(1−α))`.
pub fn randomized_bound_probability(n: u32, alpha: f64) -> Result<f64, BoundsError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(BoundsError::AlphaOutOfRange(alpha));
    }
    if n < 2 {
        return Err(BoundsError::InvalidParameter(format!(
            "n must be >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok((1.0 - (nf - 1.0) * (-nf).exp() / (1.0 - alpha)).max(0.0))
}

/// Complexity guaranteed by the randomized-architecture statement:
/// `α·R / (9n(n−1)²) − n/3`, not clamped.
pub fn randomized_complexity_bound(n: u32, gates: u64, alpha: f64) -> f64 {
    let nf = n as f64;
    alpha * gates as f64 / (9.0 * nf * (nf - 1.0) * (nf - 1.0)) - nf / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceProbability {
    /// `(1 − (1 − 1/(n−1))^{n(n−1)})^{n−1}`.
    pub exact: f64,
    /// `(1 − e^{−n})^{n−1}`.
    pub product_lower: f64,
    /// `1 − (n−1)e^{−n}`.
    pub lower: f64,
}

/// Probability that a block of n(n−1)² uniformly placed nearest-neighbour
/// gates contains a full staircase.
pub fn staircase_slice_probability(n: u32) -> Result<SliceProbability, BoundsError> {
    if n < 2 {
        return Err(BoundsError::InvalidParameter(format!(
            "n must be >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let miss = (1.0 - 1.0 / (nf - 1.0)).powf(nf * (nf - 1.0));
    Ok(SliceProbability {
        exact: (1.0 - miss).powi(n as i32 - 1),
        product_lower: (1.0 - (-nf).exp()).powi(n as i32 - 1),
        lower: 1.0 - (nf - 1.0) * (-nf).exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSheet {
    pub n: u32,
    pub gates: u64,
    pub slice_len: u64,
    pub slices: u64,
    pub lower_bound: ComplexityBound,
    pub lower_bound_value: f64,
    /// `min(15R, 9R + 3n)`, taking every qubit as touched.
    pub dimension_upper: u128,
    pub unitary_cap: u128,
    pub state_cap: u128,
    pub unitary_saturated: bool,
    pub state_saturated: bool,
}

impl BoundSheet {
    pub fn new(n: u32, gates: u64, slice_len: u64) -> Result<Self, BoundsError> {
        let lower_bound = complexity_lower_bound(gates, slice_len, n as u64)?;
        let unitary_cap = saturation_threshold(n, Mode::Unitary);
        let state_cap = saturation_threshold(n, Mode::State);
        let slices = lower_bound.slices;
        Ok(Self {
            n,
            gates,
            slice_len,
            slices,
            lower_bound_value: rational_to_f64(&lower_bound.value),
            lower_bound,
            dimension_upper: parameter_count_bound(gates as usize, n as usize),
            unitary_cap,
            state_cap,
            unitary_saturated: slices as u128 >= unitary_cap,
            state_saturated: slices as u128 >= state_cap,
        })
    }
}

impl fmt::Display for BoundSheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut flags = Vec::new();
        if self.lower_bound.floored {
            flags.push("R not a multiple of L; floor(R/L) used");
        }
        if self.lower_bound.clamped {
            flags.push("negative bound clamped to 0");
        }
        let rows = [
            ("n", self.n.to_string()),
            ("R", self.gates.to_string()),
            ("L", self.slice_len.to_string()),
            ("T", self.slices.to_string()),
            (
                "complexity lower bound",
                format!(
                    "{} (~{:.6})",
                    self.lower_bound.value, self.lower_bound_value
                ),
            ),
            ("dimension upper bound", self.dimension_upper.to_string()),
            ("unitary cap 4^n-1", self.unitary_cap.to_string()),
            ("state cap 2^(n+1)-1", self.state_cap.to_string()),
            ("unitary saturated", self.unitary_saturated.to_string()),
            ("state saturated", self.state_saturated.to_string()),
            (
                "flags",
                if flags.is_empty() {
                    "none".into()
                } else {
                    flags.join("; ")
                },
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (key, value) in rows {
            writeln!(f, "{key:<width$}  {value}")?;
        }
        Ok(())
    }
}
