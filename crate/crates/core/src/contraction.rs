//! Dense evaluation of the contraction map and its Jacobian rank.
//!
//! Perturbing gate `j` as `U_j → exp(iε S_k) U_j` moves the contracted
//! unitary along `i K_{j,k} F(x)` with `K_{j,k} = Suf_j S_k Suf_j†`, where
//! `Suf_j` is the product of all gates after `j`. Since `F(x)` is invertible,
//! the Jacobian rank equals the real rank of the Hermitian operators
//! `K_{j,k}`, which we expand in the Pauli basis. For the state map the
//! tangent vectors are `i K_{j,k} |ψ⟩`.

use std::ops::Range;

use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{self, Architecture};
use crate::bounds;
use crate::dense::{self, CMatrix, CVector, Gate4, C64, I, ONE};
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractionError {
    #[error("{n} qubits exceeds the dense limit n_max = {n_max}")]
    SizeLimit { n: usize, n_max: usize },
    #[error("architecture has {expected} gates but {got} were assigned")]
    CountMismatch { expected: usize, got: usize },
    #[error("gate {index} is not unitary (deviation {deviation:.3e})")]
    NotUnitary { index: usize, deviation: f64 },
    #[error("no qubit is shared by two consecutive gates")]
    NoInternalWire,
    #[error("rank is inconclusive: {0}")]
    Inconclusive(String),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("gate index {index} or generator {generator} out of range")]
    BadDirection { index: usize, generator: usize },
}

/// Relative singular-value thresholds; a rank is reported only when both
/// agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub loose: f64,
    pub tight: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            loose: 1e-6,
            tight: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConfig {
    pub n_max: usize,
    pub tolerances: Tolerances,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        Self {
            n_max: 8,
            tolerances: Tolerances::default(),
        }
    }
}

impl ContractionConfig {
    fn check(&self, arch: &Architecture) -> Result<(), ContractionError> {
        if arch.n() > self.n_max {
            return Err(ContractionError::SizeLimit {
                n: arch.n(),
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// Bytes held by one tangent frame plus the suffix product while it is built.
pub fn memory_estimate_bytes(n: usize, gates: usize, mode: Mode) -> u128 {
    let dim = 1u128 << n;
    let rows = match mode {
        Mode::Unitary => dim * dim,
        Mode::State => 2 * dim,
    };
    rows * 15 * gates as u128 * 8 + 3 * dim * dim * 16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    Haar { seed: u64 },
    CliffordWitness,
    Explicit,
}

/// One 4×4 special unitary per architecture vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GateAssignment {
    gates: Vec<Gate4>,
    provenance: Provenance,
}

impl GateAssignment {
    /// Checks unitarity to 1e−10 and rescales each gate by `det^{-1/4}`.
    pub fn new(gates: Vec<Gate4>, provenance: Provenance) -> Result<Self, ContractionError> {
        let gates = gates
            .into_iter()
            .enumerate()
            .map(|(index, g)| {
                let deviation = (g.adjoint() * g - Gate4::identity())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if deviation > 1e-10 {
                    return Err(ContractionError::NotUnitary { index, deviation });
                }
                Ok(to_special_unitary(&g))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { gates, provenance })
    }

    /// `count` gates drawn in order from one ChaCha8 stream seeded with `seed`.
    pub fn haar(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = (0..count)
            .map(|_| to_special_unitary(&haar_u4(&mut rng)))
            .collect();
        Self {
            gates,
            provenance: Provenance::Haar { seed },
        }
    }

    pub fn identity(count: usize) -> Self {
        Self {
            gates: vec![Gate4::identity(); count],
            provenance: Provenance::Explicit,
        }
    }

    pub fn gates(&self) -> &[Gate4] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Gate `index` replaced by `exp(iε S_k) U_index`.
    pub fn perturbed(
        &self,
        index: usize,
        generator: usize,
        eps: f64,
    ) -> Result<Self, ContractionError> {
        if index >= self.gates.len() || generator >= 15 {
            return Err(ContractionError::BadDirection { index, generator });
        }
        let (alpha, beta) = dense::two_qubit_pauli_basis()[generator];
        let s = dense::two_qubit_pauli_matrix(alpha, beta);
        let rotation = Gate4::identity() * C64::new(eps.cos(), 0.0) + s * C64::new(0.0, eps.sin());
        let mut gates = self.gates.clone();
        gates[index] = rotation * gates[index];
        Ok(Self {
            gates,
            provenance: Provenance::Explicit,
        })
    }
}

/// Haar-random U(4): QR of a complex Ginibre matrix with the phases of R's
/// diagonal moved into Q.
pub fn haar_u4<R: Rng + ?Sized>(rng: &mut R) -> Gate4 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = Matrix4::<C64>::from_fn(|_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Gate4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    }));
    q * phases
}

/// Global phase fixed so that `det = 1`.
pub fn to_special_unitary(g: &Gate4) -> Gate4 {
    let det = g.determinant();
    g * C64::from_polar(1.0, -det.arg() / 4.0)
}

pub fn haar_su4(seed: u64) -> Gate4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    to_special_unitary(&haar_u4(&mut rng))
}

/// Counter-derived per-sample seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_inputs(
    arch: &Architecture,
    gates: &GateAssignment,
    config: &ContractionConfig,
) -> Result<(), ContractionError> {
    config.check(arch)?;
    if gates.len() != arch.gate_count() {
        return Err(ContractionError::CountMismatch {
            expected: arch.gate_count(),
            got: gates.len(),
        });
    }
    Ok(())
}

/// `U_R ⋯ U_1` over the gates in `range`.
pub fn contract_range(arch: &Architecture, gates: &GateAssignment, range: Range<usize>) -> CMatrix {
    let n = arch.n();
    let dim = 1usize << n;
    let mut m = CMatrix::identity(dim, dim);
    for j in range {
        let (a, b) = arch.gates()[j];
        dense::apply_two_qubit_left(&mut m, n, a, b, &gates.gates[j]);
    }
    m
}

pub fn contract(
    arch: &Architecture,
    gates: &GateAssignment,
    config: &ContractionConfig,
) -> Result<CMatrix, ContractionError> {
    check_inputs(arch, gates, config)?;
    Ok(contract_range(arch, gates, 0..arch.gate_count()))
}

/// The contracted circuit applied to `|0^n⟩`.
pub fn contract_state(
    arch: &Architecture,
    gates: &GateAssignment,
    config: &ContractionConfig,
) -> Result<CVector, ContractionError> {
    check_inputs(arch, gates, config)?;
    let n = arch.n();
    let mut psi = CVector::zeros(1 << n);
    psi[0] = ONE;
    for (j, &(a, b)) in arch.gates().iter().enumerate() {
        dense::apply_two_qubit_vec(&mut psi, n, a, b, &gates.gates[j]);
    }
    Ok(psi)
}

/// `K_{j,k} = Suf_j S_k Suf_j†` computed directly (no sweep).
pub fn tangent_operator(
    arch: &Architecture,
    gates: &GateAssignment,
    index: usize,
    generator: usize,
) -> Result<CMatrix, ContractionError> {
    if index >= arch.gate_count() || generator >= 15 {
        return Err(ContractionError::BadDirection { index, generator });
    }
    let suffix = contract_range(arch, gates, index + 1..arch.gate_count());
    let (a, b) = arch.gates()[index];
    let (alpha, beta) = dense::two_qubit_pauli_basis()[generator];
    let mut left = suffix.clone();
    dense::apply_two_qubit_right(
        &mut left,
        arch.n(),
        a,
        b,
        &dense::two_qubit_pauli_matrix(alpha, beta),
    );
    Ok(left * suffix.adjoint())
}

/// Real tangent columns, one per (gate, generator) pair at column
/// `15·j + k`. Unitary mode rows are Pauli-basis coefficients indexed by
/// [`dense::pauli_row`]; state mode rows are `[Re; Im]` of `i K |ψ⟩`.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub mode: Mode,
    pub n: usize,
    pub gate_count: usize,
    pub columns: DMatrix<f64>,
}

impl TangentFrame {
    pub fn column_range(&self, gate: usize) -> Range<usize> {
        15 * gate..15 * (gate + 1)
    }

    pub fn rank(&self, tolerances: Tolerances) -> RankEstimate {
        numerical_rank(&singular_values(&self.columns), tolerances)
    }
}

/// One suffix sweep from the last gate to the first.
pub fn tangent_frame(
    arch: &Architecture,
    gates: &GateAssignment,
    mode: Mode,
    config: &ContractionConfig,
) -> Result<TangentFrame, ContractionError> {
    check_inputs(arch, gates, config)?;
    let n = arch.n();
    let dim = 1usize << n;
    let r = arch.gate_count();
    let rows = match mode {
        Mode::Unitary => dim * dim,
        Mode::State => 2 * dim,
    };
    let generators: Vec<Gate4> = dense::two_qubit_pauli_basis()
        .iter()
        .map(|&(a, b)| dense::two_qubit_pauli_matrix(a, b))
        .collect();
    let psi = match mode {
        Mode::State => Some(contract_state(arch, gates, config)?),
        Mode::Unitary => None,
    };

    let mut columns = DMatrix::<f64>::zeros(rows, 15 * r);
    let mut suffix = CMatrix::identity(dim, dim);
    for j in (0..r).rev() {
        let (a, b) = arch.gates()[j];
        let suffix_adj = suffix.adjoint();
        let block = &mut columns.as_mut_slice()[15 * j * rows..15 * (j + 1) * rows];
        match &psi {
            None => {
                for (k, s) in generators.iter().enumerate() {
                    let mut left = suffix.clone();
                    dense::apply_two_qubit_right(&mut left, n, a, b, s);
                    let k_op = left * &suffix_adj;
                    dense::pauli_coefficients(&k_op, n, &mut block[k * rows..(k + 1) * rows]);
                }
            }
            Some(psi) => {
                // Suf_j† ψ is the state right after gate j.
                let phi = &suffix_adj * psi;
                for (k, s) in generators.iter().enumerate() {
                    let mut w = phi.clone();
                    dense::apply_two_qubit_vec(&mut w, n, a, b, s);
                    let v = (&suffix * w) * I;
                    let col = &mut block[k * rows..(k + 1) * rows];
                    for (i, z) in v.iter().enumerate() {
                        col[i] = z.re;
                        col[dim + i] = z.im;
                    }
                }
            }
        }
        dense::apply_two_qubit_right(&mut suffix, n, a, b, &gates.gates[j]);
    }
    Ok(TangentFrame {
        mode,
        n,
        gate_count: r,
        columns,
    })
}

/// Singular values in descending order. Wide matrices are first reduced by a
/// QR factorization of their transpose.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = if m.ncols() > m.nrows() {
        m.transpose()
            .qr()
            .r()
            .singular_values()
            .iter()
            .copied()
            .collect()
    } else {
        m.singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RankEstimate {
    Rank {
        rank: usize,
    },
    Inconclusive {
        loose: usize,
        tight: usize,
        /// Smallest singular value kept at the loose threshold and largest
        /// dropped at the tight one, relative to the largest.
        gap: (f64, f64),
    },
}

impl RankEstimate {
    pub fn value(&self) -> Option<usize> {
        match *self {
            RankEstimate::Rank { rank } => Some(rank),
            RankEstimate::Inconclusive { .. } => None,
        }
    }
}

/// Count of singular values above `tol · σ_max` at both tolerances.
pub fn numerical_rank(singular_values: &[f64], tol: Tolerances) -> RankEstimate {
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return RankEstimate::Rank { rank: 0 };
    }
    let count = |t: f64| singular_values.iter().filter(|&&s| s > t * smax).count();
    let (loose, tight) = (count(tol.loose), count(tol.tight));
    if loose == tight {
        return RankEstimate::Rank { rank: loose };
    }
    let kept = singular_values
        .iter()
        .copied()
        .filter(|&s| s > tol.loose * smax)
        .fold(smax, f64::min);
    let dropped = singular_values
        .iter()
        .copied()
        .filter(|&s| s <= tol.tight * smax)
        .fold(0.0, f64::max);
    RankEstimate::Inconclusive {
        loose,
        tight,
        gap: (kept / smax, dropped / smax),
    }
}

pub fn matrix_rank(m: &DMatrix<f64>, tol: Tolerances) -> RankEstimate {
    numerical_rank(&singular_values(m), tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRank {
    pub index: usize,
    pub seed: u64,
    pub estimate: RankEstimate,
    pub sigma_max: f64,
    /// Smallest singular value above the loose threshold, relative to σ_max.
    pub smallest_kept: f64,
    /// Largest singular value at or below the tight threshold, relative.
    pub largest_dropped: f64,
    #[serde(skip)]
    pub spectrum: Vec<f64>,
}

impl SampleRank {
    fn from_spectrum(index: usize, seed: u64, spectrum: Vec<f64>, tol: Tolerances) -> Self {
        let estimate = numerical_rank(&spectrum, tol);
        let sigma_max = spectrum.first().copied().unwrap_or(0.0);
        let rel = |s: f64| if sigma_max > 0.0 { s / sigma_max } else { 0.0 };
        let smallest_kept = spectrum
            .iter()
            .copied()
            .filter(|&s| s > tol.loose * sigma_max)
            .fold(sigma_max, f64::min);
        let largest_dropped = spectrum
            .iter()
            .copied()
            .filter(|&s| s <= tol.tight * sigma_max)
            .fold(0.0, f64::max);
        Self {
            index,
            seed,
            estimate,
            sigma_max,
            smallest_kept: rel(smallest_kept),
            largest_dropped: rel(largest_dropped),
            spectrum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ConsensusStatus {
    Agreed,
    /// Some sample's rank differs between the two tolerances.
    ToleranceDisagreement {
        samples: Vec<usize>,
    },
    /// Conclusive per-sample ranks that differ across samples.
    SampleDisagreement {
        ranks: Vec<usize>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub mode: Mode,
    pub n: usize,
    pub gate_count: usize,
    pub touched_qubits: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: Vec<SampleRank>,
    pub status: ConsensusStatus,
    pub consensus: Option<usize>,
    /// Number of marked causal slices, when boundaries are set.
    pub lower_bound: Option<usize>,
    /// `min(15R, 9R + 3·touched, cap)`.
    pub upper_bound: u128,
    pub cap: u128,
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
}

impl RankReport {
    pub fn dimension(&self) -> Result<usize, ContractionError> {
        self.consensus
            .ok_or_else(|| ContractionError::Inconclusive(format!("{:?}", self.status)))
    }

    /// True when a consensus exists and satisfies every applicable bound.
    pub fn bounds_hold(&self) -> bool {
        self.consensus.is_some() && self.lower_ok != Some(false) && self.upper_ok != Some(false)
    }

    /// `sample,index,sigma,relative` rows of every sample's spectrum.
    pub fn spectra_csv(&self) -> String {
        let mut out = String::from("sample,index,sigma,relative\n");
        for s in &self.samples {
            for (i, sigma) in s.spectrum.iter().enumerate() {
                let rel = if s.sigma_max > 0.0 {
                    sigma / s.sigma_max
                } else {
                    0.0
                };
                out.push_str(&format!("{},{},{:e},{:e}\n", s.index, i, sigma, rel));
            }
        }
        out
    }
}

/// Count of causal slices among the marked boundaries, if any are marked.
pub fn causal_slice_count(arch: &Architecture) -> Option<usize> {
    arch.boundaries()?;
    Some(
        architecture::slice_sinks(arch)
            .iter()
            .filter(|s| s.is_some())
            .count(),
    )
}

/// Tangent-frame ranks at `samples` independent Haar points, with seeds
/// derived by counter from `seed`. Samples run in parallel; results are
/// merged by sample index so the report does not depend on thread count.
pub fn accessible_dimension(
    arch: &Architecture,
    mode: Mode,
    samples: usize,
    seed: u64,
    config: &ContractionConfig,
) -> Result<RankReport, ContractionError> {
    if samples < 3 {
        return Err(ContractionError::TooFewSamples {
            min: 3,
            got: samples,
        });
    }
    config.check(arch)?;
    let tol = config.tolerances;
    let sample_ranks = (0..samples)
        .into_par_iter()
        .map(|index| {
            let sample_seed = derive_seed(seed, index as u64);
            let gates = GateAssignment::haar(arch.gate_count(), sample_seed);
            let frame = tangent_frame(arch, &gates, mode, config)?;
            Ok(SampleRank::from_spectrum(
                index,
                sample_seed,
                singular_values(&frame.columns),
                tol,
            ))
        })
        .collect::<Result<Vec<_>, ContractionError>>()?;

    let inconclusive: Vec<usize> = sample_ranks
        .iter()
        .filter(|s| s.estimate.value().is_none())
        .map(|s| s.index)
        .collect();
    let ranks: Vec<usize> = sample_ranks
        .iter()
        .filter_map(|s| s.estimate.value())
        .collect();
    let (status, consensus) = if !inconclusive.is_empty() {
        (
            ConsensusStatus::ToleranceDisagreement {
                samples: inconclusive,
            },
            None,
        )
    } else if ranks.windows(2).any(|w| w[0] != w[1]) {
        (ConsensusStatus::SampleDisagreement { ranks }, None)
    } else {
        (ConsensusStatus::Agreed, ranks.first().copied())
    };

    let cap = bounds::saturation_threshold(arch.n() as u32, mode);
    let upper_bound = bounds::dimension_upper_bound_for(arch, mode);
    let lower_bound = causal_slice_count(arch);
    Ok(RankReport {
        mode,
        n: arch.n(),
        gate_count: arch.gate_count(),
        touched_qubits: arch.touched_qubits(),
        seed,
        tolerances: tol,
        samples: sample_ranks,
        status,
        consensus,
        lower_bound,
        upper_bound,
        cap,
        lower_ok: consensus
            .zip(lower_bound)
            .map(|(d, t)| d as u128 >= (t as u128).min(cap)),
        upper_ok: consensus.map(|d| d as u128 <= upper_bound),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WireCheck {
    pub qubit: usize,
    pub earlier_gate: usize,
    pub later_gate: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeReport {
    pub wires: Vec<WireCheck>,
    pub frame_rank: RankEstimate,
    /// `min(15R, 9R + 3·touched)`.
    pub parameter_bound: u128,
    pub residual_tolerance: f64,
    pub pass: bool,
}

pub const GAUGE_RESIDUAL_TOL: f64 = 1e-8;

/// Orthonormal basis of the column space (left singular vectors above the
/// tight threshold).
fn column_basis(m: &DMatrix<f64>, tol: Tolerances) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol.tight * smax)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Relative distance of `v` from the span of an orthonormal `basis`.
pub fn span_residual(basis: &DMatrix<f64>, v: &nalgebra::DVector<f64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let proj = basis * (basis.transpose() * v);
    (v - proj).norm() / norm
}

/// For every wire shared by a gate and the next gate on that wire, the three
/// single-qubit directions inserted after the earlier gate must lie in the
/// span of the later gate's fifteen directions.
pub fn gauge_redundancy_check(
    arch: &Architecture,
    gates: &GateAssignment,
    config: &ContractionConfig,
) -> Result<GaugeReport, ContractionError> {
    let frame = tangent_frame(arch, gates, Mode::Unitary, config)?;
    let mut wires = Vec::new();
    for (g, &(a, b)) in arch.gates().iter().enumerate() {
        for (q, first_slot) in [(a, true), (b, false)] {
            let Some(later) = arch.next_gate_on(q, g) else {
                continue;
            };
            let basis = column_basis(
                &frame.columns.columns(15 * later, 15).into_owned(),
                config.tolerances,
            );
            // σ ⊗ 1 sits at k = 4·rank(σ) − 1, 1 ⊗ σ at k = rank(σ) − 1.
            let max_residual = (1..4)
                .map(|rank| if first_slot { 4 * rank - 1 } else { rank - 1 })
                .map(|k| span_residual(&basis, &frame.columns.column(15 * g + k).into_owned()))
                .fold(0.0, f64::max);
            wires.push(WireCheck {
                qubit: q,
                earlier_gate: g,
                later_gate: later,
                max_residual,
            });
        }
    }
    if wires.is_empty() {
        return Err(ContractionError::NoInternalWire);
    }
    let frame_rank = frame.rank(config.tolerances);
    let parameter_bound = bounds::parameter_count_bound(arch.gate_count(), arch.touched_qubits());
    let pass = wires.iter().all(|w| w.max_residual < GAUGE_RESIDUAL_TOL)
        && frame_rank
            .value()
            .is_some_and(|r| r as u128 <= parameter_bound);
    Ok(GaugeReport {
        wires,
        frame_rank,
        parameter_bound,
        residual_tolerance: GAUGE_RESIDUAL_TOL,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::max_abs_diff;

    fn cfg() -> ContractionConfig {
        ContractionConfig::default()
    }

    #[test]
    fn haar_samples_are_special_unitary() {
        for seed in 0..20 {
            let u = haar_su4(seed);
            let dev = (u.adjoint() * u - Gate4::identity())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12);
            assert!((u.determinant() - ONE).norm() < 1e-12);
        }
        assert!((haar_su4(1) - haar_su4(2)).norm() > 1e-3);
        assert_eq!(haar_su4(5), haar_su4(5));
    }

    #[test]
    fn haar_trace_moment() {
        // E|tr U|² = 1 on U(N) with variance 1 for N ≥ 2.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples = 10_000;
        let mean: f64 = (0..samples)
            .map(|_| haar_u4(&mut rng).trace().norm_sqr())
            .sum::<f64>()
            / samples as f64;
        assert!(
            (mean - 1.0).abs() < 3.0 / (samples as f64).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn contraction_basics() {
        let empty = Architecture::from_gate_sequence(2, vec![], None).unwrap();
        let id = contract(&empty, &GateAssignment::identity(0), &cfg()).unwrap();
        assert!(max_abs_diff(&id, &CMatrix::identity(4, 4)) < 1e-15);
        let psi = contract_state(&empty, &GateAssignment::identity(0), &cfg()).unwrap();
        assert_eq!(psi[0], ONE);

        let one = Architecture::from_gate_sequence(2, vec![(1, 2)], None).unwrap();
        let cnot = crate::pauli_clifford::cnot_matrix();
        let gates = GateAssignment::new(vec![cnot], Provenance::Explicit).unwrap();
        // det(CNOT) = −1, so the special-unitary representative is CNOT up to a phase.
        let f = contract(&one, &gates, &cfg()).unwrap();
        let phase = f[(0, 0)];
        let expect = CMatrix::from_fn(4, 4, |r, c| cnot[(r, c)] * phase);
        assert!(max_abs_diff(&f, &expect) < 1e-12);

        let twice = Architecture::from_gate_sequence(2, vec![(1, 2), (1, 2)], None).unwrap();
        let (u, v) = (haar_su4(1), haar_su4(2));
        let pair = GateAssignment::new(vec![u, v], Provenance::Explicit).unwrap();
        let f = contract(&twice, &pair, &cfg()).unwrap();
        let vu = v * u;
        assert!(max_abs_diff(&f, &CMatrix::from_fn(4, 4, |r, c| vu[(r, c)])) < 1e-12);
    }

    #[test]
    fn hadamard_state() {
        let arch = Architecture::from_gate_sequence(2, vec![(1, 2)], None).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = crate::dense::kron2(
            &crate::dense::Gate2::new(ONE * h, ONE * h, ONE * h, -ONE * h),
            &crate::dense::Gate2::identity(),
        );
        let gates = GateAssignment::new(vec![hadamard], Provenance::Explicit).unwrap();
        let psi = contract_state(&arch, &gates, &cfg()).unwrap();
        // Up to the special-unitary phase: (|00⟩ + |10⟩)/√2.
        let phase = psi[0] / psi[0].norm();
        let expect = [h, 0.0, h, 0.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((psi[i] - phase * *e).norm() < 1e-12);
        }
    }

    #[test]
    fn validation_errors() {
        let arch = Architecture::staircase(3, 1).unwrap();
        assert!(matches!(
            contract(&arch, &GateAssignment::identity(1), &cfg()),
            Err(ContractionError::CountMismatch { .. })
        ));
        let big = Architecture::staircase(9, 1).unwrap();
        assert!(matches!(
            contract(&big, &GateAssignment::identity(8), &cfg()),
            Err(ContractionError::SizeLimit { .. })
        ));
        let not_unitary = Gate4::identity() * C64::new(2.0, 0.0);
        assert!(matches!(
            GateAssignment::new(vec![not_unitary], Provenance::Explicit),
            Err(ContractionError::NotUnitary { .. })
        ));
        assert!(matches!(
            accessible_dimension(&arch, Mode::Unitary, 2, 0, &cfg()),
            Err(ContractionError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn rank_policy() {
        let tol = Tolerances::default();
        assert_eq!(
            numerical_rank(&[1.0, 1e-3, 1e-12], tol),
            RankEstimate::Rank { rank: 2 }
        );
        assert_eq!(
            numerical_rank(&[1.0, 1e-3, 0.0], tol),
            RankEstimate::Rank { rank: 2 }
        );
        assert_eq!(numerical_rank(&[], tol), RankEstimate::Rank { rank: 0 });
        match numerical_rank(&[1.0, 1e-3, 1e-8], tol) {
            RankEstimate::Inconclusive { loose, tight, gap } => {
                assert_eq!((loose, tight), (2, 3));
                assert_eq!(gap, (1e-3, 0.0));
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
        assert_eq!(
            matrix_rank(&DMatrix::zeros(4, 0), tol),
            RankEstimate::Rank { rank: 0 }
        );
    }

    #[test]
    fn single_gate_frame_has_rank_fifteen() {
        let arch = Architecture::from_gate_sequence(2, vec![(1, 2)], None).unwrap();
        let frame =
            tangent_frame(&arch, &GateAssignment::haar(1, 3), Mode::Unitary, &cfg()).unwrap();
        assert_eq!(frame.columns.ncols(), 15);
        assert_eq!(frame.rank(Tolerances::default()).value(), Some(15));
        // Traceless generators: identity row vanishes.
        assert!(frame.columns.row(0).iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn identity_point_frame_counts_embedded_paulis() {
        // At the identity point K_{j,k} is the raw embedded Pauli; the rank is
        // the number of distinct embedded strings.
        let arch = Architecture::staircase(3, 1).unwrap();
        let frame =
            tangent_frame(&arch, &GateAssignment::identity(2), Mode::Unitary, &cfg()).unwrap();
        let mut labels = std::collections::BTreeSet::new();
        for &(a, b) in arch.gates() {
            for (alpha, beta) in dense::two_qubit_pauli_basis() {
                let mut p = crate::PauliString::identity(3);
                p.set(a, alpha);
                p.set(b, beta);
                labels.insert(p.to_string());
            }
        }
        assert_eq!(labels.len(), 27);
        assert_eq!(
            frame.rank(Tolerances::default()).value(),
            Some(labels.len())
        );
    }

    #[test]
    fn sweep_matches_direct_operators() {
        let arch = Architecture::brickwork(4, 1).unwrap();
        let gates = GateAssignment::haar(arch.gate_count(), 17);
        let frame = tangent_frame(&arch, &gates, Mode::Unitary, &cfg()).unwrap();
        let mut coeffs = vec![0.0; 256];
        for (j, k) in [(0, 0), (1, 7), (2, 14)] {
            let op = tangent_operator(&arch, &gates, j, k).unwrap();
            dense::pauli_coefficients(&op, 4, &mut coeffs);
            let col = frame.columns.column(15 * j + k);
            for (i, c) in coeffs.iter().enumerate() {
                assert!((col[i] - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slicing_respects_contraction() {
        let arch = Architecture::staircase(3, 3).unwrap();
        let gates = GateAssignment::haar(arch.gate_count(), 5);
        let whole = contract(&arch, &gates, &cfg()).unwrap();
        let product = arch
            .slice_ranges()
            .into_iter()
            .fold(CMatrix::identity(8, 8), |acc, r| {
                contract_range(&arch, &gates, r) * acc
            });
        assert!(max_abs_diff(&whole, &product) < 1e-9);
        assert!(dense::is_unitary(&whole, 1e-9));
        let psi = contract_state(&arch, &gates, &cfg()).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn seeds_are_reproducible_across_thread_counts() {
        let arch = Architecture::staircase(3, 2).unwrap();
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| accessible_dimension(&arch, Mode::Unitary, 4, 11, &cfg()).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.spectra_csv(), b.spectra_csv());
    }

    #[test]
    fn gauge_checks() {
        let chain = Architecture::from_gate_sequence(3, vec![(1, 2), (2, 3)], None).unwrap();
        let report = gauge_redundancy_check(&chain, &GateAssignment::haar(2, 8), &cfg()).unwrap();
        assert!(report.pass);
        assert_eq!(report.parameter_bound, 27);
        assert!(report.frame_rank.value().unwrap() <= 27);

        let twice = Architecture::from_gate_sequence(2, vec![(1, 2), (1, 2)], None).unwrap();
        let report = gauge_redundancy_check(&twice, &GateAssignment::haar(2, 8), &cfg()).unwrap();
        assert_eq!(report.frame_rank.value(), Some(15));

        let apart = Architecture::from_gate_sequence(4, vec![(1, 2), (3, 4)], None).unwrap();
        assert_eq!(
            gauge_redundancy_check(&apart, &GateAssignment::haar(2, 8), &cfg()).unwrap_err(),
            ContractionError::NoInternalWire
        );
    }
}
