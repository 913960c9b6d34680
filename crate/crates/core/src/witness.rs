//! All-Clifford witness points whose Jacobian rank is at least the number
//! of causal slices.
//!
//! Each slice `j` gets a Clifford `C_j` that routes a chosen Pauli `Q_j` onto
//! `Z_t`. Perturbing the slice's last gate on `t` along `Z_t` then moves the
//! contracted unitary along `(C_T ⋯ C_{j+1}) Z_t (C_T ⋯ C_{j+1})†`, and the
//! choice of `Q_j` keeps these directions pairwise distinct Pauli strings.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{self, Architecture, ArchitectureError};
use crate::bounds;
use crate::contraction::{
    self, ContractionConfig, ContractionError, GateAssignment, Provenance, RankEstimate,
};
use crate::pauli_clifford::{
    normalize_to_z, routing_clifford_2q, CliffordCircuit, CliffordError, Pauli, PauliKey,
    PauliString,
};
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("slice {slice} is not causal")]
    NotCausal { slice: usize },
    #[error("{slices} slices exceed the {mode} threshold (limit {limit})")]
    TooManySlices {
        slices: usize,
        limit: u128,
        mode: Mode,
    },
    #[error("the identity cannot be routed to Z")]
    TrivialPauli,
    #[error("Pauli on {got} qubits does not fit a {n}-qubit slice")]
    NotOnSlice { n: usize, got: usize },
    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),
    #[error(transparent)]
    Architecture(#[from] ArchitectureError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

/// One hop of a qubit's path: at gate `gate` the qubit hands its Pauli
/// factor to `parent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub gate: usize,
    pub parent: usize,
}

/// In-tree of gate paths from every qubit to the sink within one slice.
///
/// Built by a backward sweep: walking the slice from its last gate, a qubit
/// joins the tree at the latest gate it shares with a qubit already in the
/// tree. Each gate carries at most one hop and every path runs forward in
/// time, so paths that meet stay merged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathTree {
    pub range: Range<usize>,
    pub sink: usize,
    /// `hops[q - 1]`, `None` for the sink.
    pub hops: Vec<Option<Hop>>,
}

impl PathTree {
    pub fn n(&self) -> usize {
        self.hops.len()
    }

    /// Gate indices along `qubit`'s path, ending at the sink.
    pub fn path(&self, qubit: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut q = qubit;
        while let Some(hop) = self.hops[q - 1] {
            out.push(hop.gate);
            q = hop.parent;
        }
        out
    }

    /// The qubit hopping at `gate`, if any.
    pub fn hop_at(&self, gate: usize) -> Option<(usize, Hop)> {
        self.hops
            .iter()
            .enumerate()
            .find_map(|(i, h)| h.filter(|h| h.gate == gate).map(|h| (i + 1, h)))
    }
}

pub fn build_path_tree(
    arch: &Architecture,
    range: Range<usize>,
    sink: usize,
) -> Result<PathTree, WitnessError> {
    let cone = architecture::light_cone(arch, range.clone(), sink, 0)?;
    if !cone.is_complete() {
        return Err(WitnessError::NotCausal { slice: 0 });
    }
    let n = arch.n();
    let mut reached = vec![false; n];
    reached[sink - 1] = true;
    let mut hops = vec![None; n];
    for g in range.clone().rev() {
        let (a, b) = arch.gates()[g];
        match (reached[a - 1], reached[b - 1]) {
            (false, true) => {
                hops[a - 1] = Some(Hop { gate: g, parent: b });
                reached[a - 1] = true;
            }
            (true, false) => {
                hops[b - 1] = Some(Hop { gate: g, parent: a });
                reached[b - 1] = true;
            }
            _ => {}
        }
    }
    Ok(PathTree { range, sink, hops })
}

/// Routing of one Pauli through one slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRouting {
    /// Two-qubit circuit per slice gate in the gate's own labels (1 = first
    /// wire); empty for identity.
    pub circuits: Vec<CliffordCircuit>,
    /// Last gate of the slice touching the sink, carrying the final `±σ → Z`
    /// fix-up and the witness perturbation.
    pub insertion_gate: usize,
    pub insertion_is_final: bool,
}

/// Conjugates `p` through gate `g` of the architecture with a gate-local
/// two-qubit circuit.
fn conjugate_local(p: &mut PauliString, wires: (usize, usize), circuit: &CliffordCircuit) {
    let global = circuit.relabeled(p.num_qubits(), |q| if q == 1 { wires.0 } else { wires.1 });
    global.conjugate_in_place(p);
}

fn conjugate_inverse_local(p: &mut PauliString, wires: (usize, usize), circuit: &CliffordCircuit) {
    let global = circuit.relabeled(p.num_qubits(), |q| if q == 1 { wires.0 } else { wires.1 });
    global.conjugate_inverse_in_place(p);
}

/// Clifford per slice gate with `C P C† = +Z_sink`.
///
/// Gates are visited in order; at a hop gate whose moving qubit still holds a
/// nontrivial factor, the two-qubit routing gadget empties that qubit and
/// leaves a `Z` on its parent. Qubits never regain a factor after their hop,
/// so only the sink survives, and a single-qubit fix-up clears its sign.
pub fn route_pauli_through_slice(
    arch: &Architecture,
    tree: &PathTree,
    p: &PauliString,
) -> Result<SliceRouting, WitnessError> {
    if p.num_qubits() != arch.n() {
        return Err(WitnessError::NotOnSlice {
            n: arch.n(),
            got: p.num_qubits(),
        });
    }
    if p.is_identity() {
        return Err(WitnessError::TrivialPauli);
    }
    let mut current = p.clone();
    let mut circuits = Vec::with_capacity(tree.range.len());
    for g in tree.range.clone() {
        let wires = arch.gates()[g];
        let mut circuit = CliffordCircuit::new(2);
        if let Some((q, hop)) = tree.hop_at(g) {
            if current.get(q) != Pauli::I {
                let pair = PauliString::from_paulis(&[current.get(q), current.get(hop.parent)]);
                let routed = routing_clifford_2q(&pair)?;
                circuit = if q == wires.0 {
                    routed
                } else {
                    routed.relabeled(2, |l| 3 - l)
                };
            }
        }
        conjugate_local(&mut current, wires, &circuit);
        circuits.push(circuit);
    }

    let t = tree.sink;
    let insertion_gate = tree
        .range
        .clone()
        .rev()
        .find(|&g| {
            let (a, b) = arch.gates()[g];
            a == t || b == t
        })
        .ok_or(WitnessError::NotCausal { slice: 0 })?;
    let target = PauliString::single(arch.n(), t, Pauli::Z);
    if current != target {
        debug_assert_eq!(current.weight(), 1);
        let (a, _) = arch.gates()[insertion_gate];
        let local = if t == a { 1 } else { 2 };
        let fix = normalize_to_z(current.get(t), current.phase_exp() == 2, local);
        let slot = &mut circuits[insertion_gate - tree.range.start];
        let fix = CliffordCircuit { n: 2, gates: fix };
        conjugate_local(&mut current, arch.gates()[insertion_gate], &fix);
        slot.extend(&fix);
    }
    debug_assert_eq!(current, target);
    Ok(SliceRouting {
        circuits,
        insertion_gate,
        insertion_is_final: insertion_gate + 1 == tree.range.end,
    })
}

/// `(bitstring, phase parity)` with `P|0^n⟩ = i^κ |x⟩` and parity `κ mod 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateDirection {
    /// Qubit 1 first.
    pub bits: String,
    pub parity: u8,
}

impl StateDirection {
    fn of(p: &PauliString) -> Self {
        let bits = (1..=p.num_qubits())
            .map(|q| {
                if matches!(p.get(q), Pauli::X | Pauli::Y) {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        let kappa = (p.phase_exp() as usize + p.y_count()) % 4;
        Self {
            bits,
            parity: (kappa % 2) as u8,
        }
    }

    /// The `m`-th pair in `(0…0, 0), (0…01, 0), (0…01, 1), (0…10, 0), …`.
    /// `(0…0, 1)` is unreachable by a Hermitian Pauli and skipped.
    fn nth(m: u64) -> (u64, u8) {
        if m == 0 {
            (0, 0)
        } else {
            (m.div_ceil(2), ((m + 1) % 2) as u8)
        }
    }

    /// Hermitian Pauli with this pair, as a function of the integer form of
    /// the bitstring (qubit 1 most significant).
    fn representative(n: usize, x: u64, parity: u8) -> PauliString {
        if x == 0 {
            return PauliString::single(n, n, Pauli::Z);
        }
        let mut p = PauliString::identity(n);
        let mut last = 0;
        for q in 1..=n {
            if x >> (n - q) & 1 == 1 {
                p.set(q, Pauli::X);
                last = q;
            }
        }
        if parity == 1 {
            p.set(last, Pauli::Y);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "directions", rename_all = "lowercase")]
pub enum Directions {
    Unitary(Vec<PauliString>),
    State(Vec<StateDirection>),
}

impl Directions {
    pub fn len(&self) -> usize {
        match self {
            Directions::Unitary(d) => d.len(),
            Directions::State(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> Mode {
        match self {
            Directions::Unitary(_) => Mode::Unitary,
            Directions::State(_) => Mode::State,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub range: Range<usize>,
    pub sink: usize,
    pub insertion_gate: usize,
    pub insertion_is_final: bool,
    /// The Pauli routed to `Z_sink` by this slice.
    pub chosen: PauliString,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub n: usize,
    /// Gate-local Clifford per architecture vertex.
    pub circuits: Vec<CliffordCircuit>,
    pub slices: Vec<SliceRecord>,
    pub directions: Directions,
}

impl WitnessCertificate {
    pub fn mode(&self) -> Mode {
        self.directions.mode()
    }

    pub fn gate_assignment(&self) -> GateAssignment {
        let gates = self.circuits.iter().map(|c| c.to_gate4()).collect();
        GateAssignment::new(gates, Provenance::CliffordWitness).expect("Clifford gates are unitary")
    }

    /// Generator index of `Z` on `sink` at its insertion gate.
    pub fn generator_for(&self, arch: &Architecture, slice: usize) -> usize {
        let record = &self.slices[slice];
        let (a, _) = arch.gates()[record.insertion_gate];
        // Z ⊗ 1 is generator 11, 1 ⊗ Z is generator 2.
        if a == record.sink {
            11
        } else {
            2
        }
    }
}

fn causal_slices(arch: &Architecture) -> Result<Vec<(Range<usize>, usize)>, WitnessError> {
    arch.slice_ranges()
        .into_iter()
        .zip(architecture::slice_sinks(arch))
        .enumerate()
        .map(|(i, (range, sink))| {
            sink.map(|t| (range, t))
                .ok_or(WitnessError::NotCausal { slice: i })
        })
        .collect()
}

fn check_threshold(n: usize, slices: usize, mode: Mode) -> Result<(), WitnessError> {
    let limit = bounds::saturation_threshold(n as u32, mode);
    let ok = match mode {
        Mode::Unitary => slices as u128 <= limit,
        Mode::State => (slices as u128) < limit,
    };
    if ok {
        Ok(())
    } else {
        Err(WitnessError::TooManySlices {
            slices,
            limit,
            mode,
        })
    }
}

/// Builds the witness certificate for an architecture whose marked slices
/// are all causal.
pub fn witness_point(arch: &Architecture, mode: Mode) -> Result<WitnessCertificate, WitnessError> {
    let slices = causal_slices(arch)?;
    check_threshold(arch.n(), slices.len(), mode)?;
    let n = arch.n();
    let mut circuits = vec![CliffordCircuit::new(2); arch.gate_count()];
    let mut records = Vec::with_capacity(slices.len());
    let mut unitary_dirs: Vec<PauliString> = Vec::new();
    let mut used: BTreeSet<PauliKey> = BTreeSet::new();
    let mut state_dirs: Vec<StateDirection> = Vec::new();
    let mut next_lex = 1u64;

    for (j, (range, sink)) in slices.into_iter().enumerate() {
        let chosen = match mode {
            Mode::Unitary => {
                while used.contains(&PauliString::nth_lexicographic(n, next_lex).key()) {
                    next_lex += 1;
                }
                PauliString::nth_lexicographic(n, next_lex)
            }
            Mode::State => {
                let (x, parity) = StateDirection::nth(j as u64);
                let mut q = StateDirection::representative(n, x, parity);
                // Q = V P' V† with V the gates before this slice.
                for (wires, c) in arch.gates()[..range.start].iter().zip(&circuits) {
                    conjugate_local(&mut q, *wires, c);
                }
                q
            }
        };
        let tree = build_path_tree(arch, range.clone(), sink).map_err(|e| match e {
            WitnessError::NotCausal { .. } => WitnessError::NotCausal { slice: j },
            e => e,
        })?;
        let routing = route_pauli_through_slice(arch, &tree, &chosen)?;
        for (offset, c) in routing.circuits.into_iter().enumerate() {
            circuits[range.start + offset] = c;
        }
        match mode {
            Mode::Unitary => {
                used.clear();
                for d in unitary_dirs.iter_mut() {
                    for g in range.clone() {
                        conjugate_local(d, arch.gates()[g], &circuits[g]);
                    }
                    used.insert(d.key());
                }
                let z = PauliString::single(n, sink, Pauli::Z);
                used.insert(z.key());
                unitary_dirs.push(z);
                next_lex = 1;
            }
            Mode::State => {
                let mut pulled = PauliString::single(n, sink, Pauli::Z);
                for g in (0..=routing.insertion_gate).rev() {
                    conjugate_inverse_local(&mut pulled, arch.gates()[g], &circuits[g]);
                }
                state_dirs.push(StateDirection::of(&pulled));
            }
        }
        records.push(SliceRecord {
            range,
            sink,
            insertion_gate: routing.insertion_gate,
            insertion_is_final: routing.insertion_is_final,
            chosen,
        });
    }
    let directions = match mode {
        Mode::Unitary => Directions::Unitary(unitary_dirs),
        Mode::State => Directions::State(state_dirs),
    };
    Ok(WitnessCertificate {
        n,
        circuits,
        slices: records,
        directions,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub slices: usize,
    pub rank: RankEstimate,
    pub pass: bool,
}

/// Independently recomputes every routing and direction, then checks the
/// numerical rank at the witness point is at least the slice count.
pub fn verify_certificate(
    cert: &WitnessCertificate,
    arch: &Architecture,
    config: &ContractionConfig,
) -> Result<Verdict, WitnessError> {
    let mismatch = |msg: String| Err(WitnessError::CertificateMismatch(msg));
    let n = arch.n();
    if cert.n != n || cert.circuits.len() != arch.gate_count() {
        return mismatch(format!(
            "certificate shape does not fit {n} qubits / {} gates",
            arch.gate_count()
        ));
    }
    let slices = causal_slices(arch)?;
    if slices.len() != cert.slices.len() || slices.len() != cert.directions.len() {
        return mismatch(format!(
            "{} slices, {} records",
            slices.len(),
            cert.slices.len()
        ));
    }
    for (g, c) in cert.circuits.iter().enumerate() {
        if c.n != 2 || c.validate().is_err() {
            return mismatch(format!("gate {g} circuit is not a two-qubit Clifford"));
        }
    }
    // Gates outside every slice must be identity.
    let covered: usize = slices.iter().map(|(r, _)| r.len()).sum();
    if covered != arch.gate_count() {
        for g in slices.last().map_or(0, |(r, _)| r.end)..arch.gate_count() {
            if !cert.circuits[g].is_empty() {
                return mismatch(format!(
                    "gate {g} lies outside every slice but is not identity"
                ));
            }
        }
    }

    for (j, ((range, sink), record)) in slices.iter().zip(&cert.slices).enumerate() {
        if record.range != *range || record.sink != *sink {
            return mismatch(format!("slice {j} range or sink differs"));
        }
        let mut routed = record.chosen.clone();
        for g in range.clone() {
            conjugate_local(&mut routed, arch.gates()[g], &cert.circuits[g]);
        }
        if routed != PauliString::single(n, *sink, Pauli::Z) {
            return mismatch(format!("slice {j} routes {} to {routed}", record.chosen));
        }
        let (a, b) = arch.gates()[record.insertion_gate];
        let touches_after = (record.insertion_gate + 1..range.end).any(|g| {
            let (x, y) = arch.gates()[g];
            x == *sink || y == *sink
        });
        if !range.contains(&record.insertion_gate) || (a != *sink && b != *sink) || touches_after {
            return mismatch(format!(
                "slice {j} insertion gate is not the last gate on qubit {sink}"
            ));
        }
    }

    match &cert.directions {
        Directions::Unitary(stored) => {
            let mut keys = BTreeSet::new();
            for (j, record) in cert.slices.iter().enumerate() {
                let mut d = PauliString::single(n, record.sink, Pauli::Z);
                for g in record.insertion_gate + 1..arch.gate_count() {
                    conjugate_local(&mut d, arch.gates()[g], &cert.circuits[g]);
                }
                if d != stored[j] {
                    return mismatch(format!(
                        "direction {j}: stored {}, recomputed {d}",
                        stored[j]
                    ));
                }
                if !keys.insert(d.key()) {
                    return mismatch(format!("direction {j} repeats an earlier direction"));
                }
            }
        }
        Directions::State(stored) => {
            let mut seen = BTreeSet::new();
            for (j, record) in cert.slices.iter().enumerate() {
                let mut p = PauliString::single(n, record.sink, Pauli::Z);
                for g in (0..=record.insertion_gate).rev() {
                    conjugate_inverse_local(&mut p, arch.gates()[g], &cert.circuits[g]);
                }
                let d = StateDirection::of(&p);
                if d != stored[j] {
                    return mismatch(format!(
                        "state direction {j}: stored {:?}, recomputed {d:?}",
                        stored[j]
                    ));
                }
                if !seen.insert(d) {
                    return mismatch(format!("state direction {j} repeats an earlier pair"));
                }
            }
        }
    }

    let gates = cert.gate_assignment();
    let frame = contraction::tangent_frame(arch, &gates, cert.mode(), config)?;
    let rank = frame.rank(config.tolerances);
    let pass = rank.value().is_some_and(|r| r >= cert.slices.len());
    Ok(Verdict {
        slices: cert.slices.len(),
        rank,
        pass,
    })
}

/// The witness's gate-local circuits placed on their wires as one
/// `n`-qubit circuit.
pub fn global_circuit(cert: &WitnessCertificate, arch: &Architecture) -> CliffordCircuit {
    let n = arch.n();
    let mut global = CliffordCircuit::new(n);
    for (g, c) in cert.circuits.iter().enumerate() {
        let (a, b) = arch.gates()[g];
        global.extend(&c.relabeled(n, |l| if l == 1 { a } else { b }));
    }
    global
}

/// Whether conjugating every `X_q`, `Z_q` by the dense contracted witness
/// unitary yields the Pauli string predicted by the tableau.
pub fn contracted_is_clifford(cert: &WitnessCertificate, arch: &Architecture) -> bool {
    let n = arch.n();
    let global = global_circuit(cert, arch);
    let u = global.to_unitary();
    (1..=n).all(|q| {
        [Pauli::X, Pauli::Z].into_iter().all(|s| {
            let p = PauliString::single(n, q, s);
            let image = global.conjugate(&p).expect("sizes agree");
            crate::pauli_clifford::dense_conjugation_matches(&u, &p, &image, 1e-9)
        })
    })
}
