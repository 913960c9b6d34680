//! Circuit architectures: ordered lists of two-qubit gate slots over `n` wires.
//!
//! Qubits are 1-indexed throughout. A gate depends on the most recent earlier
//! gate touching each of its two qubits, so the ordered list induces the DAG
//! and is acyclic by construction. Optional slice boundaries cut the list into
//! contiguous slices (cumulative end indices, the last one equal to `R`).

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchitectureError {
    #[error("qubit count must be positive")]
    NoQubits,
    #[error("gate {index} acts on ({a}, {b}); qubits must be distinct and within [1, {n}]")]
    InvalidQubit {
        index: usize,
        a: usize,
        b: usize,
        n: usize,
    },
    #[error("invalid slice boundaries {boundaries:?}: must be strictly increasing, positive, and end at R = {gates}")]
    InvalidBoundary {
        boundaries: Vec<usize>,
        gates: usize,
    },
    #[error("brickwork needs an even qubit count, got {0}")]
    OddQubitCount(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gate {index} acts on ({a}, {b}), which are not adjacent qubits")]
    NonAdjacentGate { index: usize, a: usize, b: usize },
    #[error("slice {start}..{end} is out of range for {gates} gates")]
    SliceOutOfRange {
        start: usize,
        end: usize,
        gates: usize,
    },
}

/// On-disk form; validated into [`Architecture`] on deserialization.
#[derive(Deserialize)]
struct ArchitectureFile {
    n: usize,
    gates: Vec<(usize, usize)>,
    #[serde(default)]
    boundaries: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ArchitectureFile")]
pub struct Architecture {
    n: usize,
    gates: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundaries: Option<Vec<usize>>,
}

impl TryFrom<ArchitectureFile> for Architecture {
    type Error = ArchitectureError;

    fn try_from(file: ArchitectureFile) -> Result<Self, Self::Error> {
        Architecture::from_gate_sequence(file.n, file.gates, file.boundaries)
    }
}

impl Architecture {
    pub fn from_gate_sequence(
        n: usize,
        gates: Vec<(usize, usize)>,
        boundaries: Option<Vec<usize>>,
    ) -> Result<Self, ArchitectureError> {
        if n == 0 {
            return Err(ArchitectureError::NoQubits);
        }
        for (index, &(a, b)) in gates.iter().enumerate() {
            if a == b || a == 0 || b == 0 || a > n || b > n {
                return Err(ArchitectureError::InvalidQubit { index, a, b, n });
            }
        }
        if let Some(bounds) = &boundaries {
            let increasing = bounds.windows(2).all(|w| w[0] < w[1]);
            let positive = bounds.first().is_none_or(|&first| first > 0);
            let ends_at_r = match bounds.last() {
                Some(&last) => last == gates.len(),
                None => gates.is_empty(),
            };
            if !(increasing && positive && ends_at_r) {
                return Err(ArchitectureError::InvalidBoundary {
                    boundaries: bounds.clone(),
                    gates: gates.len(),
                });
            }
        }
        Ok(Self {
            n,
            gates,
            boundaries,
        })
    }

    /// `slices` repetitions of the stepwise string (1,2),(2,3),…,(n−1,n).
    pub fn staircase(n: usize, slices: usize) -> Result<Self, ArchitectureError> {
        if n < 2 || slices < 1 {
            return Err(ArchitectureError::InvalidParameter(format!(
                "staircase needs n >= 2 and T >= 1, got n = {n}, T = {slices}"
            )));
        }
        let per_slice = n - 1;
        let gates: Vec<_> = (0..slices)
            .flat_map(|_| (1..n).map(|j| (j, j + 1)))
            .collect();
        let boundaries = (1..=slices).map(|s| s * per_slice).collect();
        Self::from_gate_sequence(n, gates, Some(boundaries))
    }

    /// Open-boundary brickwork: each round is the layer (1,2),(3,4),… followed
    /// by the layer (2,3),(4,5),…. Every `n` rounds (2n layers, n(n−1) gates)
    /// close a slice; a trailing partial group forms a final shorter slice.
    pub fn brickwork(n: usize, rounds: usize) -> Result<Self, ArchitectureError> {
        if n % 2 == 1 {
            return Err(ArchitectureError::OddQubitCount(n));
        }
        if n < 2 || rounds < 1 {
            return Err(ArchitectureError::InvalidParameter(format!(
                "brickwork needs n >= 2 and rounds >= 1, got n = {n}, rounds = {rounds}"
            )));
        }
        let mut gates = Vec::new();
        let mut boundaries = Vec::new();
        for round in 1..=rounds {
            gates.extend((1..n).step_by(2).map(|j| (j, j + 1)));
            gates.extend((2..n).step_by(2).map(|j| (j, j + 1)));
            if round % n == 0 || round == rounds {
                boundaries.push(gates.len());
            }
        }
        Self::from_gate_sequence(n, gates, Some(boundaries))
    }

    /// `gate_count` nearest-neighbour gates at positions (j, j+1), j uniform
    /// over [1, n−1], drawn from a ChaCha8 stream seeded with `seed`.
    pub fn random_adjacent(
        n: usize,
        gate_count: usize,
        seed: u64,
    ) -> Result<Self, ArchitectureError> {
        if n < 2 {
            return Err(ArchitectureError::InvalidParameter(format!(
                "random architecture needs n >= 2, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = (0..gate_count)
            .map(|_| {
                let j = rng.random_range(1..n);
                (j, j + 1)
            })
            .collect();
        Self::from_gate_sequence(n, gates, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[(usize, usize)] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn boundaries(&self) -> Option<&[usize]> {
        self.boundaries.as_deref()
    }

    /// Same gates with new boundaries.
    pub fn with_boundaries(
        &self,
        boundaries: Option<Vec<usize>>,
    ) -> Result<Self, ArchitectureError> {
        Self::from_gate_sequence(self.n, self.gates.clone(), boundaries)
    }

    /// Gate-index ranges of the marked slices, or one slice spanning every
    /// gate when no boundaries are set (empty for an empty architecture).
    pub fn slice_ranges(&self) -> Vec<Range<usize>> {
        match &self.boundaries {
            Some(bounds) => {
                let mut start = 0;
                bounds
                    .iter()
                    .map(|&end| {
                        let range = start..end;
                        start = end;
                        range
                    })
                    .collect()
            }
            None if self.gates.is_empty() => Vec::new(),
            #[allow(clippy::single_range_in_vec_init)]
            None => vec![0..self.gates.len()],
        }
    }

    /// Qubits appearing in at least one gate.
    pub fn touched_qubits(&self) -> usize {
        let mut seen = vec![false; self.n + 1];
        for &(a, b) in &self.gates {
            seen[a] = true;
            seen[b] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// DAG predecessors of gate `index`: the latest earlier gate on each of
    /// its two wires, if any.
    pub fn predecessors(&self, index: usize) -> [Option<usize>; 2] {
        let (a, b) = self.gates[index];
        let latest_on = |q: usize| {
            (0..index).rev().find(|&g| {
                let (x, y) = self.gates[g];
                x == q || y == q
            })
        };
        [latest_on(a), latest_on(b)]
    }

    /// For each qubit, the next gate after `index` that touches it, if any.
    pub fn next_gate_on(&self, qubit: usize, after: usize) -> Option<usize> {
        (after + 1..self.gates.len()).find(|&g| {
            let (x, y) = self.gates[g];
            x == qubit || y == qubit
        })
    }

    fn check_range(&self, range: &Range<usize>) -> Result<(), ArchitectureError> {
        if range.start > range.end || range.end > self.gates.len() {
            return Err(ArchitectureError::SliceOutOfRange {
                start: range.start,
                end: range.end,
                gates: self.gates.len(),
            });
        }
        Ok(())
    }
}

/// Qubits whose wires reach `sink` through a directed path of gates inside a
/// slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LightCone {
    pub slice_index: usize,
    pub sink: usize,
    /// `reached[q - 1]` for qubit `q`.
    pub reached: Vec<bool>,
}

impl LightCone {
    pub fn is_complete(&self) -> bool {
        self.reached.iter().all(|&r| r)
    }
}

/// Inverted light cone of `sink` within `range`, by a backward sweep: a qubit
/// joins once it shares a gate with a qubit already known to reach the sink
/// through later gates.
pub fn light_cone(
    arch: &Architecture,
    range: Range<usize>,
    sink: usize,
    slice_index: usize,
) -> Result<LightCone, ArchitectureError> {
    arch.check_range(&range)?;
    if sink == 0 || sink > arch.n {
        return Err(ArchitectureError::InvalidParameter(format!(
            "sink qubit {sink} outside [1, {}]",
            arch.n
        )));
    }
    let mut reached = vec![false; arch.n];
    reached[sink - 1] = true;
    for &(a, b) in arch.gates[range].iter().rev() {
        let joined = reached[a - 1] || reached[b - 1];
        reached[a - 1] |= joined;
        reached[b - 1] |= joined;
    }
    Ok(LightCone {
        slice_index,
        sink,
        reached,
    })
}

/// Smallest sink qubit reachable from every other qubit inside the slice.
pub fn is_causal_slice(
    arch: &Architecture,
    range: Range<usize>,
) -> Result<Option<usize>, ArchitectureError> {
    arch.check_range(&range)?;
    for sink in 1..=arch.n {
        if light_cone(arch, range.clone(), sink, 0)?.is_complete() {
            return Ok(Some(sink));
        }
    }
    Ok(None)
}

/// Sinks of every marked slice, in slice order.
pub fn slice_sinks(arch: &Architecture) -> Vec<Option<usize>> {
    arch.slice_ranges()
        .into_iter()
        .map(|r| is_causal_slice(arch, r).expect("slice ranges are in bounds"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StaircaseBlock {
    pub range: Range<usize>,
    /// `flags[j - 1]` is set when sub-block `j` holds a gate at (j, j+1).
    pub flags: Vec<bool>,
    /// A trailing block shorter than a full slice.
    pub partial: bool,
    pub causal: bool,
}

/// Gates per block for the randomized-architecture analysis: n(n−1)².
pub fn staircase_block_len(n: usize) -> usize {
    n * (n - 1) * (n - 1)
}

/// Cuts a nearest-neighbour gate stream into blocks of n(n−1)² gates, each
/// made of n−1 sub-blocks of n(n−1) gates. A full block whose sub-block `j`
/// contains a gate at position (j, j+1) for every `j` contains a staircase
/// and is flagged causal. Trailing partial blocks are reported, never flagged.
pub fn detect_staircase_slices(
    arch: &Architecture,
) -> Result<Vec<StaircaseBlock>, ArchitectureError> {
    let n = arch.n;
    if n < 2 {
        return Err(ArchitectureError::InvalidParameter(format!(
            "staircase detection needs n >= 2, got {n}"
        )));
    }
    let positions = arch
        .gates
        .iter()
        .enumerate()
        .map(|(index, &(a, b))| {
            if a.abs_diff(b) == 1 {
                Ok(a.min(b))
            } else {
                Err(ArchitectureError::NonAdjacentGate { index, a, b })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let sub_len = n * (n - 1);
    let block_len = staircase_block_len(n);
    let mut blocks = Vec::with_capacity(positions.len().div_ceil(block_len));
    for (b, chunk) in positions.chunks(block_len).enumerate() {
        let start = b * block_len;
        let partial = chunk.len() < block_len;
        let flags: Vec<bool> = (1..n)
            .map(|j| {
                let lo = ((j - 1) * sub_len).min(chunk.len());
                let hi = (j * sub_len).min(chunk.len());
                chunk[lo..hi].contains(&j)
            })
            .collect();
        let causal = !partial && flags.iter().all(|&f| f);
        blocks.push(StaircaseBlock {
            range: start..start + chunk.len(),
            flags,
            partial,
            causal,
        });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_sequence_validation() {
        let arch = Architecture::from_gate_sequence(2, vec![(1, 2)], None).unwrap();
        assert_eq!(arch.gate_count(), 1);
        assert!(matches!(
            Architecture::from_gate_sequence(3, vec![(1, 1)], None),
            Err(ArchitectureError::InvalidQubit { .. })
        ));
        assert!(matches!(
            Architecture::from_gate_sequence(3, vec![(1, 4)], None),
            Err(ArchitectureError::InvalidQubit { .. })
        ));
        let sliced =
            Architecture::from_gate_sequence(4, vec![(1, 2), (3, 4), (2, 3)], Some(vec![3]))
                .unwrap();
        assert_eq!(sliced.slice_ranges(), vec![0..3]);
        for bad in [vec![2, 2, 3], vec![0, 3], vec![2], vec![1, 4]] {
            assert!(matches!(
                Architecture::from_gate_sequence(4, vec![(1, 2), (3, 4), (2, 3)], Some(bad)),
                Err(ArchitectureError::InvalidBoundary { .. })
            ));
        }
    }

    #[test]
    fn staircase_shapes() {
        let a = Architecture::staircase(3, 1).unwrap();
        assert_eq!(a.gates(), &[(1, 2), (2, 3)]);
        let b = Architecture::staircase(2, 5).unwrap();
        assert_eq!(b.gates(), &[(1, 2); 5]);
        let c = Architecture::staircase(4, 3).unwrap();
        assert_eq!(c.gate_count(), 9);
        assert_eq!(c.boundaries(), Some(&[3, 6, 9][..]));
    }

    #[test]
    fn brickwork_layers() {
        let a = Architecture::brickwork(4, 1).unwrap();
        assert_eq!(a.gates(), &[(1, 2), (3, 4), (2, 3)]);
        let b = Architecture::brickwork(4, 8).unwrap();
        assert_eq!(b.boundaries(), Some(&[12, 24][..]));
        assert!(is_causal_slice(&b, 0..12).unwrap().is_some());
        assert_eq!(
            Architecture::brickwork(3, 1),
            Err(ArchitectureError::OddQubitCount(3))
        );
    }

    #[test]
    fn causal_slices() {
        let stairs = Architecture::staircase(4, 1).unwrap();
        assert_eq!(is_causal_slice(&stairs, 0..3).unwrap(), Some(3));
        let single = Architecture::from_gate_sequence(3, vec![(1, 2)], None).unwrap();
        assert_eq!(is_causal_slice(&single, 0..1).unwrap(), None);
        // Both wires of a lone gate see each other; the smallest sink wins.
        let pair = Architecture::from_gate_sequence(2, vec![(1, 2)], None).unwrap();
        assert_eq!(is_causal_slice(&pair, 0..1).unwrap(), Some(1));
        assert!(is_causal_slice(&stairs, 0..4).is_err());
    }

    #[test]
    fn light_cone_marks_sink() {
        let arch = Architecture::from_gate_sequence(3, vec![(2, 3)], None).unwrap();
        let cone = light_cone(&arch, 0..1, 3, 0).unwrap();
        assert_eq!(cone.reached, vec![false, true, true]);
        assert!(!cone.is_complete());
    }

    #[test]
    fn staircase_minimal_slice_size() {
        for n in 3..7 {
            let arch = Architecture::staircase(n, 2).unwrap();
            let gates = arch.gate_count();
            for start in 0..gates {
                for end in start..(start + n - 1).min(gates + 1) {
                    assert_eq!(is_causal_slice(&arch, start..end).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn random_adjacent_edges() {
        let a = Architecture::random_adjacent(2, 10, 3).unwrap();
        assert!(a.gates().iter().all(|&g| g == (1, 2)));
        assert_eq!(
            Architecture::random_adjacent(5, 0, 3).unwrap().gate_count(),
            0
        );
        assert_eq!(
            Architecture::random_adjacent(5, 50, 9).unwrap(),
            Architecture::random_adjacent(5, 50, 9).unwrap()
        );
    }

    #[test]
    fn random_adjacent_is_uniform() {
        let draws = 10_000;
        let arch = Architecture::random_adjacent(5, draws, 2024).unwrap();
        let mut counts = [0usize; 4];
        for &(a, _) in arch.gates() {
            counts[a - 1] += 1;
        }
        let p = 0.25;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - draws as f64 * p).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn staircase_detection() {
        let two = Architecture::random_adjacent(2, 7, 1).unwrap();
        let blocks = detect_staircase_slices(&two).unwrap();
        assert_eq!(blocks.len(), 4);
        assert!(blocks[..3].iter().all(|b| b.causal));
        assert!(blocks[3].partial && !blocks[3].causal);

        // n = 3: L = 12, sub-blocks of 6 gates. Sub-block 2 never hits (2,3).
        let mut gates = vec![(1, 2); 6];
        gates.extend(vec![(1, 2); 6]);
        let arch = Architecture::from_gate_sequence(3, gates, None).unwrap();
        let blocks = detect_staircase_slices(&arch).unwrap();
        assert_eq!(blocks[0].flags, vec![true, false]);
        assert!(!blocks[0].causal);

        let skewed = Architecture::from_gate_sequence(3, vec![(1, 3)], None).unwrap();
        assert!(matches!(
            detect_staircase_slices(&skewed),
            Err(ArchitectureError::NonAdjacentGate { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let arch = Architecture::staircase(3, 2).unwrap();
        let text = serde_json::to_string(&arch).unwrap();
        assert_eq!(
            text,
            r#"{"n":3,"gates":[[1,2],[2,3],[1,2],[2,3]],"boundaries":[2,4]}"#
        );
        let back: Architecture = serde_json::from_str(&text).unwrap();
        assert_eq!(back, arch);
        let bare: Architecture = serde_json::from_str(r#"{"n":2,"gates":[[2,1]]}"#).unwrap();
        assert_eq!(bare.boundaries(), None);
        assert!(serde_json::from_str::<Architecture>(r#"{"n":2,"gates":[[2,2]]}"#).is_err());
    }
}
