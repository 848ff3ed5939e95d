//! Two-phase Margolus block rules.
//!
//! A rule is a pair of permutations of the `k^B` block words, one for the
//! even phase and one for the odd phase. Block cells are ordered by the
//! canonical offsets of [`BlockShape`]; word indices are base `k` with the
//! first block cell most significant.

mod dsl;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::engine::Phase;
use crate::error::{Error, Result};
use crate::lattice::Alphabet;

pub use dsl::{parse_rule, parse_rule_document, RuleDocument, UnitaryBlock};

/// Largest block table (`k^B` entries) we are willing to materialize.
pub const MAX_TABLE: usize = 1 << 20;

/// Cell ordering inside a `2 x ... x 2` block: the `2^d` binary offsets with
/// the first axis varying fastest, e.g. `(0,0) (1,0) (0,1) (1,1)` in 2D.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockShape {
    dim: usize,
    offsets: Vec<Vec<usize>>,
}

impl BlockShape {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > 4 {
            return Err(Error::TooLarge(format!("block dimension {dim} not in 1..=4")));
        }
        let offsets = (0..1usize << dim)
            .map(|i| (0..dim).map(|axis| (i >> axis) & 1).collect())
            .collect();
        Ok(BlockShape { dim, offsets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells per block, `2^d`.
    pub fn cells(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[Vec<usize>] {
        &self.offsets
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockRule {
    alphabet: Arc<Alphabet>,
    shape: BlockShape,
    even: Vec<u32>,
    odd: Vec<u32>,
}

/// Cycle structure of one phase permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSummary {
    pub fixed_points: usize,
    /// cycle length -> number of cycles
    pub cycles: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub words: usize,
    pub even: PhaseSummary,
    pub odd: PhaseSummary,
}

fn table_size(k: usize, cells: usize) -> Result<usize> {
    let mut size = 1usize;
    for _ in 0..cells {
        size = size.saturating_mul(k);
    }
    if size > MAX_TABLE {
        return Err(Error::TooLarge(format!(
            "block table with {k}^{cells} words exceeds {MAX_TABLE}"
        )));
    }
    Ok(size)
}

impl BlockRule {
    /// Builds a rule from explicit tables. Only totality is checked here;
    /// use [`BlockRule::validate`] for bijectivity.
    pub fn from_tables(alphabet: Arc<Alphabet>, dim: usize, even: Vec<u32>, odd: Vec<u32>) -> Result<Self> {
        let shape = BlockShape::new(dim)?;
        let size = table_size(alphabet.size(), shape.cells())?;
        for table in [&even, &odd] {
            if table.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: table.len(),
                });
            }
            if let Some(&bad) = table.iter().find(|&&w| w as usize >= size) {
                return Err(Error::TooLarge(format!("image word {bad} out of range")));
            }
        }
        Ok(BlockRule {
            alphabet,
            shape,
            even,
            odd,
        })
    }

    pub fn identity(alphabet: Arc<Alphabet>, dim: usize) -> Result<Self> {
        let shape = BlockShape::new(dim)?;
        let size = table_size(alphabet.size(), shape.cells())?;
        let id: Vec<u32> = (0..size as u32).collect();
        BlockRule::from_tables(alphabet, dim, id.clone(), id)
    }

    /// Builds both phase tables from word functions.
    pub fn from_fns<E, O>(alphabet: Arc<Alphabet>, dim: usize, even: E, odd: O) -> Result<Self>
    where
        E: Fn(&[u8]) -> Vec<u8>,
        O: Fn(&[u8]) -> Vec<u8>,
    {
        let shape = BlockShape::new(dim)?;
        let k = alphabet.size();
        let size = table_size(k, shape.cells())?;
        let build = |f: &dyn Fn(&[u8]) -> Vec<u8>| -> Vec<u32> {
            (0..size as u64)
                .map(|w| {
                    let word = crate::lattice::decode_word(w, k, shape.cells());
                    crate::lattice::encode_word(&f(&word), k) as u32
                })
                .collect()
        };
        let even = build(&even);
        let odd = build(&odd);
        BlockRule::from_tables(alphabet, dim, even, odd)
    }

    /// Flips every cell of every block in both phases (binary alphabets).
    pub fn complement(dim: usize) -> Result<Self> {
        let flip = |w: &[u8]| w.iter().map(|&s| 1 - s).collect::<Vec<u8>>();
        BlockRule::from_fns(Arc::new(Alphabet::binary()), dim, flip, flip)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    /// `k^B`.
    pub fn words(&self) -> usize {
        self.even.len()
    }

    pub fn table(&self, phase: Phase) -> &[u32] {
        match phase {
            Phase::Even => &self.even,
            Phase::Odd => &self.odd,
        }
    }

    pub fn decode(&self, word: u32) -> Vec<u8> {
        crate::lattice::decode_word(word as u64, self.alphabet.size(), self.shape.cells())
    }

    pub fn encode(&self, word: &[u8]) -> u32 {
        crate::lattice::encode_word(word, self.alphabet.size()) as u32
    }

    pub fn render(&self, word: u32) -> String {
        self.alphabet.render_word(&self.decode(word))
    }

    fn check_phase(&self, phase: Phase) -> Result<PhaseSummary> {
        let table = self.table(phase);
        let mut preimage: Vec<Option<u32>> = vec![None; table.len()];
        for (w, &img) in table.iter().enumerate() {
            if let Some(prev) = preimage[img as usize] {
                return Err(Error::NonBijective {
                    phase: phase.to_string(),
                    first: self.render(prev),
                    second: self.render(w as u32),
                    image: self.render(img),
                });
            }
            preimage[img as usize] = Some(w as u32);
        }
        let mut seen = vec![false; table.len()];
        let mut cycles = BTreeMap::new();
        for start in 0..table.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut w = start;
            while !seen[w] {
                seen[w] = true;
                w = table[w] as usize;
                len += 1;
            }
            *cycles.entry(len).or_insert(0) += 1;
        }
        Ok(PhaseSummary {
            fixed_points: cycles.get(&1).copied().unwrap_or(0),
            cycles,
        })
    }

    /// Confirms both phase maps are bijections and summarizes their cycles.
    pub fn validate(&self) -> Result<ValidationReport> {
        Ok(ValidationReport {
            words: self.words(),
            even: self.check_phase(Phase::Even)?,
            odd: self.check_phase(Phase::Odd)?,
        })
    }

    /// The rule whose phase maps are the inverse permutations.
    pub fn invert(&self) -> Result<BlockRule> {
        self.validate()?;
        let inv = |t: &[u32]| {
            let mut out = vec![0u32; t.len()];
            for (w, &img) in t.iter().enumerate() {
                out[img as usize] = w as u32;
            }
            out
        };
        Ok(BlockRule {
            alphabet: self.alphabet.clone(),
            shape: self.shape.clone(),
            even: inv(&self.even),
            odd: inv(&self.odd),
        })
    }

    /// Canonical DSL text; `parse_rule(emit())` reproduces `self`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet: {}", self.alphabet.symbols().join(" "));
        let _ = writeln!(out, "quiescent: {}", self.alphabet.label(self.alphabet.quiescent()));
        let _ = writeln!(out, "dim: {}", self.shape.dim);
        let mappings = |name: &str, table: &[u32], out: &mut String| {
            for (w, &img) in table.iter().enumerate() {
                if w as u32 != img {
                    let _ = writeln!(out, "{name}: {} -> {}", self.render(w as u32), self.render(img));
                }
            }
        };
        mappings("even", &self.even, &mut out);
        let even_is_identity = self.even.iter().enumerate().all(|(w, &i)| w as u32 == i);
        if self.odd == self.even && !even_is_identity {
            out.push_str("odd: same\n");
        } else {
            mappings("odd", &self.odd, &mut out);
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.emit().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> Arc<Alphabet> {
        Arc::new(Alphabet::binary())
    }

    #[test]
    fn shape_offsets_run_first_axis_fastest() {
        let s = BlockShape::new(2).unwrap();
        assert_eq!(s.offsets(), &[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(BlockShape::new(1).unwrap().cells(), 2);
        assert_eq!(BlockShape::new(3).unwrap().cells(), 8);
    }

    #[test]
    fn identity_is_valid_with_unit_cycles() {
        let r = BlockRule::identity(binary(), 2).unwrap();
        let report = r.validate().unwrap();
        assert_eq!(report.words, 16);
        assert_eq!(report.even.fixed_points, 16);
        assert_eq!(report.even.cycles, BTreeMap::from([(1, 16)]));
        assert_eq!(r.invert().unwrap(), r);
    }

    #[test]
    fn complement_is_an_involution() {
        let r = BlockRule::complement(2).unwrap();
        let report = r.validate().unwrap();
        assert_eq!(report.even.cycles, BTreeMap::from([(2, 8)]));
        assert_eq!(report.odd.cycles, BTreeMap::from([(2, 8)]));
        assert_eq!(r.invert().unwrap(), r);
    }

    #[test]
    fn constant_rule_is_rejected() {
        let zero = |w: &[u8]| vec![0u8; w.len()];
        let r = BlockRule::from_fns(binary(), 2, zero, zero).unwrap();
        match r.validate() {
            Err(Error::NonBijective { phase, image, .. }) => {
                assert_eq!(phase, "even");
                assert_eq!(image, "0 0 0 0");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.invert().is_err());
    }

    #[test]
    fn inverse_of_three_cycle_is_its_square() {
        // 0001 -> 0010 -> 0100 -> 0001
        let mut even: Vec<u32> = (0..16).collect();
        even[1] = 2;
        even[2] = 4;
        even[4] = 1;
        let id: Vec<u32> = (0..16).collect();
        let r = BlockRule::from_tables(binary(), 2, even.clone(), id.clone()).unwrap();
        let squared: Vec<u32> = (0..16).map(|w| even[even[w] as usize]).collect();
        let inv = r.invert().unwrap();
        assert_eq!(inv.table(Phase::Even), squared.as_slice());
        assert_eq!(inv.table(Phase::Odd), id.as_slice());
        assert_eq!(inv.invert().unwrap(), r);
        assert_eq!(r.validate().unwrap().even.cycles, BTreeMap::from([(1, 13), (3, 1)]));
    }

    #[test]
    fn totality_is_checked() {
        assert!(BlockRule::from_tables(binary(), 2, vec![0; 15], vec![0; 16]).is_err());
        assert!(BlockRule::from_tables(binary(), 2, vec![16; 16], (0..16).collect()).is_err());
        let big = Arc::new(Alphabet::new((0..16).map(|i| i.to_string()).collect(), 0).unwrap());
        assert!(matches!(BlockRule::identity(big, 3), Err(Error::TooLarge(_))));
    }

    #[test]
    fn hash_is_stable_and_distinguishes_rules() {
        let a = BlockRule::identity(binary(), 2).unwrap();
        let b = BlockRule::complement(2).unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
