use std::fmt;
use std::sync::Arc;

use super::{Alphabet, Cell, PackedCells, Region, Torus};
use crate::error::{Error, Result};

/// A total assignment of symbols to the cells of a torus.
///
/// Configurations are values: every operation returns a new configuration.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    torus: Torus,
    alphabet: Arc<Alphabet>,
    cells: PackedCells,
}

impl Configuration {
    /// The all-quiescent configuration.
    pub fn uniform(torus: Torus, alphabet: Arc<Alphabet>) -> Self {
        let cells = PackedCells::new(
            alphabet.bits_per_cell(),
            torus.num_cells(),
            alphabet.quiescent(),
        );
        Configuration {
            torus,
            alphabet,
            cells,
        }
    }

    /// Sparse constructor; unassigned cells hold the quiescent symbol.
    pub fn from_assignments<'a, I>(torus: Torus, alphabet: Arc<Alphabet>, assignments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Cell, usize)>,
    {
        let mut c = Configuration::uniform(torus, alphabet);
        for (cell, symbol) in assignments {
            let idx = c.torus.index_of(cell)?;
            let s = c.alphabet.check_symbol(symbol)?;
            c.cells.set(idx, s);
        }
        Ok(c)
    }

    /// Dense constructor from symbol indices in linear torus order.
    pub fn from_values(torus: Torus, alphabet: Arc<Alphabet>, values: &[u8]) -> Result<Self> {
        if values.len() != torus.num_cells() {
            return Err(Error::DimensionMismatch {
                expected: torus.num_cells(),
                got: values.len(),
            });
        }
        for &v in values {
            alphabet.check_symbol(v as usize)?;
        }
        Ok(Configuration {
            cells: PackedCells::from_values(alphabet.bits_per_cell(), values),
            torus,
            alphabet,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn get(&self, cell: &Cell) -> Result<u8> {
        Ok(self.cells.get(self.torus.index_of(cell)?))
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> u8 {
        self.cells.get(index)
    }

    pub fn values(&self) -> Vec<u8> {
        self.cells.to_vec()
    }

    pub fn with_value(&self, cell: &Cell, symbol: usize) -> Result<Configuration> {
        let idx = self.torus.index_of(cell)?;
        let s = self.alphabet.check_symbol(symbol)?;
        let mut c = self.clone();
        c.cells.set(idx, s);
        Ok(c)
    }

    pub(crate) fn cells(&self) -> &PackedCells {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut PackedCells {
        &mut self.cells
    }

    /// Cells holding a non-quiescent symbol.
    pub fn support(&self) -> Region {
        let q = self.alphabet.quiescent();
        Region::new(
            (0..self.torus.num_cells())
                .filter(|&i| self.cells.get(i) != q)
                .map(|i| self.torus.cell_at(i)),
        )
    }

    pub fn count(&self, symbol: u8) -> usize {
        (0..self.torus.num_cells())
            .filter(|&i| self.cells.get(i) == symbol)
            .count()
    }

    pub fn restrict(&self, region: &Region) -> Result<RegionConfig> {
        let values = region
            .iter()
            .map(|c| self.get(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionConfig {
            region: region.clone(),
            alphabet: self.alphabet.clone(),
            values,
        })
    }

    /// `(self, r)`: equal to `r` on `r.region()` and to `self` elsewhere.
    pub fn patch(&self, r: &RegionConfig) -> Result<Configuration> {
        if *r.alphabet != *self.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let mut out = self.clone();
        for (cell, &v) in r.region.iter().zip(&r.values) {
            let idx = self.torus.index_of(cell)?;
            out.cells.set(idx, v);
        }
        Ok(out)
    }

    /// `result(x) = self(x - v)`.
    pub fn shift(&self, v: &[i64]) -> Result<Configuration> {
        self.torus.check_vector(v)?;
        let mut out = self.clone();
        let neg: Vec<i64> = v.iter().map(|x| -x).collect();
        for i in 0..self.torus.num_cells() {
            let src = self.torus.translate(&self.torus.cell_at(i), &neg);
            out.cells
                .set(i, self.cells.get(self.torus.index_unchecked(src.coords())));
        }
        Ok(out)
    }

    pub fn same_space(&self, other: &Configuration) -> Result<()> {
        if self.torus != other.torus {
            return Err(Error::RegionMismatch(format!(
                "tori {} and {} differ",
                self.torus, other.torus
            )));
        }
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::write_config(self))
    }
}

/// A total assignment of symbols over a region, in canonical cell order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionConfig {
    region: Region,
    alphabet: Arc<Alphabet>,
    values: Vec<u8>,
}

impl RegionConfig {
    pub fn new(region: Region, alphabet: Arc<Alphabet>, values: Vec<u8>) -> Result<Self> {
        if values.len() != region.len() {
            return Err(Error::DimensionMismatch {
                expected: region.len(),
                got: values.len(),
            });
        }
        for &v in &values {
            alphabet.check_symbol(v as usize)?;
        }
        Ok(RegionConfig {
            region,
            alphabet,
            values,
        })
    }

    /// Decodes a word index (first cell most significant, base k).
    pub fn from_word(region: Region, alphabet: Arc<Alphabet>, word: u64) -> Self {
        let values = decode_word(word, alphabet.size(), region.len());
        RegionConfig {
            region,
            alphabet,
            values,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, cell: &Cell) -> Option<u8> {
        self.region.position(cell).map(|p| self.values[p])
    }

    pub fn word(&self) -> u64 {
        encode_word(&self.values, self.alphabet.size())
    }
}

/// Base-k encoding with the first symbol most significant.
pub fn encode_word(values: &[u8], k: usize) -> u64 {
    values.iter().fold(0u64, |acc, &v| acc * k as u64 + v as u64)
}

pub fn decode_word(mut word: u64, k: usize, len: usize) -> Vec<u8> {
    let mut values = vec![0u8; len];
    for slot in values.iter_mut().rev() {
        *slot = (word % k as u64) as u8;
        word /= k as u64;
    }
    values
}
