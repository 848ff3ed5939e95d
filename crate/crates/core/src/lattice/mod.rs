//! Cells, alphabets, finite tori, regions and configurations.
//!
//! The infinite lattice is modelled by a torus with even side lengths so that
//! both Margolus block partitions tile it exactly. Whether a torus result
//! carries infinite-lattice meaning is decided by [`crate::engine::light_cone`].

mod config;
mod packed;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

pub use config::{decode_word, encode_word, Configuration, RegionConfig};
pub use packed::PackedCells;

/// Largest alphabet supported by the packed storage.
pub const MAX_SYMBOLS: usize = 16;

/// An ordered set of distinct symbol labels with a designated background symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
    quiescent: u8,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>, quiescent: usize) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(
                "at least two symbols are required".into(),
            ));
        }
        if symbols.len() > MAX_SYMBOLS {
            return Err(Error::InvalidAlphabet(format!(
                "{} symbols exceed the maximum of {MAX_SYMBOLS}",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '#') {
                return Err(Error::InvalidAlphabet(format!("bad symbol label {s:?}")));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        if quiescent >= symbols.len() {
            return Err(Error::InvalidAlphabet(format!(
                "quiescent index {quiescent} out of range"
            )));
        }
        Ok(Alphabet {
            symbols,
            quiescent: quiescent as u8,
        })
    }

    /// `{0, 1}` with `0` quiescent.
    pub fn binary() -> Self {
        Alphabet {
            symbols: vec!["0".into(), "1".into()],
            quiescent: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn quiescent(&self) -> u8 {
        self.quiescent
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, symbol: u8) -> &str {
        &self.symbols[symbol as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<u8> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .map(|i| i as u8)
    }

    pub fn check_symbol(&self, symbol: usize) -> Result<u8> {
        if symbol < self.size() {
            Ok(symbol as u8)
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                size: self.size(),
            })
        }
    }

    /// Minimal number of bits needed to store one symbol index.
    pub fn bits_per_cell(&self) -> u32 {
        usize::BITS - (self.size() - 1).leading_zeros()
    }

    /// Renders a word of symbol indices as space separated labels.
    pub fn render_word(&self, word: &[u8]) -> String {
        word.iter()
            .map(|&s| self.label(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A finite d-dimensional torus with even side lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Torus {
    dims: Vec<usize>,
}

impl Torus {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidTorus("at least one axis is required".into()));
        }
        for &n in &dims {
            if n == 0 || n % 2 != 0 {
                return Err(Error::InvalidTorus(format!(
                    "side length {n} is not a positive even integer"
                )));
            }
        }
        if dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::InvalidTorus("cell count overflows".into()));
        }
        Ok(Torus { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        cell.coords.len() == self.dims.len()
            && cell.coords.iter().zip(&self.dims).all(|(&c, &n)| c < n)
    }

    pub fn check_cell(&self, cell: &Cell) -> Result<()> {
        if self.contains(cell) {
            Ok(())
        } else {
            Err(Error::CellOffTorus {
                cell: cell.to_string(),
                dims: self.to_string(),
            })
        }
    }

    pub fn check_vector(&self, v: &[i64]) -> Result<()> {
        if v.len() == self.ndim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.ndim(),
                got: v.len(),
            })
        }
    }

    /// Linear index with the first axis varying fastest.
    pub fn index_of(&self, cell: &Cell) -> Result<usize> {
        self.check_cell(cell)?;
        Ok(self.index_unchecked(&cell.coords))
    }

    pub(crate) fn index_unchecked(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for (&c, &n) in coords.iter().zip(&self.dims).rev() {
            idx = idx * n + c;
        }
        idx
    }

    pub fn cell_at(&self, mut index: usize) -> Cell {
        let mut coords = Vec::with_capacity(self.dims.len());
        for &n in &self.dims {
            coords.push(index % n);
            index /= n;
        }
        Cell { coords }
    }

    /// Reduces integer lattice coordinates onto the torus.
    pub fn reduce(&self, coords: &[i64]) -> Cell {
        Cell {
            coords: coords
                .iter()
                .zip(&self.dims)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as usize)
                .collect(),
        }
    }

    /// `cell + v` with torus arithmetic.
    pub fn translate(&self, cell: &Cell, v: &[i64]) -> Cell {
        Cell {
            coords: cell
                .coords
                .iter()
                .zip(v)
                .zip(&self.dims)
                .map(|((&c, &d), &n)| (c as i64 + d).rem_euclid(n as i64) as usize)
                .collect(),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(move |i| self.cell_at(i))
    }

    /// The torus side lengths as a shift vector (a full period).
    pub fn period(&self) -> Vec<i64> {
        self.dims.iter().map(|&n| n as i64).collect()
    }
}

impl fmt::Display for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join(" x "))
    }
}

impl FromStr for Torus {
    type Err = Error;

    /// Accepts `8 x 8`, `8x8` or `8,8`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', ',', '×'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidTorus(format!("bad side length {:?}", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Torus::new(dims)
    }
}

/// A lattice point reduced onto a torus. Orders lexicographically by coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    coords: Vec<usize>,
}

impl Cell {
    pub fn new(coords: Vec<usize>) -> Self {
        Cell { coords }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl From<&[usize]> for Cell {
    fn from(coords: &[usize]) -> Self {
        Cell::new(coords.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for Cell {
    fn from(coords: [usize; N]) -> Self {
        Cell::new(coords.to_vec())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Cell {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ParseError::new(1, 1, format!("expected (x,y,...), got {t:?}")))?;
        let coords = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(1, 1, format!("bad coordinate {:?}", p.trim())))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Cell { coords })
    }
}

/// Parses a whitespace separated list of `(x,y,...)` cells, reporting columns
/// relative to `text`.
pub fn parse_cell_list(text: &str, line: usize, column0: usize) -> std::result::Result<Vec<Cell>, ParseError> {
    let mut cells = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if bytes[i] != b'(' {
            return Err(ParseError::new(line, column0 + i, "expected '('"));
        }
        while i < bytes.len() && bytes[i] != b')' {
            i += 1;
        }
        if i == bytes.len() {
            return Err(ParseError::new(line, column0 + start, "unterminated cell"));
        }
        i += 1;
        let cell = text[start..i]
            .parse::<Cell>()
            .map_err(|e| ParseError::new(line, column0 + start, e.message))?;
        cells.push(cell);
    }
    Ok(cells)
}

/// A finite set of cells, iterated in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    cells: BTreeSet<Cell>,
}

impl Region {
    pub fn new<I: IntoIterator<Item = Cell>>(cells: I) -> Self {
        Region {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Region::default()
    }

    /// Every cell of the torus.
    pub fn full(torus: &Torus) -> Self {
        Region::new(torus.cells())
    }

    /// A box `[origin, origin + extent)` with torus wrap.
    pub fn rect(torus: &Torus, origin: &[usize], extent: &[usize]) -> Result<Self> {
        torus.check_vector(&vec![0; origin.len()])?;
        torus.check_vector(&vec![0; extent.len()])?;
        let count: usize = extent.iter().product();
        let mut cells = Vec::with_capacity(count);
        for i in 0..count {
            let mut rem = i;
            let mut coords = Vec::with_capacity(extent.len());
            for (axis, &e) in extent.iter().enumerate() {
                coords.push(((origin[axis] + rem % e) % torus.dims()[axis]) as i64);
                rem /= e;
            }
            cells.push(torus.reduce(&coords));
        }
        Ok(Region::new(cells))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.cells.contains(cell)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.cells.iter()
    }

    /// Position of `cell` in the canonical order.
    pub fn position(&self, cell: &Cell) -> Option<usize> {
        if !self.cells.contains(cell) {
            return None;
        }
        Some(self.cells.range(..cell).count())
    }

    pub fn check_on(&self, torus: &Torus) -> Result<()> {
        self.cells.iter().try_for_each(|c| torus.check_cell(c))
    }

    /// Linear torus indices in canonical cell order.
    pub fn indices(&self, torus: &Torus) -> Result<Vec<usize>> {
        self.cells.iter().map(|c| torus.index_of(c)).collect()
    }

    /// Image of every cell under `+v`.
    pub fn shift(&self, torus: &Torus, v: &[i64]) -> Result<Region> {
        torus.check_vector(v)?;
        self.check_on(torus)?;
        Ok(Region::new(self.cells.iter().map(|c| torus.translate(c, v))))
    }

    pub fn union(&self, other: &Region) -> Region {
        Region {
            cells: self.cells.union(&other.cells).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region {
            cells: self.cells.intersection(&other.cells).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region {
            cells: self.cells.difference(&other.cells).cloned().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.cells.is_disjoint(&other.cells)
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.cells.is_subset(&other.cells)
    }

    /// `torus ∖ self`.
    pub fn complement(&self, torus: &Torus) -> Region {
        Region::new(torus.cells().filter(|c| !self.cells.contains(c)))
    }
}

impl FromIterator<Cell> for Region {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        Region::new(iter)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for Region {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        Ok(Region::new(parse_cell_list(s, 1, 1)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_bad_quiescent() {
        assert!(Alphabet::new(vec!["a", "a"], 0).is_err());
        assert!(Alphabet::new(vec!["a", "b"], 2).is_err());
        assert!(Alphabet::new(vec!["a"], 0).is_err());
        let a = Alphabet::new(vec!["a", "b", "c"], 1).unwrap();
        assert_eq!(a.quiescent(), 1);
        assert_eq!(a.bits_per_cell(), 2);
        assert_eq!(Alphabet::binary().bits_per_cell(), 1);
        let sixteen: Vec<String> = (0..16).map(|i| format!("s{i}")).collect();
        assert_eq!(Alphabet::new(sixteen, 0).unwrap().bits_per_cell(), 4);
    }

    #[test]
    fn torus_requires_even_sides() {
        assert!(Torus::new(vec![4, 3]).is_err());
        assert!(Torus::new(vec![]).is_err());
        assert!(Torus::new(vec![0]).is_err());
        let t: Torus = "8 x 6".parse().unwrap();
        assert_eq!(t.dims(), &[8, 6]);
        assert_eq!(t.to_string(), "8 x 6");
    }

    #[test]
    fn linear_index_round_trips() {
        let t = Torus::new(vec![4, 6, 2]).unwrap();
        for i in 0..t.num_cells() {
            assert_eq!(t.index_of(&t.cell_at(i)).unwrap(), i);
        }
        assert_eq!(t.index_of(&Cell::from([1, 0, 0])).unwrap(), 1);
        assert_eq!(t.index_of(&Cell::from([0, 1, 0])).unwrap(), 4);
        assert!(t.index_of(&Cell::from([4, 0, 0])).is_err());
    }

    #[test]
    fn shift_region_examples() {
        let t = Torus::new(vec![4, 4]).unwrap();
        let r = Region::new([Cell::from([0, 0])]);
        assert_eq!(r.shift(&t, &[0, 0]).unwrap(), r);
        assert_eq!(
            r.shift(&t, &[1, 0]).unwrap(),
            Region::new([Cell::from([1, 0])])
        );
        assert_eq!(
            Region::new([Cell::from([3, 0])]).shift(&t, &[1, 0]).unwrap(),
            Region::new([Cell::from([0, 0])])
        );
        assert!(r.shift(&t, &[1]).is_err());
        let big = Region::rect(&t, &[1, 1], &[3, 2]).unwrap();
        assert_eq!(big.shift(&t, &[-5, 7]).unwrap().len(), big.len());
    }

    #[test]
    fn region_parse_and_position() {
        let r: Region = "(1,0) (0,0)  (0,1)".parse().unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.to_string(), "(0,0) (0,1) (1,0)");
        assert_eq!(r.position(&Cell::from([1, 0])), Some(2));
        assert_eq!(r.position(&Cell::from([2, 0])), None);
        assert!("(0,0) 1,0)".parse::<Region>().is_err());
    }
}
