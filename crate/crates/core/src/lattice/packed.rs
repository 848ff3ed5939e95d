/// Fixed-width symbol indices packed into 64-bit words.
///
/// Cells may straddle a word boundary when the width does not divide 64.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedCells {
    bits: u32,
    len: usize,
    words: Vec<u64>,
}

impl PackedCells {
    pub fn new(bits: u32, len: usize, fill: u8) -> Self {
        assert!((1..=8).contains(&bits));
        let total = bits as usize * len;
        let mut packed = PackedCells {
            bits,
            len,
            words: vec![0; total.div_ceil(64)],
        };
        if fill != 0 {
            for i in 0..len {
                packed.set(i, fill);
            }
        }
        packed
    }

    pub fn from_values(bits: u32, values: &[u8]) -> Self {
        let mut packed = PackedCells::new(bits, values.len(), 0);
        for (i, &v) in values.iter().enumerate() {
            packed.set(i, v);
        }
        packed
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    fn mask(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        let bit = i * self.bits as usize;
        let (w, off) = (bit / 64, (bit % 64) as u32);
        let mut v = self.words[w] >> off;
        if off + self.bits > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        (v & self.mask()) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: u8) {
        debug_assert!(i < self.len);
        let mask = self.mask();
        let value = value as u64 & mask;
        let bit = i * self.bits as usize;
        let (w, off) = (bit / 64, (bit % 64) as u32);
        self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
        if off + self.bits > 64 {
            let spill = off + self.bits - 64;
            let hi_mask = (1u64 << spill) - 1;
            self.words[w + 1] = (self.words[w + 1] & !hi_mask) | (value >> (64 - off));
        }
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn set_get_agree_for_every_width(bits in 1u32..=4, values in proptest::collection::vec(any::<u8>(), 0..200)) {
            let values: Vec<u8> = values.iter().map(|v| v & ((1u8 << bits) - 1)).collect();
            let mut packed = PackedCells::new(bits, values.len(), 0);
            for (i, &v) in values.iter().enumerate() {
                packed.set(i, v);
            }
            prop_assert_eq!(packed.to_vec(), values.clone());
            // overwrite in reverse order leaves neighbours intact
            for (i, &v) in values.iter().enumerate().rev() {
                packed.set(i, v);
            }
            prop_assert_eq!(packed.to_vec(), values);
        }
    }

    #[test]
    fn three_bit_cells_straddle_words() {
        let values: Vec<u8> = (0..50).map(|i| (i % 8) as u8).collect();
        let packed = PackedCells::from_values(3, &values);
        assert_eq!(packed.to_vec(), values);
        assert_eq!(packed.get(21), 21 % 8);
    }
}
