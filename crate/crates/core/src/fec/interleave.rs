use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest divisor of `len` not above 24, the default row count.
pub fn interleaver_rows(len: usize) -> usize {
    (1..=24.min(len.max(1))).rev().find(|r| len % r == 0).unwrap_or(1)
}

/// Write row by row into a `rows x (len / rows)` block, read column by column.
pub fn interleave<T: Copy>(bits: &[T], rows: usize) -> Result<Vec<T>> {
    if rows == 0 || bits.len() % rows != 0 {
        return Err(Error::NotDivisible { len: bits.len(), rows });
    }
    let cols = bits.len() / rows;
    let mut out = Vec::with_capacity(bits.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(bits[r * cols + c]);
        }
    }
    Ok(out)
}

pub fn deinterleave<T: Copy>(bits: &[T], rows: usize) -> Result<Vec<T>> {
    if rows == 0 || bits.len() % rows != 0 {
        return Err(Error::NotDivisible { len: bits.len(), rows });
    }
    let cols = bits.len() / rows;
    // Reading the interleaved stream with the roles swapped undoes it.
    interleave(bits, cols.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn two_by_three_by_hand() {
        assert_eq!(interleave(&[1, 2, 3, 4, 5, 6], 2).unwrap(), vec![1, 4, 2, 5, 3, 6]);
        assert_eq!(deinterleave(&[1, 4, 2, 5, 3, 6], 2).unwrap(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn single_row_is_identity() {
        assert_eq!(interleave(&[7, 8, 9], 1).unwrap(), vec![7, 8, 9]);
    }

    #[test]
    fn divisibility() {
        assert_eq!(interleave(&[1, 2, 3], 2), Err(Error::NotDivisible { len: 3, rows: 2 }));
        assert_eq!(interleaver_rows(9120), 24);
        assert_eq!(interleaver_rows(6120), 24);
        assert_eq!(interleaver_rows(7), 7);
        assert_eq!(interleaver_rows(29), 1);
    }

    proptest! {
        #[test]
        fn round_trip(v in proptest::collection::vec(any::<u8>(), 0..300)) {
            let rows = interleaver_rows(v.len());
            let i = interleave(&v, rows).unwrap();
            prop_assert_eq!(deinterleave(&i, rows).unwrap(), v);
        }
    }
}
