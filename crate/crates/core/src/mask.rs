//! 0/1 masks and counting of their all-ones generalized diagonals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest square mask accepted by [`permanent_binary`].
pub const PERMANENT_MAX_SIZE: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} bits do not fill a {rows}x{cols} mask",
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged mask rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                bits.push(f(r, c));
            }
        }
        Self { rows, cols, bits }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| true)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| r == c)
    }

    /// Parses a row-major string of `'0'`/`'1'` characters for an n×n mask.
    pub fn parse_square(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .trim()
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected mask character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let n = (bits.len() as f64).sqrt().round() as usize;
        if n * n != bits.len() {
            return Err(Error::Parse(format!(
                "mask of {} bits is not square",
                bits.len()
            )));
        }
        Self::new(n, n, bits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.cols + c] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn row_bits(&self, r: usize) -> &[bool] {
        &self.bits[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Number of all-ones generalized diagonals (the permanent of the mask).
///
/// Ryser's inclusion–exclusion over column subsets, visited in Gray-code
/// order so each step updates the row sums by one column.
pub fn permanent_binary(mask: &BinaryMask) -> Result<u128> {
    let n = mask.rows();
    if n != mask.cols() {
        return Err(Error::Shape(format!(
            "permanent of a {}x{} mask",
            mask.rows(),
            mask.cols()
        )));
    }
    if n > PERMANENT_MAX_SIZE {
        return Err(Error::SizeLimit(format!(
            "permanent limited to {PERMANENT_MAX_SIZE}x{PERMANENT_MAX_SIZE}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(1);
    }
    if (0..n).any(|r| mask.row_bits(r).iter().all(|&b| !b)) {
        return Ok(0);
    }
    let mut row_sums = vec![0i64; n];
    let mut total: i128 = 0;
    let mut prev_gray: u64 = 0;
    for i in 1u64..(1u64 << n) {
        let gray = i ^ (i >> 1);
        let changed = (gray ^ prev_gray).trailing_zeros() as usize;
        let delta = if gray & (1 << changed) != 0 { 1 } else { -1 };
        for (r, sum) in row_sums.iter_mut().enumerate() {
            if mask.get(r, changed) {
                *sum += delta;
            }
        }
        prev_gray = gray;
        let prod: i128 = row_sums.iter().map(|&s| s as i128).product();
        if prod != 0 {
            let size = gray.count_ones() as usize;
            if (n - size) % 2 == 0 {
                total += prod;
            } else {
                total -= prod;
            }
        }
    }
    u128::try_from(total).map_err(|_| Error::Internal("negative permanent".into()))
}
