//! Exact zero tests for determinants whose entries are N-th roots of unity
//! (or zero).
//!
//! Entries live in `Z[x]/(x^N - 1)`, where `x^e` stands for `ω^e` with
//! `ω = e^{-2πi/N}`. The determinant is expanded without divisions, one row
//! at a time over column subsets, and the result is reduced modulo the N-th
//! cyclotomic polynomial: it is zero in `Q(ω)` exactly when the remainder
//! vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{root_of_unity, ComplexMatrix};

/// Largest matrix side handled by the exact path (the expansion is
/// `O(K·2^K)` ring operations).
pub const EXACT_MAX_SIZE: usize = 16;

/// A K×L matrix with entries `ω^e` or zero, `ω = e^{-2πi/N}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnitySpec {
    pub order: usize,
    pub exponents: Vec<Vec<Option<u32>>>,
}

impl RootOfUnitySpec {
    pub fn new(order: usize, exponents: Vec<Vec<Option<u32>>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("root of unity order must be positive".into()));
        }
        let cols = exponents.first().map_or(0, Vec::len);
        if exponents.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged exponent table".into()));
        }
        let exponents = exponents
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| e.map(|e| e % order as u32))
                    .collect()
            })
            .collect();
        Ok(Self { order, exponents })
    }

    /// Entries `ω^{(offsets[k]·cols[l]) mod N}` where `mask(k, l)` holds.
    pub fn masked_fourier(
        order: usize,
        row_offsets: &[usize],
        col_labels: &[usize],
        mut mask: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let exponents = row_offsets
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                col_labels
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| mask(k, j).then(|| ((c * l) % order) as u32))
                    .collect()
            })
            .collect();
        Self { order, exponents }
    }

    pub fn rows(&self) -> usize {
        self.exponents.len()
    }

    pub fn cols(&self) -> usize {
        self.exponents.first().map_or(0, Vec::len)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows(), self.cols(), |r, c| match self.exponents[r][c] {
            Some(e) => root_of_unity(self.order, e as usize),
            None => num_complex::Complex64::new(0.0, 0.0),
        })
    }

    fn entry_poly(&self, r: usize, c: usize) -> Vec<i64> {
        let mut p = vec![0i64; self.order];
        if let Some(e) = self.exponents[r][c] {
            p[e as usize] = 1;
        }
        p
    }
}

/// Coefficients (lowest degree first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    assert!(n > 0);
    // x^n - 1 divided by every Φ_d, d | n, d < n.
    let mut poly = vec![0i64; n + 1];
    poly[0] = -1;
    poly[n] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        poly = exact_div_monic(&poly, &cyclotomic_polynomial(d));
    }
    poly
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let q = rem[i + dn];
        quot[i] = q;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= q * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Remainder of `p` modulo the monic polynomial `m`.
fn reduce_mod_monic(p: &[i128], m: &[i64]) -> Vec<i128> {
    let dm = m.len() - 1;
    let mut rem = p.to_vec();
    for i in (dm..rem.len()).rev() {
        let q = rem[i];
        if q == 0 {
            continue;
        }
        for (j, &c) in m.iter().enumerate() {
            rem[i - dm + j] -= q * c as i128;
        }
    }
    rem.truncate(dm);
    rem
}

/// Determinant of a square matrix over `Z[x]/(x^N - 1)`; entries are dense
/// coefficient vectors of length N.
fn cyclic_det(n_order: usize, size: usize, entry: impl Fn(usize, usize) -> Vec<i64>) -> Vec<i128> {
    if size == 0 {
        let mut one = vec![0i128; n_order];
        one[0] = 1;
        return one;
    }
    // Sparse form of each entry: (exponent, coefficient).
    let entries: Vec<Vec<Vec<(usize, i64)>>> = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| {
                    entry(r, c)
                        .into_iter()
                        .enumerate()
                        .filter(|&(_, v)| v != 0)
                        .collect()
                })
                .collect()
        })
        .collect();
    let width = 1usize << size;
    let mut cur = vec![0i128; width * n_order];
    let mut live = vec![false; width];
    cur[0] = 1;
    live[0] = true;
    for (r, row) in entries.iter().enumerate() {
        let mut next = vec![0i128; width * n_order];
        let mut next_live = vec![false; width];
        for set in 0..width {
            if !live[set] || set.count_ones() as usize != r {
                continue;
            }
            let minor = &cur[set * n_order..(set + 1) * n_order];
            if minor.iter().all(|&v| v == 0) {
                continue;
            }
            for (c, terms) in row.iter().enumerate() {
                if set & (1 << c) != 0 || terms.is_empty() {
                    continue;
                }
                let larger = (set >> (c + 1)).count_ones();
                let sign: i128 = if larger % 2 == 0 { 1 } else { -1 };
                let target = set | (1 << c);
                next_live[target] = true;
                let dst = &mut next[target * n_order..(target + 1) * n_order];
                for &(e, coeff) in terms {
                    let f = sign * coeff as i128;
                    for (i, &v) in minor.iter().enumerate() {
                        if v != 0 {
                            dst[(i + e) % n_order] += f * v;
                        }
                    }
                }
            }
        }
        cur = next;
        live = next_live;
    }
    let full = width - 1;
    cur[full * n_order..(full + 1) * n_order].to_vec()
}

fn is_zero_in_field(order: usize, poly: &[i128]) -> bool {
    reduce_mod_monic(poly, &cyclotomic_polynomial(order))
        .iter()
        .all(|&c| c == 0)
}

/// Whether the determinant of `spec` is exactly zero in `Q(ω)`.
pub fn exact_zero_det(spec: &RootOfUnitySpec) -> Result<bool> {
    let k = spec.rows();
    if k != spec.cols() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} exponent table",
            k,
            spec.cols()
        )));
    }
    if k > EXACT_MAX_SIZE {
        return Err(Error::SizeLimit(format!(
            "exact determinant limited to {EXACT_MAX_SIZE}x{EXACT_MAX_SIZE}, got {k}"
        )));
    }
    let det = cyclic_det(spec.order, k, |r, c| spec.entry_poly(r, c));
    Ok(is_zero_in_field(spec.order, &det))
}

/// Whether `spec` has rank below `min(K, L)`, decided exactly.
///
/// Square tables use the determinant; rectangular ones the Gram determinant
/// `det(W W*)` (K ≤ L) or `det(W* W)` (K > L), whose entries stay in `Z[ω]`
/// because `conj(ω^e) = ω^{-e}`.
pub fn exact_rank_deficient(spec: &RootOfUnitySpec) -> Result<bool> {
    let (k, l) = (spec.rows(), spec.cols());
    if k == l {
        return exact_zero_det(spec);
    }
    let n = spec.order;
    let small = k.min(l);
    if small > EXACT_MAX_SIZE {
        return Err(Error::SizeLimit(format!(
            "exact rank test limited to rank {EXACT_MAX_SIZE}, got {small}"
        )));
    }
    let gram_entry = |a: usize, b: usize| -> Vec<i64> {
        let mut p = vec![0i64; n];
        let pairs: Box<dyn Iterator<Item = (Option<u32>, Option<u32>)>> = if k <= l {
            Box::new((0..l).map(|j| (spec.exponents[a][j], spec.exponents[b][j])))
        } else {
            // (W* W)_{ab} = Σ_i conj(w_{ia}) w_{ib}
            Box::new((0..k).map(|i| (spec.exponents[i][b], spec.exponents[i][a])))
        };
        for (x, y) in pairs {
            if let (Some(x), Some(y)) = (x, y) {
                let e = (x as usize + n - y as usize) % n;
                p[e] += 1;
            }
        }
        p
    };
    let det = cyclic_det(n, small, gram_entry);
    Ok(is_zero_in_field(n, &det))
}
