//! Multi-channel bandpass sampling of signals with spectrum in `[-1/2, 1/2)`.
//!
//! Channel k keeps the band `S_k` (a union of cells
//! `C_j = -1/2 + [j/N, (j+1)/N)`) and is sampled at `Nm - c_k`:
//!
//! ```text
//! s(k, m) = ∫ f̂(ω) χ_{S_k}(ω) e^{2πi(Nm - c_k)ω} dω.
//! ```
//!
//! When the exponentials `e^{2πi(c_k - Nm)·}χ_{S_k}` form a Riesz basis,
//! `f̂ = Σ_{k,m} s(k,m) · N · e^{2πi(c_k - Nm)ω} · G_k(ω)` with `G_k`
//! constant on each cell. Everything is evaluated in the frequency domain
//! with closed-form integrals.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{GridSupport, Rational};
use crate::linalg::ComplexMatrix;
use crate::masked::{build_integer_masked_matrix, dual_basis};
use crate::perm::{theorem1_construct, PermutationAssignment};
use crate::phase::exp_integral;

pub const DEFAULT_TRUNCATION: i64 = 2048;

/// A spectrum on `[-1/2, 1/2)`: piecewise constant on the `refine·N`
/// subcells, plus optional integer-frequency tones `a e^{2πiνω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFunction {
    pub modulus: usize,
    pub refine: usize,
    pub values: Vec<Complex64>,
    pub tones: Vec<(i64, Complex64)>,
}

impl SpectrumFunction {
    pub fn new(modulus: usize, refine: usize, values: Vec<Complex64>) -> Result<Self> {
        if modulus == 0 || refine == 0 {
            return Err(Error::InvalidInput("modulus and refinement must be positive".into()));
        }
        if values.len() != modulus * refine {
            return Err(Error::InvalidInput(format!(
                "{} values for {} subcells",
                values.len(),
                modulus * refine
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("spectrum values must be finite".into()));
        }
        Ok(Self {
            modulus,
            refine,
            values,
            tones: Vec::new(),
        })
    }

    pub fn zero(modulus: usize, refine: usize) -> Result<Self> {
        Self::new(modulus, refine, vec![Complex64::new(0.0, 0.0); modulus * refine])
    }

    /// Uniform random real and imaginary parts in `[-1, 1)`.
    pub fn random(modulus: usize, refine: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..modulus * refine)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self::new(modulus, refine, values)
    }

    pub fn with_tones(mut self, tones: Vec<(i64, Complex64)>) -> Self {
        self.tones = tones;
        self
    }

    pub fn subcells(&self) -> usize {
        self.values.len()
    }

    /// `[lo, hi)` of subcell `i`.
    pub fn subcell_bounds(&self, i: usize) -> (Rational, Rational) {
        let d = self.subcells() as i64;
        let half = Rational::new(1, 2);
        (
            Rational::new(i as i64, d) - half,
            Rational::new(i as i64 + 1, d) - half,
        )
    }

    /// The same function on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat(v).take(factor))
            .collect();
        Ok(Self::new(self.modulus, self.refine * factor, values)?.with_tones(self.tones.clone()))
    }

    /// Evaluates the spectrum at ω ∈ [-1/2, 1/2).
    pub fn eval(&self, omega: f64) -> Complex64 {
        let i = (((omega + 0.5) * self.subcells() as f64).floor() as usize).min(self.subcells() - 1);
        let tones: Complex64 = self
            .tones
            .iter()
            .map(|&(nu, a)| a * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu as f64 * omega))
            .sum();
        self.values[i] + tones
    }

    /// CSV rows `index,re,im` for subcells and `nu=<ν>,re,im` for tones.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{i},{:e},{:e}", v.re, v.im);
        }
        for (nu, a) in &self.tones {
            let _ = writeln!(out, "nu={nu},{:e},{:e}", a.re, a.im);
        }
        out
    }

    pub fn from_csv(modulus: usize, text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut tones = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", line_no + 1)));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", line_no + 1)))
            };
            let v = Complex64::new(num(fields[1])?, num(fields[2])?);
            if let Some(nu) = fields[0].strip_prefix("nu=") {
                let nu = nu
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: tone {nu:?}: {e}", line_no + 1)))?;
                tones.push((nu, v));
            } else {
                let i: usize = fields[0]
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: index: {e}", line_no + 1)))?;
                if i != values.len() {
                    return Err(Error::Parse(format!("line {}: index {i} out of order", line_no + 1)));
                }
                values.push(v);
            }
        }
        if modulus == 0 || values.is_empty() || values.len() % modulus != 0 {
            return Err(Error::Parse(format!(
                "{} subcells do not refine a grid of {modulus} cells",
                values.len()
            )));
        }
        Ok(Self::new(modulus, values.len() / modulus, values)?.with_tones(tones))
    }
}

/// Reconstruction filters for N channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub modulus: usize,
    /// Channel k uses the offset `c_k = rho(k)`.
    pub rho: PermutationAssignment,
    pub masks: Vec<GridSupport>,
    /// `G_k` on the N cells.
    pub g: Vec<Vec<Complex64>>,
    pub z: ComplexMatrix,
}

/// Builds the filters for masks `S_k ∋ C_k`; ρ is searched when absent.
pub fn build_filters(
    modulus: usize,
    masks: &[GridSupport],
    rho: Option<&PermutationAssignment>,
) -> Result<FilterBank> {
    if masks.len() != modulus {
        return Err(Error::InvalidConfiguration(format!(
            "{} masks for {modulus} channels",
            masks.len()
        )));
    }
    for (k, m) in masks.iter().enumerate() {
        if m.modulus() != modulus || !m.contains(k) {
            return Err(Error::InvalidConfiguration(format!(
                "mask {k} must contain cell {k} of Z_{modulus}"
            )));
        }
    }
    let rho = match rho {
        Some(r) if r.size() != modulus => {
            return Err(Error::InvalidConfiguration(format!(
                "permutation of size {} for {modulus} channels",
                r.size()
            )))
        }
        Some(r) => r.clone(),
        None => {
            let cells: Vec<usize> = (0..modulus).collect();
            PermutationAssignment::new(theorem1_construct(modulus, &cells, masks)?.offsets)?
        }
    };
    let matrix = build_integer_masked_matrix(modulus, rho.map(), masks)?;
    let dual = dual_basis(&matrix).map_err(|e| match e {
        Error::SingularMatrix { sigma_min } => Error::InvalidConfiguration(format!(
            "masks and permutation {rho} do not give a Riesz basis (sigma_min = {sigma_min:e})"
        )),
        other => other,
    })?;
    Ok(FilterBank {
        modulus,
        rho,
        masks: masks.to_vec(),
        g: dual.filter_g,
        z: dual.z,
    })
}

/// `s(k, m)` for `|m| ≤ mtrunc`, stored at index `m + mtrunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub mtrunc: i64,
    pub values: Vec<Vec<Complex64>>,
}

impl Samples {
    pub fn get(&self, k: usize, m: i64) -> Complex64 {
        self.values[k][(m + self.mtrunc) as usize]
    }
}

fn cell_bounds(n: usize, j: usize) -> (Rational, Rational) {
    let half = Rational::new(1, 2);
    (
        Rational::new(j as i64, n as i64) - half,
        Rational::new(j as i64 + 1, n as i64) - half,
    )
}

/// `∫_{S_k} f̂(ω) e^{2πiνω} dω`.
fn band_integral(fhat: &SpectrumFunction, mask: &GridSupport, nu: i64) -> Complex64 {
    let r = fhat.refine;
    let mut acc = Complex64::new(0.0, 0.0);
    for &j in mask.cells() {
        for i in j * r..(j + 1) * r {
            let v = fhat.values[i];
            if v.re != 0.0 || v.im != 0.0 {
                let (a, b) = fhat.subcell_bounds(i);
                acc += v * exp_integral(nu, a, b);
            }
        }
        let (a, b) = cell_bounds(fhat.modulus, j);
        for &(t, amp) in &fhat.tones {
            acc += amp * exp_integral(nu + t, a, b);
        }
    }
    acc
}

pub fn generalized_samples(fhat: &SpectrumFunction, bank: &FilterBank, mtrunc: i64) -> Result<Samples> {
    if fhat.modulus != bank.modulus {
        return Err(Error::Incompatible(format!(
            "spectrum on {} cells, filter bank on {}",
            fhat.modulus, bank.modulus
        )));
    }
    if mtrunc < 1 {
        return Err(Error::InvalidInput("truncation must be at least 1".into()));
    }
    let n = bank.modulus as i64;
    let values = (0..bank.modulus)
        .into_par_iter()
        .map(|k| {
            let c = bank.rho.apply(k) as i64;
            (-mtrunc..=mtrunc)
                .map(|m| band_integral(fhat, &bank.masks[k], n * m - c))
                .collect()
        })
        .collect();
    Ok(Samples { mtrunc, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub mtrunc: i64,
    /// Subcell averages of the partial sum, on the reference's grid.
    pub spectrum: SpectrumFunction,
    /// `‖f̂ - f̂_rec‖ / ‖f̂‖` (absolute when `f̂ = 0`).
    pub relative_error: f64,
}

/// Trigonometric coefficients `d_ν`, `ν ∈ [nu0, nu0 + len)`, of one cell.
struct CellSeries {
    nu0: i64,
    coeffs: Vec<Complex64>,
}

/// `∫_{C_j} |P - Σ_ν d_ν e^{2πiνω}|²` for the piecewise-constant part `P`
/// of `fhat` on cell j.
///
/// Expanded as `‖P‖² - 2 Re⟨P, D⟩ + ‖D‖²`; the last term is the Toeplitz
/// form `Σ_δ I_j(δ) r(δ)` with `r` the autocorrelation of `d`, computed by
/// FFT.
fn cell_error_sq(fhat: &SpectrumFunction, j: usize, series: &CellSeries, planner: &mut FftPlanner<f64>) -> f64 {
    let r = fhat.refine;
    let h = 1.0 / fhat.subcells() as f64;
    let subs: Vec<(Complex64, Rational, Rational)> = (j * r..(j + 1) * r)
        .map(|i| {
            let (a, b) = fhat.subcell_bounds(i);
            (fhat.values[i], a, b)
        })
        .collect();
    let p_norm: f64 = subs.iter().map(|(v, _, _)| v.norm_sqr() * h).sum();
    let cross: Complex64 = series
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, d)| d.re != 0.0 || d.im != 0.0)
        .map(|(i, &d)| {
            let nu = series.nu0 + i as i64;
            let inner: Complex64 = subs
                .iter()
                .map(|&(v, a, b)| v.conj() * exp_integral(nu, a, b))
                .sum();
            d * inner
        })
        .sum();
    let len = series.coeffs.len();
    let size = (2 * len).next_power_of_two().max(2);
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[..len].copy_from_slice(&series.coeffs);
    planner.plan_fft_forward(size).process(&mut buf);
    for x in buf.iter_mut() {
        *x = Complex64::new(x.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let (a, b) = cell_bounds(fhat.modulus, j);
    let mut d_norm = Complex64::new(0.0, 0.0);
    for delta in -(len as i64 - 1)..=(len as i64 - 1) {
        let idx = delta.rem_euclid(size as i64) as usize;
        d_norm += exp_integral(delta, a, b) * buf[idx] / size as f64;
    }
    (p_norm - 2.0 * cross.re + d_norm.re).max(0.0)
}

/// Per-cell coefficients of `f̂_rec - tones`.
fn cell_series(bank: &FilterBank, samples: &Samples, tones: &[(i64, Complex64)], j: usize) -> CellSeries {
    let n = bank.modulus as i64;
    let m = samples.mtrunc;
    let mut lo = -n * m;
    let mut hi = n * m + n - 1;
    for &(t, _) in tones {
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for k in 0..bank.modulus {
        let c = bank.rho.apply(k) as i64;
        let gk = bank.g[k][j] * n as f64;
        for mm in -m..=m {
            let nu = c - n * mm;
            coeffs[(nu - lo) as usize] += samples.get(k, mm) * gk;
        }
    }
    for &(t, a) in tones {
        coeffs[(t - lo) as usize] -= a;
    }
    CellSeries { nu0: lo, coeffs }
}

/// Partial-sum reconstruction and its exact L² error against `reference`.
pub fn reconstruct(samples: &Samples, bank: &FilterBank, reference: &SpectrumFunction) -> Result<Reconstruction> {
    if samples.values.len() != bank.modulus
        || samples
            .values
            .iter()
            .any(|v| v.len() != (2 * samples.mtrunc + 1) as usize)
    {
        return Err(Error::Incompatible("samples do not match the filter bank".into()));
    }
    if reference.modulus != bank.modulus {
        return Err(Error::Incompatible(format!(
            "reference on {} cells, filter bank on {}",
            reference.modulus, bank.modulus
        )));
    }
    let zero_samples = Samples {
        mtrunc: samples.mtrunc,
        values: vec![vec![Complex64::new(0.0, 0.0); samples.values[0].len()]; bank.modulus],
    };
    let per_cell: Vec<(f64, f64, Vec<Complex64>)> = (0..bank.modulus)
        .into_par_iter()
        .map(|j| {
            let mut planner = FftPlanner::new();
            let series = cell_series(bank, samples, &reference.tones, j);
            let err = cell_error_sq(reference, j, &series, &mut planner);
            let norm = cell_error_sq(reference, j, &cell_series(bank, &zero_samples, &reference.tones, j), &mut planner);
            // Undo the tone subtraction to get the partial sum itself.
            let rec = cell_series(bank, samples, &[], j);
            let r = reference.refine;
            let h = 1.0 / reference.subcells() as f64;
            let averages = (j * r..(j + 1) * r)
                .map(|i| {
                    let (a, b) = reference.subcell_bounds(i);
                    rec.coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, d)| d.re != 0.0 || d.im != 0.0)
                        .map(|(idx, &d)| d * exp_integral(rec.nu0 + idx as i64, a, b))
                        .sum::<Complex64>()
                        / h
                })
                .collect();
            (err, norm, averages)
        })
        .collect();
    let err: f64 = per_cell.iter().map(|c| c.0).sum();
    let norm: f64 = per_cell.iter().map(|c| c.1).sum();
    let values: Vec<Complex64> = per_cell.into_iter().flat_map(|c| c.2).collect();
    let relative_error = if norm > 0.0 { (err / norm).sqrt() } else { err.sqrt() };
    Ok(Reconstruction {
        mtrunc: samples.mtrunc,
        spectrum: SpectrumFunction::new(reference.modulus, reference.refine, values)?,
        relative_error,
    })
}

/// CSV rows `mtrunc,relative_error`.
pub fn report_csv(rows: &[(i64, f64)]) -> String {
    let mut out = String::from("mtrunc,relative_error\n");
    for (m, e) in rows {
        let _ = writeln!(out, "{m},{e:e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g(n: usize, cells: &[usize]) -> GridSupport {
        GridSupport::new(n, cells.iter().copied()).unwrap()
    }

    fn full_bank(n: usize) -> FilterBank {
        let rho = PermutationAssignment::identity(n);
        build_filters(n, &vec![GridSupport::full(n).unwrap(); n], Some(&rho)).unwrap()
    }

    fn alternating_masks() -> Vec<GridSupport> {
        vec![g(4, &[0, 2]), g(4, &[0, 1, 2, 3]), g(4, &[0, 2]), g(4, &[0, 1, 2, 3])]
    }

    /// Composite midpoint rule with the points aligned to subcells.
    fn midpoint_sample(fhat: &SpectrumFunction, mask: &GridSupport, nu: i64, points: usize) -> Complex64 {
        let per_sub = points.div_ceil(fhat.subcells());
        let h = 1.0 / (fhat.subcells() * per_sub) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..fhat.subcells() * per_sub {
            let omega = -0.5 + (i as f64 + 0.5) * h;
            let cell = ((omega + 0.5) * fhat.modulus as f64).floor() as usize;
            if mask.contains(cell) {
                acc += fhat.eval(omega) * Complex64::from_polar(1.0, 2.0 * PI * nu as f64 * omega) * h;
            }
        }
        acc
    }

    #[test]
    fn full_band_filters_are_constant() {
        for n in 1..=5 {
            let bank = full_bank(n);
            for gk in &bank.g {
                for v in gk {
                    assert!((v - Complex64::new(1.0 / n as f64, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn alternating_bank() {
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        assert_eq!(bank.g.len(), 4);
        assert!(bank.g.iter().all(|gk| gk.len() == 4));
        let w = build_integer_masked_matrix(4, bank.rho.map(), &bank.masks).unwrap();
        assert!(w.matrix().matmul(&bank.z).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
        let bad = build_filters(4, &alternating_masks(), Some(&PermutationAssignment::parse("1,2,3,0").unwrap()));
        assert!(matches!(bad, Err(Error::InvalidConfiguration(_))));
        let missing = vec![g(4, &[1]), g(4, &[1]), g(4, &[2]), g(4, &[3])];
        assert!(matches!(build_filters(4, &missing, None), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn full_band_indicator_samples_are_a_delta() {
        let fhat = SpectrumFunction::new(1, 1, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let s = generalized_samples(&fhat, &full_bank(1), 5).unwrap();
        for m in -5..=5 {
            let expected = if m == 0 { 1.0 } else { 0.0 };
            assert!((s.get(0, m) - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn channel_outside_support_sees_nothing() {
        let mut values = vec![Complex64::new(0.0, 0.0); 8];
        values[6] = Complex64::new(1.0, 2.0);
        values[7] = Complex64::new(-1.0, 0.5);
        let fhat = SpectrumFunction::new(4, 2, values).unwrap();
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let s = generalized_samples(&fhat, &bank, 4).unwrap();
        // Cell 3 lies outside the bands of channels 0 and 2.
        for k in [0, 2] {
            assert!(s.values[k].iter().all(|v| v.norm() == 0.0));
        }
        assert!(s.values[1].iter().any(|v| v.norm() > 0.1));
    }

    #[test]
    fn samples_match_quadrature() {
        let fhat = SpectrumFunction::random(4, 3, 42).unwrap();
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let s = generalized_samples(&fhat, &bank, 1).unwrap();
        for k in 0..4 {
            for m in -1..=1 {
                let nu = 4 * m - bank.rho.apply(k) as i64;
                let oracle = midpoint_sample(&fhat, &bank.masks[k], nu, 100_000);
                assert!((s.get(k, m) - oracle).norm() < 1e-8, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn refinement_leaves_samples_unchanged() {
        let fhat = SpectrumFunction::random(4, 2, 9).unwrap();
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let a = generalized_samples(&fhat, &bank, 16).unwrap();
        let b = generalized_samples(&fhat.refined(2).unwrap(), &bank, 16).unwrap();
        for k in 0..4 {
            for (x, y) in a.values[k].iter().zip(&b.values[k]) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn in_span_spectra_reconstruct_exactly() {
        let n = 3;
        let bank = full_bank(n);
        let tones = vec![
            (0, Complex64::new(1.0, 0.0)),
            (-4, Complex64::new(0.3, -0.2)),
            (7, Complex64::new(-0.5, 0.1)),
        ];
        let fhat = SpectrumFunction::zero(n, 2).unwrap().with_tones(tones);
        let s = generalized_samples(&fhat, &bank, 4).unwrap();
        let rec = reconstruct(&s, &bank, &fhat).unwrap();
        assert!(rec.relative_error <= 1e-10, "{}", rec.relative_error);
    }

    #[test]
    fn zero_samples_give_zero() {
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let fhat = SpectrumFunction::zero(4, 1).unwrap();
        let s = generalized_samples(&fhat, &bank, 3).unwrap();
        let rec = reconstruct(&s, &bank, &fhat).unwrap();
        assert!(rec.spectrum.values.iter().all(|v| v.norm() == 0.0));
        assert_eq!(rec.relative_error, 0.0);
    }

    /// Error against a brute-force evaluation of the partial sum on a fine
    /// grid.
    #[test]
    fn exact_error_matches_pointwise_evaluation() {
        let fhat = SpectrumFunction::random(4, 2, 5).unwrap();
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let s = generalized_samples(&fhat, &bank, 6).unwrap();
        let rec = reconstruct(&s, &bank, &fhat).unwrap();
        let points = 200_000;
        let h = 1.0 / points as f64;
        let (mut err, mut norm) = (0.0, 0.0);
        for i in 0..points {
            let omega = -0.5 + (i as f64 + 0.5) * h;
            let j = ((omega + 0.5) * 4.0).floor() as usize;
            let mut val = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                let c = bank.rho.apply(k) as i64;
                for m in -6..=6 {
                    let nu = (c - 4 * m) as f64;
                    val += s.get(k, m) * 4.0 * bank.g[k][j] * Complex64::from_polar(1.0, 2.0 * PI * nu * omega);
                }
            }
            let f = fhat.eval(omega);
            err += (f - val).norm_sqr() * h;
            norm += f.norm_sqr() * h;
        }
        let oracle = (err / norm).sqrt();
        assert!((rec.relative_error - oracle).abs() < 1e-4 * oracle, "{} vs {oracle}", rec.relative_error);
    }

    #[test]
    fn error_shrinks_with_truncation() {
        let fhat = SpectrumFunction::random(4, 4, 11).unwrap();
        let bank = build_filters(4, &alternating_masks(), None).unwrap();
        let mut last = f64::INFINITY;
        for m in [8, 32, 128, 512] {
            let s = generalized_samples(&fhat, &bank, m).unwrap();
            let e = reconstruct(&s, &bank, &fhat).unwrap().relative_error;
            assert!(e <= last, "{e} > {last} at {m}");
            last = e;
        }
    }

    #[test]
    fn incompatible_inputs() {
        let bank = full_bank(4);
        let fhat = SpectrumFunction::zero(3, 1).unwrap();
        assert!(matches!(generalized_samples(&fhat, &bank, 2), Err(Error::Incompatible(_))));
        let good = SpectrumFunction::zero(4, 1).unwrap();
        let s = generalized_samples(&good, &bank, 2).unwrap();
        assert!(matches!(reconstruct(&s, &full_bank(3), &fhat), Err(Error::Incompatible(_))));
        assert!(matches!(generalized_samples(&good, &bank, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let f = SpectrumFunction::random(3, 2, 1)
            .unwrap()
            .with_tones(vec![(-2, Complex64::new(0.25, -1.5))]);
        let back = SpectrumFunction::from_csv(3, &f.to_csv()).unwrap();
        assert_eq!(back, f);
        assert!(SpectrumFunction::from_csv(4, &f.to_csv()).is_err());
        assert!(SpectrumFunction::from_csv(3, "index,re,im\n1,0,0\n").is_err());
        assert_eq!(report_csv(&[(2048, 0.5)]), "mtrunc,relative_error\n2048,5e-1\n");
    }
}
