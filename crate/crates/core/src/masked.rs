//! Masked Fourier matrices and the classification of exponential systems
//! `⋃_k { e^{2πiλ·} χ_{S_k} : λ ∈ N·Z + c_k }` on grid supports.
//!
//! The system is a frame, a Riesz sequence or a Riesz basis for `L²(S)`
//! exactly when the K×L matrix `W` with entries `e^{-2πi c_k l/N}` (on the
//! mask of row k, zero elsewhere) is injective, surjective or bijective. In
//! each case `σ_min(W)² / N` is the optimal lower bound.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{exact_rank_deficient, RootOfUnitySpec, EXACT_MAX_SIZE};
use crate::error::{Error, Result};
use crate::grid::{format_rational, GridSupport, Rational};
use crate::linalg::{invert_with_tol, unit_phase, ComplexMatrix, DEFAULT_SINGULAR_TOL};
use crate::phase::exp_integral;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    modulus: usize,
    offsets: Vec<Rational>,
    column_labels: Vec<usize>,
    masks: Vec<GridSupport>,
    matrix: ComplexMatrix,
}

/// Builds `W_{(c_0,L_0),…,(c_{K-1},L_{K-1})}` with columns in ascending order.
pub fn build_masked_matrix(
    modulus: usize,
    offsets: &[Rational],
    masks: &[GridSupport],
) -> Result<MaskedMatrix> {
    if modulus == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    if offsets.len() != masks.len() {
        return Err(Error::InvalidInput(format!(
            "{} offsets for {} masks",
            offsets.len(),
            masks.len()
        )));
    }
    if offsets.is_empty() {
        return Err(Error::InvalidInput("at least one row is required".into()));
    }
    let n = Rational::from_integer(modulus as i64);
    let zero = Rational::from_integer(0);
    if let Some(c) = offsets.iter().find(|c| **c < zero || **c >= n) {
        return Err(Error::InvalidOffsets(format!(
            "offset {} outside [0, {modulus})",
            format_rational(c)
        )));
    }
    if offsets.iter().collect::<BTreeSet<_>>().len() != offsets.len() {
        return Err(Error::InvalidOffsets("offsets must be distinct".into()));
    }
    for (k, mask) in masks.iter().enumerate() {
        if mask.modulus() != modulus {
            return Err(Error::IncompatibleGrids(format!(
                "mask {k} lives on Z_{} instead of Z_{modulus}",
                mask.modulus()
            )));
        }
        if mask.is_empty() {
            return Err(Error::InvalidMask(format!("mask {k} is empty")));
        }
    }
    let column_labels: Vec<usize> = masks
        .iter()
        .flat_map(|m| m.cells().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let matrix = ComplexMatrix::from_fn(offsets.len(), column_labels.len(), |k, j| {
        let l = column_labels[j];
        if masks[k].contains(l) {
            let c = offsets[k];
            unit_phase(
                *c.numer() as i128 * l as i128,
                *c.denom() as i128 * modulus as i128,
            )
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(MaskedMatrix {
        modulus,
        offsets: offsets.to_vec(),
        column_labels,
        masks: masks.to_vec(),
        matrix,
    })
}

/// Convenience wrapper for integer offsets.
pub fn build_integer_masked_matrix(
    modulus: usize,
    offsets: &[usize],
    masks: &[GridSupport],
) -> Result<MaskedMatrix> {
    let offsets: Vec<Rational> = offsets
        .iter()
        .map(|&c| Rational::from_integer(c as i64))
        .collect();
    build_masked_matrix(modulus, &offsets, masks)
}

impl MaskedMatrix {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn column_labels(&self) -> &[usize] {
        &self.column_labels
    }

    pub fn masks(&self) -> &[GridSupport] {
        &self.masks
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Offsets as integers when every offset is one.
    pub fn integer_offsets(&self) -> Option<Vec<usize>> {
        self.offsets
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer() as usize))
            .collect()
    }

    /// The exponent table of the matrix, available for integer offsets.
    pub fn root_spec(&self) -> Option<RootOfUnitySpec> {
        let offsets = self.integer_offsets()?;
        Some(RootOfUnitySpec::masked_fourier(
            self.modulus,
            &offsets,
            &self.column_labels,
            |k, j| self.masks[k].contains(self.column_labels[j]),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RieszBasis,
    FrameOnly,
    RieszSequenceOnly,
    Neither,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::RieszBasis => "riesz_basis",
            Verdict::FrameOnly => "frame_only",
            Verdict::RieszSequenceOnly => "riesz_sequence_only",
            Verdict::Neither => "neither",
        }
    }

    pub fn is_frame(&self) -> bool {
        matches!(self, Verdict::RieszBasis | Verdict::FrameOnly)
    }

    pub fn is_riesz_sequence(&self) -> bool {
        matches!(self, Verdict::RieszBasis | Verdict::RieszSequenceOnly)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub lower_bound: Option<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub exact_singular: Option<bool>,
}

/// Classifies a K×L matrix by shape and rank.
///
/// Full rank means `σ_min > tol·max(K,L)·σ_max` and, when an exact verdict is
/// supplied, no exact rank deficiency.
pub fn classify_matrix(
    m: &ComplexMatrix,
    modulus: usize,
    exact_singular: Option<bool>,
    tol: f64,
) -> Classification {
    let sv = m.singular_values();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    let numeric_full = !sv.is_empty() && sigma_min > tol * m.rows().max(m.cols()) as f64 * sigma_max;
    let full_rank = numeric_full && exact_singular != Some(true);
    let verdict = if !full_rank {
        Verdict::Neither
    } else if m.rows() == m.cols() {
        Verdict::RieszBasis
    } else if m.rows() > m.cols() {
        Verdict::FrameOnly
    } else {
        Verdict::RieszSequenceOnly
    };
    let lower_bound = (verdict != Verdict::Neither).then(|| sigma_min * sigma_min / modulus as f64);
    Classification {
        verdict,
        lower_bound,
        sigma_min,
        sigma_max,
        exact_singular,
    }
}

pub fn classify_system_with_tol(m: &MaskedMatrix, tol: f64) -> Classification {
    let exact = m.root_spec().and_then(|spec| {
        if spec.rows().min(spec.cols()) <= EXACT_MAX_SIZE {
            exact_rank_deficient(&spec).ok()
        } else {
            None
        }
    });
    classify_matrix(&m.matrix, m.modulus, exact, tol)
}

pub fn classify_system(m: &MaskedMatrix) -> Classification {
    classify_system_with_tol(m, DEFAULT_SINGULAR_TOL)
}

/// Coefficients of the dual Riesz basis.
///
/// The dual element paired with `e^{2πiλ·}χ_{S_k}` (λ ∈ N·Z + c_k) is
/// `N · G_k · e^{2πiλ·}` with `G_k = Σ_j filter_g[k][j] · χ_{[j/N,(j+1)/N)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualData {
    pub z: ComplexMatrix,
    pub filter_g: Vec<Vec<Complex64>>,
}

pub fn dual_basis(m: &MaskedMatrix) -> Result<DualData> {
    let n = m.modulus;
    if m.rows() != n || m.cols() != n {
        return Err(Error::UnsupportedConfiguration(format!(
            "dual basis needs a full {n}x{n} system, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let offsets = m.integer_offsets().ok_or_else(|| {
        Error::UnsupportedConfiguration("dual basis needs integer offsets".into())
    })?;
    if m.root_spec().map(|s| exact_rank_deficient(&s)) == Some(Ok(true)) {
        return Err(Error::SingularMatrix {
            sigma_min: crate::linalg::sigma_min(&m.matrix),
        });
    }
    let z = invert_with_tol(&m.matrix, DEFAULT_SINGULAR_TOL)?;
    Ok(dual_from_inverse(&offsets, z))
}

/// Assembles the filters `G_k[j] = e^{-2πi c_k j/N} z_{j,k}` for a given
/// candidate inverse `z`.
pub fn dual_from_inverse(offsets: &[usize], z: ComplexMatrix) -> DualData {
    let n = z.rows();
    let filter_g = offsets
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            (0..n)
                .map(|j| unit_phase((c * j) as i128, n as i128) * z.get(j, k))
                .collect()
        })
        .collect();
    DualData { z, filter_g }
}

/// Default number of periods on each side used by
/// [`verify_biorthogonality`].
pub const DEFAULT_BIORTHOGONALITY_TRUNCATION: i64 = 3;

/// Largest `|⟨dual_{k',m'}, primal_{k,m}⟩ - δ|` over all k, k' and
/// `|m|, |m'| ≤ truncation`, with exact interval integrals.
pub fn verify_biorthogonality(m: &MaskedMatrix, d: &DualData, truncation: i64) -> Result<f64> {
    let n = m.modulus;
    if d.z.rows() != n || d.z.cols() != n || d.filter_g.len() != n {
        return Err(Error::Incompatible(format!(
            "dual data of size {}x{} for modulus {n}",
            d.z.rows(),
            d.z.cols()
        )));
    }
    let offsets = m.integer_offsets().ok_or_else(|| {
        Error::UnsupportedConfiguration("biorthogonality check needs integer offsets".into())
    })?;
    if offsets.len() != n {
        return Err(Error::Incompatible("primal system is not N x N".into()));
    }
    let cell = |j: usize| {
        (
            Rational::new(j as i64, n as i64),
            Rational::new(j as i64 + 1, n as i64),
        )
    };
    let mut worst = 0.0f64;
    for (k_dual, g) in d.filter_g.iter().enumerate() {
        for (k, mask) in m.masks.iter().enumerate() {
            // ⟨ψ_{k',m'}, φ_{k,m}⟩ depends on m' - m only.
            for shift in -2 * truncation..=2 * truncation {
                let nu = n as i64 * shift + offsets[k_dual] as i64 - offsets[k] as i64;
                let inner: Complex64 = mask
                    .cells()
                    .iter()
                    .map(|&j| {
                        let (a, b) = cell(j);
                        g[j] * exp_integral(nu, a, b) * n as f64
                    })
                    .sum();
                let expected = if k == k_dual && shift == 0 { 1.0 } else { 0.0 };
                worst = worst.max((inner - Complex64::new(expected, 0.0)).norm());
            }
        }
    }
    Ok(worst)
}
