//! Diagonal discrete Hodge star operators.
//!
//! The forward star of degree k maps primal k-cochains to dual (n-k)-cochains
//! entrywise by the dual-to-primal volume ratio. Inverses carry the sign
//! `(-1)^{k(n-k)}` so the double-star identity survives discretization.
//! The permeability-weighted variant averages the material coefficient of the
//! two cells adjacent to a face, weighted by the dual edge portions.

use alloc::vec::Vec;
use core::fmt;

use crate::complex::SimplicialComplex;
use crate::geometry::DualMeasures;

#[derive(Debug, Clone, PartialEq)]
pub enum HodgeError {
    /// Inversion hit a zero diagonal entry (cocircular or degenerate
    /// Delaunay configuration); carries the simplex index.
    ZeroDiagonalEntry { index: usize },
    /// Material coefficient must be strictly positive.
    NonPositiveKappa { cell: usize },
    /// One kappa value per top cell is required.
    KappaLengthMismatch { expected: usize, got: usize },
    /// The coefficient jumps across this face but a coface does not contain
    /// its own circumcenter, so the weighted average loses positivity.
    InterfaceNotWellCentered { face: usize, portions: (f64, f64) },
}

impl fmt::Display for HodgeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HodgeError::ZeroDiagonalEntry { index } => {
                write!(f, "zero Hodge diagonal entry at simplex {index}")
            }
            HodgeError::NonPositiveKappa { cell } => {
                write!(f, "permeability must be positive (cell {cell})")
            }
            HodgeError::KappaLengthMismatch { expected, got } => {
                write!(f, "expected {expected} permeability values, got {got}")
            }
            HodgeError::InterfaceNotWellCentered { face, portions } => write!(
                f,
                "permeability jumps across face {face} but the dual edge portions ({:.3e}, {:.3e}) are not both positive",
                portions.0, portions.1
            ),
        }
    }
}

impl core::error::Error for HodgeError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarDirection {
    PrimalToDual,
    DualToPrimal,
}

/// Diagonal operator between a primal cochain space and its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    pub degree: usize,
    pub direction: StarDirection,
    pub diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.diag.len());
        self.diag.iter().zip(values).map(|(d, v)| d * v).collect()
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// Forward Hodge star of degree k: `diag[i] = |dual sigma_i| / |sigma_i|`.
/// Entries may be zero or negative on degenerate or non-Delaunay meshes;
/// inversion guards against that separately.
pub fn hodge_matrix(measures: &DualMeasures, k: usize) -> DiagonalOperator {
    let diag = measures
        .dual_volumes(k)
        .iter()
        .zip(measures.primal_volumes(k))
        .map(|(d, p)| d / p)
        .collect();
    DiagonalOperator {
        degree: k,
        direction: StarDirection::PrimalToDual,
        diag,
    }
}

/// Signed inverse of a forward star: `(-1)^{k(n-k)} / diag[i]`.
pub fn inverse_hodge_with_sign(
    star: &DiagonalOperator,
    k: usize,
    n: usize,
) -> Result<DiagonalOperator, HodgeError> {
    let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
    let mut diag = Vec::with_capacity(star.diag.len());
    for (i, &d) in star.diag.iter().enumerate() {
        if d == 0.0 {
            return Err(HodgeError::ZeroDiagonalEntry { index: i });
        }
        diag.push(sign / d);
    }
    Ok(DiagonalOperator {
        degree: n - k,
        direction: StarDirection::DualToPrimal,
        diag,
    })
}

/// Pieces of the permeability-weighted entry for one (n-1)-face:
/// primal measure, signed dual length, and the portion-weighted coefficient
/// sum over cofaces.
pub(crate) struct HeteroParts {
    pub area: f64,
    pub dual_len: f64,
    pub weighted: f64,
}

pub(crate) fn hetero_parts(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    kappa: &[f64],
    face: usize,
) -> Result<HeteroParts, HodgeError> {
    let n = complex.dim();
    let (first, second) = measures.side_portions(face);
    let area = measures.primal_volume(n - 1, face);
    let dual_len = measures.dual_volume(n - 1, face);
    let parts = match second {
        Some(second) => {
            let k_first = kappa[first.cell];
            let k_second = kappa[second.cell];
            let jump = k_first != k_second;
            if jump {
                let tol = measures.dual_zero_tol(face);
                if first.length <= tol || second.length <= tol {
                    return Err(HodgeError::InterfaceNotWellCentered {
                        face,
                        portions: (first.length, second.length),
                    });
                }
            }
            HeteroParts {
                area,
                dual_len,
                weighted: k_first * first.length + k_second * second.length,
            }
        }
        None => HeteroParts {
            area,
            dual_len,
            weighted: kappa[first.cell] * first.length,
        },
    };
    Ok(parts)
}

/// Inverse Hodge star on (n-1)-cochains weighted by a per-cell permeability:
/// for an interior face the entry is
/// `(|sigma| / |dual sigma|) * (k+ l+ + k- l-) / |dual sigma|`,
/// which reduces to `kappa |sigma| / |dual sigma|` for uniform kappa. For a
/// boundary face the dual edge lies in the single coface and the one-sided
/// limit of the same expression applies.
pub fn hetero_hodge_inverse(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    kappa: &[f64],
) -> Result<DiagonalOperator, HodgeError> {
    let n = complex.dim();
    check_kappa(complex, kappa)?;
    let count = complex.num_simplices(n - 1);
    let mut diag = Vec::with_capacity(count);
    for face in 0..count {
        let parts = hetero_parts(complex, measures, kappa, face)?;
        if measures.is_zero_dual_face(face) {
            return Err(HodgeError::ZeroDiagonalEntry { index: face });
        }
        diag.push(parts.area / parts.dual_len * (parts.weighted / parts.dual_len));
    }
    Ok(DiagonalOperator {
        degree: 1,
        direction: StarDirection::DualToPrimal,
        diag,
    })
}

pub(crate) fn check_kappa(complex: &SimplicialComplex, kappa: &[f64]) -> Result<(), HodgeError> {
    let n_cells = complex.num_simplices(complex.dim());
    if kappa.len() != n_cells {
        return Err(HodgeError::KappaLengthMismatch {
            expected: n_cells,
            got: kappa.len(),
        });
    }
    for (cell, &k) in kappa.iter().enumerate() {
        if !(k > 0.0) {
            return Err(HodgeError::NonPositiveKappa { cell });
        }
    }
    Ok(())
}
