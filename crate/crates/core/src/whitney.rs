//! Whitney interpolation of flux cochains, velocity reconstruction, and the
//! error norms used by the convergence harness.
//!
//! The Whitney basis form of an edge `[v_i, v_j]` is
//! `mu_i d mu_j - mu_j d mu_i`; for a triangle in a tetrahedron it is
//! `2 (mu_i d mu_j ^ d mu_k - mu_j d mu_i ^ d mu_k + mu_k d mu_i ^ d mu_j)`.
//! Integrals of products of these over a cell reduce to barycentric moments
//! `int mu_p mu_q = V (1 + delta_pq) / ((n+1)(n+2))`, so error norms are
//! computed in closed form.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::complex::{Cochain, SimplicialComplex};
use crate::geometry::{self, DualMeasures, GeometryError};

#[derive(Debug, Clone, PartialEq)]
pub enum WhitneyError {
    PointOutsideCell { cell: usize },
    WrongDegree { expected: usize, got: usize },
    Geometry(GeometryError),
}

impl fmt::Display for WhitneyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhitneyError::PointOutsideCell { cell } => {
                write!(f, "point lies outside cell {cell}")
            }
            WhitneyError::WrongDegree { expected, got } => {
                write!(f, "form degree {got}, expected {expected}")
            }
            WhitneyError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WhitneyError {}

impl From<GeometryError> for WhitneyError {
    fn from(e: GeometryError) -> Self {
        WhitneyError::Geometry(e)
    }
}

/// Value of a differential form at a point, in the coordinate basis:
/// degree 1 in 2D is `(a, b)` for `a dx + b dy`; degree 2 in 3D is
/// `(a, b, c)` for `a dy^dz + b dz^dx + c dx^dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

/// Tolerance for the inside-cell test, relative to barycentric range.
const BARY_TOL: f64 = 1e-10;

/// One Whitney basis form of a cell face, written as a sum of
/// (local vertex, constant coefficient vector) pairs so that the form is
/// `sum_p mu_p C_p` in the coordinate basis.
fn face_form_terms(
    complex: &SimplicialComplex,
    grads: &[f64],
    face_local: &[usize],
) -> Vec<(usize, [f64; 3])> {
    let n = complex.dim();
    let g = |v: usize, d: usize| grads[v * n + d];
    match n {
        2 => {
            let (i, j) = (face_local[0], face_local[1]);
            let mut gi = [0.0; 3];
            let mut gj = [0.0; 3];
            for d in 0..2 {
                gi[d] = g(i, d);
                gj[d] = g(j, d);
            }
            let mut neg_gi = [0.0; 3];
            for d in 0..2 {
                neg_gi[d] = -gi[d];
            }
            vec![(i, gj), (j, neg_gi)]
        }
        3 => {
            let (i, j, k) = (face_local[0], face_local[1], face_local[2]);
            let cross = |a: usize, b: usize, s: f64| {
                let mut out = [0.0; 3];
                out[0] = s * 2.0 * (g(a, 1) * g(b, 2) - g(a, 2) * g(b, 1));
                out[1] = s * 2.0 * (g(a, 2) * g(b, 0) - g(a, 0) * g(b, 2));
                out[2] = s * 2.0 * (g(a, 0) * g(b, 1) - g(a, 1) * g(b, 0));
                out
            };
            vec![
                (i, cross(j, k, 1.0)),
                (j, cross(i, k, -1.0)),
                (k, cross(i, j, 1.0)),
            ]
        }
        _ => unreachable!("supported mesh dimensions are 2 and 3"),
    }
}

/// Local vertex positions of each (n-1)-face of a cell, with the global face
/// index; faces and positions follow the ascending tuple order.
fn cell_faces_local(complex: &SimplicialComplex, cell: usize) -> Vec<(usize, Vec<usize>)> {
    let n = complex.dim();
    let tuple = complex.simplex(n, cell);
    let mut out = Vec::with_capacity(n + 1);
    let mut buf = vec![0usize; n];
    for omit in 0..tuple.len() {
        let mut locals = Vec::with_capacity(n);
        let mut w = 0;
        for (pos, &v) in tuple.iter().enumerate() {
            if pos != omit {
                buf[w] = v;
                w += 1;
                locals.push(pos);
            }
        }
        let face = complex
            .simplex_index(n - 1, &buf)
            .expect("closed under faces");
        out.push((face, locals));
    }
    out
}

/// Evaluate the Whitney interpolant of an (n-1)-cochain at a point of a cell.
pub fn whitney_flux_at_point(
    complex: &SimplicialComplex,
    flux: &Cochain,
    cell: usize,
    point: &[f64],
) -> Result<FormValue, WhitneyError> {
    let n = complex.dim();
    if flux.degree != n - 1 {
        return Err(WhitneyError::WrongDegree {
            expected: n - 1,
            got: flux.degree,
        });
    }
    let bary = geometry::barycentric_coords(complex, cell, point)?;
    if bary.iter().any(|&b| b < -BARY_TOL) {
        return Err(WhitneyError::PointOutsideCell { cell });
    }
    let grads = geometry::barycentric_gradients(complex, cell)?;
    let mut coeffs = vec![0.0; n];
    for (face, locals) in cell_faces_local(complex, cell) {
        let value = flux.values[face];
        if value == 0.0 {
            continue;
        }
        for (p, c) in face_form_terms(complex, &grads, &locals) {
            for d in 0..n {
                coeffs[d] += value * bary[p] * c[d];
            }
        }
    }
    Ok(FormValue {
        degree: n - 1,
        coeffs,
    })
}

/// Convert a flux form value to the velocity vector it represents:
/// `(a, b) -> (b, -a)` in 2D and `(a, b, c) -> (a, b, c)` in 3D.
pub fn velocity_from_flux_form(value: &FormValue, n: usize) -> Result<[f64; 3], WhitneyError> {
    if value.degree != n - 1 {
        return Err(WhitneyError::WrongDegree {
            expected: n - 1,
            got: value.degree,
        });
    }
    match n {
        2 => Ok([value.coeffs[1], -value.coeffs[0], 0.0]),
        3 => Ok([value.coeffs[0], value.coeffs[1], value.coeffs[2]]),
        _ => Err(WhitneyError::WrongDegree {
            expected: n - 1,
            got: value.degree,
        }),
    }
}

/// Velocity at one point of a cell, straight from the flux cochain.
pub fn velocity_at_point(
    complex: &SimplicialComplex,
    flux: &Cochain,
    cell: usize,
    point: &[f64],
) -> Result<[f64; 3], WhitneyError> {
    let form = whitney_flux_at_point(complex, flux, cell, point)?;
    velocity_from_flux_form(&form, complex.dim())
}

/// Squared L2 norm over one cell of the Whitney interpolant with the given
/// per-face coefficients, via exact barycentric moment integrals.
fn cell_interpolant_norm2(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    cell: usize,
    face_coeff: &dyn Fn(usize) -> f64,
) -> Result<f64, WhitneyError> {
    let n = complex.dim();
    let grads = geometry::barycentric_gradients(complex, cell)?;
    let faces = cell_faces_local(complex, cell);
    // collect mu-weighted constant vectors of the combined form
    let mut terms: Vec<(usize, [f64; 3])> = Vec::new();
    for (face, locals) in &faces {
        let coeff = face_coeff(*face);
        if coeff == 0.0 {
            continue;
        }
        for (p, c) in face_form_terms(complex, &grads, locals) {
            terms.push((p, [coeff * c[0], coeff * c[1], coeff * c[2]]));
        }
    }
    let volume = measures.primal_volume(n, cell);
    let denom = ((n + 1) * (n + 2)) as f64;
    let mut norm2 = 0.0;
    for (p, cp) in &terms {
        for (q, cq) in &terms {
            let dot: f64 = cp.iter().zip(cq).map(|(a, b)| a * b).sum();
            let moment = volume * (1.0 + if p == q { 1.0 } else { 0.0 }) / denom;
            norm2 += dot * moment;
        }
    }
    Ok(norm2)
}

/// Relative L2 error of a computed flux cochain against exact per-face
/// values: both error and reference are Whitney-interpolated per cell and
/// integrated exactly. Boundary faces carry no error data (their fluxes are
/// prescribed), so their coefficients are zero in both norms.
pub fn flux_error_norm(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    computed: &Cochain,
    exact: &[f64],
) -> Result<f64, WhitneyError> {
    let n = complex.dim();
    if computed.degree != n - 1 {
        return Err(WhitneyError::WrongDegree {
            expected: n - 1,
            got: computed.degree,
        });
    }
    assert_eq!(exact.len(), complex.num_simplices(n - 1));
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for cell in 0..complex.num_simplices(n) {
        let err_coeff = |face: usize| {
            if complex.is_boundary_face(face) {
                0.0
            } else {
                computed.values[face] - exact[face]
            }
        };
        let ref_coeff = |face: usize| {
            if complex.is_boundary_face(face) {
                0.0
            } else {
                exact[face]
            }
        };
        err2 += cell_interpolant_norm2(complex, measures, cell, &err_coeff)?;
        ref2 += cell_interpolant_norm2(complex, measures, cell, &ref_coeff)?;
    }
    if ref2 == 0.0 {
        return Ok(libm::sqrt(err2));
    }
    Ok(libm::sqrt(err2 / ref2))
}

/// Relative cell-volume-weighted 2-norm of the pressure error at cell
/// centers, after aligning the additive gauge by the weighted mean
/// difference.
pub fn pressure_error_norm(
    measures: &DualMeasures,
    computed: &[f64],
    exact_at_centers: &[f64],
) -> f64 {
    let top = measures.primal_volumes_top();
    assert_eq!(computed.len(), top.len());
    assert_eq!(exact_at_centers.len(), top.len());
    let total: f64 = top.iter().sum();
    let shift: f64 = top
        .iter()
        .zip(computed.iter().zip(exact_at_centers))
        .map(|(w, (c, e))| w * (c - e))
        .sum::<f64>()
        / total;
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for ((w, c), e) in top.iter().zip(computed).zip(exact_at_centers) {
        let d = c - shift - e;
        err2 += w * d * d;
        ref2 += w * e * e;
    }
    if ref2 == 0.0 {
        return libm::sqrt(err2);
    }
    libm::sqrt(err2 / ref2)
}
