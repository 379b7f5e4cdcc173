//! Mixed Darcy flow on a simplicial complex: flux unknowns on primal
//! (n-1)-simplices, pressure unknowns at the circumcenters of top cells.
//!
//! The continuous model is `v + (kappa/mu) grad p = 0`, `div v = phi` with
//! the normal velocity prescribed on the whole boundary. Discretized with
//! cochains and diagonal Hodge stars this becomes the saddle system
//!
//! ```text
//! [ -(mu/kappa) M_{n-1}   D_{n-1}^T ] [f]   [ 0      ]
//! [  D_{n-1}              0         ] [p] = [ phi w  ]
//! ```
//!
//! adjusted for the known boundary fluxes and one pinned pressure. The
//! second block row is the discrete continuity equation, so mass balance
//! holds cell by cell for any solution the solvers accept.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::complex::{Cochain, CochainKind, SimplicialComplex};
use crate::geometry::{DualMeasures, GeometryError};
use crate::hodge::{self, HodgeError};
use crate::linalg::{self, Csr, LinalgError, SaddleSystem, SchurOptions, SolveStats};
use crate::quad;

/// Relative tolerance for the data consistency requirement
/// (total source must equal total boundary flux).
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DarcyError {
    NonPositiveViscosity,
    SourceLengthMismatch {
        expected: usize,
        got: usize,
    },
    BoundaryLengthMismatch {
        expected: usize,
        got: usize,
    },
    /// Total source and total boundary flux disagree; the pure-flux boundary
    /// problem has no solution then, so this is a hard error.
    InconsistentData {
        source_total: f64,
        boundary_total: f64,
    },
    /// The mesh has more than one connected component; pressure would need
    /// one pin per component.
    MultipleComponents,
    PinOutOfRange {
        cell: usize,
    },
    NotBoundaryFace {
        face: usize,
    },
    DuplicateKnownFlux {
        face: usize,
    },
    KnownFluxOutOfRange {
        face: usize,
    },
    /// The known-flux set must be exactly the boundary faces.
    KnownSetMismatch,
    FlatEmbeddingRequired,
    Geometry(GeometryError),
    Hodge(HodgeError),
    Solver(LinalgError),
}

impl fmt::Display for DarcyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DarcyError::NonPositiveViscosity => write!(f, "viscosity must be positive"),
            DarcyError::SourceLengthMismatch { expected, got } => {
                write!(f, "source cochain has {got} values, expected {expected}")
            }
            DarcyError::BoundaryLengthMismatch { expected, got } => {
                write!(f, "boundary flux has {got} values, expected {expected}")
            }
            DarcyError::InconsistentData {
                source_total,
                boundary_total,
            } => write!(
                f,
                "inconsistent data: total source {source_total:.6e} != total boundary flux {boundary_total:.6e}"
            ),
            DarcyError::MultipleComponents => {
                write!(f, "mesh has more than one connected component")
            }
            DarcyError::PinOutOfRange { cell } => write!(f, "pinned cell {cell} out of range"),
            DarcyError::NotBoundaryFace { face } => {
                write!(f, "face {face} is not a boundary face")
            }
            DarcyError::DuplicateKnownFlux { face } => {
                write!(f, "duplicate known flux for face {face}")
            }
            DarcyError::KnownFluxOutOfRange { face } => {
                write!(f, "known flux index {face} out of range")
            }
            DarcyError::KnownSetMismatch => {
                write!(f, "known fluxes must cover exactly the boundary faces")
            }
            DarcyError::FlatEmbeddingRequired => {
                write!(f, "flux discretization requires a flat embedding")
            }
            DarcyError::Geometry(e) => write!(f, "{e}"),
            DarcyError::Hodge(e) => write!(f, "{e}"),
            DarcyError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DarcyError {}

impl From<GeometryError> for DarcyError {
    fn from(e: GeometryError) -> Self {
        DarcyError::Geometry(e)
    }
}

impl From<HodgeError> for DarcyError {
    fn from(e: HodgeError) -> Self {
        DarcyError::Hodge(e)
    }
}

impl From<LinalgError> for DarcyError {
    fn from(e: LinalgError) -> Self {
        DarcyError::Solver(e)
    }
}

/// Integrals of the flux form of a velocity field over the given
/// (n-1)-simplices, taken with the simplices' dictionary orientation.
///
/// In 2D the edge integrand is `v . (t_y, -t_x)` for the edge tangent `t`;
/// in 3D it is `v . ((b-a) x (c-a))` over the reference triangle. Constant
/// fields integrate exactly.
pub fn de_rham_flux(
    complex: &SimplicialComplex,
    faces: &[usize],
    mut velocity: impl FnMut(&[f64]) -> [f64; 3],
) -> Result<Vec<f64>, DarcyError> {
    let n = complex.dim();
    if complex.embed_dim() != n {
        return Err(DarcyError::FlatEmbeddingRequired);
    }
    let mut out = Vec::with_capacity(faces.len());
    for &face in faces {
        let tuple = complex.simplex(n - 1, face);
        match n {
            2 => {
                let a = complex.vertex(tuple[0]);
                let b = complex.vertex(tuple[1]);
                let t = [b[0] - a[0], b[1] - a[1]];
                let pts = [a, b];
                let val = quad::integrate_simplex(&pts, 1.0, |p| {
                    let v = velocity(p);
                    v[0] * t[1] - v[1] * t[0]
                });
                out.push(val);
            }
            3 => {
                let a = complex.vertex(tuple[0]);
                let b = complex.vertex(tuple[1]);
                let c = complex.vertex(tuple[2]);
                let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let normal = [
                    e1[1] * e2[2] - e1[2] * e2[1],
                    e1[2] * e2[0] - e1[0] * e2[2],
                    e1[0] * e2[1] - e1[1] * e2[0],
                ];
                let pts = [a, b, c];
                // reference-triangle area 1/2 carries the parametrization
                let val = quad::integrate_simplex(&pts, 0.5, |p| {
                    let v = velocity(p);
                    v[0] * normal[0] + v[1] * normal[1] + v[2] * normal[2]
                });
                out.push(val);
            }
            _ => return Err(DarcyError::FlatEmbeddingRequired),
        }
    }
    Ok(out)
}

/// Boundary flux data from a velocity field, one value per boundary face in
/// `complex.boundary_faces()` order.
pub fn discretize_boundary_flux(
    complex: &SimplicialComplex,
    velocity: impl FnMut(&[f64]) -> [f64; 3],
) -> Result<Vec<f64>, DarcyError> {
    de_rham_flux(complex, complex.boundary_faces(), velocity)
}

/// Boundary flux data from explicit per-face values.
pub fn boundary_flux_from_values(
    complex: &SimplicialComplex,
    values: &[(usize, f64)],
) -> Result<Vec<f64>, DarcyError> {
    let boundary = complex.boundary_faces();
    let mut out = vec![None; boundary.len()];
    for &(face, v) in values {
        let slot = boundary
            .binary_search(&face)
            .map_err(|_| DarcyError::NotBoundaryFace { face })?;
        if out[slot].replace(v).is_some() {
            return Err(DarcyError::DuplicateKnownFlux { face });
        }
    }
    Ok(out.into_iter().map(|v| v.unwrap_or(0.0)).collect())
}

/// Integrate a scalar source density over every top cell, signed with the
/// mesh orientation.
pub fn discretize_source(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    mut phi: impl FnMut(&[f64]) -> f64,
) -> Cochain {
    let n = complex.dim();
    let mut values = Vec::with_capacity(complex.num_simplices(n));
    for cell in 0..complex.num_simplices(n) {
        let tuple = complex.simplex(n, cell);
        let val = match n {
            2 => {
                let pts = [
                    complex.vertex(tuple[0]),
                    complex.vertex(tuple[1]),
                    complex.vertex(tuple[2]),
                ];
                quad::integrate_simplex(&pts, measures.primal_volume(n, cell), &mut phi)
            }
            3 => {
                let pts = [
                    complex.vertex(tuple[0]),
                    complex.vertex(tuple[1]),
                    complex.vertex(tuple[2]),
                    complex.vertex(tuple[3]),
                ];
                quad::integrate_simplex(&pts, measures.primal_volume(n, cell), &mut phi)
            }
            _ => unreachable!("supported mesh dimensions are 2 and 3"),
        };
        values.push(val);
    }
    Cochain::new(n, CochainKind::Primal, values)
}

/// A complete flow problem over shared, immutable mesh data.
#[derive(Debug)]
pub struct DarcyProblem<'a> {
    complex: &'a SimplicialComplex,
    measures: &'a DualMeasures,
    mu: f64,
    kappa: Vec<f64>,
    source: Cochain,
    boundary_flux: Vec<f64>,
    pin: (usize, f64),
}

impl<'a> DarcyProblem<'a> {
    /// Validates positivity of the material data, the consistency condition
    /// between source and boundary flux, and that the mesh is connected.
    pub fn new(
        complex: &'a SimplicialComplex,
        measures: &'a DualMeasures,
        mu: f64,
        kappa: Vec<f64>,
        source: Cochain,
        boundary_flux: Vec<f64>,
        pin: (usize, f64),
    ) -> Result<Self, DarcyError> {
        let n = complex.dim();
        if !(mu > 0.0) {
            return Err(DarcyError::NonPositiveViscosity);
        }
        hodge::check_kappa(complex, &kappa)?;
        if source.values.len() != complex.num_simplices(n) {
            return Err(DarcyError::SourceLengthMismatch {
                expected: complex.num_simplices(n),
                got: source.values.len(),
            });
        }
        if boundary_flux.len() != complex.boundary_faces().len() {
            return Err(DarcyError::BoundaryLengthMismatch {
                expected: complex.boundary_faces().len(),
                got: boundary_flux.len(),
            });
        }
        if pin.0 >= complex.num_simplices(n) {
            return Err(DarcyError::PinOutOfRange { cell: pin.0 });
        }
        if !is_connected(complex) {
            return Err(DarcyError::MultipleComponents);
        }

        // Stokes consistency: sum of sources equals the signed total of the
        // prescribed boundary fluxes.
        let source_total: f64 = source.values.iter().sum();
        let mut boundary_total = 0.0;
        let mut scale: f64 = source.values.iter().map(|v| v.abs()).sum();
        for (&face, &psi) in complex.boundary_faces().iter().zip(&boundary_flux) {
            let (coface, _) = complex.face_cofaces(face);
            boundary_total += coface.sign as f64 * psi;
            scale += psi.abs();
        }
        if (source_total - boundary_total).abs() > CONSISTENCY_TOL * scale {
            return Err(DarcyError::InconsistentData {
                source_total,
                boundary_total,
            });
        }

        Ok(DarcyProblem {
            complex,
            measures,
            mu,
            kappa,
            source,
            boundary_flux,
            pin,
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        self.complex
    }

    pub fn measures(&self) -> &DualMeasures {
        self.measures
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn source(&self) -> &Cochain {
        &self.source
    }

    pub fn boundary_flux(&self) -> &[f64] {
        &self.boundary_flux
    }

    pub fn pin(&self) -> (usize, f64) {
        self.pin
    }
}

fn is_connected(complex: &SimplicialComplex) -> bool {
    let n = complex.dim();
    let n_cells = complex.num_simplices(n);
    if n_cells == 0 {
        return true;
    }
    let mut seen = vec![false; n_cells];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(cell) = stack.pop() {
        let tuple = complex.simplex(n, cell);
        let mut buf = vec![0usize; n];
        for omit in 0..tuple.len() {
            let mut w = 0;
            for (j, &v) in tuple.iter().enumerate() {
                if j != omit {
                    buf[w] = v;
                    w += 1;
                }
            }
            let face = complex.simplex_index(n - 1, &buf).unwrap();
            let (first, second) = complex.face_cofaces(face);
            for other in [Some(first), second].into_iter().flatten() {
                if !seen[other.cell] {
                    seen[other.cell] = true;
                    count += 1;
                    stack.push(other.cell);
                }
            }
        }
    }
    count == n_cells
}

/// The full block system before boundary and pin elimination.
#[derive(Debug, Clone)]
pub struct FullSaddle {
    /// `-(mu/kappa) M_{n-1}` entries, permeability-weighted across faces;
    /// zero where the dual edge degenerates (cocircular cell pairs).
    pub a_diag: Vec<f64>,
    /// `D_{n-1}` as floats; the transpose is the pressure-gradient block.
    pub b: Csr<f64>,
    pub rhs_top: Vec<f64>,
    pub rhs_bottom: Vec<f64>,
}

/// Assemble the saddle system for a problem. The diagonal entry of a face is
/// `-mu |dual|^2 / (|sigma| sum_s kappa_s l_s)`, the negative reciprocal of
/// the permeability-weighted inverse star entry; with uniform kappa this is
/// exactly `-(mu/kappa) |dual| / |sigma|`.
pub fn assemble_saddle_system(problem: &DarcyProblem<'_>) -> Result<FullSaddle, DarcyError> {
    let complex = problem.complex;
    let measures = problem.measures;
    let n = complex.dim();
    let n_faces = complex.num_simplices(n - 1);

    let mut a_diag = Vec::with_capacity(n_faces);
    for face in 0..n_faces {
        let parts = hodge::hetero_parts(complex, measures, &problem.kappa, face)?;
        if measures.is_zero_dual_face(face) {
            a_diag.push(0.0);
        } else {
            debug_assert!(parts.weighted != 0.0);
            a_diag.push(
                -problem.mu * parts.dual_len * parts.dual_len / (parts.area * parts.weighted),
            );
        }
    }

    let b = complex
        .exterior_derivative_matrix(n - 1)
        .expect("n-1 < n")
        .to_f64();
    Ok(FullSaddle {
        a_diag,
        b,
        rhs_top: vec![0.0; n_faces],
        rhs_bottom: problem.source.values.clone(),
    })
}

/// Bookkeeping to reassemble full flux and pressure vectors from a reduced
/// solution.
#[derive(Debug, Clone)]
pub struct Recovery {
    n_faces: usize,
    n_cells: usize,
    interior_faces: Vec<usize>,
    known: Vec<(usize, f64)>,
    kept_cells: Vec<usize>,
    pin: Option<(usize, f64)>,
}

impl Recovery {
    pub fn recover(&self, flux_reduced: &[f64], pressure_reduced: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(flux_reduced.len(), self.interior_faces.len());
        assert_eq!(pressure_reduced.len(), self.kept_cells.len());
        let mut flux = vec![0.0; self.n_faces];
        for (&face, &v) in self.interior_faces.iter().zip(flux_reduced) {
            flux[face] = v;
        }
        for &(face, v) in &self.known {
            flux[face] = v;
        }
        let mut pressure = vec![0.0; self.n_cells];
        for (&cell, &v) in self.kept_cells.iter().zip(pressure_reduced) {
            pressure[cell] = v;
        }
        if let Some((cell, value)) = self.pin {
            pressure[cell] = value;
        }
        (flux, pressure)
    }
}

/// Move the known boundary fluxes and the pinned pressure to the right hand
/// side and drop their rows and columns. The reduced system keeps the
/// `[A Bᵀ; B 0]` shape over the surviving blocks.
///
/// The dropped continuity row (the pinned cell) is the redundant one: by the
/// consistency condition it is implied by the others.
pub fn eliminate_knowns(
    complex: &SimplicialComplex,
    full: &FullSaddle,
    known_fluxes: &[(usize, f64)],
    pin: Option<(usize, f64)>,
) -> Result<(SaddleSystem, Recovery), DarcyError> {
    let n_faces = full.a_diag.len();
    let n_cells = full.b.nrows();

    let mut known_value: Vec<Option<f64>> = vec![None; n_faces];
    for &(face, v) in known_fluxes {
        if face >= n_faces {
            return Err(DarcyError::KnownFluxOutOfRange { face });
        }
        if !complex.is_boundary_face(face) {
            return Err(DarcyError::NotBoundaryFace { face });
        }
        if known_value[face].replace(v).is_some() {
            return Err(DarcyError::DuplicateKnownFlux { face });
        }
    }
    if known_fluxes.len() != complex.boundary_faces().len() {
        return Err(DarcyError::KnownSetMismatch);
    }
    if let Some((cell, _)) = pin {
        if cell >= n_cells {
            return Err(DarcyError::PinOutOfRange { cell });
        }
    }

    let interior_faces: Vec<usize> = (0..n_faces).filter(|&f| known_value[f].is_none()).collect();
    let mut face_map = vec![usize::MAX; n_faces];
    for (new, &old) in interior_faces.iter().enumerate() {
        face_map[old] = new;
    }
    let kept_cells: Vec<usize> = (0..n_cells)
        .filter(|&c| pin.map_or(true, |(pc, _)| c != pc))
        .collect();

    let a_diag: Vec<f64> = interior_faces.iter().map(|&f| full.a_diag[f]).collect();

    let mut rhs_top: Vec<f64> = interior_faces.iter().map(|&f| full.rhs_top[f]).collect();
    if let Some((pin_cell, pin_value)) = pin {
        // the pinned pressure column is a Bᵀ column, i.e. the pin row of B
        let (cols, vals) = full.b.row(pin_cell);
        for (&face, &v) in cols.iter().zip(vals) {
            if let Some(&new) = face_map.get(face).filter(|&&m| m != usize::MAX) {
                rhs_top[new] -= pin_value * v;
            }
        }
    }

    let mut triplets = Vec::new();
    let mut rhs_bottom = Vec::with_capacity(kept_cells.len());
    for (new_row, &cell) in kept_cells.iter().enumerate() {
        let mut rhs = full.rhs_bottom[cell];
        let (cols, vals) = full.b.row(cell);
        for (&face, &v) in cols.iter().zip(vals) {
            match known_value[face] {
                Some(known) => rhs -= known * v,
                None => triplets.push((new_row, face_map[face], v)),
            }
        }
        rhs_bottom.push(rhs);
    }

    let sys = SaddleSystem {
        a_diag,
        b: Csr::from_triplets(kept_cells.len(), interior_faces.len(), triplets),
        rhs_top,
        rhs_bottom,
    };
    let mut known: Vec<(usize, f64)> = known_value
        .iter()
        .enumerate()
        .filter_map(|(f, v)| v.map(|v| (f, v)))
        .collect();
    known.sort_by_key(|&(f, _)| f);
    let recovery = Recovery {
        n_faces,
        n_cells,
        interior_faces,
        known,
        kept_cells,
        pin,
    };
    Ok((sys, recovery))
}

/// Which linear solver runs the reduced system.
#[derive(Debug, Clone, Copy)]
pub enum SolverChoice {
    /// Schur complement with conjugate gradients when the diagonal block is
    /// invertible, dense direct otherwise.
    Auto,
    Schur(SchurOptions),
    Direct {
        dense_limit: usize,
    },
}

impl Default for SolverChoice {
    fn default() -> Self {
        SolverChoice::Auto
    }
}

/// Flux cochain, pressure at circumcenters, and solve diagnostics.
#[derive(Debug, Clone)]
pub struct DarcySolution {
    /// Primal (n-1)-cochain, including the prescribed boundary values.
    pub flux: Cochain,
    /// Dual 0-cochain: one pressure per top cell, located at its center.
    pub pressure: Cochain,
    pub stats: DarcyStats,
}

#[derive(Debug, Clone)]
pub struct DarcyStats {
    pub used_direct: bool,
    pub solve: SolveStats,
    pub mass_balance_max: f64,
}

/// Assemble, eliminate, solve, recover, and audit local mass balance.
pub fn solve_darcy(
    problem: &DarcyProblem<'_>,
    choice: SolverChoice,
) -> Result<DarcySolution, DarcyError> {
    let complex = problem.complex;
    let n = complex.dim();
    let full = assemble_saddle_system(problem)?;
    let knowns: Vec<(usize, f64)> = complex
        .boundary_faces()
        .iter()
        .copied()
        .zip(problem.boundary_flux.iter().copied())
        .collect();
    let (sys, recovery) = eliminate_knowns(complex, &full, &knowns, Some(problem.pin))?;

    // the Schur route needs A negative definite; zero entries (degenerate
    // duals) or positive ones (non-Delaunay faces) force the dense path
    let schur_ok = sys.a_diag.iter().all(|&a| a < 0.0);
    let (f_red, p_red, stats, used_direct) = match choice {
        SolverChoice::Auto => {
            if schur_ok {
                let (f, p, s) = linalg::schur_solve(&sys, SchurOptions::default())?;
                (f, p, s, false)
            } else {
                let (f, p, s) = linalg::direct_solve(&sys, linalg::DENSE_LIMIT)?;
                (f, p, s, true)
            }
        }
        SolverChoice::Schur(opts) => {
            let (f, p, s) = linalg::schur_solve(&sys, opts)?;
            (f, p, s, false)
        }
        SolverChoice::Direct { dense_limit } => {
            let (f, p, s) = linalg::direct_solve(&sys, dense_limit)?;
            (f, p, s, true)
        }
    };

    let (flux_values, pressure_values) = recovery.recover(&f_red, &p_red);
    let flux = Cochain::new(n - 1, CochainKind::Primal, flux_values);
    let pressure = Cochain::new(0, CochainKind::Dual, pressure_values);
    let solution = DarcySolution {
        flux,
        pressure,
        stats: DarcyStats {
            used_direct,
            solve: stats,
            mass_balance_max: 0.0,
        },
    };
    let (_, max_residual) = mass_balance_residual(problem, &solution);
    let mut solution = solution;
    solution.stats.mass_balance_max = max_residual;
    Ok(solution)
}

/// Per-cell continuity residual `D_{n-1} f - phi w` and its max norm.
pub fn mass_balance_residual(
    problem: &DarcyProblem<'_>,
    solution: &DarcySolution,
) -> (Vec<f64>, f64) {
    let complex = problem.complex;
    let n = complex.dim();
    let d = complex
        .exterior_derivative_matrix(n - 1)
        .expect("n-1 < n")
        .to_f64();
    let mut out = vec![0.0; complex.num_simplices(n)];
    d.matvec(&solution.flux.values, &mut out);
    for (r, s) in out.iter_mut().zip(&problem.source.values) {
        *r -= s;
    }
    let max = out.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (out, max)
}
