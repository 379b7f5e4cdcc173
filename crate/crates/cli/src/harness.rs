//! Reusable experiment runners behind the command line: patch tests, the
//! discontinuous and layered permeability setups, the center-placement foil,
//! and the mesh refinement study. The subcommands print what these return;
//! the verification suite asserts on it.

use std::fmt;

use dec_core::complex::CochainKind;
use dec_core::darcy::{self, DarcyError, SolverChoice};
use dec_core::geometry::{self, CenterRule};
use dec_core::whitney;
use dec_core::{DarcyProblem, DualMeasures, SimplicialComplex};

use crate::cases::{self, AnalyticCase, KappaSpec};
use crate::meshio::{self, MeshIoError, RawMesh};

#[derive(Debug)]
pub enum HarnessError {
    Darcy(DarcyError),
    MeshIo(MeshIoError),
    Geometry(geometry::GeometryError),
    /// A generated mesh failed a structural requirement of the study.
    BadMesh(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Darcy(e) => write!(f, "{e}"),
            HarnessError::MeshIo(e) => write!(f, "{e}"),
            HarnessError::Geometry(e) => write!(f, "{e}"),
            HarnessError::BadMesh(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<DarcyError> for HarnessError {
    fn from(e: DarcyError) -> Self {
        HarnessError::Darcy(e)
    }
}

impl From<MeshIoError> for HarnessError {
    fn from(e: MeshIoError) -> Self {
        HarnessError::MeshIo(e)
    }
}

impl From<geometry::GeometryError> for HarnessError {
    fn from(e: geometry::GeometryError) -> Self {
        HarnessError::Geometry(e)
    }
}

/// Velocity reconstructed at every cell barycenter.
pub fn velocities_at_barycenters(
    complex: &SimplicialComplex,
    flux: &dec_core::Cochain,
) -> Result<Vec<[f64; 3]>, HarnessError> {
    let n = complex.dim();
    let mut out = Vec::with_capacity(complex.num_simplices(n));
    for cell in 0..complex.num_simplices(n) {
        let b = cases::barycenter(complex, cell);
        let v = whitney::velocity_at_point(complex, flux, cell, &b[..complex.embed_dim()])
            .map_err(|e| HarnessError::BadMesh(e.to_string()))?;
        out.push(v);
    }
    Ok(out)
}

pub fn max_edge_length(complex: &SimplicialComplex) -> f64 {
    let mut h: f64 = 0.0;
    for e in 0..complex.num_simplices(1) {
        let t = complex.simplex(1, e);
        let a = complex.vertex(t[0]);
        let b = complex.vertex(t[1]);
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        h = h.max(d2);
    }
    h.sqrt()
}

/// Constant-velocity patch test: zero source, uniform material, boundary
/// data from the given velocity. The discrete solution must reproduce the
/// affine pressure and the exact face fluxes.
#[derive(Debug, Clone)]
pub struct PatchReport {
    /// max |p - p_exact| / max |p_exact| over cells
    pub pressure_rel_err: f64,
    /// max |f - f_exact| over interior faces, relative to the largest exact
    /// boundary flux magnitude
    pub flux_rel_err: f64,
    pub mass_balance_max: f64,
    pub used_direct: bool,
    pub cg_iterations: usize,
}

pub fn run_patch_test(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    velocity: [f64; 3],
    mu: f64,
    kappa: f64,
    pin: (usize, f64),
    choice: SolverChoice,
) -> Result<PatchReport, HarnessError> {
    let n = complex.dim();
    let faces: Vec<usize> = (0..complex.num_simplices(n - 1)).collect();
    let exact_flux = darcy::de_rham_flux(complex, &faces, |_| velocity)?;
    let boundary_flux: Vec<f64> = complex
        .boundary_faces()
        .iter()
        .map(|&f| exact_flux[f])
        .collect();
    let source = complex.zero_cochain(n, CochainKind::Primal);
    let n_cells = complex.num_simplices(n);
    let problem = DarcyProblem::new(
        complex,
        measures,
        mu,
        vec![kappa; n_cells],
        source,
        boundary_flux,
        pin,
    )?;
    let solution = darcy::solve_darcy(&problem, choice)?;

    // exact pressure: p = -(mu/kappa) v.x + c, gauge fixed at the pin cell
    let grad = mu / kappa;
    let p_exact = |cell: usize| {
        let c = measures.center(n, cell);
        let dot: f64 = c.iter().zip(&velocity).map(|(x, v)| x * v).sum();
        -grad * dot
    };
    let offset = pin.1 - p_exact(pin.0);
    let mut max_err: f64 = 0.0;
    let mut max_exact: f64 = 0.0;
    for cell in 0..n_cells {
        let exact = p_exact(cell) + offset;
        max_err = max_err.max((solution.pressure.values[cell] - exact).abs());
        max_exact = max_exact.max(exact.abs());
    }
    let pressure_rel_err = if max_exact > 0.0 {
        max_err / max_exact
    } else {
        max_err
    };

    let scale = exact_flux
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut flux_err: f64 = 0.0;
    for face in 0..faces.len() {
        if !complex.is_boundary_face(face) {
            flux_err = flux_err.max((solution.flux.values[face] - exact_flux[face]).abs());
        }
    }

    Ok(PatchReport {
        pressure_rel_err,
        flux_rel_err: flux_err / scale,
        mass_balance_max: solution.stats.mass_balance_max,
        used_direct: solution.stats.used_direct,
        cg_iterations: solution.stats.solve.cg_iterations,
    })
}

/// Least-squares line fit returning (slope, intercept, max residual, R^2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut max_abs = 0.0f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        max_abs = max_abs.max(r.abs());
        ss_res += r * r;
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, max_abs, r2)
}

/// Discontinuous permeability across a vertical interface, boundary data
/// from the constant velocity (1,0). The velocity stays constant and the
/// pressure is piecewise linear in x with slope `-mu/kappa` on each side and
/// a jump at the interface.
#[derive(Debug, Clone)]
pub struct SplitReport {
    pub velocity_max_err: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    pub left_fit_residual: f64,
    pub right_fit_residual: f64,
    /// pressure offset between the side fits evaluated at the interface
    pub jump_at_interface: f64,
    pub mass_balance_max: f64,
}

pub fn run_split_case(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    split_at: f64,
    kappa_pair: (f64, f64),
    mu: f64,
    choice: SolverChoice,
) -> Result<SplitReport, HarnessError> {
    let n = complex.dim();
    let spec = KappaSpec::SplitX {
        at: split_at,
        left: kappa_pair.0,
        right: kappa_pair.1,
    };
    let kappa = spec
        .kappa_for(complex, None)
        .map_err(HarnessError::BadMesh)?;
    let interfaces = cases::interface_faces(complex, &kappa);
    let report = geometry::is_well_centered_interface(complex, measures, &interfaces)?;
    if !report.ok {
        return Err(HarnessError::BadMesh(format!(
            "{} interface faces are not well-centered",
            report.failing_faces.len()
        )));
    }

    let case = AnalyticCase::ConstantX;
    let data = cases::build_case_data(complex, measures, case)?;
    let problem = DarcyProblem::new(
        complex,
        measures,
        mu,
        kappa.clone(),
        data.source,
        data.boundary_flux,
        (0, 0.0),
    )?;
    let solution = darcy::solve_darcy(&problem, choice)?;

    let velocities = velocities_at_barycenters(complex, &solution.flux)?;
    let mut velocity_max_err: f64 = 0.0;
    for v in &velocities {
        velocity_max_err = velocity_max_err.max((v[0] - 1.0).abs()).max(v[1].abs());
    }

    let mut left: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut right: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for cell in 0..complex.num_simplices(n) {
        let x = measures.center(n, cell)[0];
        let p = solution.pressure.values[cell];
        if cases::barycenter(complex, cell)[0] < split_at {
            left.0.push(x);
            left.1.push(p);
        } else {
            right.0.push(x);
            right.1.push(p);
        }
    }
    let (ls, li, lres, _) = linear_fit(&left.0, &left.1);
    let (rs, ri, rres, _) = linear_fit(&right.0, &right.1);

    Ok(SplitReport {
        velocity_max_err,
        left_slope: ls,
        right_slope: rs,
        left_fit_residual: lres,
        right_fit_residual: rres,
        jump_at_interface: (rs * split_at + ri) - (ls * split_at + li),
        mass_balance_max: solution.stats.mass_balance_max,
    })
}

/// Layered medium driven by the per-layer consistent inflow: within each
/// layer the reconstructed velocity is horizontal and constant and the
/// pressure is linear in x.
#[derive(Debug, Clone)]
pub struct LayeredReport {
    pub vy_max: f64,
    /// per layer: (mean vx, max |vx - mean| / |mean|)
    pub layer_vx: Vec<(f64, f64)>,
    /// per layer: R^2 of the linear fit p(x)
    pub layer_pressure_r2: Vec<f64>,
    pub mass_balance_max: f64,
}

pub fn run_layered_case(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    layer_kappas: &[f64],
    mu: f64,
    choice: SolverChoice,
) -> Result<LayeredReport, HarnessError> {
    let n = complex.dim();
    let spec = KappaSpec::LayersY(layer_kappas.to_vec());
    let kappa = spec
        .kappa_for(complex, None)
        .map_err(HarnessError::BadMesh)?;
    let interfaces = cases::interface_faces(complex, &kappa);
    let report = geometry::is_well_centered_interface(complex, measures, &interfaces)?;
    if !report.ok {
        return Err(HarnessError::BadMesh(format!(
            "{} interface faces are not well-centered",
            report.failing_faces.len()
        )));
    }

    let boundary_flux = cases::layered_boundary_flux(complex, &kappa)?;
    let source = complex.zero_cochain(n, CochainKind::Primal);
    let problem = DarcyProblem::new(
        complex,
        measures,
        mu,
        kappa,
        source,
        boundary_flux,
        (0, 0.0),
    )?;
    let solution = darcy::solve_darcy(&problem, choice)?;

    let velocities = velocities_at_barycenters(complex, &solution.flux)?;
    let n_layers = layer_kappas.len();
    let mut vy_max: f64 = 0.0;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_layers];
    for cell in 0..complex.num_simplices(n) {
        vy_max = vy_max.max(velocities[cell][1].abs());
        let layer = spec.layer_index(complex, cell).expect("layer spec");
        groups[layer].push(cell);
    }

    let mut layer_vx = Vec::with_capacity(n_layers);
    let mut layer_pressure_r2 = Vec::with_capacity(n_layers);
    for cells in &groups {
        let mean = cells.iter().map(|&c| velocities[c][0]).sum::<f64>() / cells.len() as f64;
        let spread = cells
            .iter()
            .map(|&c| (velocities[c][0] - mean).abs())
            .fold(0.0f64, f64::max);
        layer_vx.push((mean, spread / mean.abs().max(f64::MIN_POSITIVE)));

        let xs: Vec<f64> = cells.iter().map(|&c| measures.center(n, c)[0]).collect();
        let ps: Vec<f64> = cells.iter().map(|&c| solution.pressure.values[c]).collect();
        let (_, _, _, r2) = linear_fit(&xs, &ps);
        layer_pressure_r2.push(r2);
    }

    Ok(LayeredReport {
        vy_max,
        layer_vx,
        layer_pressure_r2,
        mass_balance_max: solution.stats.mass_balance_max,
    })
}

/// Pressure-placement comparison: the circumcentric dual reproduces the
/// affine patch solution; relocating dual vertices to barycenters does not,
/// while both keep local mass balance.
#[derive(Debug, Clone)]
pub struct FoilReport {
    pub circumcentric: PatchReport,
    pub barycentric_pressure_err: f64,
    pub barycentric_mass_balance: f64,
}

pub fn run_barycenter_foil(
    complex: &SimplicialComplex,
    velocity: [f64; 3],
    choice: SolverChoice,
) -> Result<FoilReport, HarnessError> {
    let circum = DualMeasures::compute(complex)?;
    let circumcentric = run_patch_test(complex, &circum, velocity, 1.0, 1.0, (0, 0.0), choice)?;

    let bary = DualMeasures::compute_with_rule(complex, CenterRule::Barycentric)?;
    let foil = run_patch_test(complex, &bary, velocity, 1.0, 1.0, (0, 0.0), choice)?;
    Ok(FoilReport {
        circumcentric,
        barycentric_pressure_err: foil.pressure_rel_err,
        barycentric_mass_balance: foil.mass_balance_max,
    })
}

/// One refinement level of the trigonometric study.
#[derive(Debug, Clone)]
pub struct ConvergenceLevel {
    pub cells: usize,
    pub h: f64,
    pub flux_err: f64,
    pub pressure_err: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    pub flux_slope: f64,
    pub pressure_slope: f64,
}

/// Base-mesh recipe for [`convergence_study`]: a jittered equilateral strip
/// mesh. Every triangle of the unperturbed lattice is equilateral; the
/// jitter is kept well below the acuteness margin so all refinements stay
/// strictly Delaunay.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceConfig {
    pub cols: usize,
    pub rows: usize,
    pub spacing: f64,
    /// interior jitter amplitude as a fraction of the spacing
    pub jitter: f64,
    pub seed: u64,
    pub levels: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            cols: 10,
            rows: 10,
            spacing: 0.1,
            jitter: 0.15,
            seed: 7,
            levels: 4,
        }
    }
}

pub fn convergence_study(config: ConvergenceConfig) -> Result<ConvergenceStudy, HarnessError> {
    let base = meshio::generate_equilateral(config.cols, config.rows, config.spacing);
    let base = meshio::perturb_interior(&base, config.jitter * config.spacing, config.seed)?;
    let mut complex = base.build()?;

    let mut levels = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        let measures = DualMeasures::compute(&complex)?;
        let delaunay = geometry::is_delaunay(&complex, &measures);
        if !delaunay.ok || !delaunay.borderline_faces.is_empty() {
            return Err(HarnessError::BadMesh(format!(
                "level {level} mesh is not strictly Delaunay ({} violations, {} borderline)",
                delaunay.violating_faces.len(),
                delaunay.borderline_faces.len()
            )));
        }
        let data = cases::build_case_data(&complex, &measures, AnalyticCase::CosCos)?;
        let n_cells = complex.num_simplices(2);
        let problem = DarcyProblem::new(
            &complex,
            &measures,
            1.0,
            vec![1.0; n_cells],
            data.source,
            data.boundary_flux,
            (0, 0.0),
        )?;
        let solution = darcy::solve_darcy(&problem, SolverChoice::Auto)?;
        let flux_err =
            whitney::flux_error_norm(&complex, &measures, &solution.flux, &data.exact_flux)
                .map_err(|e| HarnessError::BadMesh(e.to_string()))?;
        let exact_pressure: Vec<f64> = (0..n_cells)
            .map(|cell| AnalyticCase::CosCos.pressure(measures.center(2, cell)))
            .collect();
        let pressure_err =
            whitney::pressure_error_norm(&measures, &solution.pressure.values, &exact_pressure);
        levels.push(ConvergenceLevel {
            cells: n_cells,
            h: max_edge_length(&complex),
            flux_err,
            pressure_err,
        });

        if level + 1 < config.levels {
            complex = meshio::refine_4to1(&complex)?.build()?;
        }
    }

    let log_h: Vec<f64> = levels.iter().map(|l| l.h.ln()).collect();
    let log_flux: Vec<f64> = levels.iter().map(|l| l.flux_err.ln()).collect();
    let log_pressure: Vec<f64> = levels.iter().map(|l| l.pressure_err.ln()).collect();
    let (flux_slope, _, _, _) = linear_fit(&log_h, &log_flux);
    let (pressure_slope, _, _, _) = linear_fit(&log_h, &log_pressure);

    Ok(ConvergenceStudy {
        levels,
        flux_slope,
        pressure_slope,
    })
}

/// Build a mesh for the split-permeability study: crisscross quads that are
/// wider than tall so the triangles flanking vertical interfaces are acute.
pub fn split_case_mesh(nx: usize, ny: usize) -> RawMesh {
    assert!(ny > nx, "quads must be wider than tall");
    meshio::generate_crisscross(nx, ny, [0.0, 0.0], [1.0, 1.0])
}

/// Mesh for the layered study: crisscross quads taller than wide so the
/// triangles flanking horizontal interfaces are acute.
pub fn layered_case_mesh(nx: usize, ny: usize) -> RawMesh {
    assert!(nx > ny, "quads must be taller than wide");
    meshio::generate_crisscross(nx, ny, [0.0, 0.0], [1.0, 1.0])
}
