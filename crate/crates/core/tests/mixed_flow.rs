//! End-to-end flow through the public API: mesh, measures, problem, solve,
//! reconstruct.

use dec_core::complex::CochainKind;
use dec_core::darcy::{self, SolverChoice};
use dec_core::linalg::SchurOptions;
use dec_core::whitney;
use dec_core::{DarcyProblem, DualMeasures, SimplicialComplex};

/// Hexagon of six equilateral triangles: strictly Delaunay, all Hodge
/// entries invertible.
fn hexagon() -> SimplicialComplex {
    let mut verts = vec![0.0, 0.0];
    for k in 0..6 {
        let angle = std::f64::consts::PI / 3.0 * k as f64;
        verts.push(angle.cos());
        verts.push(angle.sin());
    }
    let tris: Vec<Vec<usize>> = (0..6).map(|k| vec![0, k + 1, (k + 1) % 6 + 1]).collect();
    SimplicialComplex::new(2, verts, tris).unwrap()
}

#[test]
fn hexagon_patch_flow_end_to_end() {
    let complex = hexagon();
    let measures = DualMeasures::compute(&complex).unwrap();

    let velocity = [0.8, -0.6, 0.0];
    let bc = darcy::discretize_boundary_flux(&complex, |_| velocity).unwrap();
    let source = complex.zero_cochain(2, CochainKind::Primal);
    let problem =
        DarcyProblem::new(&complex, &measures, 1.0, vec![1.0; 6], source, bc, (0, 0.0)).unwrap();

    let schur = darcy::solve_darcy(&problem, SolverChoice::Schur(SchurOptions::default())).unwrap();
    let direct = darcy::solve_darcy(&problem, SolverChoice::Direct { dense_limit: 100 }).unwrap();
    for (a, b) in schur.flux.values.iter().zip(&direct.flux.values) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(schur.stats.mass_balance_max < 1e-12);

    // affine exact pressure, gauge fixed at the pin
    let p_exact = |cell: usize| {
        let c = measures.center(2, cell);
        -(velocity[0] * c[0] + velocity[1] * c[1])
    };
    let offset = -p_exact(0);
    for cell in 0..6 {
        assert!((schur.pressure.values[cell] - p_exact(cell) - offset).abs() < 1e-12);
    }

    // the reconstructed velocity is the constant field everywhere
    for cell in 0..6 {
        let tuple = complex.simplex(2, cell);
        let mut bary = [0.0; 2];
        for &v in tuple {
            bary[0] += complex.vertex(v)[0] / 3.0;
            bary[1] += complex.vertex(v)[1] / 3.0;
        }
        let v = whitney::velocity_at_point(&complex, &schur.flux, cell, &bary).unwrap();
        assert!((v[0] - velocity[0]).abs() < 1e-12);
        assert!((v[1] - velocity[1]).abs() < 1e-12);
    }

    // error norms agree with the equalities above
    let all: Vec<usize> = (0..complex.num_simplices(1)).collect();
    let exact_flux = darcy::de_rham_flux(&complex, &all, |_| velocity).unwrap();
    let f_err = whitney::flux_error_norm(&complex, &measures, &schur.flux, &exact_flux).unwrap();
    assert!(f_err < 1e-12);
    let exact_p: Vec<f64> = (0..6).map(p_exact).collect();
    let p_err = whitney::pressure_error_norm(&measures, &schur.pressure.values, &exact_p);
    assert!(p_err < 1e-12, "gauge-aligned pressure error {p_err}");
}
