mod common;

use std::path::{Path, PathBuf};

use dec_core::geometry::{self, DualMeasures};
use dec_darcy::meshio::{self, MeshIoError, OutputFields, PerturbScope};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn write_scratch(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn reads_minimal_node_ele_pair() {
    let mesh = meshio::read_node_ele(&fixture("square4.node"), &fixture("square4.ele")).unwrap();
    assert_eq!(mesh.embed_dim, 2);
    assert_eq!(mesh.vertices.len(), 8);
    assert_eq!(mesh.top_simplices, vec![vec![0, 1, 2], vec![0, 2, 3]]);
    assert_eq!(mesh.region_attrs, Some(vec![1.0, 2.0]));
    let complex = mesh.build().unwrap();
    assert_eq!(complex.num_simplices(1), 5);
}

#[test]
fn one_based_files_load_the_same_mesh() {
    let zero = meshio::read_node_ele(&fixture("square4.node"), &fixture("square4.ele")).unwrap();
    let one = meshio::read_node_ele(
        &fixture("square4_1based.node"),
        &fixture("square4_1based.ele"),
    )
    .unwrap();
    assert_eq!(zero.vertices, one.vertices);
    assert_eq!(zero.top_simplices, one.top_simplices);
}

#[test]
fn malformed_header_is_reported() {
    let dir = common::scratch_dir("badheader");
    let node = write_scratch(&dir, "bad.node", "three 2 0 0\n0 0.0 0.0\n");
    let err = meshio::read_node_ele(&node, &fixture("square4.ele")).unwrap_err();
    assert!(matches!(err, MeshIoError::MalformedHeader { .. }));
}

#[test]
fn mixed_indexing_is_reported() {
    // 1-based nodes, but the element file references vertex 0
    let dir = common::scratch_dir("mixed");
    let ele = write_scratch(&dir, "mixed.ele", "1 3 0\n1 0 2 3\n");
    let err = meshio::read_node_ele(&fixture("square4_1based.node"), &ele).unwrap_err();
    assert!(matches!(err, MeshIoError::IndexOutOfRange { .. }));
}

#[test]
fn out_of_range_reference_is_reported() {
    let dir = common::scratch_dir("oor");
    let ele = write_scratch(&dir, "oor.ele", "1 3 0\n0 0 1 9\n");
    let err = meshio::read_node_ele(&fixture("square4.node"), &ele).unwrap_err();
    assert!(matches!(err, MeshIoError::IndexOutOfRange { .. }));
}

#[test]
fn node_ele_round_trip_is_lossless() {
    let mesh = meshio::generate_equilateral(3, 2, 0.37);
    let mesh = meshio::perturb_interior(&mesh, 0.05, 99).unwrap();
    let dir = common::scratch_dir("roundtrip");
    let node = dir.join("m.node");
    let ele = dir.join("m.ele");
    meshio::write_node_ele(&mesh, &node, &ele).unwrap();
    let back = meshio::read_node_ele(&node, &ele).unwrap();
    assert_eq!(
        back.vertices, mesh.vertices,
        "coordinates survive bit-exactly"
    );
    assert_eq!(back.top_simplices, mesh.top_simplices);
}

#[test]
fn structured_square_counts() {
    let m = meshio::generate_structured(2, &[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(m.vertices.len() / 2, 9);
    assert_eq!(m.top_simplices.len(), 8);
    let m = meshio::generate_structured(2, &[1, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(m.top_simplices.len(), 2);
    let complex = m.build().unwrap();
    assert_eq!(complex.boundary_faces().len(), 4);
}

#[test]
fn structured_square_is_delaunay_with_borderline_diagonals() {
    let m = meshio::generate_structured(2, &[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let complex = m.build().unwrap();
    let measures = DualMeasures::compute(&complex).unwrap();
    let report = geometry::is_delaunay(&complex, &measures);
    assert!(report.ok);
    assert_eq!(
        report.borderline_faces.len(),
        4,
        "one zero dual per grid square"
    );
}

#[test]
fn kuhn_cube_tets_are_positively_oriented_as_generated() {
    let m = meshio::generate_structured(3, &[1, 1, 1], &[0.0; 3], &[1.0; 3]).unwrap();
    assert_eq!(m.top_simplices.len(), 6);
    for tet in &m.top_simplices {
        let p = |v: usize| {
            [
                m.vertices[3 * v],
                m.vertices[3 * v + 1],
                m.vertices[3 * v + 2],
            ]
        };
        let a = p(tet[0]);
        let e: Vec<[f64; 3]> = (1..4)
            .map(|k| {
                let q = p(tet[k]);
                [q[0] - a[0], q[1] - a[1], q[2] - a[2]]
            })
            .collect();
        let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
            - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
            + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
        assert!(det > 0.0, "tet {tet:?} has signed volume {det}");
    }
    m.build().unwrap();
}

#[test]
fn refinement_quarters_every_triangle() {
    let one = meshio::generate_structured(2, &[1, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let complex = one.build().unwrap();
    let refined = meshio::refine_4to1(&complex).unwrap();
    assert_eq!(refined.top_simplices.len(), 8);
    assert_eq!(refined.vertices.len() / 2, 4 + 5);

    let square = meshio::generate_structured(2, &[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let complex = square.build().unwrap();
    let refined = meshio::refine_4to1(&complex).unwrap().build().unwrap();
    assert_eq!(refined.num_simplices(2), 32);
    let m0 = DualMeasures::compute(&complex).unwrap();
    let m1 = DualMeasures::compute(&refined).unwrap();
    assert!((m0.total_volume() - m1.total_volume()).abs() < 1e-15);
    // children are congruent quarters of their parents
    let parent_area = m0.primal_volume(2, 0);
    for child in 0..4 {
        assert!((m1.primal_volume(2, child) - parent_area / 4.0).abs() < 1e-15);
    }
}

#[test]
fn refinement_rejects_tet_meshes() {
    let cube = meshio::generate_structured(3, &[1, 1, 1], &[0.0; 3], &[1.0; 3]).unwrap();
    let complex = cube.build().unwrap();
    assert!(matches!(
        meshio::refine_4to1(&complex),
        Err(MeshIoError::UnsupportedDimension { dim: 3 })
    ));
}

#[test]
fn perturbation_is_deterministic_and_scoped() {
    let base = meshio::generate_structured(2, &[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let a = meshio::perturb(&base, 0.05, 42, PerturbScope::Interior).unwrap();
    let b = meshio::perturb(&base, 0.05, 42, PerturbScope::Interior).unwrap();
    assert_eq!(a.vertices, b.vertices);
    assert_ne!(a.vertices, base.vertices);
    // boundary vertices stay put under the interior scope
    let complex = base.clone().build().unwrap();
    let mut boundary = vec![false; complex.num_vertices()];
    for &f in complex.boundary_faces() {
        for &v in complex.simplex(1, f) {
            boundary[v] = true;
        }
    }
    for v in 0..complex.num_vertices() {
        if boundary[v] {
            assert_eq!(
                &a.vertices[2 * v..2 * v + 2],
                &base.vertices[2 * v..2 * v + 2]
            );
        }
    }
    let full = meshio::perturb(&base, 0.05, 42, PerturbScope::All).unwrap();
    let moved = (0..complex.num_vertices())
        .filter(|&v| full.vertices[2 * v..2 * v + 2] != base.vertices[2 * v..2 * v + 2])
        .count();
    assert_eq!(moved, complex.num_vertices());
}

#[test]
fn vtk_output_matches_golden_file() {
    let m = meshio::generate_structured(2, &[1, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let complex = m.build().unwrap();
    let fields = OutputFields {
        cell_scalars: vec![("pressure".into(), vec![1.0, -0.5])],
        cell_vectors: vec![("velocity".into(), vec![[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])],
        point_scalars: vec![],
    };
    let dir = common::scratch_dir("vtk");
    let path = dir.join("out.vtk");
    meshio::write_vtk(&complex, &fields, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(text.contains("DATASET UNSTRUCTURED_GRID"));
    assert!(text.contains("CELL_TYPES 2\n5\n5\n"));
    assert!(text.contains("SCALARS pressure double 1"));
    assert!(text.contains("VECTORS velocity double"));
    // deterministic 17-significant-digit formatting
    assert!(text.contains("1.0000000000000000e0"));
    assert!(text.contains("-5.0000000000000000e-1"));
    let again = dir.join("again.vtk");
    meshio::write_vtk(&complex, &fields, &again).unwrap();
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn csv_output_has_cells_and_fluxes() {
    let m = meshio::generate_structured(2, &[1, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let complex = m.build().unwrap();
    let measures = DualMeasures::compute(&complex).unwrap();
    let dir = common::scratch_dir("csv");
    let path = dir.join("out.csv");
    meshio::write_csv(
        &complex,
        &measures,
        &[1.0, 2.0],
        &[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        &vec![0.5; complex.num_simplices(1)],
        &path,
    )
    .unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("cell,center_x,center_y,pressure,velocity_x,velocity_y\n"));
    let flux_text = std::fs::read_to_string(meshio::flux_csv_path(&path)).unwrap();
    assert_eq!(flux_text.lines().count(), complex.num_simplices(1) + 1);
    assert!(flux_text.starts_with("face,flux\n"));
}

#[test]
fn random_delaunay_fixture_is_strictly_delaunay_and_obtuse() {
    let mesh = common::random_delaunay_square(7, 0.3, 2024);
    let max_angle = common::max_angle_degrees(&mesh);
    assert!(
        max_angle > 91.0,
        "fixture should contain obtuse triangles, max {max_angle}"
    );
    let complex = mesh.build().unwrap();
    let measures = DualMeasures::compute(&complex).unwrap();
    let report = geometry::is_delaunay(&complex, &measures);
    assert!(report.ok, "violations: {:?}", report.violating_faces);
    assert!(
        report.borderline_faces.is_empty(),
        "no cocircular ties expected after jitter"
    );
}
