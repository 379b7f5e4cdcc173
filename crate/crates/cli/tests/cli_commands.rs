mod common;

use dec_darcy::cli::run;
use dec_darcy::meshio;

fn run_args(args: &[&str]) -> i32 {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    run(&owned)
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run_args(&["help"]), 0);
    assert_eq!(run_args(&["patch-test", "--help"]), 0);
    assert_eq!(run_args(&["solve", "--help"]), 0);
}

#[test]
fn unknown_subcommand_and_flags_are_config_errors() {
    assert_eq!(run_args(&["frobnicate"]), 2);
    assert_eq!(
        run_args(&["patch-test", "--mesh", "hexagon", "--wat", "1"]),
        2
    );
    assert_eq!(run_args(&["patch-test", "--mesh", "nonsense:3"]), 2);
    assert_eq!(run_args(&["patch-test"]), 2, "a mesh source is required");
}

#[test]
fn patch_test_passes_on_good_meshes() {
    assert_eq!(run_args(&["patch-test", "--mesh", "square:2x2"]), 0);
    assert_eq!(
        run_args(&["patch-test", "--mesh", "hexagon", "--solver", "schur"]),
        0
    );
    assert_eq!(
        run_args(&[
            "patch-test",
            "--mesh",
            "cube:2",
            "--bc-velocity",
            "1,0,0",
            "--perturb",
            "0.01",
            "--perturb-scope",
            "all",
            "--seed",
            "3",
        ]),
        0
    );
}

#[test]
fn generate_then_check_mesh_round_trips() {
    let dir = common::scratch_dir("cli_generate");
    let node = dir.join("hex.node");
    let ele = dir.join("hex.ele");
    assert_eq!(
        run_args(&[
            "generate",
            "--mesh",
            "hexagon",
            "--out-node",
            node.to_str().unwrap(),
            "--out-ele",
            ele.to_str().unwrap(),
        ]),
        0
    );
    assert_eq!(
        run_args(&[
            "check-mesh",
            "--node",
            node.to_str().unwrap(),
            "--ele",
            ele.to_str().unwrap()
        ]),
        0
    );
}

#[test]
fn check_mesh_flags_delaunay_violations() {
    // two triangles across the wrong diagonal: vertex 3 sits inside the
    // circumcircle of [0,1,2]
    let dir = common::scratch_dir("cli_checkmesh");
    let mesh = meshio::RawMesh {
        embed_dim: 2,
        vertices: vec![0.0, 0.0, 1.0, -0.1, 2.0, 0.0, 1.0, 1.0],
        top_simplices: vec![vec![0, 1, 2], vec![0, 2, 3]],
        region_attrs: None,
    };
    let node = dir.join("bad.node");
    let ele = dir.join("bad.ele");
    meshio::write_node_ele(&mesh, &node, &ele).unwrap();
    assert_eq!(
        run_args(&[
            "check-mesh",
            "--node",
            node.to_str().unwrap(),
            "--ele",
            ele.to_str().unwrap()
        ]),
        1
    );
}

#[test]
fn check_mesh_rejects_right_triangle_interfaces() {
    // region fixture: a unit square split by one diagonal, one region per
    // triangle; the diagonal's dual portions are zero (both circumcenters
    // sit at the hypotenuse midpoint), so a kappa jump across it must fail
    let node = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/square4.node");
    let ele = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/square4.ele");
    assert_eq!(
        run_args(&[
            "check-mesh",
            "--node",
            node.to_str().unwrap(),
            "--ele",
            ele.to_str().unwrap(),
            "--kappa-regions",
            "1=1,2=10",
        ]),
        1
    );
    // but the vertical mid-line of a structured square is flanked by
    // positive portions, so a split there passes the interface check even
    // though the mesh has borderline diagonals
    assert_eq!(
        run_args(&[
            "check-mesh",
            "--mesh",
            "square:4x4",
            "--kappa-split",
            "x=0.5:1,10"
        ]),
        0
    );
}

#[test]
fn solve_coscos_writes_fields() {
    let dir = common::scratch_dir("cli_solve");
    let vtk = dir.join("out.vtk");
    let csv = dir.join("out.csv");
    assert_eq!(
        run_args(&[
            "solve",
            "--mesh",
            "equilateral:8x8@0.125",
            "--perturb",
            "0.01",
            "--seed",
            "5",
            "--case",
            "coscos",
            "--out-vtk",
            vtk.to_str().unwrap(),
            "--out-csv",
            csv.to_str().unwrap(),
        ]),
        0
    );
    let vtk_text = std::fs::read_to_string(&vtk).unwrap();
    assert!(vtk_text.contains("SCALARS pressure double 1"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    // pressures stay within the analytic range plus the pin gauge offset
    for line in csv_text.lines().skip(1) {
        let p: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(p.abs() < 2.2, "implausible pressure {p}");
    }
    assert!(meshio::flux_csv_path(&csv).exists());
}

#[test]
fn solve_split_kappa_produces_piecewise_slopes() {
    let dir = common::scratch_dir("cli_split");
    let csv = dir.join("split.csv");
    assert_eq!(
        run_args(&[
            "solve",
            "--mesh",
            "crisscross:6x8",
            "--kappa-split",
            "x=0.5:1,100",
            "--bc-velocity",
            "1,0",
            "--out-csv",
            csv.to_str().unwrap(),
        ]),
        0
    );
    // fit pressure vs x on each side of the interface from the CSV
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut left: Vec<(f64, f64)> = Vec::new();
    let mut right: Vec<(f64, f64)> = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let x: f64 = cols[1].parse().unwrap();
        let p: f64 = cols[3].parse().unwrap();
        if x < 0.5 {
            left.push((x, p));
        } else {
            right.push((x, p));
        }
    }
    let slope = |pts: &[(f64, f64)]| {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ps: Vec<f64> = pts.iter().map(|p| p.1).collect();
        dec_darcy::harness::linear_fit(&xs, &ps).0
    };
    assert!((slope(&left) + 1.0).abs() < 1e-9, "left slope -mu/kappa1");
    assert!(
        (slope(&right) + 0.01).abs() < 1e-9,
        "right slope -mu/kappa2"
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = common::scratch_dir("cli_config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "mesh=hexagon\nthreshold=1e-30 # unbeatable\n").unwrap();
    // config's threshold would fail; the explicit flag overrides it
    assert_eq!(
        run_args(&[
            "patch-test",
            "--config",
            cfg.to_str().unwrap(),
            "--threshold",
            "1e-10",
        ]),
        0
    );
    // with only the config, the absurd threshold makes it a numerical failure
    assert_eq!(
        run_args(&["patch-test", "--config", cfg.to_str().unwrap()]),
        1
    );
}

#[test]
fn barycenter_foil_demonstrates_the_contrast() {
    assert_eq!(run_args(&["barycenter-foil", "--mesh", "square:2x2"]), 0);
}

#[test]
fn convergence_runs_on_a_small_config() {
    assert_eq!(
        run_args(&[
            "convergence",
            "--cols",
            "4",
            "--rows",
            "4",
            "--levels",
            "2",
            "--spacing",
            "0.25"
        ]),
        0
    );
}
