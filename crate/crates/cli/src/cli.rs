//! Command line front end: flag parsing, subcommand wiring, reports.

use std::collections::BTreeMap;
use std::path::Path;

use dec_core::darcy::{self, SolverChoice};
use dec_core::geometry;
use dec_core::linalg::SchurOptions;
use dec_core::{CochainKind, DarcyProblem, DualMeasures};

use crate::cases::{self, AnalyticCase, KappaSpec};
use crate::harness;
use crate::meshio::{self, OutputFields, RawMesh};

pub enum CliError {
    /// Configuration or parse problem; exit code 2.
    Usage(String),
    /// Numerical failure or unmet threshold; exit code 1.
    Runtime(String),
}

type CliResult = Result<i32, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

pub fn run(args: &[String]) -> i32 {
    let code = match run_inner(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `dec-darcy help` for usage");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    };
    code
}

fn run_inner(args: &[String]) -> CliResult {
    let Some(cmd) = args.first() else {
        print_global_help();
        return Ok(2);
    };
    match cmd.as_str() {
        "generate" => cmd_generate(&args[1..]),
        "check-mesh" => cmd_check_mesh(&args[1..]),
        "solve" => cmd_solve(&args[1..]),
        "patch-test" => cmd_patch_test(&args[1..]),
        "convergence" => cmd_convergence(&args[1..]),
        "barycenter-foil" => cmd_barycenter_foil(&args[1..]),
        "help" | "--help" | "-h" => {
            print_global_help();
            Ok(0)
        }
        other => Err(usage(format!("unknown subcommand {other:?}"))),
    }
}

fn print_global_help() {
    println!(
        "dec-darcy: Darcy flow solver on simplicial meshes

USAGE: dec-darcy <SUBCOMMAND> [--flag value ...]

SUBCOMMANDS:
  generate         write a generated mesh as .node/.ele files
  check-mesh       Delaunay and interface quality report
  solve            solve a flow problem, write VTK/CSV fields
  patch-test       constant-velocity exactness test
  convergence      refinement study on the trigonometric case
  barycenter-foil  circumcenter vs barycenter pressure placement
  help             this message

Each subcommand accepts --help. Flags may also come from a plain
`key=value` file via --config FILE; explicit flags win."
    );
}

/// Parsed flags: every flag takes one value (`--key value` or `--key=value`).
struct Opts {
    map: BTreeMap<String, String>,
}

impl Opts {
    fn parse(tokens: &[String], allowed: &[&str], help: &str) -> CliResult2 {
        let mut map = BTreeMap::new();
        let mut iter = tokens.iter();
        while let Some(tok) = iter.next() {
            if tok == "--help" || tok == "-h" {
                return Err(Help(help.to_string()));
            }
            let Some(stripped) = tok.strip_prefix("--") else {
                return Err(Bad(format!("unexpected argument {tok:?}")));
            };
            let (key, value) = match stripped.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let value = iter
                        .next()
                        .ok_or_else(|| Bad(format!("flag --{stripped} needs a value")))?;
                    (stripped.to_string(), value.clone())
                }
            };
            if !allowed.contains(&key.as_str()) && key != "config" {
                return Err(Bad(format!("unknown flag --{key}")));
            }
            map.insert(key, value);
        }
        // config file fills in whatever flags did not set
        if let Some(path) = map.get("config").cloned() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Bad(format!("cannot read config {path}: {e}")))?;
            for (lno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Bad(format!("{path}:{}: expected key=value", lno + 1)))?;
                let key = key.trim().to_string();
                if !allowed.contains(&key.as_str()) {
                    return Err(Bad(format!("{path}: unknown key {key}")));
                }
                map.entry(key).or_insert_with(|| value.trim().to_string());
            }
        }
        Ok(Opts { map })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn get_f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| usage(format!("--{key}: expected a number, got {s:?}"))),
            None => Ok(default),
        }
    }

    fn get_usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| usage(format!("--{key}: expected an integer, got {s:?}"))),
            None => Ok(default),
        }
    }

    fn get_u64(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| usage(format!("--{key}: expected an integer, got {s:?}"))),
            None => Ok(default),
        }
    }
}

enum ParseOutcome {
    Help(String),
    Bad(String),
}
use ParseOutcome::{Bad, Help};
type CliResult2 = Result<Opts, ParseOutcome>;

fn opts_or_exit(tokens: &[String], allowed: &[&str], help: &str) -> Result<Option<Opts>, CliError> {
    match Opts::parse(tokens, allowed, help) {
        Ok(o) => Ok(Some(o)),
        Err(Help(text)) => {
            println!("{text}");
            Ok(None)
        }
        Err(Bad(msg)) => Err(usage(msg)),
    }
}

const MESH_FLAGS: &[&str] = &["mesh", "node", "ele", "perturb", "perturb-scope", "seed"];

fn mesh_help() -> &'static str {
    "  --mesh SPEC        generator spec:
                       square:NXxNY[@WxH]      right-triangle grid
                       crisscross:NXxNY[@WxH]  4 triangles per quad
                       equilateral:CxR[@S]     equilateral strip mesh
                       cube:K | cube:NXxNYxNZ  6 tetrahedra per cube
                       hexagon                 6 equilateral triangles
  --node F --ele F   read a Triangle/tetgen file pair instead
  --perturb EPS      jitter vertices by up to EPS per coordinate
  --perturb-scope S  interior (default) | all; corner-only cube splits need
                     `all` since their degeneracy survives interior jitter
  --seed N           jitter seed (default 0)"
}

fn load_mesh(opts: &Opts) -> Result<RawMesh, CliError> {
    let mut mesh = match (opts.get("node"), opts.get("ele"), opts.get("mesh")) {
        (Some(node), Some(ele), None) => {
            meshio::read_node_ele(Path::new(node), Path::new(ele)).map_err(runtime)?
        }
        (None, None, Some(spec)) => parse_mesh_spec(spec)?,
        (None, None, None) => return Err(usage("a mesh is required: --mesh or --node/--ele")),
        _ => return Err(usage("give either --mesh or both --node and --ele")),
    };
    let eps = opts.get_f64("perturb", 0.0)?;
    if eps > 0.0 {
        let seed = opts.get_u64("seed", 0)?;
        let scope = match opts.get("perturb-scope").unwrap_or("interior") {
            "interior" => meshio::PerturbScope::Interior,
            "all" => meshio::PerturbScope::All,
            other => {
                return Err(usage(format!(
                    "--perturb-scope: expected interior|all, got {other:?}"
                )))
            }
        };
        mesh = meshio::perturb(&mesh, eps, seed, scope).map_err(runtime)?;
    }
    Ok(mesh)
}

fn parse_mesh_spec(spec: &str) -> Result<RawMesh, CliError> {
    let bad = || usage(format!("bad mesh spec {spec:?}"));
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (spec, None),
    };
    let parse_pair = |s: &str| -> Result<(usize, usize), CliError> {
        let (a, b) = s.split_once('x').ok_or_else(bad)?;
        Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
    };
    match kind {
        "hexagon" => Ok(meshio::generate_hexagon()),
        "square" => {
            let rest = rest.ok_or_else(bad)?;
            let (grid, size) = split_at_marker(rest);
            let (nx, ny) = parse_pair(grid)?;
            let (w, h) = match size {
                Some(s) => parse_pair_f64(s).ok_or_else(bad)?,
                None => (1.0, 1.0),
            };
            meshio::generate_structured(2, &[nx, ny], &[0.0, 0.0], &[w, h]).map_err(runtime)
        }
        "crisscross" => {
            let rest = rest.ok_or_else(bad)?;
            let (grid, size) = split_at_marker(rest);
            let (nx, ny) = parse_pair(grid)?;
            let (w, h) = match size {
                Some(s) => parse_pair_f64(s).ok_or_else(bad)?,
                None => (1.0, 1.0),
            };
            Ok(meshio::generate_crisscross(nx, ny, [0.0, 0.0], [w, h]))
        }
        "equilateral" => {
            let rest = rest.ok_or_else(bad)?;
            let (grid, size) = split_at_marker(rest);
            let (cols, rows) = parse_pair(grid)?;
            let spacing = match size {
                Some(s) => s.parse().map_err(|_| bad())?,
                None => 1.0 / cols as f64,
            };
            Ok(meshio::generate_equilateral(cols, rows, spacing))
        }
        "cube" => {
            let rest = rest.ok_or_else(bad)?;
            let parts: Vec<usize> = rest
                .split('x')
                .map(|t| t.parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let (nx, ny, nz) = match parts.as_slice() {
                [k] => (*k, *k, *k),
                [a, b, c] => (*a, *b, *c),
                _ => return Err(bad()),
            };
            meshio::generate_structured(3, &[nx, ny, nz], &[0.0; 3], &[1.0; 3]).map_err(runtime)
        }
        _ => Err(bad()),
    }
}

fn split_at_marker(s: &str) -> (&str, Option<&str>) {
    match s.split_once('@') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    }
}

fn parse_pair_f64(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(|c| c == 'x' || c == ',')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

const PHYSICS_FLAGS: &[&str] = &[
    "kappa",
    "kappa-split",
    "kappa-layers",
    "kappa-regions",
    "mu",
    "pin",
    "solver",
    "tol",
    "max-iter",
];

fn parse_kappa_spec(opts: &Opts) -> Result<KappaSpec, CliError> {
    let given = ["kappa", "kappa-split", "kappa-layers", "kappa-regions"]
        .iter()
        .filter(|k| opts.get(k).is_some())
        .count();
    if given > 1 {
        return Err(usage(
            "give at most one of --kappa/--kappa-split/--kappa-layers/--kappa-regions",
        ));
    }
    if let Some(v) = opts.get("kappa") {
        let k: f64 = v
            .parse()
            .map_err(|_| usage(format!("--kappa: expected a number, got {v:?}")))?;
        return Ok(KappaSpec::Uniform(k));
    }
    if let Some(v) = opts.get("kappa-split") {
        // x=<coord>:k1,k2
        let parse = || -> Option<KappaSpec> {
            let rest = v.strip_prefix("x=")?;
            let (at, pair) = rest.split_once(':')?;
            let (l, r) = pair.split_once(',')?;
            Some(KappaSpec::SplitX {
                at: at.parse().ok()?,
                left: l.parse().ok()?,
                right: r.parse().ok()?,
            })
        };
        return parse()
            .ok_or_else(|| usage(format!("--kappa-split: expected x=C:K1,K2, got {v:?}")));
    }
    if let Some(v) = opts.get("kappa-layers") {
        let values: Option<Vec<f64>> = v.split(',').map(|t| t.parse().ok()).collect();
        let values = values
            .filter(|v: &Vec<f64>| !v.is_empty())
            .ok_or_else(|| usage(format!("--kappa-layers: expected K1,K2,..., got {v:?}")))?;
        return Ok(KappaSpec::LayersY(values));
    }
    if let Some(v) = opts.get("kappa-regions") {
        let parse_entry = |t: &str| -> Option<(f64, f64)> {
            let (r, k) = t.split_once('=')?;
            Some((r.parse().ok()?, k.parse().ok()?))
        };
        let map: Option<Vec<(f64, f64)>> = v.split(',').map(parse_entry).collect();
        let map =
            map.ok_or_else(|| usage(format!("--kappa-regions: expected R=K,..., got {v:?}")))?;
        return Ok(KappaSpec::ByRegion(map));
    }
    Ok(KappaSpec::Uniform(1.0))
}

fn parse_pin(opts: &Opts) -> Result<(usize, f64), CliError> {
    match opts.get("pin") {
        Some(v) => {
            let parse = || -> Option<(usize, f64)> {
                let (c, p) = v.split_once(':')?;
                Some((c.parse().ok()?, p.parse().ok()?))
            };
            parse().ok_or_else(|| usage(format!("--pin: expected CELL:VALUE, got {v:?}")))
        }
        None => Ok((0, 0.0)),
    }
}

fn parse_solver(opts: &Opts) -> Result<SolverChoice, CliError> {
    let tol = opts.get_f64("tol", 1e-12)?;
    let max_iter = match opts.get("max-iter") {
        Some(s) => Some(
            s.parse()
                .map_err(|_| usage(format!("--max-iter: expected an integer, got {s:?}")))?,
        ),
        None => None,
    };
    let schur = SchurOptions {
        rel_tol: tol,
        max_iter,
        jacobi: false,
    };
    match opts.get("solver").unwrap_or("auto") {
        "auto" => Ok(SolverChoice::Auto),
        "schur" => Ok(SolverChoice::Schur(schur)),
        "direct" => Ok(SolverChoice::Direct { dense_limit: 4000 }),
        other => Err(usage(format!(
            "--solver: expected auto|schur|direct, got {other:?}"
        ))),
    }
}

fn parse_bc_velocity(opts: &Opts, dim: usize) -> Result<Option<[f64; 3]>, CliError> {
    match opts.get("bc-velocity") {
        Some(v) => {
            let parts: Option<Vec<f64>> = v.split(',').map(|t| t.trim().parse().ok()).collect();
            let parts = parts.filter(|p: &Vec<f64>| p.len() == dim).ok_or_else(|| {
                usage(format!(
                    "--bc-velocity: expected {dim} comma-separated numbers"
                ))
            })?;
            let mut out = [0.0; 3];
            out[..dim].copy_from_slice(&parts);
            Ok(Some(out))
        }
        None => Ok(None),
    }
}

fn cmd_generate(tokens: &[String]) -> CliResult {
    let help = format!(
        "dec-darcy generate: write a generated mesh as .node/.ele files\n\n{}\n  --out-node PATH    output node file (required)\n  --out-ele PATH     output element file (required)",
        mesh_help()
    );
    let allowed = [MESH_FLAGS, &["out-node", "out-ele"]].concat();
    let Some(opts) = opts_or_exit(tokens, &allowed, &help)? else {
        return Ok(0);
    };
    let mesh = load_mesh(&opts)?;
    let node = opts
        .get("out-node")
        .ok_or_else(|| usage("--out-node is required"))?;
    let ele = opts
        .get("out-ele")
        .ok_or_else(|| usage("--out-ele is required"))?;
    meshio::write_node_ele(&mesh, Path::new(node), Path::new(ele)).map_err(runtime)?;
    println!(
        "wrote {} vertices, {} cells to {node} / {ele}",
        mesh.vertices.len() / mesh.embed_dim,
        mesh.top_simplices.len()
    );
    Ok(0)
}

fn cmd_check_mesh(tokens: &[String]) -> CliResult {
    let help = format!(
        "dec-darcy check-mesh: Delaunay and interface quality report\n\n{}\n  --kappa* ...       optional material layout; its interfaces are checked\n                     for well-centeredness",
        mesh_help()
    );
    let allowed = [
        MESH_FLAGS,
        &["kappa", "kappa-split", "kappa-layers", "kappa-regions"],
    ]
    .concat();
    let Some(opts) = opts_or_exit(tokens, &allowed, &help)? else {
        return Ok(0);
    };
    let raw = load_mesh(&opts)?;
    let region_attrs = raw.region_attrs.clone();
    let complex = raw.build().map_err(runtime)?;
    let measures = DualMeasures::compute(&complex).map_err(runtime)?;
    let n = complex.dim();

    println!(
        "mesh: n={} in R^{}, {} vertices, {} cells, {} faces ({} boundary, {} interior)",
        n,
        complex.embed_dim(),
        complex.num_vertices(),
        complex.num_simplices(n),
        complex.num_simplices(n - 1),
        complex.boundary_faces().len(),
        complex.num_simplices(n - 1) - complex.boundary_faces().len(),
    );
    let total = measures.total_volume();
    let vertex_dual_sum: f64 = measures.dual_volumes(0).iter().sum();
    println!(
        "volume: total {total:.12e}, vertex dual tiling residual {:.3e}",
        (vertex_dual_sum - total).abs()
    );
    let interior: Vec<usize> = complex.interior_faces();
    let duals: Vec<f64> = interior
        .iter()
        .map(|&f| measures.dual_volume(n - 1, f))
        .collect();
    if !duals.is_empty() {
        let min = duals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = duals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("interior dual edges: min {min:.6e}, max {max:.6e}");
    }

    let report = geometry::is_delaunay(&complex, &measures);
    println!(
        "Delaunay: {} ({} violating, {} borderline zero-dual faces)",
        if report.ok { "ok" } else { "NOT OK" },
        report.violating_faces.len(),
        report.borderline_faces.len()
    );
    for &f in report.violating_faces.iter().take(10) {
        println!(
            "  violating face {f} {:?} dual {:.6e}",
            complex.simplex(n - 1, f),
            measures.dual_volume(n - 1, f)
        );
    }

    let mut ok = report.ok;
    let spec = parse_kappa_spec(&opts)?;
    if spec != KappaSpec::Uniform(1.0) || opts.get("kappa").is_some() {
        let kappa = spec
            .kappa_for(&complex, region_attrs.as_deref())
            .map_err(runtime)?;
        let interfaces = cases::interface_faces(&complex, &kappa);
        let iface = geometry::is_well_centered_interface(&complex, &measures, &interfaces)
            .map_err(runtime)?;
        println!(
            "kappa interfaces: {} faces, well-centered: {}",
            interfaces.len(),
            if iface.ok { "ok" } else { "NOT OK" }
        );
        for &(f, lp, lm) in iface.failing_faces.iter().take(10) {
            println!("  failing face {f}: portions {lp:.6e}, {lm:.6e}");
        }
        ok &= iface.ok;
    }
    Ok(if ok { 0 } else { 1 })
}

fn solve_flags() -> Vec<&'static str> {
    let mut v = MESH_FLAGS.to_vec();
    v.extend(PHYSICS_FLAGS);
    v.extend(["bc-velocity", "case", "out-vtk", "out-csv"]);
    v
}

fn cmd_solve(tokens: &[String]) -> CliResult {
    let help = format!(
        "dec-darcy solve: solve a flow problem and write fields\n\n{}\n
  --kappa K | --kappa-split x=C:K1,K2 | --kappa-layers K1,...
                     | --kappa-regions R=K,...   material layout (default 1)
  --mu MU            viscosity (default 1)
  --bc-velocity V    constant boundary velocity, e.g. 1,0  (2D) or 1,0,0
  --case NAME        analytic case: constant-x | coscos (sets BC and source)
  --pin CELL:VALUE   pressure gauge (default 0:0)
  --solver S         auto | schur | direct (default auto)
  --tol T            iterative solver tolerance (default 1e-12)
  --max-iter N       CG iteration cap
  --out-vtk PATH     write a legacy VTK unstructured grid
  --out-csv PATH     write per-cell CSV (+ <stem>.flux.csv per face)

With --kappa-layers and no --bc-velocity/--case, the boundary data is the
per-layer consistent inflow (each boundary face carries the flux of its
cell's constant velocity (kappa, 0)).",
        mesh_help()
    );
    let Some(opts) = opts_or_exit(tokens, &solve_flags(), &help)? else {
        return Ok(0);
    };
    let raw = load_mesh(&opts)?;
    let region_attrs = raw.region_attrs.clone();
    let complex = raw.build().map_err(runtime)?;
    let measures = DualMeasures::compute(&complex).map_err(runtime)?;
    let n = complex.dim();
    let n_cells = complex.num_simplices(n);

    let kappa_spec = parse_kappa_spec(&opts)?;
    let kappa = kappa_spec
        .kappa_for(&complex, region_attrs.as_deref())
        .map_err(runtime)?;
    let mu = opts.get_f64("mu", 1.0)?;
    let pin = parse_pin(&opts)?;
    let choice = parse_solver(&opts)?;

    let case = match opts.get("case") {
        Some(name) => Some(
            AnalyticCase::parse(name)
                .ok_or_else(|| usage(format!("--case: unknown case {name:?}")))?,
        ),
        None => None,
    };
    let bc_velocity = parse_bc_velocity(&opts, n)?;

    let (source, boundary_flux, exact_flux) = match (case, bc_velocity) {
        (Some(case), None) => {
            let data = cases::build_case_data(&complex, &measures, case).map_err(runtime)?;
            (data.source, data.boundary_flux, Some(data.exact_flux))
        }
        (None, Some(v)) => {
            let bc = darcy::discretize_boundary_flux(&complex, |_| v).map_err(runtime)?;
            (complex.zero_cochain(n, CochainKind::Primal), bc, None)
        }
        (None, None) => match &kappa_spec {
            KappaSpec::LayersY(_) => {
                let bc = cases::layered_boundary_flux(&complex, &kappa).map_err(runtime)?;
                (complex.zero_cochain(n, CochainKind::Primal), bc, None)
            }
            _ => return Err(usage("boundary data required: --bc-velocity or --case")),
        },
        (Some(_), Some(_)) => return Err(usage("give either --case or --bc-velocity, not both")),
    };

    let problem = DarcyProblem::new(&complex, &measures, mu, kappa, source, boundary_flux, pin)
        .map_err(runtime)?;
    let solution = darcy::solve_darcy(&problem, choice).map_err(runtime)?;
    let velocities =
        harness::velocities_at_barycenters(&complex, &solution.flux).map_err(runtime)?;

    println!(
        "solved: {} cells, {} flux faces, solver {}, cg iterations {}, residual {:.3e}",
        n_cells,
        complex.num_simplices(n - 1),
        if solution.stats.used_direct {
            "direct"
        } else {
            "schur"
        },
        solution.stats.solve.cg_iterations,
        solution.stats.solve.residual,
    );
    println!(
        "mass balance: max |D f - source| = {:.3e}",
        solution.stats.mass_balance_max
    );
    if let (Some(case), Some(exact_flux)) = (case, exact_flux.as_ref()) {
        let exact_pressure: Vec<f64> = (0..n_cells)
            .map(|cell| case.pressure(measures.center(n, cell)))
            .collect();
        let p_err = dec_core::whitney::pressure_error_norm(
            &measures,
            &solution.pressure.values,
            &exact_pressure,
        );
        let f_err =
            dec_core::whitney::flux_error_norm(&complex, &measures, &solution.flux, exact_flux)
                .map_err(runtime)?;
        println!("analytic comparison: pressure error {p_err:.6e}, flux error {f_err:.6e}");
    }

    if let Some(path) = opts.get("out-vtk") {
        let fields = OutputFields {
            cell_scalars: vec![("pressure".into(), solution.pressure.values.clone())],
            cell_vectors: vec![("velocity".into(), velocities.clone())],
            point_scalars: vec![],
        };
        meshio::write_vtk(&complex, &fields, Path::new(path)).map_err(runtime)?;
        println!("wrote {path}");
    }
    if let Some(path) = opts.get("out-csv") {
        meshio::write_csv(
            &complex,
            &measures,
            &solution.pressure.values,
            &velocities,
            &solution.flux.values,
            Path::new(path),
        )
        .map_err(runtime)?;
        println!(
            "wrote {path} and {}",
            meshio::flux_csv_path(Path::new(path)).display()
        );
    }
    Ok(0)
}

fn cmd_patch_test(tokens: &[String]) -> CliResult {
    let help = format!(
        "dec-darcy patch-test: the solution for constant boundary velocity,
zero source and uniform material must reproduce the affine pressure and the
exact fluxes\n\n{}\n  --bc-velocity V    constant velocity (default 1,0 / 1,0,0)\n  --mu MU --kappa K  uniform material (default 1)\n  --solver S --tol T --max-iter N\n  --pin CELL:VALUE\n  --threshold T      pass/fail threshold (default 1e-10)",
        mesh_help()
    );
    let mut allowed = MESH_FLAGS.to_vec();
    allowed.extend(PHYSICS_FLAGS);
    allowed.extend(["bc-velocity", "threshold"]);
    let Some(opts) = opts_or_exit(tokens, &allowed, &help)? else {
        return Ok(0);
    };
    let complex = load_mesh(&opts)?.build().map_err(runtime)?;
    let measures = DualMeasures::compute(&complex).map_err(runtime)?;
    let n = complex.dim();
    let velocity = parse_bc_velocity(&opts, n)?.unwrap_or([1.0, 0.0, 0.0]);
    let kappa = match parse_kappa_spec(&opts)? {
        KappaSpec::Uniform(k) => k,
        _ => return Err(usage("patch-test needs uniform --kappa")),
    };
    let mu = opts.get_f64("mu", 1.0)?;
    let pin = parse_pin(&opts)?;
    let choice = parse_solver(&opts)?;
    let threshold = opts.get_f64("threshold", 1e-10)?;

    let report = harness::run_patch_test(&complex, &measures, velocity, mu, kappa, pin, choice)
        .map_err(runtime)?;
    println!(
        "patch test: pressure error {:.3e}, flux error {:.3e}, mass balance {:.3e} ({})",
        report.pressure_rel_err,
        report.flux_rel_err,
        report.mass_balance_max,
        if report.used_direct {
            "direct"
        } else {
            "schur"
        },
    );
    let pass = report.pressure_rel_err < threshold && report.flux_rel_err < threshold;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

fn cmd_convergence(tokens: &[String]) -> CliResult {
    let help = "dec-darcy convergence: refinement study on the trigonometric case

  --cols N --rows N  base equilateral mesh size (default 10x10)
  --spacing S        base lattice spacing (default 0.1)
  --jitter J         interior jitter as a fraction of spacing (default 0.15)
  --seed N           jitter seed (default 7)
  --levels N         refinement levels (default 4)";
    let allowed = ["cols", "rows", "spacing", "jitter", "seed", "levels"];
    let Some(opts) = opts_or_exit(tokens, &allowed, help)? else {
        return Ok(0);
    };
    let config = harness::ConvergenceConfig {
        cols: opts.get_usize("cols", 10)?,
        rows: opts.get_usize("rows", 10)?,
        spacing: opts.get_f64("spacing", 0.1)?,
        jitter: opts.get_f64("jitter", 0.15)?,
        seed: opts.get_u64("seed", 7)?,
        levels: opts.get_usize("levels", 4)?,
    };
    let study = harness::convergence_study(config).map_err(runtime)?;
    println!(
        "{:>8} {:>12} {:>14} {:>14}",
        "cells", "h", "flux err", "pressure err"
    );
    for level in &study.levels {
        println!(
            "{:>8} {:>12.6e} {:>14.6e} {:>14.6e}",
            level.cells, level.h, level.flux_err, level.pressure_err
        );
    }
    println!(
        "least-squares slopes: flux {:.3}, pressure {:.3}",
        study.flux_slope, study.pressure_slope
    );
    Ok(0)
}

fn cmd_barycenter_foil(tokens: &[String]) -> CliResult {
    let help = format!(
        "dec-darcy barycenter-foil: run the patch test with circumcentric and
barycentric pressure placement; only the circumcentric dual reproduces the
affine pressure exactly\n\n{}\n  --bc-velocity V    constant velocity (default 1,0)\n  --solver S --tol T\n  --threshold T      circumcentric pass threshold (default 1e-10)\n  --foil-threshold T minimum barycentric error to demonstrate (default 1e-3)",
        mesh_help()
    );
    let mut allowed = MESH_FLAGS.to_vec();
    allowed.extend([
        "bc-velocity",
        "solver",
        "tol",
        "max-iter",
        "threshold",
        "foil-threshold",
    ]);
    let Some(opts) = opts_or_exit(tokens, &allowed, &help)? else {
        return Ok(0);
    };
    let complex = load_mesh(&opts)?.build().map_err(runtime)?;
    if complex.dim() != 2 {
        return Err(usage("barycenter-foil is a 2D comparison"));
    }
    let velocity = parse_bc_velocity(&opts, 2)?.unwrap_or([1.0, 0.0, 0.0]);
    let choice = parse_solver(&opts)?;
    let threshold = opts.get_f64("threshold", 1e-10)?;
    let foil_threshold = opts.get_f64("foil-threshold", 1e-3)?;

    let report = harness::run_barycenter_foil(&complex, velocity, choice).map_err(runtime)?;
    println!(
        "circumcentric: pressure error {:.3e}, mass balance {:.3e}",
        report.circumcentric.pressure_rel_err, report.circumcentric.mass_balance_max
    );
    println!(
        "barycentric:   pressure error {:.3e}, mass balance {:.3e}",
        report.barycentric_pressure_err, report.barycentric_mass_balance
    );
    let pass = report.circumcentric.pressure_rel_err < threshold
        && report.barycentric_pressure_err > foil_threshold
        && report.circumcentric.mass_balance_max < 1e-9
        && report.barycentric_mass_balance < 1e-9;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}
