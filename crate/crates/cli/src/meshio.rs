//! Mesh ingestion and output: Triangle/tetgen `.node`/`.ele` text files,
//! structured generators, uniform 4-to-1 refinement, legacy VTK and CSV
//! writers.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use dec_core::complex::ComplexError;
use dec_core::{DualMeasures, SimplicialComplex};

#[derive(Debug)]
pub enum MeshIoError {
    Io(std::io::Error),
    MalformedHeader {
        path: String,
        detail: String,
    },
    MalformedRecord {
        path: String,
        line: usize,
        detail: String,
    },
    /// First record index must be 0 or 1.
    BadIndexBase {
        path: String,
        index: i64,
    },
    /// A vertex reference falls outside the file's declared index range.
    IndexOutOfRange {
        path: String,
        line: usize,
        index: i64,
    },
    UnsupportedDimension {
        dim: usize,
    },
    Complex(ComplexError),
}

impl fmt::Display for MeshIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshIoError::Io(e) => write!(f, "{e}"),
            MeshIoError::MalformedHeader { path, detail } => {
                write!(f, "{path}: malformed header: {detail}")
            }
            MeshIoError::MalformedRecord { path, line, detail } => {
                write!(f, "{path}:{line}: {detail}")
            }
            MeshIoError::BadIndexBase { path, index } => {
                write!(f, "{path}: first index {index} is neither 0 nor 1")
            }
            MeshIoError::IndexOutOfRange { path, line, index } => {
                write!(
                    f,
                    "{path}:{line}: index {index} out of range (mixed indexing?)"
                )
            }
            MeshIoError::UnsupportedDimension { dim } => {
                write!(f, "unsupported mesh dimension {dim}")
            }
            MeshIoError::Complex(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MeshIoError {}

impl From<std::io::Error> for MeshIoError {
    fn from(e: std::io::Error) -> Self {
        MeshIoError::Io(e)
    }
}

impl From<ComplexError> for MeshIoError {
    fn from(e: ComplexError) -> Self {
        MeshIoError::Complex(e)
    }
}

/// Raw mesh data as read from files or produced by generators.
#[derive(Debug, Clone)]
pub struct RawMesh {
    pub embed_dim: usize,
    pub vertices: Vec<f64>,
    pub top_simplices: Vec<Vec<usize>>,
    /// first element attribute per top simplex, when the file carries one
    pub region_attrs: Option<Vec<f64>>,
}

impl RawMesh {
    pub fn build(self) -> Result<SimplicialComplex, MeshIoError> {
        Ok(SimplicialComplex::new(
            self.embed_dim,
            self.vertices,
            self.top_simplices,
        )?)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Read a Triangle/tetgen `.node`/`.ele` file pair. Both 0- and 1-based
/// numbering are accepted; the base is taken from the first node record.
pub fn read_node_ele(node_path: &Path, ele_path: &Path) -> Result<RawMesh, MeshIoError> {
    let node_name = node_path.display().to_string();
    let node_text = fs::read_to_string(node_path)?;
    let mut lines = data_lines(&node_text);

    let (hline, header) = lines.next().ok_or_else(|| MeshIoError::MalformedHeader {
        path: node_name.clone(),
        detail: "empty file".into(),
    })?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| MeshIoError::MalformedHeader {
            path: node_name.clone(),
            detail: format!("line {hline}: expected counts, got {header:?}"),
        })?;
    if head.len() < 2 {
        return Err(MeshIoError::MalformedHeader {
            path: node_name.clone(),
            detail: "node header needs at least <count> <dim>".into(),
        });
    }
    let (n_nodes, dim) = (head[0], head[1]);
    if dim < 2 || dim > 3 {
        return Err(MeshIoError::UnsupportedDimension { dim });
    }

    let mut base: Option<i64> = None;
    let mut vertices = vec![0.0f64; n_nodes * dim];
    let mut seen = vec![false; n_nodes];
    for _ in 0..n_nodes {
        let (lno, line) = lines.next().ok_or_else(|| MeshIoError::MalformedRecord {
            path: node_name.clone(),
            line: hline,
            detail: format!("expected {n_nodes} node records"),
        })?;
        let mut tok = line.split_whitespace();
        let idx: i64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
            MeshIoError::MalformedRecord {
                path: node_name.clone(),
                line: lno,
                detail: "missing node index".into(),
            }
        })?;
        let base = *base.get_or_insert_with(|| idx);
        if base != 0 && base != 1 {
            return Err(MeshIoError::BadIndexBase {
                path: node_name.clone(),
                index: base,
            });
        }
        let slot = idx - base;
        if slot < 0 || slot as usize >= n_nodes {
            return Err(MeshIoError::IndexOutOfRange {
                path: node_name.clone(),
                line: lno,
                index: idx,
            });
        }
        let slot = slot as usize;
        if seen[slot] {
            return Err(MeshIoError::MalformedRecord {
                path: node_name.clone(),
                line: lno,
                detail: format!("duplicate node index {idx}"),
            });
        }
        seen[slot] = true;
        for d in 0..dim {
            let coord: f64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                MeshIoError::MalformedRecord {
                    path: node_name.clone(),
                    line: lno,
                    detail: format!("missing coordinate {d}"),
                }
            })?;
            vertices[slot * dim + d] = coord;
        }
    }
    let node_base = base.unwrap_or(0);

    let ele_name = ele_path.display().to_string();
    let ele_text = fs::read_to_string(ele_path)?;
    let mut lines = data_lines(&ele_text);
    let (hline, header) = lines.next().ok_or_else(|| MeshIoError::MalformedHeader {
        path: ele_name.clone(),
        detail: "empty file".into(),
    })?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| MeshIoError::MalformedHeader {
            path: ele_name.clone(),
            detail: format!("line {hline}: expected counts, got {header:?}"),
        })?;
    if head.len() < 2 {
        return Err(MeshIoError::MalformedHeader {
            path: ele_name.clone(),
            detail: "element header needs <count> <nodes per element>".into(),
        });
    }
    let (n_eles, nodes_per) = (head[0], head[1]);
    let n_attrs = head.get(2).copied().unwrap_or(0);
    if nodes_per != dim + 1 {
        return Err(MeshIoError::MalformedHeader {
            path: ele_name.clone(),
            detail: format!("{nodes_per} nodes per element does not match dimension {dim}"),
        });
    }

    let mut top_simplices = Vec::with_capacity(n_eles);
    let mut region_attrs = if n_attrs > 0 {
        Some(Vec::with_capacity(n_eles))
    } else {
        None
    };
    for _ in 0..n_eles {
        let (lno, line) = lines.next().ok_or_else(|| MeshIoError::MalformedRecord {
            path: ele_name.clone(),
            line: hline,
            detail: format!("expected {n_eles} element records"),
        })?;
        let mut tok = line.split_whitespace();
        let _ele_idx: i64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
            MeshIoError::MalformedRecord {
                path: ele_name.clone(),
                line: lno,
                detail: "missing element index".into(),
            }
        })?;
        let mut tuple = Vec::with_capacity(nodes_per);
        for _ in 0..nodes_per {
            let r: i64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                MeshIoError::MalformedRecord {
                    path: ele_name.clone(),
                    line: lno,
                    detail: "missing vertex reference".into(),
                }
            })?;
            let v = r - node_base;
            if v < 0 || v as usize >= n_nodes {
                return Err(MeshIoError::IndexOutOfRange {
                    path: ele_name.clone(),
                    line: lno,
                    index: r,
                });
            }
            tuple.push(v as usize);
        }
        if let Some(attrs) = &mut region_attrs {
            let a: f64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                MeshIoError::MalformedRecord {
                    path: ele_name.clone(),
                    line: lno,
                    detail: "missing region attribute".into(),
                }
            })?;
            attrs.push(a);
        }
        top_simplices.push(tuple);
    }

    Ok(RawMesh {
        embed_dim: dim,
        vertices,
        top_simplices,
        region_attrs,
    })
}

/// Write a mesh as a 0-based `.node`/`.ele` pair with full-precision
/// coordinates.
pub fn write_node_ele(
    mesh: &RawMesh,
    node_path: &Path,
    ele_path: &Path,
) -> Result<(), MeshIoError> {
    let dim = mesh.embed_dim;
    let n_nodes = mesh.vertices.len() / dim;
    let mut node = String::new();
    node.push_str(&format!("{n_nodes} {dim} 0 0\n"));
    for i in 0..n_nodes {
        node.push_str(&format!("{i}"));
        for d in 0..dim {
            node.push_str(&format!(" {:.16e}", mesh.vertices[i * dim + d]));
        }
        node.push('\n');
    }
    write_atomic(node_path, node.as_bytes())?;

    let n_attr = usize::from(mesh.region_attrs.is_some());
    let mut ele = String::new();
    ele.push_str(&format!(
        "{} {} {}\n",
        mesh.top_simplices.len(),
        dim + 1,
        n_attr
    ));
    for (i, tuple) in mesh.top_simplices.iter().enumerate() {
        ele.push_str(&format!("{i}"));
        for &v in tuple {
            ele.push_str(&format!(" {v}"));
        }
        if let Some(attrs) = &mesh.region_attrs {
            ele.push_str(&format!(" {:.16e}", attrs[i]));
        }
        ele.push('\n');
    }
    write_atomic(ele_path, ele.as_bytes())?;
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), std::io::Error> {
    let tmp = path.with_extension("tmp_write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Axis-aligned structured mesh: each grid square is split into two right
/// triangles with a consistent diagonal (2D), each grid cube into six
/// tetrahedra sharing the main diagonal (3D).
pub fn generate_structured(
    n: usize,
    divisions: &[usize],
    origin: &[f64],
    size: &[f64],
) -> Result<RawMesh, MeshIoError> {
    match n {
        2 => Ok(structured_square(
            divisions[0],
            divisions[1],
            [origin[0], origin[1]],
            [size[0], size[1]],
        )),
        3 => Ok(structured_cube(
            divisions[0],
            divisions[1],
            divisions[2],
            [origin[0], origin[1], origin[2]],
            [size[0], size[1], size[2]],
        )),
        _ => Err(MeshIoError::UnsupportedDimension { dim: n }),
    }
}

fn structured_square(nx: usize, ny: usize, origin: [f64; 2], size: [f64; 2]) -> RawMesh {
    assert!(nx >= 1 && ny >= 1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * 2);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(origin[0] + size[0] * i as f64 / nx as f64);
            vertices.push(origin[1] + size[1] * j as f64 / ny as f64);
        }
    }
    let v = |i: usize, j: usize| j * (nx + 1) + i;
    let mut top_simplices = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            top_simplices.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            top_simplices.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    RawMesh {
        embed_dim: 2,
        vertices,
        top_simplices,
        region_attrs: None,
    }
}

fn structured_cube(nx: usize, ny: usize, nz: usize, origin: [f64; 3], size: [f64; 3]) -> RawMesh {
    assert!(nx >= 1 && ny >= 1 && nz >= 1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1) * 3);
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(origin[0] + size[0] * i as f64 / nx as f64);
                vertices.push(origin[1] + size[1] * j as f64 / ny as f64);
                vertices.push(origin[2] + size[2] * k as f64 / nz as f64);
            }
        }
    }
    let v = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    // six tetrahedra per cube, one per vertex permutation of the unit path;
    // odd permutations get two vertices swapped so every emitted tuple is
    // positively oriented
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], false),
        ([0, 2, 1], true),
        ([1, 0, 2], true),
        ([1, 2, 0], false),
        ([2, 0, 1], false),
        ([2, 1, 0], true),
    ];
    let mut top_simplices = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for (perm, odd) in PERMS {
                    let mut corner = [i, j, k];
                    let mut tet = vec![v(corner[0], corner[1], corner[2])];
                    for &axis in &perm {
                        corner[axis] += 1;
                        tet.push(v(corner[0], corner[1], corner[2]));
                    }
                    if odd {
                        tet.swap(2, 3);
                    }
                    top_simplices.push(tet);
                }
            }
        }
    }
    RawMesh {
        embed_dim: 3,
        vertices,
        top_simplices,
        region_attrs: None,
    }
}

/// Rectangle meshed with four triangles per grid quad around an inserted
/// center vertex. The triangles on the longer quad sides are acute, so
/// permeability interfaces should run along those sides. For unequal quad
/// aspect the edges on the shorter sides are not Delaunay (their duals go
/// negative), which the solvers handle through the dense direct path.
pub fn generate_crisscross(nx: usize, ny: usize, origin: [f64; 2], size: [f64; 2]) -> RawMesh {
    assert!(nx >= 1 && ny >= 1);
    let w = size[0] / nx as f64;
    let h = size[1] / ny as f64;
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(origin[0] + w * i as f64);
            vertices.push(origin[1] + h * j as f64);
        }
    }
    let grid = (nx + 1) * (ny + 1);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push(origin[0] + w * (i as f64 + 0.5));
            vertices.push(origin[1] + h * (j as f64 + 0.5));
        }
    }
    let v = |i: usize, j: usize| j * (nx + 1) + i;
    let c = |i: usize, j: usize| grid + j * nx + i;
    let mut top_simplices = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let center = c(i, j);
            top_simplices.push(vec![v(i, j), v(i + 1, j), center]);
            top_simplices.push(vec![v(i + 1, j), v(i + 1, j + 1), center]);
            top_simplices.push(vec![v(i + 1, j + 1), v(i, j + 1), center]);
            top_simplices.push(vec![v(i, j + 1), v(i, j), center]);
        }
    }
    RawMesh {
        embed_dim: 2,
        vertices,
        top_simplices,
        region_attrs: None,
    }
}

/// Parallelogram strip mesh of equilateral triangles: `rows` rows of `cols`
/// rhombi, odd rows offset by half a spacing. Every triangle is equilateral,
/// so the mesh stays strictly Delaunay under 4-to-1 refinement.
pub fn generate_equilateral(cols: usize, rows: usize, spacing: f64) -> RawMesh {
    assert!(cols >= 1 && rows >= 1);
    let height = spacing * 0.5 * 3.0f64.sqrt();
    let mut vertices = Vec::new();
    for j in 0..=rows {
        let offset = if j % 2 == 1 { 0.5 * spacing } else { 0.0 };
        for i in 0..=cols {
            vertices.push(i as f64 * spacing + offset);
            vertices.push(j as f64 * height);
        }
    }
    let v = |i: usize, j: usize| j * (cols + 1) + i;
    let mut top_simplices = Vec::with_capacity(2 * cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            if j % 2 == 0 {
                // row above is shifted right
                top_simplices.push(vec![v(i, j), v(i + 1, j), v(i, j + 1)]);
                top_simplices.push(vec![v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
            } else {
                top_simplices.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                top_simplices.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
            }
        }
    }
    RawMesh {
        embed_dim: 2,
        vertices,
        top_simplices,
        region_attrs: None,
    }
}

/// Regular hexagon of six unit equilateral triangles around the origin.
pub fn generate_hexagon() -> RawMesh {
    let mut vertices = vec![0.0, 0.0];
    for k in 0..6 {
        let angle = std::f64::consts::PI / 3.0 * k as f64;
        vertices.push(angle.cos());
        vertices.push(angle.sin());
    }
    let top_simplices = (0..6).map(|k| vec![0, k + 1, (k + 1) % 6 + 1]).collect();
    RawMesh {
        embed_dim: 2,
        vertices,
        top_simplices,
        region_attrs: None,
    }
}

/// Deterministic pseudo-random stream for mesh jitter.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (2.0 / 9_007_199_254_740_992.0) - 1.0
    }
}

/// Which vertices a jitter pass may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbScope {
    /// Boundary vertices stay put; the domain shape is preserved.
    Interior,
    /// Every vertex moves. Needed to break the cospherical degeneracy of
    /// corner-only cube splits, whose cells all share one circumcenter no
    /// matter how interior vertices move.
    All,
}

/// Jitter vertices by a uniform offset up to `eps` per coordinate.
/// Deterministic for a given seed.
pub fn perturb(
    mesh: &RawMesh,
    eps: f64,
    seed: u64,
    scope: PerturbScope,
) -> Result<RawMesh, MeshIoError> {
    let complex = SimplicialComplex::new(
        mesh.embed_dim,
        mesh.vertices.clone(),
        mesh.top_simplices.clone(),
    )?;
    let n = complex.dim();
    let mut movable = vec![true; complex.num_vertices()];
    if scope == PerturbScope::Interior {
        for &face in complex.boundary_faces() {
            for &v in complex.simplex(n - 1, face) {
                movable[v] = false;
            }
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut vertices = mesh.vertices.clone();
    for v in 0..complex.num_vertices() {
        // draw for every vertex so the stream does not depend on topology
        let mut offsets = [0.0; 3];
        for o in offsets.iter_mut().take(mesh.embed_dim) {
            *o = eps * rng.next_symmetric();
        }
        if movable[v] {
            for d in 0..mesh.embed_dim {
                vertices[v * mesh.embed_dim + d] += offsets[d];
            }
        }
    }
    Ok(RawMesh {
        embed_dim: mesh.embed_dim,
        vertices,
        top_simplices: mesh.top_simplices.clone(),
        region_attrs: mesh.region_attrs.clone(),
    })
}

/// Jitter interior vertices only; see [`perturb`].
pub fn perturb_interior(mesh: &RawMesh, eps: f64, seed: u64) -> Result<RawMesh, MeshIoError> {
    perturb(mesh, eps, seed, PerturbScope::Interior)
}

/// Uniform refinement for triangle meshes: edge midpoints are inserted and
/// each triangle is replaced by four congruent children similar to it.
pub fn refine_4to1(complex: &SimplicialComplex) -> Result<RawMesh, MeshIoError> {
    if complex.dim() != 2 {
        return Err(MeshIoError::UnsupportedDimension { dim: complex.dim() });
    }
    let nd = complex.embed_dim();
    let n_vertices = complex.num_vertices();
    let n_edges = complex.num_simplices(1);
    let mut vertices = complex.vertex_buffer().to_vec();
    vertices.reserve(n_edges * nd);
    for e in 0..n_edges {
        let t = complex.simplex(1, e);
        let a = complex.vertex(t[0]);
        let b = complex.vertex(t[1]);
        for d in 0..nd {
            vertices.push(0.5 * (a[d] + b[d]));
        }
    }
    let mid = |a: usize, b: usize| {
        n_vertices
            + complex
                .simplex_index(1, &[a, b])
                .expect("edge of a triangle")
    };
    let mut top_simplices = Vec::with_capacity(4 * complex.num_simplices(2));
    for t in 0..complex.num_simplices(2) {
        let tri = complex.simplex(2, t);
        let (a, b, c) = (tri[0], tri[1], tri[2]);
        let (mab, mac, mbc) = (mid(a, b), mid(a, c), mid(b, c));
        top_simplices.push(vec![a, mab, mac]);
        top_simplices.push(vec![b, mab, mbc]);
        top_simplices.push(vec![c, mac, mbc]);
        top_simplices.push(vec![mab, mac, mbc]);
    }
    Ok(RawMesh {
        embed_dim: nd,
        vertices,
        top_simplices,
        region_attrs: None,
    })
}

/// Cell and point fields for the VTK and CSV writers.
#[derive(Debug, Default)]
pub struct OutputFields {
    pub cell_scalars: Vec<(String, Vec<f64>)>,
    pub cell_vectors: Vec<(String, Vec<[f64; 3]>)>,
    pub point_scalars: Vec<(String, Vec<f64>)>,
}

/// Legacy ASCII VTK unstructured grid with 17-significant-digit floats.
pub fn write_vtk(
    complex: &SimplicialComplex,
    fields: &OutputFields,
    path: &Path,
) -> Result<(), MeshIoError> {
    let n = complex.dim();
    let nd = complex.embed_dim();
    let n_points = complex.num_vertices();
    let n_cells = complex.num_simplices(n);
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("dec-darcy output\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {n_points} double\n"));
    for v in 0..n_points {
        let p = complex.vertex(v);
        let z = if nd > 2 { p[2] } else { 0.0 };
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", p[0], p[1], z));
    }
    out.push_str(&format!("CELLS {n_cells} {}\n", n_cells * (n + 2)));
    for cell in 0..n_cells {
        out.push_str(&format!("{}", n + 1));
        for &v in complex.simplex(n, cell) {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("CELL_TYPES {n_cells}\n"));
    let vtk_type = if n == 2 { 5 } else { 10 };
    for _ in 0..n_cells {
        out.push_str(&format!("{vtk_type}\n"));
    }
    if !fields.cell_scalars.is_empty() || !fields.cell_vectors.is_empty() {
        out.push_str(&format!("CELL_DATA {n_cells}\n"));
        for (name, values) in &fields.cell_scalars {
            assert_eq!(values.len(), n_cells, "field {name} length");
            out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
            for v in values {
                out.push_str(&format!("{v:.16e}\n"));
            }
        }
        for (name, values) in &fields.cell_vectors {
            assert_eq!(values.len(), n_cells, "field {name} length");
            out.push_str(&format!("VECTORS {name} double\n"));
            for v in values {
                out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", v[0], v[1], v[2]));
            }
        }
    }
    if !fields.point_scalars.is_empty() {
        out.push_str(&format!("POINT_DATA {n_points}\n"));
        for (name, values) in &fields.point_scalars {
            assert_eq!(values.len(), n_points, "field {name} length");
            out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
            for v in values {
                out.push_str(&format!("{v:.16e}\n"));
            }
        }
    }
    write_atomic(path, out.as_bytes())?;
    Ok(())
}

/// Per-cell CSV (center coordinates, pressure, velocity) plus a companion
/// `<stem>.flux.csv` with one row per (n-1)-face.
pub fn write_csv(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    pressure: &[f64],
    velocity: &[[f64; 3]],
    flux: &[f64],
    path: &Path,
) -> Result<(), MeshIoError> {
    let n = complex.dim();
    let nd = complex.embed_dim();
    let mut out = String::new();
    let coord_names: &[&str] = if nd == 2 {
        &["center_x", "center_y"]
    } else {
        &["center_x", "center_y", "center_z"]
    };
    let vel_names: &[&str] = if nd == 2 {
        &["velocity_x", "velocity_y"]
    } else {
        &["velocity_x", "velocity_y", "velocity_z"]
    };
    out.push_str(&format!(
        "cell,{},pressure,{}\n",
        coord_names.join(","),
        vel_names.join(",")
    ));
    for cell in 0..complex.num_simplices(n) {
        let center = measures.center(n, cell);
        out.push_str(&format!("{cell}"));
        for d in 0..nd {
            out.push_str(&format!(",{:.16e}", center[d]));
        }
        out.push_str(&format!(",{:.16e}", pressure[cell]));
        for d in 0..nd {
            out.push_str(&format!(",{:.16e}", velocity[cell][d]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())?;

    let flux_path = flux_csv_path(path);
    let mut out = String::new();
    out.push_str("face,flux\n");
    for (face, v) in flux.iter().enumerate() {
        out.push_str(&format!("{face},{v:.16e}\n"));
    }
    write_atomic(&flux_path, out.as_bytes())?;
    Ok(())
}

pub fn flux_csv_path(path: &Path) -> std::path::PathBuf {
    let mut name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.push_str(".flux.csv");
    path.with_file_name(name)
}
