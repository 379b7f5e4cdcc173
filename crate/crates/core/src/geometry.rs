//! Metric layer: circumcenters, primal volumes, and circumcentric dual cell
//! measures assembled from signed elementary pieces.
//!
//! The dual cell of a k-simplex is traversed as chains of centers
//! `cc(sigma^k) -> cc(sigma^{k+1}) -> ... -> cc(sigma^n)`; each chain spans an
//! elementary (n-k)-simplex. A piece counts negatively when a circumcenter
//! falls on the far side of the face it was reached through (the test is the
//! sign of the barycentric coordinate of the opposite vertex), which is what
//! makes obtuse but still Delaunay meshes work.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::complex::SimplicialComplex;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Circumcenter system is singular: simplex has (near) zero volume.
    DegenerateSimplex { dim: usize, index: usize },
    /// A face handed to the interface check has only one coface.
    NotInteriorFace { face: usize },
    /// Point-location or gradient computation needs a flat embedding.
    FlatEmbeddingRequired,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DegenerateSimplex { dim, index } => {
                write!(f, "degenerate {dim}-simplex {index}")
            }
            GeometryError::NotInteriorFace { face } => {
                write!(f, "face {face} is on the boundary")
            }
            GeometryError::FlatEmbeddingRequired => {
                write!(
                    f,
                    "operation requires embedding dimension equal to the mesh dimension"
                )
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Where dual 0-cells are placed. Barycentric placement exists as a test
/// foil; it breaks the orthogonality between faces and dual edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterRule {
    Circumcentric,
    Barycentric,
}

/// Signed length of the part of a dual edge lying inside one coface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePortion {
    pub cell: usize,
    pub length: f64,
}

/// Centers, primal volumes and signed dual volumes of every simplex.
#[derive(Debug, Clone)]
pub struct DualMeasures {
    rule: CenterRule,
    embed_dim: usize,
    /// centers[k]: flat, embed_dim per k-simplex
    centers: Vec<Vec<f64>>,
    /// unsigned k-volume per k-simplex (1 for vertices)
    primal_volumes: Vec<Vec<f64>>,
    /// signed (n-k)-volume of each dual cell (1 for dual vertices)
    dual_volumes: Vec<Vec<f64>>,
    /// per (n-1)-simplex, portions of its dual edge per coface,
    /// ordered like `SimplicialComplex::face_cofaces`
    side_portions: Vec<(SidePortion, Option<SidePortion>)>,
    /// local length scale per (n-1)-simplex (longest coface edge),
    /// used for relative zero tests
    face_scale: Vec<f64>,
}

/// Relative cutoff under which a dual edge length counts as zero
/// (cocircular configurations on structured meshes).
pub const DUAL_ZERO_TOL: f64 = 1e-12;

impl DualMeasures {
    /// Circumcentric dual measures; the standard construction.
    pub fn compute(complex: &SimplicialComplex) -> Result<Self, GeometryError> {
        Self::compute_with_rule(complex, CenterRule::Circumcentric)
    }

    pub fn compute_with_rule(
        complex: &SimplicialComplex,
        rule: CenterRule,
    ) -> Result<Self, GeometryError> {
        let n = complex.dim();
        let nd = complex.embed_dim();

        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut center_bary: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut primal_volumes: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let count = complex.num_simplices(k);
            let mut ctr = Vec::with_capacity(count * nd);
            let mut bary = Vec::with_capacity(count * (k + 1));
            let mut vols = Vec::with_capacity(count);
            for i in 0..count {
                let tuple = complex.simplex(k, i);
                match rule {
                    CenterRule::Circumcentric => {
                        let (c, b) = circumcenter_with_bary(complex, tuple)
                            .map_err(|_| GeometryError::DegenerateSimplex { dim: k, index: i })?;
                        ctr.extend_from_slice(&c);
                        bary.extend_from_slice(&b);
                    }
                    CenterRule::Barycentric => {
                        let mut c = vec![0.0; nd];
                        for &v in tuple {
                            for (d, x) in complex.vertex(v).iter().enumerate() {
                                c[d] += x / (k + 1) as f64;
                            }
                        }
                        ctr.extend_from_slice(&c);
                        bary.extend(core::iter::repeat(1.0 / (k + 1) as f64).take(k + 1));
                    }
                }
                vols.push(unsigned_volume(complex, tuple));
            }
            centers.push(ctr);
            center_bary.push(bary);
            primal_volumes.push(vols);
        }

        let mut dual_volumes: Vec<Vec<f64>> = (0..=n)
            .map(|k| vec![0.0; complex.num_simplices(k)])
            .collect();
        dual_volumes[n] = vec![1.0; complex.num_simplices(n)];

        let n_faces = complex.num_simplices(n - 1);
        let mut portions: Vec<Vec<SidePortion>> = vec![Vec::new(); n_faces];

        // walk every chain of centers from each top cell downwards
        let mut edges: Vec<f64> = Vec::with_capacity(n * nd);
        for cell in 0..complex.num_simplices(n) {
            let root = centers[n][cell * nd..(cell + 1) * nd].to_vec();
            descend(
                complex,
                &centers,
                &center_bary,
                &root,
                n,
                cell,
                1.0,
                &mut edges,
                &mut dual_volumes,
                &mut |face, piece| {
                    portions[face].push(SidePortion {
                        cell,
                        length: piece,
                    })
                },
            );
            debug_assert!(edges.is_empty());
        }

        let mut side_portions = Vec::with_capacity(n_faces);
        for (face, mut list) in portions.into_iter().enumerate() {
            list.sort_by_key(|p| p.cell);
            debug_assert_eq!(
                list.len(),
                if complex.is_boundary_face(face) { 1 } else { 2 }
            );
            side_portions.push((list[0], list.get(1).copied()));
        }

        let mut face_scale = Vec::with_capacity(n_faces);
        for face in 0..n_faces {
            let (first, second) = complex.face_cofaces(face);
            let mut scale = longest_edge(complex, complex.simplex(n, first.cell));
            if let Some(c) = second {
                scale = scale.max(longest_edge(complex, complex.simplex(n, c.cell)));
            }
            face_scale.push(scale);
        }

        Ok(DualMeasures {
            rule,
            embed_dim: nd,
            centers,
            primal_volumes,
            dual_volumes,
            side_portions,
            face_scale,
        })
    }

    pub fn rule(&self) -> CenterRule {
        self.rule
    }

    /// Center (circumcenter or barycenter per rule) of the i-th k-simplex.
    pub fn center(&self, k: usize, i: usize) -> &[f64] {
        &self.centers[k][i * self.embed_dim..(i + 1) * self.embed_dim]
    }

    pub fn primal_volume(&self, k: usize, i: usize) -> f64 {
        self.primal_volumes[k][i]
    }

    pub fn primal_volumes(&self, k: usize) -> &[f64] {
        &self.primal_volumes[k]
    }

    /// Primal volumes of the top-dimensional simplices.
    pub fn primal_volumes_top(&self) -> &[f64] {
        self.primal_volumes.last().unwrap()
    }

    /// Signed dual volume; positive on Delaunay meshes for interior faces.
    pub fn dual_volume(&self, k: usize, i: usize) -> f64 {
        self.dual_volumes[k][i]
    }

    pub fn dual_volumes(&self, k: usize) -> &[f64] {
        &self.dual_volumes[k]
    }

    /// Signed dual edge portions of an (n-1)-simplex per coface.
    pub fn side_portions(&self, face: usize) -> (SidePortion, Option<SidePortion>) {
        self.side_portions[face]
    }

    /// Absolute cutoff below which this face's dual edge counts as zero.
    pub fn dual_zero_tol(&self, face: usize) -> f64 {
        DUAL_ZERO_TOL * self.face_scale[face]
    }

    pub fn is_zero_dual_face(&self, face: usize) -> bool {
        let n1 = self.dual_volumes.len() - 2;
        self.dual_volumes[n1][face].abs() <= self.dual_zero_tol(face)
    }

    pub fn total_volume(&self) -> f64 {
        self.primal_volumes.last().unwrap().iter().sum()
    }
}

/// One elementary piece per chain extension: push the edge to the next
/// center, add the signed volume, recurse.
#[allow(clippy::too_many_arguments)]
fn descend(
    complex: &SimplicialComplex,
    centers: &[Vec<f64>],
    center_bary: &[Vec<f64>],
    root: &[f64],
    k: usize,
    simplex: usize,
    sign: f64,
    edges: &mut Vec<f64>,
    dual_volumes: &mut [Vec<f64>],
    on_first_step: &mut impl FnMut(usize, f64),
) {
    if k == 0 {
        return;
    }
    let nd = complex.embed_dim();
    let n = complex.dim();
    let tuple = complex.simplex(k, simplex);
    let mut buf = vec![0usize; k];
    for omit in 0..tuple.len() {
        let mut w = 0;
        for (j, &v) in tuple.iter().enumerate() {
            if j != omit {
                buf[w] = v;
                w += 1;
            }
        }
        let face = complex
            .simplex_index(k - 1, &buf)
            .expect("complex closed under faces");

        let bary = center_bary[k][simplex * (k + 1) + omit];
        let step_sign = if bary > 0.0 {
            1.0
        } else if bary < 0.0 {
            -1.0
        } else {
            0.0
        };
        let new_sign = sign * step_sign;

        let face_center = &centers[k - 1][face * nd..(face + 1) * nd];
        for d in 0..nd {
            edges.push(face_center[d] - root[d]);
        }
        let m = edges.len() / nd;
        let vol = elementary_volume(edges, nd, m);
        dual_volumes[k - 1][face] += new_sign * vol;
        if k == n {
            on_first_step(face, new_sign * vol);
        }
        descend(
            complex,
            centers,
            center_bary,
            root,
            k - 1,
            face,
            new_sign,
            edges,
            dual_volumes,
            on_first_step,
        );
        edges.truncate(edges.len() - nd);
    }
}

/// Volume of the simplex spanned by `m` edge vectors: sqrt(det Gram)/m!.
fn elementary_volume(edges: &[f64], nd: usize, m: usize) -> f64 {
    let mut gram = [[0.0f64; 3]; 3];
    for i in 0..m {
        for j in i..m {
            let a = &edges[i * nd..(i + 1) * nd];
            let b = &edges[j * nd..(j + 1) * nd];
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
    }
    let det = small_det(&gram, m);
    libm::sqrt(det.max(0.0)) / factorial(m) as f64
}

fn small_det(m: &[[f64; 3]; 3], k: usize) -> f64 {
    match k {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("supported dimensions are 1..=3"),
    }
}

/// Unsigned k-volume of a simplex from the Gram determinant of its edges.
pub fn unsigned_volume(complex: &SimplicialComplex, tuple: &[usize]) -> f64 {
    let k = tuple.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let nd = complex.embed_dim();
    let origin = complex.vertex(tuple[0]);
    let mut edges = Vec::with_capacity(k * nd);
    for &v in &tuple[1..] {
        for d in 0..nd {
            edges.push(complex.vertex(v)[d] - origin[d]);
        }
    }
    elementary_volume(&edges, nd, k)
}

fn longest_edge(complex: &SimplicialComplex, tuple: &[usize]) -> f64 {
    let mut max2 = 0.0f64;
    for i in 0..tuple.len() {
        for j in (i + 1)..tuple.len() {
            let a = complex.vertex(tuple[i]);
            let b = complex.vertex(tuple[j]);
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            max2 = max2.max(d2);
        }
    }
    libm::sqrt(max2)
}

/// Circumcenter of th i-th k-simplex: the unique point of the simplex's
/// affine hull equidistant from its vertices.
pub fn circumcenter(
    complex: &SimplicialComplex,
    k: usize,
    index: usize,
) -> Result<Vec<f64>, GeometryError> {
    circumcenter_with_bary(complex, complex.simplex(k, index))
        .map(|(c, _)| c)
        .map_err(|_| GeometryError::DegenerateSimplex { dim: k, index })
}

/// Solve for the circumcenter in the affine hull of the simplex:
/// with edges E_i = P_i - P_0, the offsets x solve (E_i . E_j) x_j = |E_i|^2/2.
/// Also returns barycentric coordinates, used for the dual piece sign tests.
fn circumcenter_with_bary(
    complex: &SimplicialComplex,
    tuple: &[usize],
) -> Result<(Vec<f64>, Vec<f64>), ()> {
    let nd = complex.embed_dim();
    let k = tuple.len() - 1;
    let p0 = complex.vertex(tuple[0]);
    if k == 0 {
        return Ok((p0.to_vec(), vec![1.0]));
    }
    let mut edges = Vec::with_capacity(k * nd);
    for &v in &tuple[1..] {
        for d in 0..nd {
            edges.push(complex.vertex(v)[d] - p0[d]);
        }
    }
    let mut gram = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for i in 0..k {
        let a = &edges[i * nd..(i + 1) * nd];
        rhs[i] = 0.5 * a.iter().map(|x| x * x).sum::<f64>();
        for j in i..k {
            let b = &edges[j * nd..(j + 1) * nd];
            let dot = a.iter().zip(b).map(|(x, y)| x * y).sum();
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
    }
    let x = solve_small(&mut gram, &mut rhs, k)?;
    let mut center = p0.to_vec();
    for i in 0..k {
        for d in 0..nd {
            center[d] += x[i] * edges[i * nd + d];
        }
    }
    let mut bary = Vec::with_capacity(k + 1);
    bary.push(1.0 - x[..k].iter().sum::<f64>());
    bary.extend_from_slice(&x[..k]);
    Ok((center, bary))
}

/// Gaussian elimination with partial pivoting for systems of size <= 3.
fn solve_small(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], m: usize) -> Result<[f64; 3], ()> {
    let scale = a
        .iter()
        .take(m)
        .flat_map(|row| row.iter().take(m))
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut x = [0.0f64; 3];
    for col in 0..m {
        let mut piv = col;
        for r in (col + 1)..m {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(());
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..m {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..m {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..m).rev() {
        let mut sum = b[r];
        for c in (r + 1)..m {
            sum -= a[r][c] * x[c];
        }
        x[r] = sum / a[r][r];
    }
    Ok(x)
}

/// Delaunay report: a mesh qualifies when every interior (n-1)-simplex has a
/// positive dual edge. Exactly cocircular configurations (zero duals) are not
/// violations but get flagged as borderline since the Hodge star cannot be
/// inverted there.
#[derive(Debug, Clone)]
pub struct DelaunayReport {
    pub ok: bool,
    pub violating_faces: Vec<usize>,
    pub borderline_faces: Vec<usize>,
}

pub fn is_delaunay(complex: &SimplicialComplex, measures: &DualMeasures) -> DelaunayReport {
    let n = complex.dim();
    let mut violating = Vec::new();
    let mut borderline = Vec::new();
    for face in 0..complex.num_simplices(n - 1) {
        if complex.is_boundary_face(face) {
            continue;
        }
        let d = measures.dual_volume(n - 1, face);
        let tol = measures.dual_zero_tol(face);
        if d < -tol {
            violating.push(face);
        } else if d <= tol {
            borderline.push(face);
        }
    }
    DelaunayReport {
        ok: violating.is_empty(),
        violating_faces: violating,
        borderline_faces: borderline,
    }
}

/// Per-face outcome of the interface well-centeredness check.
#[derive(Debug, Clone)]
pub struct InterfaceReport {
    pub ok: bool,
    /// (face, portion in each coface) for the faces that fail
    pub failing_faces: Vec<(usize, f64, f64)>,
}

/// Both cofaces of every listed face must contain their own circumcenter,
/// i.e. both dual edge portions must be strictly positive.
pub fn is_well_centered_interface(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    interface_faces: &[usize],
) -> Result<InterfaceReport, GeometryError> {
    let _ = complex;
    let mut failing = Vec::new();
    for &face in interface_faces {
        let (first, second) = measures.side_portions(face);
        let second = second.ok_or(GeometryError::NotInteriorFace { face })?;
        let tol = measures.dual_zero_tol(face);
        if first.length <= tol || second.length <= tol {
            failing.push((face, first.length, second.length));
        }
    }
    Ok(InterfaceReport {
        ok: failing.is_empty(),
        failing_faces: failing,
    })
}

/// Gradients of the barycentric coordinate functions of a top cell, flat
/// `(n+1) x n`. Requires a flat embedding.
pub fn barycentric_gradients(
    complex: &SimplicialComplex,
    cell: usize,
) -> Result<Vec<f64>, GeometryError> {
    let n = complex.dim();
    if complex.embed_dim() != n {
        return Err(GeometryError::FlatEmbeddingRequired);
    }
    let tuple = complex.simplex(n, cell);
    let p0 = complex.vertex(tuple[0]);
    // rows of the inverse edge matrix are the gradients of bary 1..n
    let mut e = [[0.0f64; 3]; 3];
    for (i, &v) in tuple[1..].iter().enumerate() {
        for d in 0..n {
            e[i][d] = complex.vertex(v)[d] - p0[d];
        }
    }
    let mut grads = vec![0.0; (n + 1) * n];
    for i in 0..n {
        let mut m = e;
        let mut rhs = [0.0f64; 3];
        rhs[i] = 1.0;
        let g = solve_small(&mut m, &mut rhs, n).map_err(|_| GeometryError::DegenerateSimplex {
            dim: n,
            index: cell,
        })?;
        for d in 0..n {
            grads[(i + 1) * n + d] = g[d];
            grads[d] -= g[d]; // gradient of bary 0 is minus the sum
        }
    }
    Ok(grads)
}

/// Barycentric coordinates of a point with respect to a top cell.
pub fn barycentric_coords(
    complex: &SimplicialComplex,
    cell: usize,
    point: &[f64],
) -> Result<Vec<f64>, GeometryError> {
    let n = complex.dim();
    if complex.embed_dim() != n {
        return Err(GeometryError::FlatEmbeddingRequired);
    }
    let tuple = complex.simplex(n, cell);
    let p0 = complex.vertex(tuple[0]);
    let mut e = [[0.0f64; 3]; 3];
    for (i, &v) in tuple[1..].iter().enumerate() {
        for d in 0..n {
            // solve on the transpose so the columns are the edge vectors
            e[d][i] = complex.vertex(v)[d] - p0[d];
        }
    }
    let mut rhs = [0.0f64; 3];
    for d in 0..n {
        rhs[d] = point[d] - p0[d];
    }
    let x = solve_small(&mut e, &mut rhs, n).map_err(|_| GeometryError::DegenerateSimplex {
        dim: n,
        index: cell,
    })?;
    let mut bary = Vec::with_capacity(n + 1);
    bary.push(1.0 - x[..n].iter().sum::<f64>());
    bary.extend_from_slice(&x[..n]);
    Ok(bary)
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}
