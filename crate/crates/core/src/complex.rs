//! Combinatorial layer: oriented manifold simplicial complexes, cochains,
//! boundary operators and discrete exterior derivatives.
//!
//! A simplex is identified by its ascending vertex tuple; for each dimension
//! the tuples are kept in dictionary order so indices are reproducible.
//! Simplices below the top dimension take the orientation of their sorted
//! tuple, while each top simplex carries a sign relating its sorted tuple to
//! the consistent mesh orientation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::Csr;

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexError {
    /// Vertex index out of range in an input simplex.
    VertexOutOfRange { simplex: usize, vertex: usize },
    /// An input simplex repeats a vertex.
    RepeatedVertex { simplex: usize },
    /// Input simplex of lower dimension than the complex; it cannot be the
    /// face of any top simplex.
    DanglingSimplex { simplex: usize },
    /// Volume below the degeneracy cutoff.
    DegenerateSimplex { simplex: usize },
    /// A codimension-one simplex with more than two cofaces.
    NonManifoldFace { face_vertices: Vec<usize> },
    /// Two cofaces induce the same orientation on a shared face.
    InconsistentOrientation { face: usize },
    /// Embedding dimension exceeds the intrinsic dimension and no orientation
    /// was supplied; it cannot be inferred from signed volumes.
    OrientationRequired,
    /// Dimension argument outside `0..=n` for the requested operator.
    DimensionOutOfRange { k: usize },
    /// Vertex coordinate buffer length is not a multiple of the embedding
    /// dimension.
    BadVertexBuffer,
}

impl fmt::Display for ComplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexError::VertexOutOfRange { simplex, vertex } => {
                write!(
                    f,
                    "simplex {simplex} references vertex {vertex} out of range"
                )
            }
            ComplexError::RepeatedVertex { simplex } => {
                write!(f, "simplex {simplex} repeats a vertex")
            }
            ComplexError::DanglingSimplex { simplex } => write!(
                f,
                "simplex {simplex} has lower dimension than the complex and no coface"
            ),
            ComplexError::DegenerateSimplex { simplex } => {
                write!(
                    f,
                    "simplex {simplex} is degenerate (volume below tolerance)"
                )
            }
            ComplexError::NonManifoldFace { face_vertices } => {
                write!(f, "face {face_vertices:?} has more than two cofaces")
            }
            ComplexError::InconsistentOrientation { face } => {
                write!(f, "cofaces of face {face} induce the same orientation")
            }
            ComplexError::OrientationRequired => {
                write!(
                    f,
                    "orientation must be supplied when embedding dimension exceeds n"
                )
            }
            ComplexError::DimensionOutOfRange { k } => write!(f, "dimension {k} out of range"),
            ComplexError::BadVertexBuffer => write!(f, "vertex buffer length mismatch"),
        }
    }
}

impl core::error::Error for ComplexError {}

/// Simplices of one dimension, stored as flat ascending tuples in dictionary
/// order.
#[derive(Debug, Clone)]
struct SimplexLevel {
    stride: usize,
    verts: Vec<usize>,
}

impl SimplexLevel {
    fn len(&self) -> usize {
        self.verts.len() / self.stride
    }

    fn get(&self, i: usize) -> &[usize] {
        &self.verts[i * self.stride..(i + 1) * self.stride]
    }

    fn position(&self, tuple: &[usize]) -> Option<usize> {
        debug_assert_eq!(tuple.len(), self.stride);
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(tuple) {
                core::cmp::Ordering::Less => lo = mid + 1,
                core::cmp::Ordering::Greater => hi = mid,
                core::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

/// One coface of a codimension-one simplex: the top cell index and the
/// incidence sign of the (oriented) cell's boundary on that face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coface {
    pub cell: usize,
    pub sign: i8,
}

/// Oriented manifold simplicial complex in `R^N` with intrinsic dimension `n`.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    dim: usize,
    embed_dim: usize,
    vertices: Vec<f64>,
    levels: Vec<SimplexLevel>,
    top_orientation: Vec<i8>,
    /// Cofaces per (n-1)-simplex, at most two, ordered by cell index.
    cofaces: Vec<(Coface, Option<Coface>)>,
    boundary_faces: Vec<usize>,
}

/// Relative volume cutoff below which an n-simplex counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

impl SimplicialComplex {
    /// Build a complex from vertex coordinates (flat, `embed_dim` per vertex)
    /// and top-level simplices. Requires `embed_dim == n` so the consistent
    /// orientation can be derived from signed volumes; every sorted tuple
    /// whose signed volume is negative gets orientation sign -1.
    pub fn new(
        embed_dim: usize,
        vertices: Vec<f64>,
        top_simplices: Vec<Vec<usize>>,
    ) -> Result<Self, ComplexError> {
        Self::build(embed_dim, vertices, top_simplices, None)
    }

    /// Build with caller-supplied orientation signs, one per top simplex,
    /// relative to the tuple order as given. Needed when `embed_dim > n`.
    pub fn with_orientation(
        embed_dim: usize,
        vertices: Vec<f64>,
        top_simplices: Vec<Vec<usize>>,
        orientation: Vec<i8>,
    ) -> Result<Self, ComplexError> {
        Self::build(embed_dim, vertices, top_simplices, Some(orientation))
    }

    fn build(
        embed_dim: usize,
        vertices: Vec<f64>,
        top_simplices: Vec<Vec<usize>>,
        orientation: Option<Vec<i8>>,
    ) -> Result<Self, ComplexError> {
        if embed_dim == 0 || vertices.len() % embed_dim != 0 {
            return Err(ComplexError::BadVertexBuffer);
        }
        let n_vertices = vertices.len() / embed_dim;
        let dim = top_simplices
            .iter()
            .map(|t| t.len().saturating_sub(1))
            .max()
            .unwrap_or(0);
        if dim == 0 || dim > embed_dim {
            return Err(ComplexError::DimensionOutOfRange { k: dim });
        }

        // sort tuples, tracking permutation parity
        let mut tops: Vec<(Vec<usize>, i8)> = Vec::with_capacity(top_simplices.len());
        for (s, tuple) in top_simplices.into_iter().enumerate() {
            if tuple.len() != dim + 1 {
                return Err(ComplexError::DanglingSimplex { simplex: s });
            }
            for &v in &tuple {
                if v >= n_vertices {
                    return Err(ComplexError::VertexOutOfRange {
                        simplex: s,
                        vertex: v,
                    });
                }
            }
            let (sorted, parity) = sort_with_parity(tuple);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ComplexError::RepeatedVertex { simplex: s });
            }
            let user_sign = match &orientation {
                Some(signs) => {
                    let sg = *signs.get(s).ok_or(ComplexError::OrientationRequired)?;
                    sg * parity
                }
                None => {
                    if embed_dim != dim {
                        return Err(ComplexError::OrientationRequired);
                    }
                    // orient the sorted tuple so its signed volume is positive
                    let det = signed_volume_det(&vertices, embed_dim, &sorted);
                    let scale = longest_edge(&vertices, embed_dim, &sorted);
                    let vol = det.abs() / factorial(dim) as f64;
                    if vol < DEGENERACY_TOL * powi(scale, dim) {
                        return Err(ComplexError::DegenerateSimplex { simplex: s });
                    }
                    if det > 0.0 {
                        1
                    } else {
                        -1
                    }
                }
            };
            tops.push((sorted, user_sign));
        }

        // dictionary order for the top level; orientation signs follow along
        tops.sort();
        for w in tops.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ComplexError::NonManifoldFace {
                    face_vertices: w[0].0.clone(),
                });
            }
        }

        let mut levels: Vec<SimplexLevel> = (0..=dim)
            .map(|k| SimplexLevel {
                stride: k + 1,
                verts: Vec::new(),
            })
            .collect();
        levels[dim].verts = tops.iter().flat_map(|(t, _)| t.iter().copied()).collect();
        let top_orientation: Vec<i8> = tops.iter().map(|&(_, s)| s).collect();

        // enumerate faces level by level: facets of each (k+1)-simplex,
        // deduplicated and kept in dictionary order
        for k in (0..dim).rev() {
            let upper = &levels[k + 1];
            let mut tuples: Vec<Vec<usize>> = Vec::with_capacity(upper.len() * (k + 2));
            let mut buf = vec![0usize; k + 1];
            for i in 0..upper.len() {
                let tuple = upper.get(i);
                for omit in 0..tuple.len() {
                    let mut w = 0;
                    for (j, &v) in tuple.iter().enumerate() {
                        if j != omit {
                            buf[w] = v;
                            w += 1;
                        }
                    }
                    tuples.push(buf.clone());
                }
            }
            tuples.sort();
            tuples.dedup();
            levels[k].verts = tuples.into_iter().flatten().collect();
        }

        // coface incidence on codimension-one faces
        let n_faces = levels[dim - 1].len();
        let mut cofaces: Vec<Vec<Coface>> = vec![Vec::new(); n_faces];
        {
            let top = &levels[dim];
            let faces = &levels[dim - 1];
            let mut buf = vec![0usize; dim];
            for cell in 0..top.len() {
                let tuple = top.get(cell);
                for omit in 0..tuple.len() {
                    let mut w = 0;
                    for (j, &v) in tuple.iter().enumerate() {
                        if j != omit {
                            buf[w] = v;
                            w += 1;
                        }
                    }
                    let face = faces.position(&buf).expect("face enumerated above");
                    let sign = top_orientation[cell] * if omit % 2 == 0 { 1 } else { -1 };
                    cofaces[face].push(Coface { cell, sign });
                }
            }
        }

        let mut incidence = Vec::with_capacity(n_faces);
        let mut boundary_faces = Vec::new();
        for (face, mut list) in cofaces.into_iter().enumerate() {
            list.sort_by_key(|c| c.cell);
            match list.len() {
                1 => {
                    boundary_faces.push(face);
                    incidence.push((list[0], None));
                }
                2 => {
                    if list[0].sign + list[1].sign != 0 {
                        return Err(ComplexError::InconsistentOrientation { face });
                    }
                    incidence.push((list[0], Some(list[1])));
                }
                _ => {
                    return Err(ComplexError::NonManifoldFace {
                        face_vertices: levels[dim - 1].get(face).to_vec(),
                    })
                }
            }
        }

        Ok(SimplicialComplex {
            dim,
            embed_dim,
            vertices,
            levels,
            top_orientation,
            cofaces: incidence,
            boundary_faces,
        })
    }

    /// Intrinsic dimension n (2 for triangle meshes, 3 for tetrahedral ones).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension N of the embedding space.
    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.embed_dim
    }

    pub fn num_simplices(&self, k: usize) -> usize {
        self.levels[k].len()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.embed_dim..(i + 1) * self.embed_dim]
    }

    pub fn vertex_buffer(&self) -> &[f64] {
        &self.vertices
    }

    /// Ascending vertex tuple of the i-th k-simplex.
    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        self.levels[k].get(i)
    }

    /// Index of a k-simplex by its vertex tuple (any order).
    pub fn simplex_index(&self, k: usize, tuple: &[usize]) -> Option<usize> {
        let mut sorted: Vec<usize> = tuple.to_vec();
        sorted.sort_unstable();
        self.levels[k].position(&sorted)
    }

    /// Sign relating the sorted tuple of a top simplex to the mesh
    /// orientation.
    pub fn top_orientation(&self, cell: usize) -> i8 {
        self.top_orientation[cell]
    }

    /// Cofaces of an (n-1)-simplex with their incidence signs, lower cell
    /// index first.
    pub fn face_cofaces(&self, face: usize) -> (Coface, Option<Coface>) {
        self.cofaces[face]
    }

    /// Indices of the (n-1)-simplices with exactly one coface, ascending.
    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn is_boundary_face(&self, face: usize) -> bool {
        self.cofaces[face].1.is_none()
    }

    /// Interior (n-1)-simplices, ascending.
    pub fn interior_faces(&self) -> Vec<usize> {
        (0..self.num_simplices(self.dim - 1))
            .filter(|&f| !self.is_boundary_face(f))
            .collect()
    }

    /// Signed boundary operator from k-chains to (k-1)-chains as an
    /// `N_{k-1} x N_k` integer matrix. The column of a simplex `[v0..vk]`
    /// carries `(-1)^i` at the face omitting `v_i`; top-level columns are
    /// additionally scaled by the cell's orientation sign.
    pub fn boundary_matrix(&self, k: usize) -> Result<Csr<i64>, ComplexError> {
        if k == 0 || k > self.dim {
            return Err(ComplexError::DimensionOutOfRange { k });
        }
        let upper = &self.levels[k];
        let lower = &self.levels[k - 1];
        let mut triplets = Vec::with_capacity(upper.len() * (k + 1));
        let mut buf = vec![0usize; k];
        for col in 0..upper.len() {
            let tuple = upper.get(col);
            let cell_sign = if k == self.dim {
                self.top_orientation[col] as i64
            } else {
                1
            };
            for omit in 0..tuple.len() {
                let mut w = 0;
                for (j, &v) in tuple.iter().enumerate() {
                    if j != omit {
                        buf[w] = v;
                        w += 1;
                    }
                }
                let row = lower.position(&buf).expect("closed under faces");
                let sign = if omit % 2 == 0 { 1i64 } else { -1i64 };
                triplets.push((row, col, sign * cell_sign));
            }
        }
        Ok(Csr::from_triplets(lower.len(), upper.len(), triplets))
    }

    /// Discrete exterior derivative `D_k`, the transpose of the boundary
    /// operator one dimension up, so the discrete Stokes theorem holds by
    /// construction.
    pub fn exterior_derivative_matrix(&self, k: usize) -> Result<Csr<i64>, ComplexError> {
        if k >= self.dim {
            return Err(ComplexError::DimensionOutOfRange { k });
        }
        Ok(self.boundary_matrix(k + 1)?.transpose())
    }

    /// Matrix of the dual exterior derivative on dual 0-cochains:
    /// `(-1)^n D_{n-1}ᵀ`.
    pub fn dual_derivative_matrix_d0(&self) -> Csr<i64> {
        let dt = self
            .exterior_derivative_matrix(self.dim - 1)
            .expect("n-1 < n")
            .transpose();
        if self.dim % 2 == 0 {
            dt
        } else {
            dt.scale(-1)
        }
    }

    /// Zero cochain of the given degree and kind.
    pub fn zero_cochain(&self, degree: usize, kind: CochainKind) -> Cochain {
        let len = match kind {
            CochainKind::Primal => self.num_simplices(degree),
            CochainKind::Dual => self.num_simplices(self.dim - degree),
        };
        Cochain {
            degree,
            kind,
            values: vec![0.0; len],
        }
    }
}

/// Which mesh a cochain lives on. A dual k-cochain is indexed by the
/// (n-k)-simplices whose dual cells carry it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CochainKind {
    Primal,
    Dual,
}

/// Real-valued discrete differential form: one value per k-simplex (primal)
/// or per dual cell (dual).
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub kind: CochainKind,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(degree: usize, kind: CochainKind, values: Vec<f64>) -> Self {
        Cochain {
            degree,
            kind,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluate on a chain given as (simplex index, integer weight) pairs.
    /// Evaluation is linear in the chain.
    pub fn evaluate(&self, chain: &[(usize, i64)]) -> f64 {
        chain.iter().map(|&(i, w)| self.values[i] * w as f64).sum()
    }
}

fn sort_with_parity(mut tuple: Vec<usize>) -> (Vec<usize>, i8) {
    let mut parity = 1i8;
    for i in 1..tuple.len() {
        let mut j = i;
        while j > 0 && tuple[j - 1] > tuple[j] {
            tuple.swap(j - 1, j);
            parity = -parity;
            j -= 1;
        }
    }
    (tuple, parity)
}

/// Determinant of the edge matrix of a full-dimensional simplex; the signed
/// volume is this over n!.
fn signed_volume_det(vertices: &[f64], embed_dim: usize, tuple: &[usize]) -> f64 {
    let n = tuple.len() - 1;
    debug_assert_eq!(n, embed_dim);
    let origin = &vertices[tuple[0] * embed_dim..(tuple[0] + 1) * embed_dim];
    let mut m = [[0.0f64; 3]; 3];
    for (i, &v) in tuple[1..].iter().enumerate() {
        let p = &vertices[v * embed_dim..(v + 1) * embed_dim];
        for d in 0..n {
            m[i][d] = p[d] - origin[d];
        }
    }
    match n {
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

fn longest_edge(vertices: &[f64], embed_dim: usize, tuple: &[usize]) -> f64 {
    let mut max2 = 0.0f64;
    for i in 0..tuple.len() {
        for j in (i + 1)..tuple.len() {
            let a = &vertices[tuple[i] * embed_dim..(tuple[i] + 1) * embed_dim];
            let b = &vertices[tuple[j] * embed_dim..(tuple[j] + 1) * embed_dim];
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            max2 = max2.max(d2);
        }
    }
    libm::sqrt(max2)
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

fn powi(base: f64, exp: usize) -> f64 {
    let mut out = 1.0;
    for _ in 0..exp {
        out *= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single_triangle() -> SimplicialComplex {
        SimplicialComplex::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![vec![0, 1, 2]]).unwrap()
    }

    fn two_triangles() -> SimplicialComplex {
        // unit square split by the diagonal [1,2]
        SimplicialComplex::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![vec![0, 1, 2], vec![1, 3, 2]],
        )
        .unwrap()
    }

    #[test]
    fn edges_are_in_dictionary_order() {
        let c = single_triangle();
        assert_eq!(c.num_simplices(1), 3);
        assert_eq!(c.simplex(1, 0), &[0, 1]);
        assert_eq!(c.simplex(1, 1), &[0, 2]);
        assert_eq!(c.simplex(1, 2), &[1, 2]);
    }

    #[test]
    fn shared_edge_has_two_cofaces() {
        let c = two_triangles();
        assert_eq!(c.num_simplices(1), 5);
        let shared = c.simplex_index(1, &[1, 2]).unwrap();
        let (first, second) = c.face_cofaces(shared);
        assert!(second.is_some());
        assert_eq!(first.sign + second.unwrap().sign, 0);
        assert_eq!(c.boundary_faces().len(), 4);
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let err = SimplicialComplex::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0, 2.0],
            vec![vec![0, 1, 2], vec![2, 3]],
        )
        .unwrap_err();
        assert_eq!(err, ComplexError::DanglingSimplex { simplex: 1 });
    }

    #[test]
    fn non_manifold_face_is_rejected() {
        let err = SimplicialComplex::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0, -1.0],
            vec![vec![0, 1, 2], vec![1, 3, 2], vec![1, 2, 4]],
        )
        .unwrap_err();
        assert!(matches!(err, ComplexError::NonManifoldFace { .. }));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let err =
            SimplicialComplex::new(2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0], vec![vec![0, 1, 2]])
                .unwrap_err();
        assert_eq!(err, ComplexError::DegenerateSimplex { simplex: 0 });
    }

    #[test]
    fn triangle_boundary_column_signs() {
        // counterclockwise triangle: boundary is [1,2] - [0,2] + [0,1]
        let c = single_triangle();
        let b = c.boundary_matrix(2).unwrap();
        assert_eq!(b.get(c.simplex_index(1, &[0, 1]).unwrap(), 0), 1);
        assert_eq!(b.get(c.simplex_index(1, &[0, 2]).unwrap(), 0), -1);
        assert_eq!(b.get(c.simplex_index(1, &[1, 2]).unwrap(), 0), 1);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        // same triangle listed clockwise builds the same boundary matrix
        let ccw = single_triangle();
        let cw = SimplicialComplex::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![vec![0, 2, 1]])
            .unwrap();
        assert_eq!(
            ccw.boundary_matrix(2).unwrap(),
            cw.boundary_matrix(2).unwrap()
        );
        assert_eq!(cw.top_orientation(0), 1);
    }

    #[test]
    fn edge_boundary_column() {
        let c = single_triangle();
        let b = c.boundary_matrix(1).unwrap();
        // edge [0,1]: -1 at vertex 0, +1 at vertex 1
        assert_eq!(b.get(0, 0), -1);
        assert_eq!(b.get(1, 0), 1);
        // each edge column sums to zero
        for col in 0..3 {
            let mut sum = 0;
            for row in 0..3 {
                sum += b.get(row, col);
            }
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let c = two_triangles();
        let b1 = c.boundary_matrix(1).unwrap();
        let b2 = c.boundary_matrix(2).unwrap();
        assert!(b1.matmul(&b2).is_zero());
    }

    #[test]
    fn derivative_of_derivative_vanishes() {
        let c = two_triangles();
        let d0 = c.exterior_derivative_matrix(0).unwrap();
        let d1 = c.exterior_derivative_matrix(1).unwrap();
        assert!(d1.matmul(&d0).is_zero());
    }

    #[test]
    fn single_triangle_top_derivative_row() {
        let c = single_triangle();
        let d1 = c.exterior_derivative_matrix(1).unwrap();
        assert_eq!(d1.nrows(), 1);
        assert_eq!(d1.get(0, 0), 1);
        assert_eq!(d1.get(0, 1), -1);
        assert_eq!(d1.get(0, 2), 1);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let c = two_triangles();
        let d0 = c.exterior_derivative_matrix(0).unwrap().to_f64();
        let ones = vec![1.0; c.num_vertices()];
        let mut out = vec![0.0; c.num_simplices(1)];
        d0.matvec(&ones, &mut out);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dual_derivative_sign_in_2d() {
        let c = single_triangle();
        let expected = c.exterior_derivative_matrix(1).unwrap().transpose();
        assert_eq!(c.dual_derivative_matrix_d0(), expected);
        // single triangle: one pressure value maps to [+1,-1,+1] on dual edges
        let m = c.dual_derivative_matrix_d0();
        assert_eq!((m.nrows(), m.ncols()), (3, 1));
        assert_eq!(m.get(0, 0), 1);
        assert_eq!(m.get(1, 0), -1);
        assert_eq!(m.get(2, 0), 1);
    }

    #[test]
    fn dual_derivative_sign_in_3d() {
        let c = SimplicialComplex::new(
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let expected = c
            .exterior_derivative_matrix(2)
            .unwrap()
            .transpose()
            .scale(-1);
        assert_eq!(c.dual_derivative_matrix_d0(), expected);
    }

    #[test]
    fn interior_rows_of_top_derivative_cancel() {
        let c = two_triangles();
        let d = c.exterior_derivative_matrix(1).unwrap();
        let shared = c.simplex_index(1, &[1, 2]).unwrap();
        let mut sum = 0;
        for cell in 0..c.num_simplices(2) {
            sum += d.get(cell, shared);
        }
        assert_eq!(sum, 0);
    }

    #[test]
    fn build_is_deterministic() {
        let build = || {
            SimplicialComplex::new(
                2,
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
                vec![vec![1, 3, 2], vec![0, 1, 2]],
            )
            .unwrap()
        };
        let a = build();
        let b = build();
        assert_eq!(a.levels[1].verts, b.levels[1].verts);
        assert_eq!(a.top_orientation, b.top_orientation);
        assert_eq!(a.boundary_matrix(2).unwrap(), b.boundary_matrix(2).unwrap());
    }

    #[test]
    fn dual_cochains_index_complementary_simplices() {
        let c = two_triangles();
        // dual 0-cochains live on the dual vertices, one per top cell
        assert_eq!(c.zero_cochain(0, CochainKind::Dual).len(), 2);
        assert_eq!(c.zero_cochain(1, CochainKind::Dual).len(), 5);
        assert_eq!(c.zero_cochain(2, CochainKind::Dual).len(), 4);
        assert_eq!(c.zero_cochain(1, CochainKind::Primal).len(), 5);
    }

    #[test]
    fn cochain_evaluation_is_linear() {
        let c = single_triangle();
        let mut alpha = c.zero_cochain(1, CochainKind::Primal);
        alpha.values = vec![1.0, 2.0, 4.0];
        let a = alpha.evaluate(&[(0, 1), (2, 1)]);
        let b = alpha.evaluate(&[(0, 1)]) + alpha.evaluate(&[(2, 1)]);
        assert_eq!(a, b);
        assert_eq!(alpha.evaluate(&[(1, -2)]), -4.0);
    }

    #[test]
    fn orientation_required_for_embedded_surfaces() {
        let err = SimplicialComplex::new(
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            vec![vec![0, 1, 2]],
        )
        .unwrap_err();
        assert_eq!(err, ComplexError::OrientationRequired);
        let c = SimplicialComplex::with_orientation(
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            vec![vec![0, 1, 2]],
            vec![1],
        )
        .unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.embed_dim(), 3);
    }
}
