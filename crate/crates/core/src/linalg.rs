//! Minimal sparse kit: compressed sparse row matrices, conjugate gradients,
//! a Schur-complement saddle point solver and a dense direct fallback.
//!
//! The saddle systems solved here have the block form `[A Bᵀ; B 0]` with a
//! diagonal `A`, so the Schur complement `S = B A⁻¹ Bᵀ` can be formed
//! explicitly as a sparse product.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Matrix entry types for [`Csr`].
pub trait Scalar:
    Copy
    + PartialEq
    + core::ops::Add<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Neg<Output = Self>
{
    const ZERO: Self;
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
}

impl Scalar for i64 {
    const ZERO: i64 = 0;
}

/// Sparse matrix in compressed row storage. Column indices are strictly
/// increasing within each row and duplicates are merged on construction,
/// so equal inputs build bit-identical matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr<T> {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csr {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from (row, col, value) triplets. Duplicate positions are summed;
    /// entries that cancel to zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        assert!(
            triplets.iter().all(|&(r, c, _)| r < nrows && c < ncols),
            "triplet index out of bounds"
        );
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v = v + v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != T::ZERO {
                row_offsets[r + 1] += 1;
                col_indices.push(c);
                values.push(v);
            }
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Csr {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (column indices, values) of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::ZERO,
        }
    }

    pub fn transpose(&self) -> Csr<T> {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        Csr::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn scale(&self, s: T) -> Csr<T> {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = *v * s;
        }
        out
    }

    /// Sparse product `self * other` (Gustavson row-by-row accumulation).
    pub fn matmul(&self, other: &Csr<T>) -> Csr<T> {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let mut triplets = Vec::new();
        // dense accumulator reused across rows
        let mut marker = vec![usize::MAX; other.ncols];
        let mut acc: Vec<T> = vec![T::ZERO; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (bcols, bvals) = other.row(k);
                for (&c, &b) in bcols.iter().zip(bvals) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = a * b;
                        touched.push(c);
                    } else {
                        acc[c] = acc[c] + a * b;
                    }
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != T::ZERO {
                    triplets.push((r, c, acc[c]));
                }
            }
        }
        Csr::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }
}

impl Csr<i64> {
    pub fn to_f64(&self) -> Csr<f64> {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| v as f64).collect(),
        }
    }
}

impl Csr<f64> {
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut sum = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                sum += v * x[c];
            }
            out[r] = sum;
        }
    }

    /// `diag * self` with a diagonal given as a vector.
    pub fn scale_rows(&self, diag: &[f64]) -> Csr<f64> {
        assert_eq!(diag.len(), self.nrows);
        let mut out = self.clone();
        for r in 0..self.nrows {
            let span = out.row_offsets[r]..out.row_offsets[r + 1];
            for v in &mut out.values[span] {
                *v *= diag[r];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.nrows * self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[r * self.ncols + c] = v;
            }
        }
        dense
    }
}

/// Reduced saddle point system `[A Bᵀ; B 0] [f; p] = [rhs_top; rhs_bottom]`
/// with diagonal `A`.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a_diag: Vec<f64>,
    pub b: Csr<f64>,
    pub rhs_top: Vec<f64>,
    pub rhs_bottom: Vec<f64>,
}

impl SaddleSystem {
    pub fn n_flux(&self) -> usize {
        self.a_diag.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_flux() + self.n_pressure()
    }

    fn check_shape(&self) {
        assert_eq!(self.b.ncols(), self.a_diag.len());
        assert_eq!(self.rhs_top.len(), self.a_diag.len());
        assert_eq!(self.rhs_bottom.len(), self.b.nrows());
    }

    /// Relative residual of a candidate solution against the full block system.
    pub fn residual(&self, f: &[f64], p: &[f64]) -> f64 {
        let mut r2 = 0.0;
        let bt = self.b.transpose();
        let mut btp = vec![0.0; f.len()];
        bt.matvec(p, &mut btp);
        for i in 0..f.len() {
            let r = self.a_diag[i] * f[i] + btp[i] - self.rhs_top[i];
            r2 += r * r;
        }
        let mut bf = vec![0.0; p.len()];
        self.b.matvec(f, &mut bf);
        for j in 0..p.len() {
            let r = bf[j] - self.rhs_bottom[j];
            r2 += r * r;
        }
        let rhs2: f64 = self
            .rhs_top
            .iter()
            .chain(self.rhs_bottom.iter())
            .map(|v| v * v)
            .sum();
        if rhs2 == 0.0 {
            libm::sqrt(r2)
        } else {
            libm::sqrt(r2 / rhs2)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// `A` has a (near) zero diagonal entry, so the Schur reduction cannot
    /// divide by it. Carries the offending index.
    ZeroDiagonal(usize),
    /// Conjugate gradients did not reach the requested tolerance.
    NonConvergence { iterations: usize, residual: f64 },
    /// The Schur complement has a constant nullspace: no pressure was pinned.
    PressureNullspace,
    /// Dense factorization hit a zero pivot.
    SingularMatrix,
    /// System is larger than the configured dense limit.
    OverDenseLimit { dim: usize, limit: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::ZeroDiagonal(i) => write!(f, "zero diagonal entry in A at index {i}"),
            LinalgError::NonConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "conjugate gradients did not converge ({iterations} iterations, residual {residual:.3e})"
            ),
            LinalgError::PressureNullspace => {
                write!(f, "pressure nullspace: singular Schur complement (no pressure pinned)")
            }
            LinalgError::SingularMatrix => write!(f, "singular matrix in direct solve"),
            LinalgError::OverDenseLimit { dim, limit } => {
                write!(f, "system dimension {dim} exceeds dense limit {limit}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// What the solver did, for reporting.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub cg_iterations: usize,
    /// Euclidean residual norms per CG iteration (starting residual first).
    pub cg_residual_history: Vec<f64>,
    /// Relative residual of the returned solution in the full block system.
    pub residual: f64,
}

/// Options for [`schur_solve`].
#[derive(Debug, Clone, Copy)]
pub struct SchurOptions {
    pub rel_tol: f64,
    /// `None` means `10 * dim`.
    pub max_iter: Option<usize>,
    pub jacobi: bool,
}

impl Default for SchurOptions {
    fn default() -> Self {
        SchurOptions {
            rel_tol: 1e-12,
            max_iter: None,
            jacobi: false,
        }
    }
}

/// Solve the saddle system by explicit Schur complement reduction.
///
/// Eliminating the fluxes gives `S p = B A⁻¹ rhs_top - rhs_bottom` with
/// `S = B A⁻¹ Bᵀ`. Since `A` is negative definite on well-posed problems,
/// `-S` is symmetric positive definite and conjugate gradients applies to
/// `(-S) p = rhs_bottom - B A⁻¹ rhs_top`. Fluxes are recovered from
/// `f = A⁻¹ (rhs_top - Bᵀ p)`.
pub fn schur_solve(
    sys: &SaddleSystem,
    opts: SchurOptions,
) -> Result<(Vec<f64>, Vec<f64>, SolveStats), LinalgError> {
    sys.check_shape();
    let nf = sys.n_flux();
    let np = sys.n_pressure();
    for (i, &a) in sys.a_diag.iter().enumerate() {
        if a == 0.0 {
            return Err(LinalgError::ZeroDiagonal(i));
        }
    }
    let inv_a: Vec<f64> = sys.a_diag.iter().map(|&a| 1.0 / a).collect();

    // -S = -B A⁻¹ Bᵀ, formed explicitly; B has few entries per row.
    let bt = sys.b.transpose();
    let scaled_bt = bt.scale_rows(&inv_a); // A⁻¹ Bᵀ
    let neg_s = sys.b.matmul(&scaled_bt).scale(-1.0);

    // rhs of (-S) p = rhs_bottom - B A⁻¹ rhs_top
    let mut tmp = vec![0.0; nf];
    for i in 0..nf {
        tmp[i] = inv_a[i] * sys.rhs_top[i];
    }
    let mut rhs = vec![0.0; np];
    sys.b.matvec(&tmp, &mut rhs);
    for (r, &b) in rhs.iter_mut().zip(&sys.rhs_bottom) {
        *r = b - *r;
    }

    // an unpinned pressure shows up as the constant nullspace of S
    if np > 0 {
        let ones = vec![1.0; np];
        let mut s_ones = vec![0.0; np];
        neg_s.matvec(&ones, &mut s_ones);
        let norm: f64 = libm::sqrt(s_ones.iter().map(|v| v * v).sum::<f64>());
        let scale: f64 = neg_s.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm <= 1e-12 * scale.max(1.0) * libm::sqrt(np as f64) {
            return Err(LinalgError::PressureNullspace);
        }
    }

    let max_iter = opts.max_iter.unwrap_or(10 * sys.dim());
    let precond: Option<Vec<f64>> = if opts.jacobi {
        Some((0..np).map(|i| neg_s.get(i, i)).collect())
    } else {
        None
    };
    let (p, run) = cg(&neg_s, &rhs, opts.rel_tol, max_iter, precond.as_deref())?;
    if !run.converged {
        return Err(LinalgError::NonConvergence {
            iterations: run.iterations,
            residual: run.history.last().copied().unwrap_or(f64::NAN),
        });
    }

    // f = A⁻¹ (rhs_top - Bᵀ p)
    let mut f = vec![0.0; nf];
    bt.matvec(&p, &mut f);
    for i in 0..nf {
        f[i] = inv_a[i] * (sys.rhs_top[i] - f[i]);
    }

    let residual = sys.residual(&f, &p);
    let stats = SolveStats {
        cg_iterations: run.iterations,
        cg_residual_history: run.history,
        residual,
    };
    if residual > opts.rel_tol * 100.0 {
        return Err(LinalgError::NonConvergence {
            iterations: stats.cg_iterations,
            residual,
        });
    }
    Ok((f, p, stats))
}

/// Outcome of a conjugate-gradient run.
struct CgRun {
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
}

/// Conjugate gradients for a symmetric positive definite CSR matrix.
/// Runs to the tolerance or the iteration cap and reports which; only a
/// positive-definiteness violation is an error.
fn cg(
    mat: &Csr<f64>,
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
    jacobi: Option<&[f64]>,
) -> Result<(Vec<f64>, CgRun), LinalgError> {
    let n = rhs.len();
    let rhs_norm = libm::sqrt(rhs.iter().map(|v| v * v).sum::<f64>());
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok((
            x,
            CgRun {
                iterations: 0,
                history: vec![0.0],
                converged: true,
            },
        ));
    }
    let mut r = rhs.to_vec();
    let apply_precond = |r: &[f64], z: &mut Vec<f64>| {
        match jacobi {
            Some(d) => {
                for i in 0..r.len() {
                    z[i] = if d[i] != 0.0 { r[i] / d[i] } else { r[i] };
                }
            }
            None => z.copy_from_slice(r),
        };
    };
    let mut z = vec![0.0; n];
    apply_precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    let mut res_norm = rhs_norm;
    history.push(res_norm);
    for it in 0..max_iter {
        if res_norm <= rel_tol * rhs_norm {
            return Ok((
                x,
                CgRun {
                    iterations: it,
                    history,
                    converged: true,
                },
            ));
        }
        mat.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            // not positive definite along p
            return Err(LinalgError::NonConvergence {
                iterations: it,
                residual: res_norm / rhs_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        apply_precond(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res_norm = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
        history.push(res_norm);
    }
    let converged = res_norm <= rel_tol * rhs_norm;
    Ok((
        x,
        CgRun {
            iterations: max_iter,
            history,
            converged,
        },
    ))
}

/// Default dimension cap for [`direct_solve`].
pub const DENSE_LIMIT: usize = 4000;

/// Assemble the full block matrix densely and solve with partially pivoted LU.
pub fn direct_solve(
    sys: &SaddleSystem,
    dense_limit: usize,
) -> Result<(Vec<f64>, Vec<f64>, SolveStats), LinalgError> {
    sys.check_shape();
    let nf = sys.n_flux();
    let np = sys.n_pressure();
    let dim = nf + np;
    if dim > dense_limit {
        return Err(LinalgError::OverDenseLimit {
            dim,
            limit: dense_limit,
        });
    }
    let mut dense = vec![0.0; dim * dim];
    for i in 0..nf {
        dense[i * dim + i] = sys.a_diag[i];
    }
    for r in 0..np {
        let (cols, vals) = sys.b.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            dense[(nf + r) * dim + c] = v; // B block
            dense[c * dim + (nf + r)] = v; // Bᵀ block
        }
    }
    let mut rhs: Vec<f64> = sys
        .rhs_top
        .iter()
        .chain(sys.rhs_bottom.iter())
        .copied()
        .collect();
    lu_solve_in_place(&mut dense, &mut rhs, dim)?;
    let f = rhs[..nf].to_vec();
    let p = rhs[nf..].to_vec();
    let residual = sys.residual(&f, &p);
    if residual > 1e-10 {
        return Err(LinalgError::SingularMatrix);
    }
    Ok((
        f,
        p,
        SolveStats {
            residual,
            ..SolveStats::default()
        },
    ))
}

/// Partially pivoted LU factorization and solve, in place. Row-major `a`.
fn lu_solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), LinalgError> {
    let scale: f64 = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if n == 0 {
        return Ok(());
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = a[perm[k] * n + k].abs();
        for r in (k + 1)..n {
            let v = a[perm[r] * n + k].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= 1e-14 * scale.max(1.0) {
            return Err(LinalgError::SingularMatrix);
        }
        perm.swap(k, pivot_row);
        let pk = perm[k];
        let diag = a[pk * n + k];
        for r in (k + 1)..n {
            let pr = perm[r];
            let factor = a[pr * n + k] / diag;
            if factor != 0.0 {
                a[pr * n + k] = factor;
                for c in (k + 1)..n {
                    a[pr * n + c] -= factor * a[pk * n + c];
                }
            }
        }
    }
    // forward substitution on permuted rows
    let mut y = vec![0.0; n];
    for r in 0..n {
        let pr = perm[r];
        let mut sum = b[pr];
        for c in 0..r {
            sum -= a[pr * n + c] * y[c];
        }
        y[r] = sum;
    }
    // back substitution
    for r in (0..n).rev() {
        let pr = perm[r];
        let mut sum = y[r];
        for c in (r + 1)..n {
            sum -= a[pr * n + c] * b[c];
        }
        b[r] = sum / a[pr * n + r];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tiny_system() -> SaddleSystem {
        // [-1 0 1; 0 -1 -1; 1 -1 0] [f1 f2 p]ᵀ = [0 0 2]ᵀ
        SaddleSystem {
            a_diag: vec![-1.0, -1.0],
            b: Csr::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, -1.0)]),
            rhs_top: vec![0.0, 0.0],
            rhs_bottom: vec![2.0],
        }
    }

    #[test]
    fn schur_solves_one_by_one() {
        // [-1 1; 1 0][f; p] = [0; q]  =>  f = q (second row), p = f = q (first row)
        let q = 3.5;
        let sys = SaddleSystem {
            a_diag: vec![-1.0],
            b: Csr::from_triplets(1, 1, vec![(0, 0, 1.0)]),
            rhs_top: vec![0.0],
            rhs_bottom: vec![q],
        };
        let (f, p, _) = schur_solve(&sys, SchurOptions::default()).unwrap();
        assert!((f[0] - q).abs() < 1e-12);
        assert!((p[0] - q).abs() < 1e-12);
    }

    #[test]
    fn schur_solves_two_by_one() {
        // Eliminating by hand: f1 = p, f2 = -p, f1 - f2 = 2p = 2 => p = 1.
        let sys = tiny_system();
        let (f, p, stats) = schur_solve(&sys, SchurOptions::default()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((f[0] - 1.0).abs() < 1e-12);
        assert!((f[1] + 1.0).abs() < 1e-12);
        assert!(stats.residual < 1e-12);
    }

    #[test]
    fn direct_matches_schur() {
        let sys = tiny_system();
        let (fs, ps, _) = schur_solve(&sys, SchurOptions::default()).unwrap();
        let (fd, pd, _) = direct_solve(&sys, DENSE_LIMIT).unwrap();
        for (a, b) in fs.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in ps.iter().zip(&pd) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let mut sys = tiny_system();
        sys.rhs_bottom = vec![0.0];
        let (f, p, _) = direct_solve(&sys, DENSE_LIMIT).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        assert!(p.iter().all(|&v| v == 0.0));
        let (f, p, _) = schur_solve(&sys, SchurOptions::default()).unwrap();
        assert!(f.iter().all(|&v| v.abs() < 1e-15));
        assert!(p.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_diagonal_is_rejected_by_schur() {
        let mut sys = tiny_system();
        sys.a_diag[1] = 0.0;
        assert_eq!(
            schur_solve(&sys, SchurOptions::default()).unwrap_err(),
            LinalgError::ZeroDiagonal(1)
        );
    }

    #[test]
    fn unpinned_pressure_is_singular() {
        // Two pressures, one interior flux connecting them: constant pressure
        // nullspace survives, both solvers must report it.
        let sys = SaddleSystem {
            a_diag: vec![-1.0],
            b: Csr::from_triplets(2, 1, vec![(0, 0, 1.0), (1, 0, -1.0)]),
            rhs_top: vec![0.0],
            rhs_bottom: vec![1.0, -1.0],
        };
        assert_eq!(
            direct_solve(&sys, DENSE_LIMIT).unwrap_err(),
            LinalgError::SingularMatrix
        );
        assert_eq!(
            schur_solve(&sys, SchurOptions::default()).unwrap_err(),
            LinalgError::PressureNullspace
        );
    }

    #[test]
    fn over_dense_limit_is_reported() {
        let sys = tiny_system();
        assert_eq!(
            direct_solve(&sys, 2).unwrap_err(),
            LinalgError::OverDenseLimit { dim: 3, limit: 2 }
        );
    }

    #[test]
    fn cg_residual_history_is_reported() {
        let sys = tiny_system();
        let (_, _, stats) = schur_solve(&sys, SchurOptions::default()).unwrap();
        assert!(stats.cg_residual_history.len() >= 2);
        assert!(stats.cg_iterations >= 1);
    }

    #[test]
    fn jacobi_preconditioning_reaches_the_same_solution() {
        let sys = tiny_system();
        let plain = schur_solve(&sys, SchurOptions::default()).unwrap();
        let jacobi = schur_solve(
            &sys,
            SchurOptions {
                jacobi: true,
                ..SchurOptions::default()
            },
        )
        .unwrap();
        for (a, b) in plain.0.iter().zip(&jacobi.0) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in plain.1.iter().zip(&jacobi.1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_solve_is_deterministic() {
        let sys = tiny_system();
        let a = schur_solve(&sys, SchurOptions::default()).unwrap();
        let b = schur_solve(&sys, SchurOptions::default()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn cg_error_decreases_monotonically_in_the_energy_norm() {
        // SPD tridiagonal system; rerun CG with growing iteration caps
        // (deterministic, so cap k reproduces iterate k) and watch the
        // energy-norm error shrink at every step
        let n = 8;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 2.5));
            if i + 1 < n {
                triplets.push((i, i + 1, -1.0));
                triplets.push((i + 1, i, -1.0));
            }
        }
        let mat = Csr::from_triplets(n, n, triplets);
        let rhs: Vec<f64> = (0..n).map(|i| libm::sin(i as f64 * 0.7) + 1.0).collect();
        let (exact, run) = cg(&mat, &rhs, 1e-15, 10 * n, None).unwrap();
        assert!(run.converged);
        let energy_error = |x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(a, b)| a - b).collect();
            let mut ae = vec![0.0; n];
            mat.matvec(&e, &mut ae);
            libm::sqrt(e.iter().zip(&ae).map(|(a, b)| a * b).sum::<f64>().max(0.0))
        };
        let mut last = energy_error(&vec![0.0; n]);
        for cap in 1..=n {
            let (x, _) = cg(&mat, &rhs, 1e-300, cap, None).unwrap();
            let err = energy_error(&x);
            assert!(
                err <= last + 1e-14,
                "energy error rose at cap {cap}: {err} > {last}"
            );
            last = err;
        }
    }

    #[test]
    fn csr_from_triplets_merges_and_sorts() {
        let m = Csr::from_triplets(
            2,
            3,
            vec![(0, 2, 1.0), (0, 0, 2.0), (0, 2, -1.0), (1, 1, 3.0)],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 1), 3.0);
    }

    #[test]
    fn csr_matmul_matches_dense() {
        let a = Csr::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]);
        let b = Csr::from_triplets(3, 2, vec![(0, 0, 3.0), (1, 0, 1.0), (2, 1, 5.0)]);
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 3.0);
        assert_eq!(c.get(0, 1), 10.0);
        assert_eq!(c.get(1, 0), -1.0);
        assert_eq!(c.get(1, 1), 0.0);
    }
}
