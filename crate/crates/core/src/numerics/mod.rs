//! Dense complex linear algebra and an adaptive ODE integrator.
//!
//! Matrices are plain `nalgebra::DMatrix<Complex64>`. nalgebra stores them
//! column-major, so [`vec`] is a straight copy of the storage and matches the
//! column-stacking convention used for superoperators.

mod ode;

pub use ode::{integrate_ode, integrate_ode_with, OdeOptions, OdeStats};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<C64>;

/// Default rank cutoff (relative to the largest singular value).
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Eigenvalues of a square matrix with (optionally) the matching
/// right eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    /// `None` when the matrix is defective (or numerically indistinguishable
    /// from defective).
    pub eigenvectors: Option<ComplexMatrix>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Which factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn basis_op(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn from_real_diagonal(d: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        d.len(),
        d.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out `traced` from an operator on a `dims.0 × dims.1` product space.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !rho.is_square() || rho.nrows() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {}x{} needs a {}x{} matrix, got {}x{}",
            da,
            db,
            da * db,
            da * db,
            rho.nrows(),
            rho.ncols()
        )));
    }
    let out = match traced {
        Subsystem::Second => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::First => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// Column-stacking vectorization.
pub fn vec(m: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<C64>, rows: usize) -> Result<ComplexMatrix> {
    if rows == 0 || v.len() % rows != 0 {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {} rows",
            v.len(),
            rows
        )));
    }
    Ok(ComplexMatrix::from_column_slice(rows, v.len() / rows, v.as_slice()))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_error(m) < tol
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `½(A + A†)`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors as columns.
pub fn eigh(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("eigh needs a square matrix".into()));
    }
    let n = a.nrows();
    let h = hermitian_part(a);
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let tol = FACTORIZATION_TOL;
    let id = ComplexMatrix::identity(n, n);
    // same reconstruction guard as `svd`
    let sym = CONVERGENCE_THRESHOLDS
        .iter()
        .filter_map(|&eps| SymmetricEigen::try_new(h.clone(), eps, 0))
        .find(|f| {
            let lam = ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(f.eigenvalues[i], 0.0) } else { c(0.0, 0.0) });
            (&f.eigenvectors * lam * f.eigenvectors.adjoint() - &h).norm() <= tol * scale
                && (f.eigenvectors.adjoint() * &f.eigenvectors - &id).norm() <= tol
        })
        .ok_or(Error::EigenConvergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sym.eigenvalues[i].total_cmp(&sym.eigenvalues[j]));
    let values = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| sym.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// `½ Σ |eig(a − b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = eigh(&(a - b))?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Full eigen-decomposition of a general complex matrix.
///
/// Eigenvalues come from the complex Schur form. Eigenvectors are recovered
/// per cluster of (numerically) coincident eigenvalues as the right singular
/// vectors of `A − λI` with vanishing singular values, which keeps
/// degenerate but diagonalizable matrices such as Liouvillians well behaved.
/// Defective matrices get `eigenvectors: None`.
pub fn eig(a: &ComplexMatrix) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eig needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Some(ComplexMatrix::zeros(0, 0)),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("eig input".into()));
    }
    let schur =
        Schur::try_new(a.clone(), f64::EPSILON, 1000 * n).ok_or(Error::EigenConvergence(n))?;
    let (_, t) = schur.unpack();
    let eigenvalues: Vec<C64> = t.diagonal().iter().copied().collect();
    let eigenvectors = cluster_eigenvectors(a, &eigenvalues);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues needs a square matrix".into()));
    }
    let n = a.nrows();
    let schur =
        Schur::try_new(a.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or(Error::EigenConvergence(n))?;
    Ok(schur.unpack().1.diagonal().iter().copied().collect())
}

fn cluster_eigenvectors(a: &ComplexMatrix, values: &[C64]) -> Option<ComplexMatrix> {
    let n = a.nrows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-8 * scale;
    let null_tol = 1e-7 * scale;

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|&j| (values[j] - v).norm() < cluster_tol))
        {
            Some(cl) => cl.push(i),
            None => clusters.push(vec![i]),
        }
    }

    let mut vectors = ComplexMatrix::zeros(n, n);
    for cl in &clusters {
        let center = cl.iter().map(|&i| values[i]).sum::<C64>() / cl.len() as f64;
        let shifted = a - ComplexMatrix::identity(n, n) * center;
        let svd = svd(&shifted).ok()?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        for (slot, &member) in cl.iter().enumerate() {
            let k = order[slot];
            if svd.singular_values[k] > null_tol {
                return None;
            }
            for r in 0..n {
                vectors[(r, member)] = svd.v[(r, k)];
            }
        }
    }
    Some(vectors)
}

/// Full SVD `a = U Σ V†`, singular values in no particular order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Relative reconstruction error above which a factorization is rejected.
/// Healthy nalgebra factorizations sit near 1e-15 (1e-12 at dimension 25);
/// the failures this guards against are off by 1e-3.
const FACTORIZATION_TOL: f64 = 1e-10;

const CONVERGENCE_THRESHOLDS: [f64; 6] = [f64::EPSILON, 1e-16, 5e-17, 1e-15, 1e-17, 4e-16];

/// SVD checked by reconstruction and unitarity of `U` and `V`.
///
/// nalgebra's complex bidiagonal iteration can stop on a factorization that is
/// off by ~1e-3 for some inputs (entries spanning many orders of magnitude);
/// which inputs fail depends on the convergence threshold, so several are
/// tried before giving up.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    for &eps in &CONVERGENCE_THRESHOLDS {
        let Some(f) = SVD::try_new(a.clone(), true, true, eps, 0) else { continue };
        let (Some(u), Some(v_t)) = (f.u, f.v_t) else { continue };
        let f = Svd {
            u,
            singular_values: f.singular_values.iter().copied().collect(),
            v: v_t.adjoint(),
        };
        if f.is_accurate(a) {
            return Ok(f);
        }
    }
    // nalgebra's implicit QR occasionally returns a wrong factorization of
    // rank-deficient input; one-sided Jacobi is slower but dependable
    if m >= n {
        if let Some(f) = jacobi_svd(a).filter(|f| f.is_accurate(a)) {
            return Ok(f);
        }
    } else if let Some(f) = jacobi_svd(&a.adjoint()) {
        let f = Svd { u: f.v, singular_values: f.singular_values, v: f.u };
        if f.is_accurate(a) {
            return Ok(f);
        }
    }
    Err(Error::EigenConvergence(m.max(n)))
}

impl Svd {
    fn is_accurate(&self, a: &ComplexMatrix) -> bool {
        let k = self.singular_values.len();
        if self.u.ncols() != k || self.v.ncols() != k {
            return false;
        }
        let scale = a.norm().max(f64::MIN_POSITIVE);
        let sigma = ComplexMatrix::from_fn(k, k, |i, j| if i == j { c(self.singular_values[i], 0.0) } else { c(0.0, 0.0) });
        let id = ComplexMatrix::identity(k, k);
        (&self.u * sigma * self.v.adjoint() - a).norm() <= FACTORIZATION_TOL * scale
            && (self.u.adjoint() * &self.u - &id).norm() <= FACTORIZATION_TOL
            && (self.v.adjoint() * &self.v - &id).norm() <= FACTORIZATION_TOL
    }
}

/// Hestenes one-sided Jacobi for `m ≥ n`.
fn jacobi_svd(a: &ComplexMatrix) -> Option<Svd> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n, n);
    let mut converged = false;
    for _ in 0..100 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dotc(&w.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate the phase out of the overlap, then a real rotation
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let cs = 1.0 / t.hypot(1.0);
                let sn = cs * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let x = mat[(r, i)];
                        let y = mat[(r, j)] * phase;
                        mat[(r, i)] = x * cs - y * sn;
                        mat[(r, j)] = x * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    let singular_values: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut u = ComplexMatrix::zeros(m, n);
    let mut filled = Vec::with_capacity(n);
    for j in 0..n {
        if singular_values[j] > 0.0 {
            u.set_column(j, &(w.column(j) / c(singular_values[j], 0.0)));
            filled.push(j);
        }
    }
    // exact zeros: complete U with standard basis vectors orthogonalised
    // against what is already there
    for j in (0..n).filter(|&j| singular_values[j] == 0.0) {
        let best = (0..m)
            .map(|e| {
                let mut x = DVector::<C64>::zeros(m);
                x[e] = c(1.0, 0.0);
                for _ in 0..2 {
                    for &k in &filled {
                        let proj = u.column(k).dotc(&x);
                        x -= u.column(k) * proj;
                    }
                }
                x
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))?;
        let norm = best.norm();
        u.set_column(j, &(best / c(norm, 0.0)));
        filled.push(j);
    }
    Some(Svd { u, singular_values, v })
}

/// Truncated SVD used for rank-revealing solves.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    u: ComplexMatrix,
    v: ComplexMatrix,
    inv_s: Vec<f64>,
}

impl PseudoInverse {
    /// Keeps singular values `≥ rank_tol · σ_max`.
    pub fn new(a: &ComplexMatrix, rank_tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(
                "pseudo-inverse expects a square matrix".into(),
            ));
        }
        if !(rank_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rank_tol must be > 0, got {rank_tol}")));
        }
        let svd = svd(a)?;
        let (u, v) = (svd.u, svd.v);
        let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cutoff = rank_tol * s_max;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| s_max > 0.0 && svd.singular_values[i] >= cutoff)
            .collect();
        let u = ComplexMatrix::from_fn(u.nrows(), keep.len(), |r, k| u[(r, keep[k])]);
        let v = ComplexMatrix::from_fn(v.nrows(), keep.len(), |r, k| v[(r, keep[k])]);
        let inv_s = keep.iter().map(|&i| 1.0 / svd.singular_values[i]).collect();
        Ok(Self { u, v, inv_s })
    }

    pub fn rank(&self) -> usize {
        self.inv_s.len()
    }

    /// Minimum-norm least-squares solution `A⁺ b`.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut coeffs = self.u.adjoint() * b;
        for (k, s) in self.inv_s.iter().enumerate() {
            coeffs.row_mut(k).scale_mut(*s);
        }
        &self.v * coeffs
    }

    /// Norm of the part of `b` that lies outside the numerical range of `A`.
    pub fn range_residual(&self, b: &ComplexMatrix) -> f64 {
        let proj = &self.u * (self.u.adjoint() * b);
        (b - proj).norm()
    }
}

/// Minimum-norm least-squares solve of `a x = b`; directions whose singular
/// value falls below `rank_tol · σ_max` are projected out.
pub fn solve_or_pinv(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} rows, matrix has {}",
            b.nrows(),
            a.nrows()
        )));
    }
    Ok(PseudoInverse::new(a, rank_tol)?.solve(b))
}

/// Determinant through the product of eigenvalues.
pub fn det(a: &ComplexMatrix) -> Result<C64> {
    Ok(eigenvalues(a)?.iter().product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, cl: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, cl, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn naive_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                let mut acc = c(0.0, 0.0);
                for k in 0..a.ncols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn matmul_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&mut rng, 2, 2);
        assert!(max_abs_diff(&matmul(&identity(2), &a).unwrap(), &a) < 1e-15);
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(matmul(&a, &z).unwrap(), z);
        let a = random(&mut rng, 3, 3);
        let b = random(&mut rng, 3, 3);
        assert!(max_abs_diff(&matmul(&a, &b).unwrap(), &naive_product(&a, &b)) < 1e-13);
        assert!(matches!(
            matmul(&random(&mut rng, 2, 3), &random(&mut rng, 2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn kron_cases() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let d = from_real_diagonal(&[2.0, -3.0]);
        assert_eq!(kron(&d, &identity(2)), from_real_diagonal(&[2.0, 2.0, -3.0, -3.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (a, b, cm, d) = (
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
            );
            let lhs = kron(&a, &b) * kron(&cm, &d);
            let rhs = kron(&(&a * &cm), &(&b * &d));
            assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
        }
    }

    #[test]
    fn partial_trace_cases() {
        let ra = from_real_diagonal(&[0.3, 0.7]);
        let mut rb = from_real_diagonal(&[0.5, 0.25, 0.25]);
        rb[(0, 1)] = c(0.1, 0.05);
        rb[(1, 0)] = c(0.1, -0.05);
        let prod = kron(&ra, &rb);
        assert!(max_abs_diff(&partial_trace(&prod, (2, 3), Subsystem::Second).unwrap(), &ra) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&prod, (2, 3), Subsystem::First).unwrap(), &rb) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random(&mut rng, 6, 6);
        let reduced = partial_trace(&m, (3, 2), Subsystem::First).unwrap();
        assert!((trace(&reduced) - trace(&m)).norm() < 1e-14);

        let s = 1.0 / 2f64.sqrt();
        let bell = DVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let proj = &bell * bell.adjoint();
        let half = identity(2) * c(0.5, 0.0);
        assert!(max_abs_diff(&partial_trace(&proj, (2, 2), Subsystem::First).unwrap(), &half) < 1e-15);
        assert!(partial_trace(&proj, (3, 2), Subsystem::First).is_err());
    }

    #[test]
    fn eig_diagonal_and_nilpotent() {
        let d = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-2.0, 0.0),
            c(0.0, 3.0),
        ]));
        let sp = eig(&d).unwrap();
        for want in [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)] {
            assert!(sp.eigenvalues.iter().any(|z| (z - want).norm() < 1e-14));
        }
        let nil = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let sp = eig(&nil).unwrap();
        assert!(sp.eigenvalues.iter().all(|z| z.norm() < 1e-14));
        assert!(sp.eigenvectors.is_none());
    }

    #[test]
    fn jacobi_svd_handles_rank_deficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n, rank) in [(4, 4, 4), (6, 6, 3), (9, 9, 1), (7, 4, 2)] {
            let a = random(&mut rng, m, rank) * random(&mut rng, rank, n);
            let f = jacobi_svd(&a).unwrap();
            assert!(f.is_accurate(&a), "{m}x{n} rank {rank}");
            let zeros = f.singular_values.iter().filter(|&&s| s < 1e-12 * a.norm()).count();
            assert_eq!(zeros, n - rank);
        }
        let f = jacobi_svd(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(f.is_accurate(&ComplexMatrix::zeros(3, 3)));
    }

    #[test]
    fn eig_trace_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random(&mut rng, 4, 4);
            let sp = eig(&a).unwrap();
            let sum: C64 = sp.eigenvalues.iter().sum();
            let prod: C64 = sp.eigenvalues.iter().product();
            assert!((sum - trace(&a)).norm() < 1e-9);
            // determinant oracle via LU, independent of the Schur route
            let det_lu = a.clone().lu().determinant();
            assert!((prod - det_lu).norm() < 1e-9);
            let vecs = sp.eigenvectors.expect("random matrices are diagonalizable");
            for (k, lam) in sp.eigenvalues.iter().enumerate() {
                let v = vecs.column(k).into_owned();
                let r = (&a * &v - &v * *lam).norm();
                assert!(r < 1e-9 * a.norm(), "residual {r}");
            }
        }
    }

    #[test]
    fn eig_degenerate_diagonalizable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random(&mut rng, 4, 4);
        let pinv = p.clone().try_inverse().unwrap();
        let d = from_real_diagonal(&[0.0, 0.0, -1.0, -1.0]);
        let a = &p * d * pinv;
        let sp = eig(&a).unwrap();
        let vecs = sp.eigenvectors.unwrap();
        for (k, lam) in sp.eigenvalues.iter().enumerate() {
            let v = vecs.column(k).into_owned();
            assert!((&a * &v - &v * *lam).norm() < 1e-9 * a.norm());
        }
        assert!(vecs.clone().lu().determinant().norm() > 1e-6);
    }

    #[test]
    fn eig_hermitian_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random(&mut rng, 5, 5);
        let h = hermitian_part(&a);
        for z in eig(&h).unwrap().eigenvalues {
            assert!(z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn pinv_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random(&mut rng, 3, 1);
        let x = solve_or_pinv(&identity(3), &b, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs_diff(&x, &b) < 1e-15);

        let a = from_real_diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let x = solve_or_pinv(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs_diff(&x, &ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)])) < 1e-15);
        let pinv = PseudoInverse::new(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(pinv.rank(), 1);
        assert!((pinv.range_residual(&b) - 1.0).abs() < 1e-15);

        let a = random(&mut rng, 4, 4);
        let b = random(&mut rng, 4, 1);
        let x = solve_or_pinv(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert!((&a * x - b).norm() < 1e-10);
        assert!(solve_or_pinv(&a, &random(&mut rng, 3, 1), 1e-12).is_err());
        assert!(PseudoInverse::new(&a, 0.0).is_err());
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vec(&m);
        assert_eq!(v[1], c(3.0, 0.0));
        assert_eq!(unvec(&v, 2).unwrap(), m);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, r, b) = (random(&mut rng, 3, 3), random(&mut rng, 3, 3), random(&mut rng, 3, 3));
        let lhs = vec(&(&a * &r * &b));
        let rhs = kron(&b.transpose(), &a) * vec(&r);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
