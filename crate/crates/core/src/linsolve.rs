//! Linear solves for circuit Jacobians.
//!
//! Matrices are assembled as coordinate triplets. Systems up to
//! [`DENSE_LIMIT`] unknowns go through nalgebra's dense LU; larger ones use a
//! row-oriented sparse LU with threshold partial pivoting.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Largest system solved with the dense factorization.
pub const DENSE_LIMIT: usize = 64;

/// Pivots smaller than this fraction of the largest column entry are avoided
/// when a sparser row is available.
const PIVOT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearSolveError {
    #[error("singular matrix: no usable pivot in column {column} (pivot ratio {pivot_ratio:.3e})")]
    Singular { column: usize, pivot_ratio: f64 },
    #[error("linear solve produced non-finite values (pivot ratio {pivot_ratio:.3e})")]
    NonFinite { pivot_ratio: f64 },
    #[error("dimension mismatch: matrix is {n}x{n}, right-hand side has {rhs}")]
    Dimension { n: usize, rhs: usize },
}

/// Scalars the solvers work over: `f64` for DC/transient, `Complex64` for AC.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + ComplexField<RealField = f64>
    + 'static
{
    const ZERO: Self;
    fn magnitude(self) -> f64;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Square matrix in coordinate form; duplicate entries are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplets<T = f64> {
    pub n: usize,
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Triplets<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.n && col < self.n);
        if value != T::ZERO {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::from_element(self.n, self.n, T::ZERO);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::ZERO; self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Rows, sorted by column with duplicates merged.
    fn to_rows(&self) -> Vec<Vec<(usize, T)>> {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.n];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, T)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != T::ZERO);
            *row = merged;
        }
        rows
    }
}

impl Triplets<f64> {
    /// `self + factor * other`, promoted to complex.
    pub fn combine_complex(&self, other: &Triplets<f64>, factor: Complex64) -> Triplets<Complex64> {
        let mut out = Triplets::new(self.n);
        for &(r, c, v) in &self.entries {
            out.push(r, c, Complex64::new(v, 0.0));
        }
        for &(r, c, v) in &other.entries {
            out.push(r, c, factor * v);
        }
        out
    }
}

/// Solve `A x = b`, choosing the dense or sparse path by size.
pub fn solve<T: Scalar>(a: &Triplets<T>, b: &[T]) -> Result<Vec<T>, LinearSolveError> {
    if b.len() != a.n {
        return Err(LinearSolveError::Dimension {
            n: a.n,
            rhs: b.len(),
        });
    }
    if a.n <= DENSE_LIMIT {
        solve_dense(a, b)
    } else {
        solve_sparse(a, b)
    }
}

fn pivot_ratio<T: Scalar>(diag: impl Iterator<Item = T>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in diag {
        let m = d.magnitude();
        lo = lo.min(m);
        hi = hi.max(m);
    }
    if hi > 0.0 {
        lo / hi
    } else {
        0.0
    }
}

pub fn solve_dense<T: Scalar>(a: &Triplets<T>, b: &[T]) -> Result<Vec<T>, LinearSolveError> {
    let n = a.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = a.to_dense().lu();
    let u = lu.u();
    let ratio = pivot_ratio((0..n).map(|i| u[(i, i)]));
    if let Some(col) = (0..n).find(|&i| u[(i, i)].magnitude() == 0.0) {
        return Err(LinearSolveError::Singular {
            column: col,
            pivot_ratio: ratio,
        });
    }
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(LinearSolveError::Singular {
            column: 0,
            pivot_ratio: ratio,
        })?;
    if x.iter().any(|v| !v.finite()) {
        return Err(LinearSolveError::NonFinite { pivot_ratio: ratio });
    }
    Ok(x.iter().copied().collect())
}

/// Gaussian elimination on sparse rows.
///
/// For each column the pivot is chosen among remaining rows whose entry is at
/// least [`PIVOT_THRESHOLD`] times the column maximum, preferring the row with
/// the fewest nonzeros to limit fill-in.
pub fn solve_sparse<T: Scalar>(a: &Triplets<T>, b: &[T]) -> Result<Vec<T>, LinearSolveError> {
    let n = a.n;
    let mut rows = a.to_rows();
    let mut rhs = b.to_vec();
    let mut active: Vec<bool> = vec![true; n];
    // pivot_row[k] = the row eliminated at step k (which pivots column k)
    let mut pivot_row = vec![usize::MAX; n];
    let mut diag = Vec::with_capacity(n);

    #[allow(clippy::needless_range_loop)]
    for k in 0..n {
        let entry =
            |row: &Vec<(usize, T)>| row.binary_search_by_key(&k, |e| e.0).ok().map(|i| row[i].1);
        let mut best_mag = 0.0f64;
        for (r, row) in rows.iter().enumerate() {
            if active[r] {
                if let Some(v) = entry(row) {
                    best_mag = best_mag.max(v.magnitude());
                }
            }
        }
        if best_mag == 0.0 || !best_mag.is_finite() {
            return Err(LinearSolveError::Singular {
                column: k,
                pivot_ratio: pivot_ratio(diag.iter().copied()),
            });
        }
        let mut chosen = usize::MAX;
        let mut chosen_len = usize::MAX;
        for (r, row) in rows.iter().enumerate() {
            if !active[r] {
                continue;
            }
            if let Some(v) = entry(row) {
                if v.magnitude() >= PIVOT_THRESHOLD * best_mag && row.len() < chosen_len {
                    chosen = r;
                    chosen_len = row.len();
                }
            }
        }
        active[chosen] = false;
        pivot_row[k] = chosen;
        let prow = rows[chosen].clone();
        let pval = entry(&prow).expect("pivot entry exists");
        diag.push(pval);
        let prhs = rhs[chosen];

        for r in 0..n {
            if !active[r] {
                continue;
            }
            let Some(v) = entry(&rows[r]) else { continue };
            let factor = v / pval;
            rows[r] = axpy_row(&rows[r], &prow, factor, k);
            rhs[r] -= factor * prhs;
        }
    }

    // back substitution in reverse elimination order
    let mut x = vec![T::ZERO; n];
    for k in (0..n).rev() {
        let r = pivot_row[k];
        let mut acc = rhs[r];
        let mut d = T::ZERO;
        for &(c, v) in &rows[r] {
            if c == k {
                d = v;
            } else if c > k {
                acc -= v * x[c];
            }
        }
        x[k] = acc / d;
    }
    let ratio = pivot_ratio(diag.into_iter());
    if x.iter().any(|v| !v.finite()) {
        return Err(LinearSolveError::NonFinite { pivot_ratio: ratio });
    }
    Ok(x)
}

/// `row - factor * pivot`, dropping column `k` (eliminated exactly).
fn axpy_row<T: Scalar>(
    row: &[(usize, T)],
    pivot: &[(usize, T)],
    factor: T,
    k: usize,
) -> Vec<(usize, T)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ci < cj {
            i += 1;
            (ci, row[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(factor * pivot[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, row[i - 1].1 - factor * pivot[j - 1].1)
        };
        if c != k && v != T::ZERO {
            out.push((c, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> (Triplets, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Triplets::new(n);
        for i in 0..n {
            a.push(i, i, 4.0 + rng.gen::<f64>());
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                a.push(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (a, b)
    }

    fn residual(a: &Triplets, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dense_and_sparse_agree() {
        for seed in 0..5 {
            let (a, b) = random_system(40, seed);
            let xd = solve_dense(&a, &b).unwrap();
            let xs = solve_sparse(&a, &b).unwrap();
            for (p, q) in xd.iter().zip(&xs) {
                assert!((p - q).abs() < 1e-12);
            }
            assert!(residual(&a, &xs, &b) < 1e-12);
        }
    }

    #[test]
    fn sparse_needs_pivoting() {
        // zero on the diagonal: only row exchange makes this solvable
        let mut a = Triplets::new(3);
        a.push(0, 1, 1.0);
        a.push(1, 0, 1.0);
        a.push(1, 2, 2.0);
        a.push(2, 2, 1.0);
        a.push(2, 0, 1e-3);
        let b = [1.0, 2.0, 3.0];
        let x = solve_sparse(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn large_system_uses_sparse_path() {
        let (a, b) = random_system(200, 7);
        let x = solve(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-11);
    }

    #[test]
    fn singular_is_reported() {
        let mut a = Triplets::new(2);
        a.push(0, 0, 1.0);
        a.push(1, 0, 1.0);
        assert!(matches!(
            solve_dense(&a, &[1.0, 1.0]),
            Err(LinearSolveError::Singular { .. })
        ));
        assert!(matches!(
            solve_sparse(&a, &[1.0, 1.0]),
            Err(LinearSolveError::Singular { column: 1, .. })
        ));
    }

    #[test]
    fn complex_solve() {
        let mut g = Triplets::new(2);
        g.push(0, 0, 1.0);
        g.push(1, 1, 1.0);
        let mut c = Triplets::new(2);
        c.push(1, 1, 1.0);
        let a = g.combine_complex(&c, Complex64::new(0.0, 1.0));
        let b = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        for x in [solve_dense(&a, &b).unwrap(), solve_sparse(&a, &b).unwrap()] {
            assert!((x[1] - Complex64::new(0.5, -0.5)).norm() < 1e-15);
        }
    }
}
