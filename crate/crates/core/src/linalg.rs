//! Dense Gaussian elimination over any [`Scalar`].

use crate::scalar::Scalar;

/// Square matrix stored row-major.
pub type Matrix<T> = Vec<Vec<T>>;

/// Determinant by elimination with partial pivoting.
pub fn determinant<T: Scalar>(mut a: Matrix<T>) -> T {
    let n = a.len();
    let mut det = T::one();
    for col in 0..n {
        let Some(pivot) = pivot_row(&a, col) else {
            return T::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            subtract_scaled_row(&mut a, row, col, &factor);
        }
    }
    det
}

/// `a[row][k] -= factor · a[col][k]` for `k ≥ col`; requires `row > col`.
fn subtract_scaled_row<T: Scalar>(a: &mut Matrix<T>, row: usize, col: usize, factor: &T) {
    let (top, bottom) = a.split_at_mut(row);
    for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
        *dst = dst.clone() - factor.clone() * src.clone();
    }
}

/// Solves `a x = b`; `None` when `a` is singular.
pub fn solve<T: Scalar>(mut a: Matrix<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let pivot = pivot_row(&a, col)?;
        a.swap(pivot, col);
        b.swap(pivot, col);
        let p = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            subtract_scaled_row(&mut a, row, col, &factor);
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

/// Solution component `col` by Cramer's rule, given the determinant of `a`.
pub fn cramer_component<T: Scalar>(a: &Matrix<T>, b: &[T], col: usize, det_a: &T) -> T {
    let replaced: Matrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r[col] = bi.clone();
            r
        })
        .collect();
    determinant(replaced) / det_a.clone()
}

fn pivot_row<T: Scalar>(a: &Matrix<T>, col: usize) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (row, r) in a.iter().enumerate().skip(col) {
        let v = r[col].abs();
        if v.is_zero() {
            continue;
        }
        match &best {
            Some((_, b)) if *b >= v => {}
            _ => best = Some((row, v)),
        }
    }
    best.map(|(row, _)| row)
}
