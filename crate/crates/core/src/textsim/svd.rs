//! Dense matrix storage and a one-sided Jacobi (Hestenes) SVD.
//!
//! The Jacobi method orthogonalizes the columns of the narrower orientation
//! of the input by plane rotations until every column pair is orthogonal to
//! working precision. Column norms are then the singular values. It is slower
//! than bidiagonalization for large inputs but simple, accurate to high
//! relative precision, and fully deterministic.

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    fn from_columns(rows: usize, columns: &[Vec<f64>]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        m
    }
}

/// Thin SVD `A = U · diag(s) · Vᵀ` with `r = min(m, n)` components sorted by
/// non-increasing singular value.
///
/// Columns of `u` belonging to a zero singular value are zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

const MAX_SWEEPS: usize = 100;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yp) = (*x, *y);
        *x = c * xp - s * yp;
        *y = s * xp + c * yp;
    }
}

fn pair_mut(cols: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (lo, hi) = cols.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

/// Computes the thin SVD of `a`.
pub fn thin_svd(a: &DenseMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = thin_svd(&a.transpose());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }

    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();

    let tol = f64::EPSILON * (m as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (wp, wq) = pair_mut(&mut w, p, q);
                rotate(wp, wq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u_cols = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    for &i in &order {
        let sigma = norms[i];
        let u_col = if sigma > 0.0 {
            w[i].iter().map(|x| x / sigma).collect()
        } else {
            vec![0.0; m]
        };
        u_cols.push(u_col);
        v_cols.push(v[i].clone());
        singular_values.push(sigma);
    }

    Svd {
        u: DenseMatrix::from_columns(m, &u_cols),
        singular_values,
        v: DenseMatrix::from_columns(n, &v_cols),
    }
}

impl Svd {
    /// Rank-`k` reconstruction `U_k · diag(s_k) · V_kᵀ`.
    pub fn reconstruct(&self, k: usize) -> DenseMatrix {
        let k = k.min(self.singular_values.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for r in 0..m {
            for c in 0..n {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += self.u.get(r, j) * self.singular_values[j] * self.v.get(c, j);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}
