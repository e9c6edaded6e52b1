//! Minimal dense linear algebra: a row-major matrix type and a Householder QR
//! least-squares solver.
//!
//! The solver works on a column-major scratch buffer so the reflector updates
//! run over contiguous memory. Q is never formed; reflectors are applied to the
//! right-hand side as they are built. Rank deficiency is detected from the
//! remaining column norm at each elimination step and reported as a hard error.

use crate::error::Error;

/// Dense row-major matrix. `data[row * cols + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must match dimensions");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// Solution vector, length k.
    pub coefficients: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    /// Upper-triangular R factor, k×k row-major. Entries below the diagonal are zero.
    pub r_factor: Vec<f64>,
}

/// Column-major scratch for assembling a design matrix before solving.
///
/// Reused across solves to avoid reallocation in hot loops.
#[derive(Debug, Clone, Default)]
pub struct LstsqWorkspace {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LstsqWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prepare an m×k problem; returns (columns, rhs) for the caller to fill.
    /// Column j occupies `columns[j*m..(j+1)*m]`.
    pub fn reset(&mut self, m: usize, k: usize) -> (&mut [f64], &mut [f64]) {
        self.a.clear();
        self.a.resize(m * k, 0.0);
        self.b.clear();
        self.b.resize(m, 0.0);
        (&mut self.a, &mut self.b)
    }

    /// Solve the prepared problem, consuming the scratch contents.
    pub fn solve(&mut self, m: usize, k: usize, coefficients: &mut Vec<f64>) -> Result<f64, Error> {
        coefficients.clear();
        coefficients.resize(k, 0.0);
        householder_lstsq(&mut self.a, m, k, &mut self.b, coefficients)
    }
}

/// Least squares for a problem already laid out column-major.
///
/// `a` is m×k column-major and is overwritten (R in the upper triangle,
/// reflector tails below). `b` is overwritten with Qᵀb. On success `coef`
/// holds the solution and the residual sum of squares is returned.
pub fn householder_lstsq(
    a: &mut [f64],
    m: usize,
    k: usize,
    b: &mut [f64],
    coef: &mut [f64],
) -> Result<f64, Error> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), m);
    assert_eq!(coef.len(), k);
    if m < k {
        return Err(Error::RankDeficient { column: m });
    }

    // Scale for the rank test: the largest original column norm.
    let mut max_norm = 0.0f64;
    for j in 0..k {
        let norm = col_norm(&a[j * m..j * m + m]);
        max_norm = max_norm.max(norm);
    }
    let tol = f64::EPSILON * (m as f64).sqrt() * max_norm.max(f64::MIN_POSITIVE) * 16.0;

    for j in 0..k {
        let (head, tail) = a.split_at_mut((j + 1) * m);
        let col = &mut head[j * m + j..j * m + m];
        let norm = col_norm(col);
        if norm <= tol {
            return Err(Error::RankDeficient { column: j });
        }
        // Numerically stable sign choice: v = x + sgn(x0)·‖x‖·e1.
        let alpha = if col[0] >= 0.0 { -norm } else { norm };
        col[0] -= alpha;
        let vsq: f64 = col.iter().map(|v| v * v).sum();
        let scale = 2.0 / vsq;

        // Apply H = I − scale·vvᵀ to the trailing columns and the rhs.
        let v = &head[j * m + j..j * m + m];
        for l in 0..k - j - 1 {
            let target = &mut tail[l * m + j..l * m + m];
            apply_reflector(v, target, scale);
        }
        apply_reflector(v, &mut b[j..m], scale);

        head[j * m + j] = alpha;
    }

    // Back substitution on R (upper triangle of a, column-major).
    for j in (0..k).rev() {
        let mut acc = b[j];
        for l in j + 1..k {
            acc -= a[l * m + j] * coef[l];
        }
        coef[j] = acc / a[j * m + j];
    }
    for c in coef.iter() {
        if !c.is_finite() {
            return Err(Error::RankDeficient { column: k });
        }
    }

    let rss: f64 = b[k..m].iter().map(|r| r * r).sum();
    Ok(rss)
}

/// As [`householder_lstsq`], returning the R factor for covariance work.
pub fn householder_lstsq_full(
    mut a: Vec<f64>,
    m: usize,
    k: usize,
    mut b: Vec<f64>,
) -> Result<LeastSquares, Error> {
    let mut coef = vec![0.0; k];
    let rss = householder_lstsq(&mut a, m, k, &mut b, &mut coef)?;
    let mut r_factor = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            r_factor[i * k + j] = a[j * m + i];
        }
    }
    Ok(LeastSquares {
        coefficients: coef,
        rss,
        r_factor,
    })
}

/// Diagonal of (XᵀX)⁻¹ = R⁻¹R⁻ᵀ from the k×k row-major R factor.
///
/// Solves Rᵀw = e_j by forward substitution for each j; the diagonal entry is ‖w‖².
pub fn xtx_inverse_diagonal(r_factor: &[f64], k: usize) -> Vec<f64> {
    assert_eq!(r_factor.len(), k * k);
    let mut diag = vec![0.0; k];
    let mut w = vec![0.0; k];
    for j in 0..k {
        for x in w.iter_mut() {
            *x = 0.0;
        }
        // Rᵀ is lower triangular with (Rᵀ)[i][l] = R[l][i], l ≤ i.
        for i in j..k {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for l in j..i {
                acc -= r_factor[l * k + i] * w[l];
            }
            w[i] = acc / r_factor[i * k + i];
        }
        diag[j] = w[j..].iter().map(|x| x * x).sum();
    }
    diag
}

fn col_norm(col: &[f64]) -> f64 {
    col.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
fn apply_reflector(v: &[f64], target: &mut [f64], scale: f64) {
    let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let w = scale * dot;
    for (t, vi) in target.iter_mut().zip(v.iter()) {
        *t -= w * vi;
    }
}
