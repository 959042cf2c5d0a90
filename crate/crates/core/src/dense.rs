//! Dense vectors and matrices, matrix-induced norms and the structured
//! shifted-Hessian solver used by the ℓ∞ objective.
//!
//! Vectors are plain `[f64]` slices; the helpers in [`vec`] cover the handful
//! of BLAS-1 operations the solvers need. [`Matrix`] is row-major and refuses
//! non-finite entries at construction.

use crate::error::{check_dim, invalid, Error, Result};

/// BLAS-1 style helpers on slices.
pub mod vec {
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm2(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn norm_inf(a: &[f64]) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `y += alpha * x`
    pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), y.len());
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    }

    pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| alpha * v).collect()
    }

    pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    /// `(1 - t) a + t b`
    pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (1.0 - t) * x + t * y)
            .collect()
    }

    pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }
}

/// Returns an error naming the first non-finite entry, if any.
pub fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("Matrix::new", rows * cols, data.len())?;
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim("Matrix::from_rows", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("Matrix::matvec", self.cols, x.len())?;
        Ok((0..self.rows).map(|i| vec::dot(self.row(i), x)).collect())
    }

    /// `Aᵀ y`
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("Matrix::matvec_t", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                vec::axpy(*yi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// `Aᵀ diag(w) A`, the weighted Gram matrix.
    pub fn weighted_gram(&self, w: &[f64]) -> Result<Matrix> {
        check_dim("Matrix::weighted_gram", self.rows, w.len())?;
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            let r = self.row(i);
            for a in 0..n {
                let s = wi * r[a];
                if s == 0.0 {
                    continue;
                }
                let out = &mut g.data[a * n..a * n + a + 1];
                for (o, rb) in out.iter_mut().zip(&r[..=a]) {
                    *o += s * rb;
                }
            }
        }
        g.symmetrize_lower();
        Ok(g)
    }

    /// `AᵀA`
    pub fn gram(&self) -> Matrix {
        self.weighted_gram(&vec![1.0; self.rows])
            .expect("weights sized from the matrix")
    }

    /// Copies the lower triangle onto the upper one.
    fn symmetrize_lower(&mut self) {
        let n = self.cols;
        for a in 0..n {
            for b in 0..a {
                self.data[b * n + a] = self.data[a * n + b];
            }
        }
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &Matrix) -> Result<()> {
        check_dim("Matrix::add_scaled", self.data.len(), other.data.len())?;
        vec::axpy(alpha, &other.data, &mut self.data);
        Ok(())
    }

    /// Adds `alpha * u vᵀ`.
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) -> Result<()> {
        check_dim("Matrix::add_outer rows", self.rows, u.len())?;
        check_dim("Matrix::add_outer cols", self.cols, v.len())?;
        for (i, ui) in u.iter().enumerate() {
            vec::axpy(alpha * ui, v, self.row_mut(i));
        }
        Ok(())
    }

    pub fn add_diag(&mut self, d: &[f64]) -> Result<()> {
        check_dim("Matrix::add_diag", self.rows.min(self.cols), d.len())?;
        for (i, v) in d.iter().enumerate() {
            self.data[i * self.cols + i] += v;
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest eigenvalue of a symmetric positive semidefinite matrix by power
    /// iteration, to the requested relative tolerance.
    pub fn top_eigenvalue(&self, rel_tol: f64) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        // Deterministic start with no structured zero pattern.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract())
            .collect();
        let nx = vec::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut lambda = 0.0;
        for _ in 0..10_000 {
            let y = self.matvec(&x).expect("square");
            let next = vec::dot(&x, &y);
            let ny = vec::norm2(&y);
            if ny == 0.0 {
                return 0.0;
            }
            x = vec::scaled(1.0 / ny, &y);
            if (next - lambda).abs() <= rel_tol * next.abs() {
                return next.max(ny);
            }
            lambda = next;
        }
        lambda
    }
}

/// Lower-triangular Cholesky factor `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading its lower triangle.
    ///
    /// A pivot below `1e-14 * trace(M) / n` is treated as a failure of
    /// positive definiteness.
    pub fn factor(m: &Matrix) -> Result<Self> {
        check_dim("Cholesky::factor", m.rows(), m.cols())?;
        let n = m.rows();
        let threshold = 1e-14 * m.trace().abs() / n.max(1) as f64;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > threshold) {
                return Err(Error::NotPositiveDefinite {
                    row: j,
                    pivot: diag,
                    threshold,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = m.get(i, j);
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                s -= vec::dot(ri, rj);
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_dim("Cholesky::solve", self.n, rhs.len())?;
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let s = vec::dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// Solves `M φ = rhs` for symmetric positive definite `M`.
pub fn solve_spd(m: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_dim("solve_spd", m.rows(), rhs.len())?;
    Cholesky::factor(m)?.solve(rhs)
}

/// The matrix `B` defining `‖v‖_B = √(vᵀBv)`.
#[derive(Debug, Clone)]
pub enum NormMatrix {
    Identity(usize),
    /// `B = AᵀA`, held through its factor `A` and the Cholesky factor of `AᵀA`.
    Gram {
        factor: Matrix,
        chol: Cholesky,
    },
}

impl NormMatrix {
    pub fn identity(dim: usize) -> Self {
        NormMatrix::Identity(dim)
    }

    /// Builds `B = AᵀA`, failing unless `AᵀA` is positive definite.
    pub fn gram(a: Matrix) -> Result<Self> {
        if a.rows() < a.cols() {
            return Err(invalid(format!(
                "Gram norm needs at least as many rows as columns ({}x{})",
                a.rows(),
                a.cols()
            )));
        }
        let chol = Cholesky::factor(&a.gram())?;
        Ok(NormMatrix::Gram { factor: a, chol })
    }

    pub fn dim(&self) -> usize {
        match self {
            NormMatrix::Identity(d) => *d,
            NormMatrix::Gram { factor, .. } => factor.cols(),
        }
    }

    /// `‖v‖_B²`
    pub fn norm_sq(&self, v: &[f64]) -> Result<f64> {
        check_dim("NormMatrix::norm", self.dim(), v.len())?;
        Ok(match self {
            NormMatrix::Identity(_) => vec::dot(v, v),
            NormMatrix::Gram { factor, .. } => {
                let av = factor.matvec(v)?;
                vec::dot(&av, &av)
            }
        })
    }

    /// `‖v‖_B`
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.norm_sq(v).map(f64::sqrt)
    }

    /// `B v`
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("NormMatrix::apply", self.dim(), v.len())?;
        match self {
            NormMatrix::Identity(_) => Ok(v.to_vec()),
            NormMatrix::Gram { factor, .. } => factor.matvec_t(&factor.matvec(v)?),
        }
    }

    /// `B⁻¹ v`
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("NormMatrix::solve", self.dim(), v.len())?;
        match self {
            NormMatrix::Identity(_) => Ok(v.to_vec()),
            NormMatrix::Gram { chol, .. } => chol.solve(v),
        }
    }

    /// Dual norm `‖g‖_{B⁻¹} = √(gᵀB⁻¹g)`.
    pub fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        let s = self.solve(g)?;
        Ok(vec::dot(g, &s).max(0.0).sqrt())
    }

    /// Smallest eigenvalue of `B`, by inverse power iteration.
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            NormMatrix::Identity(_) => 1.0,
            NormMatrix::Gram { chol, .. } => {
                let n = chol.dim();
                let mut x: Vec<f64> = (0..n)
                    .map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract())
                    .collect();
                let nx = vec::norm2(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                let mut top = 0.0;
                for _ in 0..10_000 {
                    let y = chol.solve(&x).expect("square");
                    let next = vec::dot(&x, &y);
                    let ny = vec::norm2(&y);
                    x = vec::scaled(1.0 / ny, &y);
                    if (next - top).abs() <= 1e-12 * next {
                        top = next.max(ny);
                        break;
                    }
                    top = next;
                }
                1.0 / top
            }
        }
    }

    /// Dense `B`.
    pub fn to_matrix(&self) -> Matrix {
        match self {
            NormMatrix::Identity(d) => Matrix::identity(*d),
            NormMatrix::Gram { factor, .. } => factor.gram(),
        }
    }
}

/// `‖v‖_B`
pub fn bnorm(v: &[f64], b: &NormMatrix) -> Result<f64> {
    b.norm(v)
}

fn check_simplex(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(format!(
            "weights are not on the simplex (sum {sum})"
        )));
    }
    Ok(())
}

/// Solves `(√2 λ AᵀA + ∇²f) h = v` with `∇²f = (1/μ)(Aᵀdiag(p)A − Aᵀp pᵀA)`.
///
/// The operator is `M − u uᵀ/μ` with `M = Aᵀ(diag(p)/μ + √2 λ I)A` and
/// `u = Aᵀp`, so one Cholesky solve with `M` plus a Sherman–Morrison
/// correction gives `h = M⁻¹(v + ξ u)`, `ξ = uᵀM⁻¹v / (μ − uᵀM⁻¹u)`.
pub fn solve_shifted_softmax_hessian(
    a: &Matrix,
    p: &[f64],
    mu: f64,
    lambda: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    check_dim("solve_shifted_softmax_hessian p", a.rows(), p.len())?;
    check_dim("solve_shifted_softmax_hessian v", a.cols(), v.len())?;
    if !(mu > 0.0) {
        return Err(invalid(format!(
            "smoothing parameter must be positive, got {mu}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("shift must be nonnegative, got {lambda}")));
    }
    check_simplex(p)?;

    let shift = std::f64::consts::SQRT_2 * lambda;
    let weights: Vec<f64> = p.iter().map(|pi| pi / mu + shift).collect();
    let chol = Cholesky::factor(&a.weighted_gram(&weights)?)?;
    let u = a.matvec_t(p)?;
    let m_inv_u = chol.solve(&u)?;
    let m_inv_v = chol.solve(v)?;
    let denominator = mu - vec::dot(&u, &m_inv_u);
    if !(denominator > 1e-14 * mu) {
        return Err(Error::SingularShift { denominator });
    }
    let xi = vec::dot(&u, &m_inv_v) / denominator;
    let mut h = m_inv_v;
    vec::axpy(xi, &m_inv_u, &mut h);
    Ok(h)
}

/// `g(λ) = cᵀK⁻¹ AᵀA K⁻¹c` with `K = √2 λ AᵀA + ∇²f`, evaluated as
/// `‖A K⁻¹ c‖²`.
pub fn eval_g_lambda(a: &Matrix, p: &[f64], mu: f64, lambda: f64, c: &[f64]) -> Result<f64> {
    let s = solve_shifted_softmax_hessian(a, p, mu, lambda, c)?;
    let as_ = a.matvec(&s)?;
    Ok(vec::dot(&as_, &as_))
}
