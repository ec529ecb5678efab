//! Tridiagonal operators: the `(2, -1)` stencil, Heaviside-masked systems and
//! the Thomas algorithm.

use crate::error::{check_len, Error, Result};

/// Tridiagonal matrix. `sub[k]` is entry `(k+1, k)`, `sup[k]` is entry `(k, k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TriDiag {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        check_len(diag.len() - 1, sub.len())?;
        check_len(diag.len() - 1, sup.len())?;
        Ok(TriDiag { sub, diag, sup })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.sup[i];
                a[i + 1][i] = self.sub[i];
            }
        }
        a
    }
}

/// `H(u - psi)` per node: `true` off the obstacle, `false` in contact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn all(n: usize, value: bool) -> Self {
        Mask {
            bits: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// The `(N-1) x (N-1)` matrix with 2 on the diagonal and -1 beside it,
/// without the `1/h^2` factor.
pub fn laplacian_stencil(n: usize) -> Result<TriDiag> {
    if n < 1 {
        return Err(Error::InvalidArgument("stencil needs n >= 1".into()));
    }
    TriDiag::new(vec![-1.0; n - 1], vec![2.0; n], vec![-1.0; n - 1])
}

/// Extended Heaviside of `u - psi` with `H(0) = 0`.
pub fn heaviside_mask(u: &[f64], psi: &[f64]) -> Result<Mask> {
    check_len(u.len(), psi.len())?;
    Ok(Mask {
        bits: u.iter().zip(psi).map(|(&ui, &pi)| ui - pi > 0.0).collect(),
    })
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be non-negative, got {scale}"
        )));
    }
    Ok(())
}

/// `I + scale * (H * A)`: rows with `mask = false` become identity rows.
pub fn masked_system(mask: &Mask, scale: f64, stencil: &TriDiag) -> Result<TriDiag> {
    check_scale(scale)?;
    let n = stencil.dim();
    check_len(n, mask.len())?;
    let mut diag = vec![1.0; n];
    let mut sub = vec![0.0; n - 1];
    let mut sup = vec![0.0; n - 1];
    for i in 0..n {
        if !mask.bits[i] {
            continue;
        }
        diag[i] += scale * stencil.diag[i];
        if i > 0 {
            sub[i - 1] = scale * stencil.sub[i - 1];
        }
        if i + 1 < n {
            sup[i] = scale * stencil.sup[i];
        }
    }
    TriDiag::new(sub, diag, sup)
}

/// `I + scale * A * P`: columns with `active = false` keep only the identity.
///
/// The result is strictly diagonally dominant by columns, which is enough for
/// elimination without pivoting.
pub fn column_masked_system(active: &Mask, scale: f64, stencil: &TriDiag) -> Result<TriDiag> {
    check_scale(scale)?;
    let n = stencil.dim();
    check_len(n, active.len())?;
    let p = |j: usize| if active.bits[j] { scale } else { 0.0 };
    let diag = (0..n).map(|i| 1.0 + p(i) * stencil.diag[i]).collect();
    let sub = (0..n.saturating_sub(1)).map(|k| p(k) * stencil.sub[k]).collect();
    let sup = (0..n.saturating_sub(1)).map(|k| p(k + 1) * stencil.sup[k]).collect();
    TriDiag::new(sub, diag, sup)
}

/// Solve `M x = rhs` by the Thomas algorithm (no pivoting).
pub fn thomas_solve(matrix: &TriDiag, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.dim();
    check_len(n, rhs.len())?;
    let mut c_prime = vec![0.0; n];
    let mut x = vec![0.0; n];

    let pivot = matrix.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    if n > 1 {
        c_prime[0] = matrix.sup[0] / pivot;
    }
    x[0] = rhs[0] / pivot;

    for i in 1..n {
        let a = matrix.sub[i - 1];
        let pivot = matrix.diag[i] - a * c_prime[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        if i + 1 < n {
            c_prime[i] = matrix.sup[i] / pivot;
        }
        x[i] = (rhs[i] - a * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}
