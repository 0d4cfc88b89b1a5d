//! Dense symmetric eigendecomposition and path characteristic polynomials.

use std::ops::Range;

use nalgebra::{DMatrix, DVectorView};

use crate::error::{PstError, Result};
use crate::graph::Hamiltonian;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Cyclic Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of `‖H‖_F`.
const JACOBI_RELATIVE_OFF_NORM: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Sorted eigenvalues and orthonormal eigenvectors (as columns) of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    simplicity_gap: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the unit eigenvector for `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> DVectorView<'_, f64> {
        self.eigenvectors.column(i)
    }

    /// Smallest gap between consecutive eigenvalues; infinite for a 1x1 matrix.
    pub fn simplicity_gap(&self) -> f64 {
        self.simplicity_gap
    }

    /// Gap between eigenvalue `i` and its nearest neighbor in the spectrum.
    pub fn gap_at(&self, i: usize) -> f64 {
        let lo = if i > 0 {
            self.eigenvalues[i] - self.eigenvalues[i - 1]
        } else {
            f64::INFINITY
        };
        let hi = if i + 1 < self.n() {
            self.eigenvalues[i + 1] - self.eigenvalues[i]
        } else {
            f64::INFINITY
        };
        lo.min(hi)
    }

    /// Index ranges of eigenvalue clusters; consecutive eigenvalues closer than
    /// `threshold` share a cluster.
    pub fn clusters(&self, threshold: f64) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.n() {
            if i == self.n() || self.eigenvalues[i] - self.eigenvalues[i - 1] > threshold {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(i).scale_mut(l);
        }
        scaled * v.transpose()
    }
}

pub fn decompose(h: &Hamiltonian, tol: f64) -> Result<SpectralDecomposition> {
    decompose_symmetric(h.matrix(), tol)
}

/// Cyclic Jacobi eigensolver for a dense real symmetric matrix.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude component
/// is positive (lowest index wins ties). The result is verified: orthonormality
/// and reconstruction residuals must be at most `tol * max(1, max|H_ij|)`.
pub fn decompose_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(PstError::input(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if !(tol > 0.0) {
        return Err(PstError::input("tolerance must be positive"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(PstError::input("matrix has non-finite entries"));
    }
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(PstError::input(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = JACOBI_RELATIVE_OFF_NORM * m.norm();
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(PstError::EigenNotConverged {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        let peak = col.amax();
        let lead = col
            .iter()
            .position(|x| x.abs() >= peak - 1e-12)
            .unwrap_or(0);
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    let simplicity_gap = eigenvalues
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);

    let d = SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        simplicity_gap,
    };
    let ortho = (d.eigenvectors.transpose() * &d.eigenvectors - DMatrix::identity(n, n)).amax();
    let recon = (d.reconstruct() - m).amax();
    if ortho > tol * scale || recon > tol * scale {
        return Err(PstError::EigenNotConverged {
            sweeps,
            off_norm: ortho.max(recon),
        });
    }
    Ok(d)
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation `A <- JᵀAJ` annihilating `A[p, q]`, accumulated into `V`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `∂λ_i/∂Q_j = φ_i(j)²` for a simple eigenvalue of `A + diag(Q)`.
pub fn eigenvalue_derivative(d: &SpectralDecomposition, i: usize, j: usize) -> Result<f64> {
    if i >= d.n() || j >= d.n() {
        return Err(PstError::input(format!(
            "index ({i}, {j}) out of range for {} eigenpairs",
            d.n()
        )));
    }
    let gap = d.gap_at(i);
    if gap <= DEGENERACY_THRESHOLD {
        return Err(PstError::Degenerate { index: i, gap });
    }
    let x = d.eigenvectors[(j, i)];
    Ok(x * x)
}

/// `p_n(x; q) = det(xI - (A_path + diag(q)))` via
/// `p_k = (x - q_k) p_{k-1} - p_{k-2}`, `p_0 = 1`, `p_{-1} = 0`.
pub fn char_poly_path(x: f64, q: &[f64]) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for &qk in q {
        let next = (x - qk) * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathParity {
    Even,
    Odd,
}

/// Eigenvalues of a mirror-symmetric path Hamiltonian split by endpoint symmetry.
#[derive(Debug, Clone)]
pub struct PathHalfSpectra {
    pub parity: PathParity,
    /// Eigenvectors with `f(first) = f(last)`.
    pub symmetric_eigenvalues: Vec<f64>,
    /// Eigenvectors with `f(first) = -f(last)`.
    pub antisymmetric_eigenvalues: Vec<f64>,
}

/// Half-size matrices whose spectra are the symmetric and antisymmetric halves.
///
/// For `P_{2n}` these are `A_n + diag(Q_1..Q_{n-1}, Q_n ± 1)`. For `P_{2n+1}` the
/// symmetric block is the `(n+1)`-square tridiagonal matrix whose last row carries
/// a 2, brought to symmetric form by the similarity `diag(1, ..., 1, √2)` so both
/// couplings to the center become `√2`; the antisymmetric block is `A_n + diag(Q_1..Q_n)`.
pub fn path_half_matrices(q: &[f64]) -> Result<(PathParity, DMatrix<f64>, DMatrix<f64>)> {
    let len = q.len();
    if len == 0 {
        return Err(PstError::input("path potential is empty"));
    }
    for i in 0..len / 2 {
        if (q[i] - q[len - 1 - i]).abs() > 1e-12 {
            return Err(PstError::input(format!(
                "potential is not mirror-symmetric at {i} / {}",
                len - 1 - i
            )));
        }
    }
    let half = len / 2;
    let tridiag = |diag: &[f64]| {
        let k = diag.len();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = diag[i];
            if i + 1 < k {
                m[(i, i + 1)] = 1.0;
                m[(i + 1, i)] = 1.0;
            }
        }
        m
    };
    if len % 2 == 0 {
        let mut plus = q[..half].to_vec();
        let mut minus = plus.clone();
        plus[half - 1] += 1.0;
        minus[half - 1] -= 1.0;
        Ok((PathParity::Even, tridiag(&plus), tridiag(&minus)))
    } else {
        let mut sym = tridiag(&q[..=half]);
        if half > 0 {
            sym[(half - 1, half)] = std::f64::consts::SQRT_2;
            sym[(half, half - 1)] = std::f64::consts::SQRT_2;
        }
        Ok((PathParity::Odd, sym, tridiag(&q[..half])))
    }
}

pub fn path_half_spectra(q: &[f64]) -> Result<PathHalfSpectra> {
    let (parity, sym, anti) = path_half_matrices(q)?;
    let spectrum = |m: &DMatrix<f64>| -> Result<Vec<f64>> {
        if m.nrows() == 0 {
            return Ok(Vec::new());
        }
        Ok(decompose_symmetric(m, 1e-10)?.eigenvalues)
    };
    Ok(PathHalfSpectra {
        parity,
        symmetric_eigenvalues: spectrum(&sym)?,
        antisymmetric_eigenvalues: spectrum(&anti)?,
    })
}
