//! Small dense-linear-algebra helpers shared by the physics modules.
//!
//! Everything here works on `ndarray` arrays of `Complex64`. Matrix
//! exponentials of (anti-)Hermitian generators go through an eigendecomposition
//! so that unitaries come out exactly unitary in the truncated space.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Result, SimError};

/// Conjugate transpose, always in standard (row-major) layout.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.ncols(), a.nrows()), |(i, j)| a[[j, i]].conj())
}

/// Largest entry magnitude.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// ‖a − b‖_max over the leading `block × block` submatrix.
pub fn max_abs_diff_block(a: &Array2<C64>, b: &Array2<C64>, block: usize) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..block {
        for j in 0..block {
            m = m.max((a[[i, j]] - b[[i, j]]).norm());
        }
    }
    m
}

/// Hermiticity defect ‖a − a†‖_max.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    m
}

/// Eigendecomposition of a Hermitian matrix: h = V·diag(λ)·V† with
/// eigenvectors in the columns of V.
///
/// The backend's eigenvector convention depends on the input's memory layout
/// (a row-major buffer is handed to LAPACK as its transpose, so the
/// eigenvectors come back conjugated). We force row-major here and undo the
/// conjugation; `eigh_reconstructs` pins this down for both layouts.
pub fn eigh_hermitian(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let h_std: Array2<C64> = if h.is_standard_layout() {
        h.to_owned()
    } else {
        Array2::from_shape_fn(h.dim(), |(i, j)| h[[i, j]])
    };
    let (vals, vecs) = h_std
        .eigh(UPLO::Lower)
        .map_err(|e| SimError::Integration(format!("hermitian eigendecomposition failed: {e}")))?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Eigenvalues only. Layout does not matter here: h and hᵀ = h* share their
/// (real) spectrum.
pub fn eigvalsh_hermitian(h: &Array2<C64>) -> Result<Array1<f64>> {
    h.eigvalsh(UPLO::Lower)
        .map_err(|e| SimError::Integration(format!("hermitian eigenvalues failed: {e}")))
}

/// exp(G) for an anti-Hermitian generator G (G† = −G), computed as
/// V·exp(iλ)·V† from the eigensystem of the Hermitian matrix −iG.
/// The result is exactly unitary on the truncated space.
pub fn exp_antihermitian(g: &Array2<C64>) -> Result<Array2<C64>> {
    let h = g.mapv(|z| z * C64::new(0.0, -1.0)); // h = -iG is Hermitian
    let (vals, vecs) = eigh_hermitian(&h)?;
    Ok(unitary_from_eigensystem(&vals, &vecs, 1.0))
}

/// Spectral data of a Hermitian matrix, cached so that exp(−iHt) can be
/// evaluated repeatedly at different `t` for the cost of two matrix products.
pub struct HermitianExp {
    vals: Array1<f64>,
    vecs: Array2<C64>,
}

impl HermitianExp {
    pub fn new(h: &Array2<C64>) -> Result<Self> {
        let (vals, vecs) = eigh_hermitian(h)?;
        Ok(Self { vals, vecs })
    }

    /// U(t) = exp(−iHt).
    pub fn propagator(&self, t: f64) -> Array2<C64> {
        unitary_from_eigensystem(&self.vals, &self.vecs, -t)
    }

    /// Apply exp(−iHt) to a vector without forming the full matrix.
    pub fn apply(&self, psi: &Array1<C64>, t: f64) -> Array1<C64> {
        let w = dagger(&self.vecs).dot(psi);
        let rotated: Array1<C64> = w
            .iter()
            .zip(self.vals.iter())
            .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        self.vecs.dot(&rotated)
    }
}

fn unitary_from_eigensystem(vals: &Array1<f64>, vecs: &Array2<C64>, scale: f64) -> Array2<C64> {
    // V · diag(exp(i·scale·λ)) · V†
    let n = vals.len();
    let mut phased = vecs.clone();
    for (j, &e) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, scale * e);
        for i in 0..n {
            phased[[i, j]] *= ph;
        }
    }
    phased.dot(&dagger(vecs))
}

/// Solve min ‖A x − b‖₂ for real A, b via the normal equations with
/// Cholesky-free Gaussian elimination and partial pivoting. Returns the
/// solution together with the inverse of AᵀA (needed for parameter sigmas).
pub fn solve_normal_equations(
    ata: &Array2<f64>,
    atb: &Array1<f64>,
) -> Option<(Array1<f64>, Array2<f64>)> {
    let n = ata.nrows();
    // Augment with the identity to carry the inverse along.
    let mut aug = Array2::<f64>::zeros((n, 2 * n + 1));
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = ata[[i, j]];
        }
        aug[[i, n + i]] = 1.0;
        aug[[i, 2 * n]] = atb[i];
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = aug[[col, col]].abs();
        for row in (col + 1)..n {
            if aug[[row, col]].abs() > best {
                best = aug[[row, col]].abs();
                piv = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..(2 * n + 1) {
                aug.swap([col, j], [piv, j]);
            }
        }
        let p = aug[[col, col]];
        for j in 0..(2 * n + 1) {
            aug[[col, j]] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = aug[[row, col]];
                if f != 0.0 {
                    for j in 0..(2 * n + 1) {
                        let v = aug[[col, j]];
                        aug[[row, j]] -= f * v;
                    }
                }
            }
        }
    }
    let x = Array1::from_iter((0..n).map(|i| aug[[i, 2 * n]]));
    let mut inv = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            inv[[i, j]] = aug[[i, n + j]];
        }
    }
    Some((x, inv))
}

/// Condition number (ratio of extreme singular values) of a real matrix,
/// from the eigenvalues of AᵀA.
pub fn condition_number(a: &Array2<f64>) -> Result<f64> {
    let ata = a.t().dot(a);
    let h = ata.mapv(|x| C64::new(x, 0.0));
    let vals = eigvalsh_hermitian(&h)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &v in vals.iter() {
        let v = v.max(0.0);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((hi / lo).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn assert_reconstructs(h: &Array2<C64>) {
        let n = h.nrows();
        let (vals, vecs) = eigh_hermitian(h).unwrap();
        let mut d = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            d[[i, i]] = C64::new(vals[i], 0.0);
        }
        let rebuilt = vecs.dot(&d).dot(&dagger(&vecs));
        assert!(
            max_abs_diff_block(&rebuilt, h, n) < 1e-12,
            "V·diag(λ)·V† must reproduce h (defect {})",
            max_abs_diff_block(&rebuilt, h, n)
        );
    }

    #[test]
    fn eigh_reconstructs() {
        let h = array![
            [C64::new(1.0, 0.0), C64::new(0.0, -0.7)],
            [C64::new(0.0, 0.7), C64::new(-1.0, 0.0)]
        ];
        assert_reconstructs(&h);
        // Same matrix in non-standard (transposed-view) layout; hᵀ = h* here,
        // so conjugate to keep the matrix itself identical.
        let h_f = h.t().mapv(|z| z.conj());
        assert!(!h_f.is_standard_layout());
        assert_reconstructs(&h_f);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = Array2::<C64>::zeros((4, 4));
        let u = exp_antihermitian(&g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u[[i, j]] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn exp_antihermitian_is_unitary() {
        let g = array![
            [C64::new(0.0, 0.3), C64::new(0.7, 0.1)],
            [C64::new(-0.7, 0.1), C64::new(0.0, -0.9)]
        ];
        let u = exp_antihermitian(&g).unwrap();
        let id = dagger(&u).dot(&u);
        assert!(max_abs_diff_block(&id, &Array2::eye(2), 2) < 1e-14);
    }

    #[test]
    fn propagator_matches_scalar_phase() {
        // H = diag(1, 2): exp(-iHt) should be diag(e^{-it}, e^{-2it}).
        let h = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(2.0, 0.0)]
        ];
        let he = HermitianExp::new(&h).unwrap();
        let u = he.propagator(0.5);
        assert!((u[[0, 0]] - C64::from_polar(1.0, -0.5)).norm() < 1e-14);
        assert!((u[[1, 1]] - C64::from_polar(1.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn normal_equations_solve_small_system() {
        let ata = array![[4.0, 1.0], [1.0, 3.0]];
        let atb = array![1.0, 2.0];
        let (x, inv) = solve_normal_equations(&ata, &atb).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
        let id = ata.dot(&inv);
        assert!((id[[0, 0]] - 1.0).abs() < 1e-12);
        assert!(id[[0, 1]].abs() < 1e-12);
    }
}
