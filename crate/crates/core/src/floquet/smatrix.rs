//! Scattering matrices and the Redheffer star product.
//!
//! Convention: inputs are (up-going wave at the bottom, down-going wave at the
//! top), outputs (down-going at the bottom, up-going at the top):
//!
//! ```text
//! [b_bottom⁻]   [S11 S12] [a_bottom⁺]
//! [b_top⁺   ] = [S21 S22] [a_top⁻   ]
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::modes::RegionModes;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("singular matrix while {0}")]
pub struct SingularMatrix(pub &'static str);

#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub s11: DMatrix<C>,
    pub s12: DMatrix<C>,
    pub s21: DMatrix<C>,
    pub s22: DMatrix<C>,
}

impl SMatrix {
    /// Transparent element.
    pub fn identity(n: usize) -> Self {
        SMatrix {
            s11: DMatrix::zeros(n, n),
            s12: DMatrix::identity(n, n),
            s21: DMatrix::identity(n, n),
            s22: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.s11.nrows()
    }

    /// Interface between region `a` (below) and `b` (above), amplitudes of
    /// both referenced at the interface plane.
    pub fn interface(a: &RegionModes, b: &RegionModes) -> Result<Self, SingularMatrix> {
        let n = a.len();
        let mut l = DMatrix::<C>::zeros(2 * n, 2 * n);
        let mut r = DMatrix::<C>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                l[(i, j)] = a.w[(i, j)];
                l[(i, n + j)] = -b.w[(i, j)];
                l[(n + i, j)] = -a.y[(i, j)];
                l[(n + i, n + j)] = -b.y[(i, j)];
                r[(i, j)] = -a.w[(i, j)];
                r[(i, n + j)] = b.w[(i, j)];
                r[(n + i, j)] = -a.y[(i, j)];
                r[(n + i, n + j)] = -b.y[(i, j)];
            }
        }
        let s = l.lu().solve(&r).ok_or(SingularMatrix("matching an interface"))?;
        Ok(SMatrix {
            s11: s.view((0, 0), (n, n)).into_owned(),
            s12: s.view((0, n), (n, n)).into_owned(),
            s21: s.view((n, 0), (n, n)).into_owned(),
            s22: s.view((n, n), (n, n)).into_owned(),
        })
    }

    /// Appends a homogeneous slab with per-mode phase factors `x` = e^{iqh}
    /// on top of `self`.
    pub fn then_propagate(mut self, x: &[C]) -> Self {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.s12[(i, j)] *= x[j];
                self.s21[(i, j)] *= x[i];
                self.s22[(i, j)] *= x[i] * x[j];
            }
        }
        self
    }

    /// Prepends a homogeneous slab below `self`.
    pub fn after_propagate(mut self, x: &[C]) -> Self {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.s11[(i, j)] *= x[i] * x[j];
                self.s12[(i, j)] *= x[i];
                self.s21[(i, j)] *= x[j];
            }
        }
        self
    }
}

/// Redheffer star product: `a` below, `b` above.
pub fn redheffer_star(a: &SMatrix, b: &SMatrix) -> Result<SMatrix, SingularMatrix> {
    let n = a.dim();
    let id = DMatrix::<C>::identity(n, n);
    let lower = (&id - &b.s11 * &a.s22).lu();
    let upper = (&id - &a.s22 * &b.s11).lu();
    // (I − B11 A22)⁻¹ [B11 A21 | B12]
    let mut rhs1 = DMatrix::<C>::zeros(n, 2 * n);
    rhs1.view_mut((0, 0), (n, n)).copy_from(&(&b.s11 * &a.s21));
    rhs1.view_mut((0, n), (n, n)).copy_from(&b.s12);
    let z1 = lower.solve(&rhs1).ok_or(SingularMatrix("cascading scattering matrices"))?;
    // (I − A22 B11)⁻¹ [A21 | A22 B12]
    let mut rhs2 = DMatrix::<C>::zeros(n, 2 * n);
    rhs2.view_mut((0, 0), (n, n)).copy_from(&a.s21);
    rhs2.view_mut((0, n), (n, n)).copy_from(&(&a.s22 * &b.s12));
    let z2 = upper.solve(&rhs2).ok_or(SingularMatrix("cascading scattering matrices"))?;
    Ok(SMatrix {
        s11: &a.s11 + &a.s12 * z1.view((0, 0), (n, n)),
        s12: &a.s12 * z1.view((0, n), (n, n)),
        s21: &b.s21 * z2.view((0, 0), (n, n)),
        s22: &b.s22 + &b.s21 * z2.view((0, n), (n, n)),
    })
}
