//! Dense complex matrix helpers and a cyclic Jacobi eigensolver for
//! Hermitian matrices.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub type CMatrix = Array2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(dim: usize) -> CMatrix {
    Array2::from_diag_elem(dim, ONE)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b)
}

/// Largest entry-wise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let prod = matmul(&dagger(u), u);
    max_abs_diff(&prod, &identity(u.nrows()))
}

/// `M ← M · (cos a · I + i sin a · P)`, using the signed-permutation
/// structure of `P` instead of a dense product.
pub fn mul_pauli_rotation_right(m: &mut CMatrix, p: &PauliString, angle: f64) {
    let dim = m.nrows();
    let (xm, zm, phase) = p.basis_action();
    let (c, s) = (angle.cos(), angle.sin());
    let is = Complex64::new(0.0, s);
    // (M·P)[r][col] = M[r][col ^ xm] · P[col ^ xm][col]
    let col_factor: Vec<Complex64> = (0..dim)
        .map(|col| {
            let sign = if (col & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            phase * sign * is
        })
        .collect();
    let old = m.clone();
    for r in 0..dim {
        for col in 0..dim {
            m[[r, col]] = old[[r, col]] * c + old[[r, col ^ xm]] * col_factor[col];
        }
    }
}

/// Closed-form `cos a · I + i sin a · P`.
pub fn pauli_rotation(p: &PauliString, angle: f64) -> CMatrix {
    let mut m = identity(1 << p.n());
    mul_pauli_rotation_right(&mut m, p, angle);
    m
}

pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Cyclic Jacobi. Sweeps until the off-diagonal Frobenius norm drops
    /// below `JACOBI_TOL` relative to the full Frobenius norm.
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Argument(format!(
                "eigensolver needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        // Symmetrize to remove rounding asymmetry in the input.
        let mut h = CMatrix::from_shape_fn((n, n), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
        let mut v = identity(n);
        let total: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if total == 0.0 || n == 1 {
            return Ok(HermitianEigen {
                values: (0..n).map(|i| h[[i, i]].re).collect(),
                vectors: v,
            });
        }
        let threshold = JACOBI_TOL * total;

        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let off = off_diagonal_norm(&h);
            if off <= threshold {
                converged = true;
                break;
            }
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = h[[p, q]];
                    let mag = apq.norm();
                    if mag == 0.0 {
                        continue;
                    }
                    let app = h[[p, p]].re;
                    let aqq = h[[q, q]].re;
                    // Skip entries already negligible at working precision.
                    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                        h[[p, q]] = ZERO;
                        h[[q, p]] = ZERO;
                        continue;
                    }
                    rotated = true;
                    // Phase out apq, then a real symmetric 2x2 rotation.
                    let e = apq / mag;
                    let theta = (aqq - app) / (2.0 * mag);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // Columns: p' = c·p − s·ē·q ; q' = s·e·p + c·q   (unitary J)
                    let jp_q = -e.conj() * s;
                    let jq_p = e * s;
                    for k in 0..n {
                        let hkp = h[[k, p]];
                        let hkq = h[[k, q]];
                        h[[k, p]] = hkp * c + hkq * jp_q;
                        h[[k, q]] = hkp * jq_p + hkq * c;
                    }
                    for k in 0..n {
                        let hpk = h[[p, k]];
                        let hqk = h[[q, k]];
                        h[[p, k]] = hpk * c + hqk * jp_q.conj();
                        h[[q, k]] = hpk * jq_p.conj() + hqk * c;
                    }
                    h[[p, q]] = ZERO;
                    h[[q, p]] = ZERO;
                    h[[p, p]] = Complex64::new(h[[p, p]].re, 0.0);
                    h[[q, q]] = Complex64::new(h[[q, q]].re, 0.0);
                    for k in 0..n {
                        let vkp = v[[k, p]];
                        let vkq = v[[k, q]];
                        v[[k, p]] = vkp * c + vkq * jp_q;
                        v[[k, q]] = vkp * jq_p + vkq * c;
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged && off_diagonal_norm(&h) > threshold {
            return Err(Error::Numerical {
                iteration: JACOBI_MAX_SWEEPS,
                message: "Jacobi eigensolver did not converge".into(),
            });
        }
        Ok(HermitianEigen {
            values: (0..n).map(|i| h[[i, i]].re).collect(),
            vectors: v,
        })
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn map_spectrum<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[[i, j]] *= fj;
            }
        }
        matmul(&scaled, &dagger(&self.vectors))
    }

    /// `e^{−iAt}`.
    pub fn exp_minus_i(&self, t: f64) -> CMatrix {
        self.map_spectrum(|l| Complex64::new(0.0, -l * t).exp())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn off_diagonal_norm(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += h[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{parse_label, AlgebraElement};

    #[test]
    fn jacobi_reconstructs_hermitian() {
        let e = AlgebraElement::from_labels(&[("XY", 0.7), ("ZZ", -0.3), ("YI", 1.1), ("IX", 0.2)])
            .unwrap();
        let a = e.to_dense().unwrap();
        let eig = HermitianEigen::new(&a).unwrap();
        let back = eig.map_spectrum(|l| Complex64::new(l, 0.0));
        assert!(max_abs_diff(&a, &back) < 1e-13);
        assert!(unitarity_error(&eig.vectors) < 1e-13);
    }

    #[test]
    fn rotation_matches_closed_form() {
        let x = parse_label("X").unwrap();
        let phi = 0.37_f64;
        let r = pauli_rotation(&x, phi);
        let (c, s) = (phi.cos(), phi.sin());
        assert!((r[[0, 0]] - Complex64::new(c, 0.0)).norm() < 1e-15);
        assert!((r[[0, 1]] - Complex64::new(0.0, s)).norm() < 1e-15);
        assert!((r[[1, 0]] - Complex64::new(0.0, s)).norm() < 1e-15);
        assert!((r[[1, 1]] - Complex64::new(c, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_matches_dense_pauli() {
        let p = parse_label("XYZ").unwrap();
        let dense = p.to_dense(12).unwrap();
        let phi = -1.3_f64;
        let expected = identity(8).mapv(|z| z * phi.cos()) + dense.mapv(|z| z * Complex64::new(0.0, phi.sin()));
        assert!(max_abs_diff(&pauli_rotation(&p, phi), &expected) < 1e-15);
    }
}
