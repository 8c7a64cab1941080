//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Relative gap below which two eigenvalues are one degenerate outcome.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Full spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; `eigenvectors[k]` belongs to
/// `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
}

/// A set of numerically equal eigenvalues and the indices of their eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenGroup {
    pub value: f64,
    pub members: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_x |v_x⟩⟨v_x|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (&lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for r in 0..n {
                let vr = v[r] * lambda;
                for (c, vc) in v.iter().enumerate() {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + vr * vc.conj());
                }
            }
        }
        out
    }

    /// Groups eigenvalues whose consecutive gap is below `tol`.
    ///
    /// The group value is the mean of its members.
    pub fn group_degenerate(&self, tol: f64) -> Vec<EigenGroup> {
        let mut groups: Vec<EigenGroup> = Vec::new();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (self.eigenvalues[*g.members.last().unwrap()] - lambda).abs() < tol => {
                    g.members.push(k);
                }
                _ => groups.push(EigenGroup {
                    value: lambda,
                    members: vec![k],
                }),
            }
        }
        for g in &mut groups {
            g.value = g.members.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / g.members.len() as f64;
        }
        groups
    }

    /// Projector onto the span of the given eigenvectors.
    pub fn projector(&self, members: &[usize]) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for &k in members {
            let v = &self.eigenvectors[k];
            for r in 0..n {
                for c in 0..n {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + v[r] * v[c].conj());
                }
            }
        }
        out
    }
}

/// Degeneracy tolerance for a given matrix: `1e-8 · max(1, ‖H‖_max)`.
pub fn degeneracy_tol(h: &ComplexMatrix) -> f64 {
    DEGENERACY_TOL * h.max_abs().max(1.0)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails with [`Error::NotHermitian`] when `h` deviates from `h†` by more than `tol`.
pub fn eig_hermitian(h: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let n = h.ensure_square()?;
    let deviation = h.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < OFF_DIAGONAL_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).re.total_cmp(&a.get(i, i).re));
    Ok(SpectralDecomposition {
        eigenvalues: order.iter().map(|&k| a.get(k, k).re).collect(),
        eigenvectors: order.iter().map(|&k| v.col(k)).collect(),
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a.get(r, c).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi step annihilating `a[p][q]`.
///
/// The unitary is `W = D·G` where `D` rotates the phase of column `q` so the
/// pivot becomes real and `G` is the usual real symmetric Schur rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = -phase.conj() * s;
    let w_qq = phase.conj() * c;

    let n = a.rows();
    // A <- A W
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * w_pp + akq * w_qp);
        a.set(k, q, akp * w_pq + akq * w_qq);
    }
    // A <- W† A
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, w_pp.conj() * apk + w_qp.conj() * aqk);
        a.set(q, k, w_pq.conj() * apk + w_qq.conj() * aqk);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let dp = a.get(p, p).re;
    let dq = a.get(q, q).re;
    a.set(p, p, Complex64::new(dp, 0.0));
    a.set(q, q, Complex64::new(dq, 0.0));
    // V <- V W
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * w_pp + vkq * w_qp);
        v.set(k, q, vkp * w_pq + vkq * w_qq);
    }
}

/// Positive semidefinite square root.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything more negative is
/// rejected with [`Error::NotPsd`].
pub fn sqrt_psd(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m, tol)?;
    let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let roots = SpectralDecomposition {
        eigenvalues: spec.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect(),
        eigenvectors: spec.eigenvectors,
    };
    Ok(roots.reconstruct())
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let h = m.hermitian_part();
    let spec = eig_hermitian(&h, f64::INFINITY)?;
    Ok(spec.eigenvalues.last().copied().unwrap_or(0.0))
}

/// Largest singular value, from the top eigenvalue of `A A†`.
pub(crate) fn largest_singular_value(a: &ComplexMatrix) -> f64 {
    let gram = a * &a.dagger();
    let spec = eig_hermitian(&gram, f64::INFINITY).expect("gram matrix is square");
    spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Top singular pair `(σ₁, u₁)` of `a` (left singular vector).
pub(crate) fn top_left_singular(a: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let gram = a * &a.dagger();
    let spec = eig_hermitian(&gram, f64::INFINITY).expect("gram matrix is square");
    let sigma = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let u = spec
        .eigenvectors
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![ONE]);
    (sigma, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
    }

    #[test]
    fn z_eigenbasis_is_computational() {
        let d = eig_hermitian(&z(), 1e-10).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, -1.0]);
        assert!(fidelity(&d.eigenvectors[0], &[ONE, ZERO]) > 1.0 - 1e-14);
        assert!(fidelity(&d.eigenvectors[1], &[ZERO, ONE]) > 1.0 - 1e-14);
    }

    #[test]
    fn x_eigenbasis_is_diagonal() {
        let d = eig_hermitian(&x(), 1e-10).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] + 1.0).abs() < 1e-14);
        let plus = [Complex64::new(H, 0.0), Complex64::new(H, 0.0)];
        let minus = [Complex64::new(H, 0.0), Complex64::new(-H, 0.0)];
        assert!(fidelity(&d.eigenvectors[0], &plus) > 1.0 - 1e-14);
        assert!(fidelity(&d.eigenvectors[1], &minus) > 1.0 - 1e-14);
    }

    #[test]
    fn zz_even_eigenspace() {
        let zz = kron(&z(), &z());
        let d = eig_hermitian(&zz, 1e-10).unwrap();
        let groups = d.group_degenerate(degeneracy_tol(&zz));
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].members.len(), 2);
        assert!((groups[0].value - 1.0).abs() < 1e-14);
        let p = d.projector(&groups[0].members);
        let expected = ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0]);
        assert!(p.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn complex_entries_are_diagonalized() {
        // Pauli Y plus a real shift
        let m = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let d = eig_hermitian(&m, 1e-10).unwrap();
        assert!((d.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!(d.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert!(sqrt_psd(&i3, 1e-10).unwrap().max_abs_diff(&i3) < 1e-14);
        let d = ComplexMatrix::diag_real(&[4.0, 9.0]);
        let s = sqrt_psd(&d, 1e-10).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::diag_real(&[2.0, 3.0])) < 1e-14);
        let plus = [Complex64::new(H, 0.0), Complex64::new(H, 0.0)];
        let proj = ComplexMatrix::outer(&plus, &plus);
        assert!(sqrt_psd(&proj, 1e-10).unwrap().max_abs_diff(&proj) < 1e-12);
        assert!(matches!(
            sqrt_psd(&z(), 1e-10),
            Err(Error::NotPsd { .. })
        ));
    }
}
