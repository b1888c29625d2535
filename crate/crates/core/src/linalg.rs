//! Dense complex linear algebra shared by every other module.
//!
//! Conventions fixed here and relied on throughout:
//! - `tensor(a, b)` puts the left factor in the most significant index
//!   position, so basis index `i*b.nrows() + j` means `|i> ⊗ |j>`.
//! - SVD factors are deterministic: singular values sorted descending, and
//!   each right-singular vector is rotated so its first nonzero component
//!   is real positive. Polar decompositions inherit this determinism.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};

use crate::error::{CtqecError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I: C64 = Complex::new(0.0, 1.0);

/// Default tolerance for unitarity / hermiticity residual checks.
pub const TOL_UNITARY: f64 = 1e-10;
/// Default tolerance for exact algebraic identities.
pub const TOL_EXACT: f64 = 1e-12;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Standard basis column vector |i> in the given dimension.
pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = ONE;
    v
}

/// |i><j| in the given dimension.
pub fn ketbra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Kronecker product; left factor is most significant.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Largest entry magnitude; the max-norm used by residual checks.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// ||U^dag U - I||_max, zero for a unitary.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let d = u.ncols();
    max_norm(&(u.adjoint() * u - identity(d)))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_norm(&(m - m.adjoint()))
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(CtqecError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Mode selector for [`matrix_exp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMode {
    /// exp(i * scale * h); unitary output for Hermitian `h`.
    Unitary,
    /// exp(scale * h); generic semigroup generator.
    Generator,
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// All exponents in this crate have modest norm (weak-strength scaled), so
/// the scaled Taylor series converges to machine precision quickly.
pub fn matrix_exp(h: &CMatrix, scale: f64, mode: ExpMode) -> Result<CMatrix> {
    check_square(h)?;
    let factor = match mode {
        ExpMode::Unitary => I * scale,
        ExpMode::Generator => C64::new(scale, 0.0),
    };
    let a = h.map(|z| z * factor);
    Ok(exp_scaled_taylor(&a))
}

fn exp_scaled_taylor(a: &CMatrix) -> CMatrix {
    let dim = a.nrows();
    // 1-norm estimate for the scaling step.
    let norm = (0..dim)
        .map(|j| (0..dim).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.map(|z| z / 2f64.powi(squarings as i32));

    // Taylor series on the scaled matrix; term norms fall at least
    // geometrically once past the scaled norm (<= 0.5).
    let mut result = identity(dim);
    let mut term = identity(dim);
    for n in 1..=30 {
        term = (&term * &scaled).map(|z| z / n as f64);
        result += &term;
        if max_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Deterministic SVD: `m = u * diag(s) * v^dag` with `s` sorted descending
/// and the first nonzero component of each column of `v` real positive.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let svd = m
        .clone()
        .svd_unordered(true, true);
    let mut u = svd.u.ok_or_else(|| CtqecError::Numerical("SVD failed to produce U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| CtqecError::Numerical("SVD failed to produce V^H".into()))?;
    let mut v = v_t.adjoint();
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();

    // Sort singular triples descending.
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    u = u_sorted;
    v = v_sorted;
    s = order.iter().map(|&i| s[i]).collect();

    // Phase convention on V, compensated in U so m = U S V^dag is preserved.
    for c in 0..v.ncols() {
        let pivot = (0..v.nrows()).find(|&r| v[(r, c)].norm() > 1e-14);
        if let Some(r) = pivot {
            let phase = v[(r, c)] / v[(r, c)].norm();
            for i in 0..v.nrows() {
                v[(i, c)] /= phase;
            }
            for i in 0..u.nrows() {
                u[(i, c)] /= phase;
            }
        }
    }
    Ok((u, s, v))
}

/// Polar decomposition `k = unitary * positive` via SVD.
pub fn polar_decompose(k: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    check_square(k)?;
    let (w, s, v) = svd(k)?;
    let unitary = &w * v.adjoint();
    let s_diag = CMatrix::from_fn(s.len(), s.len(), |r, c| {
        if r == c {
            C64::new(s[r], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let positive = &v * s_diag * v.adjoint();
    Ok((unitary, positive))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    check_square(m)?;
    let (_, s, _) = svd(m)?;
    Ok(s.iter().sum())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. The input is symmetrized first so callers can pass matrices
/// Hermitian only to rounding error.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_square(m)?;
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    // The QR iteration can emit NaNs on rank-deficient inputs whose trailing
    // entries underflow to denormals; a tiny deterministic Hermitian
    // perturbation (well below every tolerance in this crate) fixes that.
    let scale = max_norm(&sym).max(1.0);
    let mut eig = nalgebra::SymmetricEigen::new(sym.clone());
    let mut attempt = 0u64;
    while eig.eigenvalues.iter().any(|v| v.is_nan()) {
        attempt += 1;
        if attempt > 4 {
            return Err(CtqecError::Numerical(
                "hermitian eigendecomposition did not converge".into(),
            ));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed ^ attempt);
        let noise = CMatrix::from_fn(sym.nrows(), sym.ncols(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let herm_noise =
            (&noise + noise.adjoint()).map(|z| z * (0.5e-14 * scale * attempt as f64));
        eig = nalgebra::SymmetricEigen::new(&sym + herm_noise);
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((vals, vecs))
}

/// Rank at a relative threshold against the largest singular value.
pub fn rank_with_threshold(m: &CMatrix, rel_tol: f64) -> Result<usize> {
    let (_, s, _) = svd(m)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), ONE, ONE, C64::new(0.0, 0.0)])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0), -ONE],
        )
    }

    fn random_matrix(rng: &mut impl Rng, dim: usize) -> CMatrix {
        CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn tensor_identities() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn tensor_zz_eigenvalues() {
        let zz = tensor(&pauli_z(), &pauli_z());
        let v00 = basis_vector(4, 0);
        let v01 = basis_vector(4, 1);
        assert_eq!(&zz * &v00, v00);
        assert_eq!(&zz * &v01, -v01);
    }

    #[test]
    fn tensor_controlled_x_block() {
        // |0><0| ⊗ I + |1><1| ⊗ X = diag(I, X) as a 4x4 block matrix.
        let cx = tensor(&ketbra(2, 0, 0), &identity(2)) + tensor(&ketbra(2, 1, 1), &pauli_x());
        let mut expected = zeros(4, 4);
        expected[(0, 0)] = ONE;
        expected[(1, 1)] = ONE;
        expected[(2, 3)] = ONE;
        expected[(3, 2)] = ONE;
        assert!(max_norm(&(cx - expected)) < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&zeros(3, 3), 1.0, ExpMode::Unitary).unwrap();
        assert!(max_norm(&(e - identity(3))) < 1e-15);
    }

    #[test]
    fn exp_pauli_x_half_pi() {
        // exp(i pi/2 X) = cos(pi/2) I + i sin(pi/2) X = iX.
        let e = matrix_exp(&pauli_x(), std::f64::consts::FRAC_PI_2, ExpMode::Unitary).unwrap();
        let expected = pauli_x().map(|z| z * I);
        assert!(max_norm(&(e - expected)) < 1e-12);
    }

    #[test]
    fn exp_rejects_non_square() {
        assert!(matrix_exp(&zeros(2, 3), 1.0, ExpMode::Unitary).is_err());
    }

    #[test]
    fn polar_identity() {
        let (u, p) = polar_decompose(&identity(3)).unwrap();
        assert!(max_norm(&(u - identity(3))) < 1e-12);
        assert!(max_norm(&(p - identity(3))) < 1e-12);
    }

    #[test]
    fn polar_real_diagonal() {
        let k = CMatrix::from_fn(2, 2, |r, c| {
            if r == c {
                C64::new(if r == 0 { 2.0 } else { -3.0 }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let (u, p) = polar_decompose(&k).unwrap();
        assert!((u[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((u[(1, 1)].re + 1.0).abs() < 1e-12);
        assert!((p[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((p[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_basics() {
        assert_eq!(trace_norm(&zeros(3, 3)).unwrap(), 0.0);
        // Density matrix: trace norm 1.
        let rho = ketbra(2, 0, 0).map(|z| z * 0.25)
            + ketbra(2, 1, 1).map(|z| z * 0.75);
        assert!((trace_norm(&rho).unwrap() - 1.0).abs() < 1e-12);
        // Orthogonal pure states are trace distance 2 apart.
        let diff = ketbra(2, 0, 0) - ketbra(2, 1, 1);
        assert!((trace_norm(&diff).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eig_diag() {
        let m = pauli_z();
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] + 1.0).abs() < 1e-12);
        // Reconstruction.
        let recon = CMatrix::from_fn(2, 2, |r, c| {
            (0..2)
                .map(|k| vecs[(r, k)] * vals[k] * vecs[(c, k)].conj())
                .sum()
        });
        assert!(max_norm(&(recon - m)) < 1e-12);
    }

    #[test]
    fn polar_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &dim in &[2usize, 3, 8, 16, 64] {
            let k = random_matrix(&mut rng, dim);
            let (u, p) = polar_decompose(&k).unwrap();
            assert!(max_norm(&(&u * &p - &k)) < 1e-10, "dim {dim}");
            assert!(unitarity_residual(&u) < 1e-10, "dim {dim}");
            let (vals, _) = hermitian_eig(&p).unwrap();
            assert!(vals.iter().all(|&v| v >= -1e-12), "dim {dim}");
        }
    }

    #[test]
    fn exp_inverse_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 6);
        let h = (&m + m.adjoint()).map(|z| z * 0.5);
        let f = matrix_exp(&h, 0.7, ExpMode::Unitary).unwrap();
        let b = matrix_exp(&h, -0.7, ExpMode::Unitary).unwrap();
        assert!(max_norm(&(&f * &b - identity(6))) < 1e-10);
    }

    #[test]
    fn trace_norm_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 5);
        let (u, _) = polar_decompose(&random_matrix(&mut rng, 5)).unwrap();
        let (v, _) = polar_decompose(&random_matrix(&mut rng, 5)).unwrap();
        let a = trace_norm(&m).unwrap();
        let b = trace_norm(&(&u * &m * &v)).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn tensor_associativity(seed in 0u64..1000, da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, da);
            let b = random_matrix(&mut rng, db);
            let c = random_matrix(&mut rng, dc);
            let left = tensor(&tensor(&a, &b), &c);
            let right = tensor(&a, &tensor(&b, &c));
            prop_assert!(max_norm(&(left - right)) < 1e-12);
        }

        #[test]
        fn polar_round_trip_prop(seed in 0u64..1000, dim in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_matrix(&mut rng, dim);
            let (u, p) = polar_decompose(&k).unwrap();
            prop_assert!(max_norm(&(&u * &p - &k)) < 1e-10);
            prop_assert!(unitarity_residual(&u) < 1e-10);
        }
    }
}
