//! Channel algebra: Kraus sets, Choi matrices, Kraus-set equivalence and
//! minimal rank, and diamond-norm computation for Hermiticity-preserving
//! superoperators.
//!
//! Superoperators are stored as transfer matrices in the column-stacking
//! convention: vec(X) has entry X[r,c] at index c*d + r, so the map
//! rho -> A rho B has transfer matrix tensor(B^T, A).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CtqecError, Result};
use crate::linalg::{
    dagger, hermitian_eig, identity, max_norm, tensor, CMatrix, CVector, C64,
};

/// A quantum channel (or map fragment) given by Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<CMatrix>,
    /// Weak strength the set was built at, where applicable.
    pub epsilon: Option<f64>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| CtqecError::InvalidParameter("empty Kraus set".into()))?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(CtqecError::DimensionMismatch {
                    expected: dim_out,
                    got: k.nrows(),
                });
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            epsilon: None,
        })
    }

    /// As [`new`](Self::new), but additionally enforces the completeness
    /// relation sum K^dag K = I to the given tolerance.
    pub fn new_trace_preserving(kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let ch = Self::new(kraus)?;
        let residual = ch.completeness_residual();
        if residual > tol {
            return Err(CtqecError::Numerical(format!(
                "Kraus set not trace-preserving: residual {residual:.3e}"
            )));
        }
        Ok(ch)
    }

    pub fn identity_channel(dim: usize) -> Self {
        Self::new(vec![identity(dim)]).unwrap()
    }

    /// ||sum K^dag K - I||_max.
    pub fn completeness_residual(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc += dagger(k) * k;
        }
        max_norm(&(acc - identity(self.dim_in)))
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * dagger(k);
        }
        out
    }

    /// Transfer matrix of the channel in the column-stacking convention.
    pub fn transfer_matrix(&self) -> CMatrix {
        let d2 = self.dim_in * self.dim_in;
        let mut t = CMatrix::zeros(self.dim_out * self.dim_out, d2);
        for k in &self.kraus {
            t += tensor(&k.conjugate(), k);
        }
        t
    }

    /// Tensor with the identity on extra information qubits on the left:
    /// every Kraus operator K becomes I_{dim} x K.
    pub fn lift_left(&self, dim: usize) -> KrausChannel {
        let id = identity(dim);
        let kraus = self.kraus.iter().map(|k| tensor(&id, k)).collect();
        let mut ch = KrausChannel::new(kraus).unwrap();
        ch.epsilon = self.epsilon;
        ch
    }
}

/// Choi matrix sum_j (K_j x I)|Omega><Omega|(K_j x I)^dag with the
/// unnormalized |Omega> = sum_i |ii>; trace equals dim_in for a
/// trace-preserving channel.
pub fn choi_matrix(ch: &KrausChannel) -> CMatrix {
    let d = ch.dim_in;
    let dof = ch.dim_out * d;
    let mut c = CMatrix::zeros(dof, dof);
    for k in &ch.kraus {
        // (K x I)|Omega> has entry K[r, i] at index r*d + i.
        let mut w = CVector::zeros(dof);
        for r in 0..ch.dim_out {
            for i in 0..d {
                w[r * d + i] = k[(r, i)];
            }
        }
        c += &w * w.adjoint();
    }
    c
}

/// Minimal Kraus count of the map: rank of the Gram matrix
/// G[j,l] = tr(K_j^dag K_l), thresholded relative to its top eigenvalue.
pub fn kraus_rank(ch: &KrausChannel) -> usize {
    let m = ch.kraus.len();
    let gram = CMatrix::from_fn(m, m, |j, l| (dagger(&ch.kraus[j]) * &ch.kraus[l]).trace());
    let (vals, _) = hermitian_eig(&gram).expect("Gram matrix is square");
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    if top <= 0.0 {
        return 0;
    }
    vals.iter().filter(|&&v| v > 1e-10 * top).count()
}

/// If the two channels are equal as maps (Choi distance <= 1e-8), returns a
/// unitary u with A_j = sum_l u[j,l] B_l after zero-padding to equal length.
///
/// The u is found through the eigendecomposition of the averaged Choi
/// matrix; with degenerate eigenvalues it is one of many valid choices, so
/// callers should check it by reconstruction rather than by value.
pub fn kraus_equivalence(a: &KrausChannel, b: &KrausChannel) -> Result<Option<CMatrix>> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(CtqecError::DimensionMismatch {
            expected: a.dim_in,
            got: b.dim_in,
        });
    }
    let choi_a = choi_matrix(a);
    let choi_b = choi_matrix(b);
    if max_norm(&(&choi_a - &choi_b)) > 1e-8 {
        return Ok(None);
    }

    let m = a.kraus.len().max(b.kraus.len());
    let avg = (&choi_a + &choi_b).map(|z| z * 0.5);
    let (vals, vecs) = hermitian_eig(&avg)?;
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let rank = vals.iter().filter(|&&v| v > 1e-12 * top.max(1.0)).count();
    if rank > m {
        return Err(CtqecError::Numerical(
            "Choi rank exceeds padded Kraus count".into(),
        ));
    }

    // Coefficients of each Kraus operator in the canonical (Choi
    // eigenvector) Kraus basis; columns of the resulting m x rank
    // coefficient matrices are orthonormal.
    let coeffs = |ch: &KrausChannel| -> CMatrix {
        let d = ch.dim_in;
        let mut x = CMatrix::zeros(m, rank);
        for (j, k) in ch.kraus.iter().enumerate() {
            for i in 0..rank {
                let mut dot = C64::new(0.0, 0.0);
                for r in 0..ch.dim_out {
                    for c in 0..d {
                        dot += vecs[(r * d + c, i)].conj() * k[(r, c)];
                    }
                }
                x[(j, i)] = dot / vals[i].sqrt();
            }
        }
        x
    };
    let u = complete_isometry(&coeffs(a))? * complete_isometry(&coeffs(b))?.adjoint();
    Ok(Some(u))
}

/// Extend an m x r matrix with orthonormal columns to an m x m unitary by
/// Gram-Schmidt over the standard basis.
fn complete_isometry(x: &CMatrix) -> Result<CMatrix> {
    let m = x.nrows();
    let mut cols: Vec<CVector> = (0..x.ncols())
        .map(|c| CVector::from_fn(m, |r, _| x[(r, c)]))
        .collect();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = CVector::zeros(m);
        v[e] = C64::new(1.0, 0.0);
        for c in &cols {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= C64::new(norm, 0.0);
            cols.push(v);
        }
    }
    if cols.len() != m {
        return Err(CtqecError::Numerical("isometry completion failed".into()));
    }
    Ok(CMatrix::from_fn(m, m, |r, c| cols[c][r]))
}

/// A linear map on dim x dim matrices as a (dim^2) x (dim^2) transfer
/// matrix in the column-stacking convention.
#[derive(Debug, Clone)]
pub struct SuperoperatorGenerator {
    pub dim: usize,
    pub transfer: CMatrix,
}

impl SuperoperatorGenerator {
    pub fn new(dim: usize, transfer: CMatrix) -> Result<Self> {
        if transfer.nrows() != dim * dim || transfer.ncols() != dim * dim {
            return Err(CtqecError::DimensionMismatch {
                expected: dim * dim,
                got: transfer.nrows(),
            });
        }
        Ok(Self { dim, transfer })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            transfer: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// Transfer matrix of rho -> a rho b.
    pub fn sandwich_transfer(a: &CMatrix, b: &CMatrix) -> CMatrix {
        tensor(&b.transpose(), a)
    }

    /// Add the Lindblad dissipator of a single jump operator:
    /// rho -> L rho L^dag - (1/2){L^dag L, rho}.
    pub fn add_dissipator(&mut self, l: &CMatrix) {
        let ldl = dagger(l) * l;
        let id = identity(self.dim);
        self.transfer += Self::sandwich_transfer(l, &dagger(l));
        self.transfer -= Self::sandwich_transfer(&ldl, &id).map(|z| z * 0.5);
        self.transfer -= Self::sandwich_transfer(&id, &ldl).map(|z| z * 0.5);
    }

    /// Add -i[h, rho] scaled by `strength`.
    pub fn add_commutator(&mut self, h: &CMatrix, strength: f64) {
        let id = identity(self.dim);
        let minus_i = C64::new(0.0, -strength);
        self.transfer += Self::sandwich_transfer(h, &id).map(|z| z * minus_i);
        self.transfer -= Self::sandwich_transfer(&id, h).map(|z| z * minus_i);
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            transfer: self.transfer.map(|z| z * c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(CtqecError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            transfer: &self.transfer + &other.transfer,
        })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for c_out in 0..d {
            for r_out in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                let row = c_out * d + r_out;
                for c_in in 0..d {
                    for r_in in 0..d {
                        acc += self.transfer[(row, c_in * d + r_in)] * rho[(r_in, c_in)];
                    }
                }
                out[(r_out, c_out)] = acc;
            }
        }
        out
    }

    /// Choi matrix sum_{i,j} G(|i><j|) x |i><j|.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut c = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let out = self.apply(&crate::linalg::ketbra(d, i, j));
                for r in 0..d {
                    for s in 0..d {
                        c[(r * d + i, s * d + j)] = out[(r, s)];
                    }
                }
            }
        }
        c
    }

    pub fn hermiticity_preserving_residual(&self) -> f64 {
        let choi = self.choi();
        max_norm(&(&choi - choi.adjoint()))
    }

    /// (G x id)(rho) on the doubled space, with the reference factor least
    /// significant: combined index = a * dim + b.
    fn apply_with_reference(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let dd = d * d;
        let mut out = CMatrix::zeros(dd, dd);
        for a in 0..d {
            for ap in 0..d {
                // row index into the transfer matrix for output entry (a, ap)
                let trow = ap * d + a;
                for b in 0..d {
                    for bp in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for c in 0..d {
                            for cp in 0..d {
                                acc += self.transfer[(trow, cp * d + c)]
                                    * rho[(c * d + b, cp * d + bp)];
                            }
                        }
                        out[(a * d + b, ap * d + bp)] = acc;
                    }
                }
            }
        }
        out
    }

    fn adjoint_generator(&self) -> Self {
        Self {
            dim: self.dim,
            transfer: self.transfer.adjoint(),
        }
    }
}

/// Result of a diamond-norm search.
#[derive(Debug, Clone, Copy)]
pub struct DiamondNorm {
    /// Best lower bound found; equals the norm when `converged`.
    pub value: f64,
    pub converged: bool,
}

pub const DIAMOND_DEFAULT_RESTARTS: usize = 32;
pub const DIAMOND_DEFAULT_SEED: u64 = 20240901;

/// ||g||_diamond for Hermiticity-preserving g, by multi-start alternating
/// ascent over pure states on the doubled space.
///
/// Fixing the state, the optimal observable is the eigenvalue-sign operator
/// of (g x id)(psi); fixing the observable W, the optimal state is the top
/// eigenvector of (g^dag x id)(W). Both half-steps are monotone, so each
/// restart climbs to a stationary value; the result is the max over
/// restarts (a lower-bound method, robust at these problem sizes with
/// multi-start).
pub fn diamond_norm(g: &SuperoperatorGenerator) -> Result<DiamondNorm> {
    diamond_norm_with(g, DIAMOND_DEFAULT_RESTARTS, DIAMOND_DEFAULT_SEED)
}

pub fn diamond_norm_with(
    g: &SuperoperatorGenerator,
    restarts: usize,
    seed: u64,
) -> Result<DiamondNorm> {
    let d = g.dim;
    let dd = d * d;
    if max_norm(&g.transfer) < 1e-300 {
        return Ok(DiamondNorm {
            value: 0.0,
            converged: true,
        });
    }
    let g_adj = g.adjoint_generator();
    let mut best = 0.0f64;
    let mut any_converged = false;
    // Restart index fixes the per-restart RNG stream, so the reduction is
    // deterministic regardless of execution order.
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let mut psi = CVector::from_fn(dd, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        psi /= C64::new(psi.norm(), 0.0);

        let mut prev = -1.0f64;
        let mut converged = false;
        for _ in 0..500 {
            let rho = &psi * psi.adjoint();
            let x = g.apply_with_reference(&rho);
            let (vals, vecs) = hermitian_eig(&x)?;
            let objective: f64 = vals.iter().map(|v| v.abs()).sum();
            if (objective - prev).abs() <= 1e-8 * objective.max(1.0) {
                prev = objective;
                converged = true;
                break;
            }
            prev = objective;
            // W = sign(X)
            let mut w = CMatrix::zeros(dd, dd);
            for (i, &v) in vals.iter().enumerate() {
                if v.abs() < 1e-15 {
                    continue;
                }
                let col = vecs.column(i);
                let sign = C64::new(v.signum(), 0.0);
                for r in 0..dd {
                    for c in 0..dd {
                        w[(r, c)] += sign * col[r] * col[c].conj();
                    }
                }
            }
            let a = g_adj.apply_with_reference(&w);
            let (_, avecs) = hermitian_eig(&a)?;
            psi = CVector::from_fn(dd, |r, _| avecs[(r, 0)]);
        }
        best = best.max(prev);
        any_converged |= converged;
    }
    if !any_converged {
        return Err(CtqecError::Numerical(format!(
            "diamond norm search did not converge; best lower bound {best}"
        )));
    }
    Ok(DiamondNorm {
        value: best,
        converged: true,
    })
}

/// Random trace-preserving channel, for property tests.
pub fn random_channel(dim: usize, num_kraus: usize, rng: &mut impl Rng) -> KrausChannel {
    let raw: Vec<CMatrix> = (0..num_kraus)
        .map(|_| {
            CMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect();
    let mut total = CMatrix::zeros(dim, dim);
    for k in &raw {
        total += dagger(k) * k;
    }
    // total^{-1/2} through the Hermitian eigendecomposition.
    let (vals, vecs) = hermitian_eig(&total).unwrap();
    let inv_sqrt = CMatrix::from_fn(dim, dim, |r, c| {
        (0..dim)
            .map(|i| vecs[(r, i)] * C64::new(1.0 / vals[i].sqrt(), 0.0) * vecs[(c, i)].conj())
            .sum()
    });
    KrausChannel::new(raw.into_iter().map(|k| k * &inv_sqrt).collect()).unwrap()
}
