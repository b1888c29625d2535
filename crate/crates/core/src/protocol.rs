//! The minimal-ancilla quantum-jump CTQEC protocol.
//!
//! Everything is constructed in the corrected basis on the syndrome factor
//! (dimension d = 2^(n-k)) and tensored with the identity on the k
//! information qubits on demand; see [`WeakProtocol::full_kraus`] and
//! friends. The protocol uses 2d weak Kraus operators realized by an
//! (n-k+1)-qubit ancilla, the minimum possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::KrausChannel;
use crate::error::{CtqecError, Result};
use crate::linalg::{
    dagger, identity, ketbra, matrix_exp, max_norm, polar_decompose, tensor,
    CMatrix, CVector, C64, ExpMode,
};

/// A fully built weak correction protocol for an [[n,k,d]] code.
#[derive(Debug, Clone)]
pub struct WeakProtocol {
    pub n: usize,
    pub k: usize,
    /// Weak strength; epsilon = sqrt(kappa * dt) links it to a rate.
    pub epsilon: f64,
    /// Always n - k + 1.
    pub ancilla_qubits: usize,
    /// The 2^(n-k+1) weak Kraus operators on the syndrome factor.
    pub kraus: Vec<CMatrix>,
    /// POVM factors M_j of the polar decompositions.
    pub povm: Vec<CMatrix>,
    /// Unitary factors U_Cj, the conditional weak corrections.
    pub corrections: Vec<CMatrix>,
    /// Closed-form correction generators H_Cj with U_Cj ~ exp(i eps H_Cj).
    pub correction_hams: Vec<CMatrix>,
    /// Measurement Hamiltonian on (syndrome factor) x (ancilla).
    pub measurement_ham: CMatrix,
    /// |A0> = |+>^(n-k+1).
    pub ancilla_state: CVector,
}

fn check_params(n: usize, k: usize, epsilon: f64) -> Result<()> {
    if k >= n {
        return Err(CtqecError::InvalidParameter(format!(
            "need n > k, got n={n}, k={k}"
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CtqecError::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// The strong correction map R: rho -> sum_j R_j rho R_j^dag with
/// R_j = I^k x |0><j|, on the full 2^n space in the corrected basis.
pub fn strong_correction_map(n: usize, k: usize) -> Result<KrausChannel> {
    if k >= n {
        return Err(CtqecError::InvalidParameter(format!(
            "need n > k, got n={n}, k={k}"
        )));
    }
    let d = 1usize << (n - k);
    let id_info = identity(1 << k);
    let kraus = (0..d)
        .map(|j| tensor(&id_info, &ketbra(d, 0, j)))
        .collect();
    KrausChannel::new(kraus)
}

/// The target weak map (1-eps^2) rho + eps^2 R(rho) in its natural Kraus
/// decomposition {sqrt(1-eps^2) I, eps R_j}, on the full 2^n space.
pub fn target_map(n: usize, k: usize, epsilon: f64) -> Result<KrausChannel> {
    check_params(n, k, epsilon)?;
    let d = 1usize << (n - k);
    let id_info = identity(1 << k);
    let mut kraus = vec![identity(1 << n).map(|z| z * (1.0 - epsilon * epsilon).sqrt())];
    for j in 0..d {
        kraus.push(tensor(&id_info, &ketbra(d, 0, j)).map(|z| z * epsilon));
    }
    let mut ch = KrausChannel::new_trace_preserving(kraus, 1e-10)?;
    ch.epsilon = Some(epsilon);
    Ok(ch)
}

/// The weak Kraus family on the syndrome factor: 2d operators
/// K_j      = (1/sqrt(2d)) (sqrt(1-eps^2) I + i eps sqrt(d) |0><j|),
/// K_{d+j}  = the conjugate-sign partner.
///
/// The +/- pairing cancels the cross terms exactly, so the family is
/// trace-preserving at machine precision for any eps in [0, 1).
pub fn build_kraus_family(n: usize, k: usize, epsilon: f64) -> Result<Vec<CMatrix>> {
    check_params(n, k, epsilon)?;
    let d = 1usize << (n - k);
    let scale = 1.0 / ((2 * d) as f64).sqrt();
    let amp = (1.0 - epsilon * epsilon).sqrt();
    let jump = epsilon * (d as f64).sqrt();
    let mut kraus = Vec::with_capacity(2 * d);
    for sign in [1.0, -1.0] {
        for j in 0..d {
            let mut m = identity(d).map(|z| z * amp);
            m[(0, j)] += C64::new(0.0, sign * jump);
            kraus.push(m.map(|z| z * scale));
        }
    }
    Ok(kraus)
}

/// Closed-form blocks H_{j,l} of the measurement Hamiltonian, assembled as
/// sum_{j,l} H_{j,l} x |j_a><l_a| on (syndrome factor) x (ancilla).
pub fn build_measurement_hamiltonian(n: usize, k: usize) -> Result<CMatrix> {
    if k >= n {
        return Err(CtqecError::InvalidParameter(format!(
            "need n > k, got n={n}, k={k}"
        )));
    }
    let d = 1usize << (n - k);
    let blocks = hamiltonian_blocks(d);
    let dim_a = 2 * d;
    let mut h = CMatrix::zeros(d * dim_a, d * dim_a);
    for j in 0..dim_a {
        for l in 0..dim_a {
            if let Some(b) = &blocks[j][l] {
                h += tensor(b, &ketbra(dim_a, j, l));
            }
        }
    }
    Ok(h)
}

/// The nonzero H_{j,l} on the syndrome factor, indexed [j][l] over the 2d
/// ancilla outcomes.
fn hamiltonian_blocks(d: usize) -> Vec<Vec<Option<CMatrix>>> {
    let sqrt_d = (d as f64).sqrt();
    let sym = |j: usize| ketbra(d, 0, j) + ketbra(d, j, 0);
    let asym = |j: usize| ketbra(d, 0, j) - ketbra(d, j, 0);

    let mut blocks: Vec<Vec<Option<CMatrix>>> = vec![vec![None; 2 * d]; 2 * d];
    let mut set = |j: usize, l: usize, m: CMatrix| blocks[j][l] = Some(m);

    let sym_sum = (1..d).fold(CMatrix::zeros(d, d), |acc, l| acc + sym(l));
    set(0, 0, sym_sum.map(|z| z * (-2.0 / sqrt_d)));
    set(d, d, sym_sum.map(|z| z * (2.0 / sqrt_d)));
    for j in 1..d {
        set(0, j, sym(j).map(|z| z * (2.0 / sqrt_d)));
        set(j, 0, sym(j).map(|z| z * (2.0 / sqrt_d)));
        set(j, j, sym(j).map(|z| z * (2.0 * (1.0 - d as f64) / sqrt_d)));
        set(d + j, d + j, sym(j).map(|z| z * (-2.0 * (1.0 - d as f64) / sqrt_d)));
        set(d, d + j, sym(j).map(|z| z * (-2.0 / sqrt_d)));
        set(d + j, d, sym(j).map(|z| z * (-2.0 / sqrt_d)));
        set(j, d + j, asym(j).map(|z| z * (sqrt_d / 2.0)));
        set(d + j, j, asym(j).map(|z| z * (-sqrt_d / 2.0)));
        for l in 1..d {
            if l == j {
                continue;
            }
            set(j, l, (sym(j) + sym(l)).map(|z| z * (1.0 / sqrt_d)));
            set(d + j, d + l, (sym(j) + sym(l)).map(|z| z * (-1.0 / sqrt_d)));
            set(j, d + l, (sym(j) - sym(l)).map(|z| z * (1.0 / sqrt_d)));
            set(d + j, l, (sym(j) - sym(l)).map(|z| z * (-1.0 / sqrt_d)));
        }
    }
    blocks
}

impl WeakProtocol {
    /// Build the complete protocol: Kraus family, polar factors, closed-form
    /// correction generators, measurement Hamiltonian, and ancilla state.
    pub fn build(n: usize, k: usize, epsilon: f64) -> Result<WeakProtocol> {
        check_params(n, k, epsilon)?;
        let d = 1usize << (n - k);
        let kraus = build_kraus_family(n, k, epsilon)?;

        let mut povm = Vec::with_capacity(2 * d);
        let mut corrections = Vec::with_capacity(2 * d);
        for op in &kraus {
            let (u, p) = polar_decompose(op)?;
            povm.push(p);
            corrections.push(u);
        }

        // H_Cj = +/- (sqrt(d)/2)(|0><j| + |j><0|): the closed-form
        // second-order generators, kept as oracles for the exact unitary
        // factors.
        let mut correction_hams = Vec::with_capacity(2 * d);
        for sign in [1.0, -1.0] {
            for j in 0..d {
                let mut h = ketbra(d, 0, j) + ketbra(d, j, 0);
                h = h.map(|z| z * (sign * (d as f64).sqrt() / 2.0));
                correction_hams.push(h);
            }
        }

        let measurement_ham = build_measurement_hamiltonian(n, k)?;
        let dim_a = 2 * d;
        let amp = 1.0 / (dim_a as f64).sqrt();
        let ancilla_state = CVector::from_element(dim_a, C64::new(amp, 0.0));

        Ok(WeakProtocol {
            n,
            k,
            epsilon,
            ancilla_qubits: n - k + 1,
            kraus,
            povm,
            corrections,
            correction_hams,
            measurement_ham,
            ancilla_state,
        })
    }

    pub fn syndrome_dim(&self) -> usize {
        1 << (self.n - self.k)
    }

    /// Kraus family lifted to the full 2^n space (identity on the
    /// information qubits).
    pub fn full_kraus(&self) -> Vec<CMatrix> {
        let id = identity(1 << self.k);
        self.kraus.iter().map(|m| tensor(&id, m)).collect()
    }

    /// The channel defined by the Kraus family on the full 2^n space.
    pub fn kraus_channel(&self) -> KrausChannel {
        let mut ch = KrausChannel::new(self.full_kraus()).unwrap();
        ch.epsilon = Some(self.epsilon);
        ch
    }

    /// U_M = exp(i eps H_M) on (syndrome factor) x (ancilla).
    pub fn measurement_unitary(&self) -> CMatrix {
        matrix_exp(&self.measurement_ham, self.epsilon, ExpMode::Unitary)
            .expect("H_M is square by construction")
    }

    /// The operators <j_a| U_M (. x |A0>): measuring the ancilla after the
    /// joint unitary acts as these on the syndrome factor.
    pub fn dilated_measurement_operators(&self) -> Vec<CMatrix> {
        let d = self.syndrome_dim();
        let dim_a = 2 * d;
        let u = self.measurement_unitary();
        (0..dim_a)
            .map(|j| {
                CMatrix::from_fn(d, d, |s, sp| {
                    (0..dim_a)
                        .map(|l| u[(s * dim_a + j, sp * dim_a + l)] * self.ancilla_state[l])
                        .sum()
                })
            })
            .collect()
    }

    /// Self-describing text rendering of the protocol's operator data:
    /// the measurement Hamiltonian H_M, the POVM factors M_j, and the
    /// conditional correction unitaries U_Cj. Each matrix is printed as a
    /// `rows cols` line followed by row-major `re im` entries with 17
    /// significant digits, so the output round-trips through f64 exactly.
    pub fn dump_text(&self) -> String {
        fn write_matrix(out: &mut String, label: &str, m: &CMatrix) {
            use std::fmt::Write;
            writeln!(out, "matrix {label} {} {}", m.nrows(), m.ncols()).unwrap();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let z = m[(r, c)];
                    writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
                }
            }
        }
        let mut out = String::new();
        out.push_str("ctqec-protocol-dump v1\n");
        out.push_str(&format!(
            "n {}\nk {}\nepsilon {:.16e}\nancilla_qubits {}\n",
            self.n, self.k, self.epsilon, self.ancilla_qubits
        ));
        write_matrix(&mut out, "H_M", &self.measurement_ham);
        for (j, m) in self.povm.iter().enumerate() {
            write_matrix(&mut out, &format!("M_{j}"), m);
        }
        for (j, u) in self.corrections.iter().enumerate() {
            write_matrix(&mut out, &format!("U_C{j}"), u);
        }
        out
    }

    /// The exact composed protocol channel on the full 2^n space:
    /// rho -> sum_j U_Cj <j_a| U_M (rho x |A0><A0|) U_M^dag |j_a> U_Cj^dag.
    pub fn effective_channel(&self) -> KrausChannel {
        let id = identity(1 << self.k);
        let dilated = self.dilated_measurement_operators();
        let kraus = self
            .corrections
            .iter()
            .zip(&dilated)
            .map(|(u, b)| tensor(&id, &(u * b)))
            .collect();
        let mut ch = KrausChannel::new(kraus).unwrap();
        ch.epsilon = Some(self.epsilon);
        ch
    }

    /// Check the dilation against the POVM and the order-by-order matrix
    /// identities the measurement Hamiltonian must satisfy.
    pub fn verify_dilation(&self, trials: usize, seed: u64) -> DilationReport {
        let d = self.syndrome_dim();
        let dim_a = 2 * d;
        let dilated = self.dilated_measurement_operators();

        // Random pure states on the syndrome factor; the identity action on
        // the information factor reduces full-system trials to this.
        let mut max_state_residual = 0.0f64;
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            let mut psi = CVector::from_fn(d, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            psi /= C64::new(psi.norm(), 0.0);
            for j in 0..dim_a {
                let diff = (&dilated[j] - &self.povm[j]) * &psi;
                max_state_residual = max_state_residual.max(diff.norm());
            }
        }

        let blocks = hamiltonian_blocks(d);
        let block = |j: usize, l: usize| -> CMatrix {
            blocks[j][l].clone().unwrap_or_else(|| CMatrix::zeros(d, d))
        };
        let asym = |j: usize| ketbra(d, 0, j) - ketbra(d, j, 0);
        let sqrt_d = (d as f64).sqrt();

        // First moments: row sums of blocks.
        let mut first_moment_residual = 0.0f64;
        let row_sum = |j: usize| {
            (0..dim_a).fold(CMatrix::zeros(d, d), |acc, l| acc + block(j, l))
        };
        first_moment_residual = first_moment_residual.max(max_norm(&row_sum(0)));
        first_moment_residual = first_moment_residual.max(max_norm(&row_sum(d)));
        for j in 1..d {
            let expected = asym(j).map(|z| z * (sqrt_d / 2.0));
            first_moment_residual =
                first_moment_residual.max(max_norm(&(row_sum(j) - &expected)));
            first_moment_residual =
                first_moment_residual.max(max_norm(&(row_sum(d + j) + expected)));
        }

        // Second moments: sum_{l,m} H_{j,l} H_{l,m}.
        let mut second_moment_residual = 0.0f64;
        let double_sum = |j: usize| {
            let mut acc = CMatrix::zeros(d, d);
            for l in 0..dim_a {
                let hjl = block(j, l);
                if max_norm(&hjl) == 0.0 {
                    continue;
                }
                acc += hjl * row_sum(l);
            }
            acc
        };
        let expected_0 = identity(d) - ketbra(d, 0, 0).map(|z| z * d as f64);
        second_moment_residual =
            second_moment_residual.max(max_norm(&(double_sum(0) - &expected_0)));
        second_moment_residual =
            second_moment_residual.max(max_norm(&(double_sum(d) - &expected_0)));
        for j in 1..d {
            let expected = identity(d) + ketbra(d, 0, 0).map(|z| z * (d as f64 / 4.0))
                - ketbra(d, j, j).map(|z| z * (3.0 * d as f64 / 4.0));
            second_moment_residual =
                second_moment_residual.max(max_norm(&(double_sum(j) - &expected)));
            second_moment_residual =
                second_moment_residual.max(max_norm(&(double_sum(d + j) - &expected)));
        }

        // Hermiticity of the assembled Hamiltonian and the block symmetry
        // H_{j,l} = H_{l,j}^dag.
        let mut hermiticity_residual =
            max_norm(&(&self.measurement_ham - self.measurement_ham.adjoint()));
        for j in 0..dim_a {
            for l in 0..dim_a {
                hermiticity_residual =
                    hermiticity_residual.max(max_norm(&(block(j, l) - dagger(&block(l, j)))));
            }
        }
        DilationReport {
            max_state_residual,
            first_moment_residual,
            second_moment_residual,
            hermiticity_residual,
        }
    }
}

/// Residuals from [`WeakProtocol::verify_dilation`].
#[derive(Debug, Clone, Copy)]
pub struct DilationReport {
    /// max_j || (<j_a|U_M(.x|A0>) - M_j) |psi> || over the sampled states;
    /// third order in epsilon when the dilation is correct.
    pub max_state_residual: f64,
    /// Exact first-moment block identities (zero up to rounding).
    pub first_moment_residual: f64,
    /// Exact second-moment block identities (zero up to rounding).
    pub second_moment_residual: f64,
    pub hermiticity_residual: f64,
}

impl DilationReport {
    pub fn order_conditions_hold(&self, tol: f64) -> bool {
        self.first_moment_residual <= tol
            && self.second_moment_residual <= tol
            && self.hermiticity_residual <= tol
    }
}

/// Max-norm distance between the Choi matrices of two channels.
pub fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> f64 {
    max_norm(&(crate::channels::choi_matrix(a) - crate::channels::choi_matrix(b)))
}
