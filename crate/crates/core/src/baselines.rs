//! Baseline CTQEC schemes used for comparison: Oreshkov's coherent-
//! measurement protocol (with constant or feedback-optimized correction
//! strength) and the averaged map of the Ahn-Doherty-Landahl (ADL)
//! stabilizer-monitoring protocol.

use crate::channels::SuperoperatorGenerator;
use crate::error::{CtqecError, Result};
use crate::linalg::{
    identity, ketbra, matrix_exp, tensor, CMatrix, CVector, C64, ExpMode,
};
use crate::stabilizer::StabilizerCode;

/// How the correction strength delta is chosen each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaPolicy {
    /// delta = epsilon, fixed for all time.
    Constant,
    /// delta maximizes the updated trivial-syndrome weight each step.
    Optimal,
}

/// Total qubit budget for full-space simulation of the Oreshkov device
/// (syndrome qubits plus one ancilla per nontrivial syndrome).
const MAX_TOTAL_QUBITS: usize = 12;

/// Oreshkov's protocol: one ancilla qubit per nontrivial syndrome, each
/// coupled to the corresponding syndrome-swap operator.
#[derive(Debug, Clone)]
pub struct OreshkovProtocol {
    pub n: usize,
    pub k: usize,
    /// Always 2^(n-k) - 1.
    pub ancilla_qubits: usize,
    pub epsilon: f64,
    pub delta_policy: DeltaPolicy,
    /// H_MO on (syndrome factor) x (ancilla register), dimension d * 2^(d-1).
    pub measurement_ham: CMatrix,
    /// |Psi_O> = |+>^(d-1).
    pub ancilla_state: CVector,
}

/// X_j = |j><0| + |0><j| on the syndrome factor.
fn syndrome_swap(d: usize, j: usize) -> CMatrix {
    ketbra(d, j, 0) + ketbra(d, 0, j)
}

/// Y_j = i(|j><0| - |0><j|) on the syndrome factor.
fn syndrome_rotation(d: usize, j: usize) -> CMatrix {
    (ketbra(d, j, 0) - ketbra(d, 0, j)).map(|z| z * C64::new(0.0, 1.0))
}

impl OreshkovProtocol {
    pub fn build(
        n: usize,
        k: usize,
        epsilon: f64,
        delta_policy: DeltaPolicy,
    ) -> Result<OreshkovProtocol> {
        if k >= n {
            return Err(CtqecError::InvalidParameter(format!(
                "need n > k, got n={n}, k={k}"
            )));
        }
        let d = 1usize << (n - k);
        let ancilla_qubits = d - 1;
        if (n - k) + ancilla_qubits > MAX_TOTAL_QUBITS {
            return Err(CtqecError::InvalidParameter(format!(
                "joint system of {} syndrome and {ancilla_qubits} ancilla qubits \
                 exceeds the {MAX_TOTAL_QUBITS}-qubit simulation budget",
                n - k
            )));
        }
        let dim_a = 1usize << ancilla_qubits;

        let y = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        );
        // H_MO = (1/2) sum_j X_j x Y on ancilla qubit j (qubit 1 is the
        // most significant ancilla bit). The sign is chosen so that the
        // outcome-conditioned correction exp(-i delta H_CO) rotates weight
        // toward the trivial syndrome; with the opposite sign the composed
        // step drives weight away from it and the quadratic transfer rules
        // come out with (eps-delta) and (eps+delta) swapped.
        let mut h = CMatrix::zeros(d * dim_a, d * dim_a);
        for j in 1..d {
            let mut y_j = identity(1 << (j - 1));
            y_j = tensor(&y_j, &y);
            y_j = tensor(&y_j, &identity(1 << (ancilla_qubits - j)));
            h += tensor(&syndrome_swap(d, j), &y_j).map(|z| z * 0.5);
        }

        let amp = 1.0 / (dim_a as f64).sqrt();
        let ancilla_state = CVector::from_element(dim_a, C64::new(amp, 0.0));

        Ok(OreshkovProtocol {
            n,
            k,
            ancilla_qubits,
            epsilon,
            delta_policy,
            measurement_ham: h,
            ancilla_state,
        })
    }

    pub fn syndrome_dim(&self) -> usize {
        1 << (self.n - self.k)
    }

    /// H_CO for outcome bits m (m[j-1] is the j-th ancilla result):
    /// (1/2) sum_j (-1)^(m_j) Y_j on the syndrome factor.
    pub fn correction_ham(&self, outcome: usize) -> CMatrix {
        let d = self.syndrome_dim();
        let mut h = CMatrix::zeros(d, d);
        for j in 1..d {
            let bit = (outcome >> (self.ancilla_qubits - j)) & 1;
            let sign = if bit == 0 { 0.5 } else { -0.5 };
            h += syndrome_rotation(d, j).map(|z| z * sign);
        }
        h
    }

    /// The measurement operators on the syndrome factor, one per ancilla
    /// Z-measurement outcome: <m| exp(-i eps H_MO) (. x |Psi_O>).
    pub fn measurement_operators(&self) -> Result<Vec<CMatrix>> {
        let d = self.syndrome_dim();
        let dim_a = 1 << self.ancilla_qubits;
        let u = matrix_exp(&self.measurement_ham, -self.epsilon, ExpMode::Unitary)?;
        Ok((0..dim_a)
            .map(|m| {
                CMatrix::from_fn(d, d, |s, sp| {
                    (0..dim_a)
                        .map(|l| u[(s * dim_a + m, sp * dim_a + l)] * self.ancilla_state[l])
                        .sum()
                })
            })
            .collect())
    }

    /// One full averaged step on a corrected-basis state of the full 2^n
    /// space: attach the ancillas, entangle, measure them in Z, and apply
    /// the outcome-conditioned correction exp(-i delta H_CO).
    pub fn full_step(&self, rho: &CMatrix, delta: f64) -> Result<CMatrix> {
        let d = self.syndrome_dim();
        let full = 1usize << self.n;
        if rho.nrows() != full || rho.ncols() != full {
            return Err(CtqecError::DimensionMismatch {
                expected: full,
                got: rho.nrows(),
            });
        }
        let id_info = identity(1 << self.k);
        let mut out = CMatrix::zeros(full, full);
        for (m, meas) in self.measurement_operators()?.iter().enumerate() {
            let corr = matrix_exp(&self.correction_ham(m), -delta, ExpMode::Unitary)?;
            let op = tensor(&id_info, &(corr * meas));
            out += &op * rho * op.adjoint();
        }
        let _ = d;
        Ok(out)
    }
}

/// Syndrome-class weights of the three-qubit bit-flip model: w[j] is the
/// probability of the class reached by j independent flips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector {
    pub w: [f64; 4],
}

impl WeightVector {
    pub fn initial() -> Self {
        WeightVector {
            w: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn new(w: [f64; 4]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > 1e-9 {
            return Err(CtqecError::InvalidParameter(format!(
                "weights must lie in [0,1] and sum to 1, got {w:?}"
            )));
        }
        Ok(WeightVector { w })
    }

    /// Codeword fidelity.
    pub fn fidelity(&self) -> f64 {
        self.w[0]
    }

    /// Correctable overlap: fidelity after one strong correction.
    pub fn correctable_overlap(&self) -> f64 {
        self.w[0] + self.w[1]
    }
}

/// One discrete correction step of the weight model at strengths
/// (epsilon, delta); the quadratic transfer rules of the averaged map.
pub fn oreshkov_weight_update(w: &WeightVector, epsilon: f64, delta: f64) -> WeightVector {
    let toward = 3.0 * (epsilon - delta).powi(2) / 4.0;
    let away = (epsilon + delta).powi(2) / 4.0;
    let [w0, w1, w2, w3] = w.w;
    WeightVector {
        w: [
            w0 * (1.0 - toward) + w1 * away,
            w1 * (1.0 - away) + w0 * toward,
            w2 * (1.0 - away) + w3 * toward,
            w3 * (1.0 - toward) + w2 * away,
        ],
    }
}

/// The delta maximizing the updated w0: epsilon (3w0 + w1)/(3w0 - w1).
pub fn optimal_delta(w: &WeightVector, epsilon: f64) -> Result<f64> {
    let [w0, w1, ..] = w.w;
    if 3.0 * w0 <= w1 {
        return Err(CtqecError::DegenerateWeights { w0, w1 });
    }
    Ok(epsilon * (3.0 * w0 + w1) / (3.0 * w0 - w1))
}

/// Right-hand side of the weight ODEs under bit-flip noise at rate lambda
/// and correction at rate kappa.
pub fn oreshkov_ode_rhs(
    w: &WeightVector,
    lambda: f64,
    kappa: f64,
    policy: DeltaPolicy,
) -> Result<[f64; 4]> {
    let [w0, w1, w2, w3] = w.w;
    let (c0, c2) = match policy {
        DeltaPolicy::Constant => (kappa * w1, kappa * w2),
        DeltaPolicy::Optimal => {
            let denom = 3.0 * w0 - w1;
            if denom <= 0.0 {
                return Err(CtqecError::DegenerateWeights { w0, w1 });
            }
            (
                kappa * 3.0 * w0 * w1 / denom,
                kappa * (9.0 * w0 * w0 * w2 - 3.0 * w1 * w1 * w3) / (denom * denom),
            )
        }
    };
    Ok([
        -3.0 * lambda * w0 + lambda * w1 + c0,
        3.0 * lambda * w0 - 3.0 * lambda * w1 + 2.0 * lambda * w2 - c0,
        3.0 * lambda * w3 - 3.0 * lambda * w2 + 2.0 * lambda * w1 - c2,
        -3.0 * lambda * w3 + lambda * w2 + c2,
    ])
}

/// The w1 << w0 approximation of the optimal-policy right-hand side.
pub fn oreshkov_ode_rhs_approx(w: &WeightVector, lambda: f64, kappa: f64) -> [f64; 4] {
    let [w0, w1, w2, w3] = w.w;
    let c0 = kappa * w1 + kappa * w1 * w1 / (3.0 * w0);
    let c2 = kappa * w2 + kappa * w1 * (2.0 * w0 * w2 - w1 * w3) / (3.0 * w0 * w0).powi(2);
    [
        -3.0 * lambda * w0 + lambda * w1 + c0,
        3.0 * lambda * w0 - 3.0 * lambda * w1 + 2.0 * lambda * w2 - c0,
        3.0 * lambda * w3 - 3.0 * lambda * w2 + 2.0 * lambda * w1 - c2,
        -3.0 * lambda * w3 + lambda * w2 + c2,
    ]
}

/// The averaged ADL map for the three-qubit bit-flip code:
/// Phi(rho) = rho + G(rho) dt with
/// G = kappa2 (L(g1) + L(g2) + L(g1 g2)) - gamma2 i [F, .],
/// F = sum_j signs[j] E_j, all operators in the corrected basis.
#[derive(Debug, Clone)]
pub struct AdlMap {
    pub kappa2: f64,
    pub gamma2: f64,
    pub signs: [i8; 3],
    pub code: StabilizerCode,
}

impl AdlMap {
    pub fn new(kappa2: f64, gamma2: f64, signs: [i8; 3], code: StabilizerCode) -> Result<Self> {
        if code.n != 3 || code.k != 1 {
            return Err(CtqecError::InvalidParameter(
                "the ADL map is defined for the three-qubit bit-flip code".into(),
            ));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(CtqecError::InvalidParameter(format!(
                "feedback signs must be +/-1, got {signs:?}"
            )));
        }
        Ok(AdlMap {
            kappa2,
            gamma2,
            signs,
            code,
        })
    }

    /// The standard example rates kappa2 = 64 lambda, gamma2 = 128 lambda.
    pub fn standard(lambda: f64, signs: [i8; 3], code: StabilizerCode) -> Result<Self> {
        Self::new(64.0 * lambda, 128.0 * lambda, signs, code)
    }
}

pub fn adl_generator(map: &AdlMap) -> Result<SuperoperatorGenerator> {
    let dim = map.code.dim();
    let mut gen = SuperoperatorGenerator::zero(dim);

    let g1 = map.code.generators[0].matrix();
    let g2 = map.code.generators[1].matrix();
    let g12 = &g1 * &g2;
    let sqrt_k2 = map.kappa2.sqrt();
    for g in [&g1, &g2, &g12] {
        gen.add_dissipator(&map.code.to_corrected(g)?.map(|z| z * sqrt_k2));
    }

    // correctable_errors[0] is the identity (trivial syndrome); the feedback
    // Hamiltonian sums the three single-qubit errors.
    let mut f = CMatrix::zeros(dim, dim);
    for (sign, err) in map.signs.iter().zip(map.code.correctable_errors.iter().skip(1)) {
        f += map
            .code
            .to_corrected(&err.matrix())?
            .map(|z| z * *sign as f64);
    }
    gen.add_commutator(&f, map.gamma2);
    Ok(gen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, max_norm, unitarity_residual};
    use crate::stabilizer::BuiltinCode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng, dim: usize) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace().re;
        rho.map(|z| z / tr)
    }

    #[test]
    fn oreshkov_build_counts() {
        let p = OreshkovProtocol::build(3, 1, 0.1, DeltaPolicy::Constant).unwrap();
        assert_eq!(p.ancilla_qubits, 3);
        assert_eq!(p.measurement_ham.nrows(), 32);
        assert!(max_norm(&(&p.measurement_ham - p.measurement_ham.adjoint())) < 1e-14);
        // A register of 2^4 - 1 = 15 ancillas blows the simulation budget.
        assert!(OreshkovProtocol::build(5, 1, 0.1, DeltaPolicy::Constant).is_err());
    }

    #[test]
    fn oreshkov_measurement_operators_complete() {
        let p = OreshkovProtocol::build(3, 1, 0.12, DeltaPolicy::Constant).unwrap();
        let ops = p.measurement_operators().unwrap();
        assert_eq!(ops.len(), 8);
        let total = ops.iter().fold(CMatrix::zeros(4, 4), |acc, m| {
            acc + m.adjoint() * m
        });
        assert!(max_norm(&(total - identity(4))) < 1e-12);
    }

    #[test]
    fn correction_ham_signs() {
        let p = OreshkovProtocol::build(3, 1, 0.1, DeltaPolicy::Constant).unwrap();
        // Outcome 0: all signs +; flipping bit j negates the j-th term.
        let all_plus = p.correction_ham(0);
        let expected: CMatrix = (1..4)
            .map(|j| syndrome_rotation(4, j).map(|z| z * 0.5))
            .fold(CMatrix::zeros(4, 4), |a, b| a + b);
        assert!(max_norm(&(&all_plus - &expected)) < 1e-14);
        let flip_first = p.correction_ham(0b100);
        let diff = &all_plus - &flip_first;
        assert!(max_norm(&(diff - syndrome_rotation(4, 1))) < 1e-14);
    }

    #[test]
    fn full_step_identity_at_zero_strength() {
        let p = OreshkovProtocol::build(3, 1, 0.0, DeltaPolicy::Constant).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(&mut rng, 8);
        let out = p.full_step(&rho, 0.0).unwrap();
        assert!(max_norm(&(&out - &rho)) < 1e-12);
    }

    #[test]
    fn full_step_preserves_trace() {
        let p = OreshkovProtocol::build(3, 1, 0.17, DeltaPolicy::Constant).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let rho = random_density(&mut rng, 8);
            let out = p.full_step(&rho, 0.23).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-10);
            assert!(out.trace().im.abs() < 1e-12);
        }
    }

    /// Weights extracted from a full-space state with info qubit |0>:
    /// classes are (info bit, syndrome) = (0,0), (0,s), (1,s), (1,0).
    fn extract_weights(rho: &CMatrix) -> [f64; 4] {
        let mut w = [0.0f64; 4];
        w[0] = rho[(0, 0)].re;
        for s in 1..4 {
            w[1] += rho[(s, s)].re;
            w[2] += rho[(4 + s, 4 + s)].re;
        }
        w[3] = rho[(4, 4)].re;
        w
    }

    fn class_state(code: &StabilizerCode, errors: usize) -> CMatrix {
        // rho_I = |0><0|; apply all combinations of `errors` distinct flips
        // in the corrected basis and average.
        let base = {
            let v = basis_vector(8, 0);
            &v * v.adjoint()
        };
        let flips: Vec<CMatrix> = code
            .correctable_errors
            .iter()
            .skip(1)
            .map(|e| code.to_corrected(&e.matrix()).unwrap())
            .collect();
        let combos: Vec<Vec<usize>> = match errors {
            0 => vec![vec![]],
            1 => vec![vec![0], vec![1], vec![2]],
            2 => vec![vec![0, 1], vec![0, 2], vec![1, 2]],
            _ => vec![vec![0, 1, 2]],
        };
        let mut rho = CMatrix::zeros(8, 8);
        for combo in &combos {
            let op = combo
                .iter()
                .fold(identity(8), |acc, &i| acc * &flips[i]);
            rho += &op * &base * op.adjoint();
        }
        rho.map(|z| z / combos.len() as f64)
    }

    #[test]
    fn full_step_matches_weight_update_to_fourth_order() {
        let code = StabilizerCode::builtin(BuiltinCode::ThreeQubitBitFlip);
        let classes: Vec<CMatrix> = (0..4).map(|j| class_state(&code, j)).collect();
        let w = WeightVector::new([0.55, 0.25, 0.15, 0.05]).unwrap();
        for (eps, delta) in [(0.1f64, 0.13f64), (0.05, 0.065)] {
            let p = OreshkovProtocol::build(3, 1, eps, DeltaPolicy::Constant).unwrap();
            let rho = (0..4).fold(CMatrix::zeros(8, 8), |acc, j| {
                acc + classes[j].map(|z| z * w.w[j])
            });
            let got = extract_weights(&p.full_step(&rho, delta).unwrap());
            let want = oreshkov_weight_update(&w, eps, delta).w;
            for j in 0..4 {
                assert!(
                    (got[j] - want[j]).abs() <= 5.0 * eps.powi(4),
                    "eps={eps}: w[{j}] full {} vs model {}",
                    got[j],
                    want[j]
                );
            }
        }
    }

    #[test]
    fn weight_update_examples() {
        let w = WeightVector::initial();
        let out = oreshkov_weight_update(&w, 0.1, 0.1);
        assert_eq!(out.w, [1.0, 0.0, 0.0, 0.0]);

        let out = oreshkov_weight_update(&w, 0.1, 0.0);
        assert!((out.w[0] - (1.0 - 3.0 * 0.01 / 4.0)).abs() < 1e-15);

        let w = WeightVector::new([0.9, 0.1, 0.0, 0.0]).unwrap();
        let out = oreshkov_weight_update(&w, 0.1, 0.1);
        assert!((out.w[0] - 0.901).abs() < 1e-15);
    }

    #[test]
    fn weight_update_conserves_probability() {
        let w = WeightVector::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        for (eps, delta) in [(0.1, 0.05), (0.2, 0.3), (0.3, 0.0)] {
            let out = oreshkov_weight_update(&w, eps, delta);
            let sum: f64 = out.w.iter().sum();
            assert!((sum - 1.0).abs() <= eps.powi(4), "eps={eps} delta={delta}");
        }
    }

    #[test]
    fn optimal_delta_examples() {
        let w = WeightVector::initial();
        assert!((optimal_delta(&w, 0.1).unwrap() - 0.1).abs() < 1e-15);
        let w = WeightVector::new([0.75, 0.25, 0.0, 0.0]).unwrap();
        assert!((optimal_delta(&w, 0.1).unwrap() - 0.125).abs() < 1e-15);
        let w = WeightVector {
            w: [0.1, 0.4, 0.3, 0.2],
        };
        assert!(matches!(
            optimal_delta(&w, 0.1),
            Err(CtqecError::DegenerateWeights { .. })
        ));
    }

    #[test]
    fn optimal_delta_matches_golden_section_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 0.1;
        for _ in 0..50 {
            let mut raw = [0.0f64; 4];
            raw[0] = rng.gen_range(0.4..1.0);
            raw[1] = rng.gen_range(0.0..raw[0]); // keep 3 w0 > w1
            raw[2] = rng.gen_range(0.0..0.3);
            raw[3] = rng.gen_range(0.0..0.3);
            let sum: f64 = raw.iter().sum();
            for x in &mut raw {
                *x /= sum;
            }
            let w = WeightVector { w: raw };
            let updated_w0 = |delta: f64| oreshkov_weight_update(&w, eps, delta).w[0];

            // Golden-section maximization over a bracketing interval.
            let (mut a, mut b) = (0.0f64, 10.0 * eps);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            while b - a > 1e-12 {
                let c = b - phi * (b - a);
                let d = a + phi * (b - a);
                if updated_w0(c) < updated_w0(d) {
                    a = c;
                } else {
                    b = d;
                }
            }
            let numeric = 0.5 * (a + b);
            let closed = optimal_delta(&w, eps).unwrap();
            assert!(
                ((numeric - closed) / closed).abs() < 1e-6,
                "numeric {numeric} vs closed {closed} at w={raw:?}"
            );
        }
    }

    #[test]
    fn ode_rhs_initial_state() {
        let w = WeightVector::initial();
        for policy in [DeltaPolicy::Constant, DeltaPolicy::Optimal] {
            let rhs = oreshkov_ode_rhs(&w, 2.0, 100.0, policy).unwrap();
            assert_eq!(rhs, [-6.0, 6.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn ode_rhs_conserves_probability() {
        let w = WeightVector::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        for policy in [DeltaPolicy::Constant, DeltaPolicy::Optimal] {
            let rhs = oreshkov_ode_rhs(&w, 1.0, 50.0, policy).unwrap();
            let sum: f64 = rhs.iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn ode_rhs_approx_agrees_for_small_w1() {
        let w = WeightVector {
            w: [0.93, 0.93e-3, 0.05, 0.019_07],
        };
        let exact = oreshkov_ode_rhs(&w, 1.0, 100.0, DeltaPolicy::Optimal).unwrap();
        let approx = oreshkov_ode_rhs_approx(&w, 1.0, 100.0);
        for j in 0..4 {
            let scale = exact[j].abs().max(1.0);
            assert!(
                ((exact[j] - approx[j]) / scale).abs() < 1e-3,
                "component {j}: exact {} approx {}",
                exact[j],
                approx[j]
            );
        }
    }

    #[test]
    fn adl_generator_annihilates_trace() {
        let code = StabilizerCode::builtin(BuiltinCode::ThreeQubitBitFlip);
        let map = AdlMap::standard(1.0, [1, 1, 1], code).unwrap();
        let gen = adl_generator(&map).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 8);
            let out = gen.apply(&rho);
            assert!(out.trace().norm() < 1e-10);
        }
        assert!(gen.hermiticity_preserving_residual() < 1e-12);
    }

    #[test]
    fn dissipator_of_hermitian_unitary_collapses() {
        // L(g) rho = g rho g - rho when g is unitary and Hermitian.
        let code = StabilizerCode::builtin(BuiltinCode::ThreeQubitBitFlip);
        let g1 = code.to_corrected(&code.generators[0].matrix()).unwrap();
        assert!(unitarity_residual(&g1) < 1e-12);
        assert!(max_norm(&(&g1 - g1.adjoint())) < 1e-12);
        let mut gen = SuperoperatorGenerator::zero(8);
        gen.add_dissipator(&g1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density(&mut rng, 8);
        let expected = &g1 * &rho * &g1 - &rho;
        assert!(max_norm(&(gen.apply(&rho) - expected)) < 1e-12);
    }

    #[test]
    fn adl_rejects_wrong_code() {
        let code = StabilizerCode::builtin(BuiltinCode::FiveQubitPerfect);
        assert!(AdlMap::standard(1.0, [1, 1, 1], code).is_err());
    }
}
