//! [[n,k,d]] stabilizer codes: encoding and correcting unitaries and the
//! physical / encoded / corrected basis transforms.
//!
//! Basis layout in the encoded and corrected bases: the first k qubits are
//! the information subsystem, the last n-k the syndrome subsystem. The
//! syndrome basis state |j> is the standard basis state with index j
//! (most significant syndrome bit leftmost).

use crate::error::{CtqecError, Result};
use crate::linalg::{identity, ketbra, tensor, unitarity_residual, CMatrix, CVector};
use crate::pauli::{Pauli, PauliOperator};

/// Index of a syndrome subspace; bit l-1 is set iff the error anticommutes
/// with generator g_l.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyndromeIndex(pub usize);

/// The codes used throughout the comparison studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinCode {
    ThreeQubitBitFlip,
    ThreeQubitPhaseFlip,
    FiveQubitPerfect,
}

impl BuiltinCode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "three_qubit_bit_flip" => Ok(Self::ThreeQubitBitFlip),
            "three_qubit_phase_flip" => Ok(Self::ThreeQubitPhaseFlip),
            "five_qubit_perfect" => Ok(Self::FiveQubitPerfect),
            other => Err(CtqecError::UnknownCode(other.into())),
        }
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "three_qubit_bit_flip",
            "three_qubit_phase_flip",
            "five_qubit_perfect",
        ]
    }
}

#[derive(Debug, Clone)]
pub struct StabilizerCode {
    pub n: usize,
    pub k: usize,
    pub generators: Vec<PauliOperator>,
    pub correctable_errors: Vec<PauliOperator>,
    /// U_E: takes encoded-basis states to the physical basis.
    pub encoding_unitary: CMatrix,
    /// U_Gamma: syndrome-conditioned information unitary applied after
    /// U_E^-1; block diagonal in the syndrome index.
    pub correcting_unitary: CMatrix,
}

impl StabilizerCode {
    pub fn num_syndromes(&self) -> usize {
        1 << (self.n - self.k)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Syndrome of an error: bit l-1 set iff it anticommutes with g_l.
    pub fn syndrome_of(&self, e: &PauliOperator) -> Result<SyndromeIndex> {
        if e.num_qubits() != self.n {
            return Err(CtqecError::DimensionMismatch {
                expected: self.n,
                got: e.num_qubits(),
            });
        }
        let mut s = 0usize;
        for (l, g) in self.generators.iter().enumerate() {
            if !e.commutes_with(g) {
                s |= 1 << l;
            }
        }
        Ok(SyndromeIndex(s))
    }

    /// Conjugate a physical-basis operator into the encoded basis.
    pub fn to_encoded(&self, op_physical: &CMatrix) -> Result<CMatrix> {
        self.check_dim(op_physical)?;
        Ok(self.encoding_unitary.adjoint() * op_physical * &self.encoding_unitary)
    }

    /// Conjugate a physical-basis operator into the corrected basis.
    pub fn to_corrected(&self, op_physical: &CMatrix) -> Result<CMatrix> {
        self.check_dim(op_physical)?;
        let w = &self.correcting_unitary * self.encoding_unitary.adjoint();
        Ok(&w * op_physical * w.adjoint())
    }

    /// Projector onto the codespace: prod_l (I + g_l)/2.
    pub fn codespace_projector(&self) -> CMatrix {
        let d = self.dim();
        let mut p = identity(d);
        for g in &self.generators {
            p = p * (identity(d) + g.matrix()).map(|z| z * 0.5);
        }
        p
    }

    fn check_dim(&self, op: &CMatrix) -> Result<()> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(CtqecError::DimensionMismatch {
                expected: self.dim(),
                got: op.nrows(),
            });
        }
        Ok(())
    }

    /// One of the code constructions used in the comparison studies.
    pub fn builtin(which: BuiltinCode) -> StabilizerCode {
        match which {
            BuiltinCode::ThreeQubitBitFlip => Self::three_qubit_bit_flip(),
            BuiltinCode::ThreeQubitPhaseFlip => {
                let gens = vec![
                    PauliOperator::parse("XXI").unwrap(),
                    PauliOperator::parse("XIX").unwrap(),
                ];
                let errors = vec![
                    PauliOperator::parse("III").unwrap(),
                    PauliOperator::parse("ZII").unwrap(),
                    PauliOperator::parse("IZI").unwrap(),
                    PauliOperator::parse("IIZ").unwrap(),
                ];
                Self::build(3, 1, gens, Some(errors)).expect("builtin phase-flip code")
            }
            BuiltinCode::FiveQubitPerfect => {
                let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
                    .iter()
                    .map(|s| PauliOperator::parse(s).unwrap())
                    .collect();
                let mut errors = vec![PauliOperator::identity(5)];
                for q in 0..5 {
                    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                        errors.push(PauliOperator::single(5, q, p));
                    }
                }
                Self::build(5, 1, gens, Some(errors)).expect("builtin five-qubit code")
            }
        }
    }

    /// The three-qubit bit-flip code with the textbook encoding unitary
    /// U_E = |0><0| x I x I + |1><1| x X x X and correcting unitary
    /// U_Gamma = I x (P0 + P1 + P2) + X x P3.
    fn three_qubit_bit_flip() -> StabilizerCode {
        let generators = vec![
            PauliOperator::parse("ZZI").unwrap(),
            PauliOperator::parse("ZIZ").unwrap(),
        ];
        let correctable_errors = vec![
            PauliOperator::parse("III").unwrap(),
            PauliOperator::parse("XII").unwrap(),
            PauliOperator::parse("IXI").unwrap(),
            PauliOperator::parse("IIX").unwrap(),
        ];
        let x = Pauli::X.matrix();
        let encoding_unitary = tensor(&ketbra(2, 0, 0), &identity(4))
            + tensor(&ketbra(2, 1, 1), &tensor(&x, &x));
        let low_syndromes = ketbra(4, 0, 0) + ketbra(4, 1, 1) + ketbra(4, 2, 2);
        let correcting_unitary =
            tensor(&identity(2), &low_syndromes) + tensor(&x, &ketbra(4, 3, 3));
        StabilizerCode {
            n: 3,
            k: 1,
            generators,
            correctable_errors,
            encoding_unitary,
            correcting_unitary,
        }
    }

    /// General construction from commuting independent generators.
    ///
    /// The encoding unitary maps |b> x |j> to T_j |b_L>, where the T_j are
    /// syndrome coset representatives and |b_L> the logical codewords. When
    /// an explicit correctable-error set is given it supplies the coset
    /// representatives (so those errors act trivially on the information
    /// factor in the corrected basis); otherwise minimum-weight
    /// representatives are chosen, ties broken lexicographically. With
    /// this encoding the correcting unitary is the identity.
    pub fn build(
        n: usize,
        k: usize,
        generators: Vec<PauliOperator>,
        correctable_errors: Option<Vec<PauliOperator>>,
    ) -> Result<StabilizerCode> {
        if n == 0 || k > n || generators.len() != n - k {
            return Err(CtqecError::InvalidGenerators(format!(
                "expected {} generators for an [[{},{}]] code, got {}",
                n.saturating_sub(k),
                n,
                k,
                generators.len()
            )));
        }
        if n > 10 {
            return Err(CtqecError::InvalidParameter(
                "general code construction capped at n <= 10 qubits".into(),
            ));
        }
        for g in &generators {
            if g.num_qubits() != n {
                return Err(CtqecError::InvalidGenerators(format!(
                    "generator {g} has wrong length"
                )));
            }
        }
        for (a, ga) in generators.iter().enumerate() {
            for gb in generators.iter().skip(a + 1) {
                if !ga.commutes_with(gb) {
                    return Err(CtqecError::InvalidGenerators(format!(
                        "generators {ga} and {gb} anticommute"
                    )));
                }
            }
        }
        let gen_bits: Vec<u128> = generators.iter().map(symplectic_bits).collect();
        if gf2_rank(&gen_bits) != generators.len() {
            return Err(CtqecError::InvalidGenerators(
                "generators are not independent".into(),
            ));
        }

        let code_builder = CodeBuilder {
            n,
            k,
            generators: &generators,
        };
        let leaders = code_builder.coset_leaders()?;
        let reps = match &correctable_errors {
            Some(errors) => code_builder.representatives_from(errors, &leaders)?,
            None => leaders.clone(),
        };
        let (logical_x, logical_z) = code_builder.logical_operators()?;
        let encoding_unitary = code_builder.encoding_unitary(&reps, &logical_x, &logical_z)?;
        let code = StabilizerCode {
            n,
            k,
            generators,
            correctable_errors: correctable_errors.unwrap_or(leaders),
            encoding_unitary,
            correcting_unitary: identity(1 << n),
        };
        debug_assert!(unitarity_residual(&code.encoding_unitary) < 1e-10);
        Ok(code)
    }

    /// Parse a code definition: header line "n k", then one generator per
    /// line as a Pauli string. Blank lines and `#` comments are skipped.
    pub fn from_definition_str(text: &str) -> Result<StabilizerCode> {
        let mut header: Option<(usize, usize)> = None;
        let mut generators = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if header.is_none() {
                let mut parts = line.split_whitespace();
                let n = parts.next().and_then(|s| s.parse::<usize>().ok());
                let k = parts.next().and_then(|s| s.parse::<usize>().ok());
                match (n, k, parts.next()) {
                    (Some(n), Some(k), None) => header = Some((n, k)),
                    _ => {
                        return Err(CtqecError::Parse {
                            line: idx + 1,
                            msg: format!("expected header \"n k\", got {line:?}"),
                        })
                    }
                }
            } else {
                let g = PauliOperator::parse(line).map_err(|e| CtqecError::Parse {
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
                generators.push(g);
            }
        }
        let (n, k) = header.ok_or(CtqecError::Parse {
            line: 0,
            msg: "empty code definition".into(),
        })?;
        StabilizerCode::build(n, k, generators, None)
    }
}

struct CodeBuilder<'a> {
    n: usize,
    k: usize,
    generators: &'a [PauliOperator],
}

impl CodeBuilder<'_> {
    fn syndrome_bits(&self, p: &PauliOperator) -> usize {
        let mut s = 0usize;
        for (l, g) in self.generators.iter().enumerate() {
            if !p.commutes_with(g) {
                s |= 1 << l;
            }
        }
        s
    }

    /// Minimum-weight coset representative per syndrome; ties broken by
    /// lexicographic order over letter strings (I < X < Y < Z, leftmost
    /// qubit first). Enumeration order below realizes exactly that.
    fn coset_leaders(&self) -> Result<Vec<PauliOperator>> {
        let num_syndromes = 1usize << (self.n - self.k);
        let mut leaders: Vec<Option<(usize, PauliOperator)>> = vec![None; num_syndromes];
        let mut found = 0usize;
        for weight in 0..=self.n {
            for p in enumerate_paulis_lex(self.n) {
                if p.weight() != weight {
                    continue;
                }
                let s = self.syndrome_bits(&p);
                if leaders[s].is_none() {
                    leaders[s] = Some((weight, p));
                    found += 1;
                    if found == num_syndromes {
                        return Ok(leaders.into_iter().map(|x| x.unwrap().1).collect());
                    }
                }
            }
        }
        Err(CtqecError::InvalidGenerators(
            "could not populate every syndrome coset".into(),
        ))
    }

    /// Use a declared correctable-error set as the coset representatives,
    /// filling syndromes it does not reach with minimum-weight leaders.
    fn representatives_from(
        &self,
        errors: &[PauliOperator],
        leaders: &[PauliOperator],
    ) -> Result<Vec<PauliOperator>> {
        let mut reps: Vec<Option<PauliOperator>> = vec![None; leaders.len()];
        for e in errors {
            if e.num_qubits() != self.n {
                return Err(CtqecError::InvalidGenerators(format!(
                    "correctable error {e} has wrong length"
                )));
            }
            let s = self.syndrome_bits(e);
            match &reps[s] {
                None => reps[s] = Some(e.unsigned()),
                Some(prev) => {
                    return Err(CtqecError::InvalidGenerators(format!(
                        "correctable errors {prev} and {e} share syndrome {s}"
                    )))
                }
            }
        }
        Ok(reps
            .into_iter()
            .enumerate()
            .map(|(s, r)| r.unwrap_or_else(|| leaders[s].clone()))
            .collect())
    }

    /// k anticommuting logical pairs, found by searching Paulis in
    /// (weight, lex) order under the symplectic constraints. The Z search
    /// prefers Z letters so that the trivial code gets the conventional
    /// logical pair (Z, X).
    fn logical_operators(&self) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
        let mut span: Vec<u128> = self.generators.iter().map(symplectic_bits).collect();
        let mut logical_z: Vec<PauliOperator> = Vec::new();
        let mut logical_x: Vec<PauliOperator> = Vec::new();
        let candidates = paulis_by_weight_then_lex(self.n);
        let mut z_candidates = candidates.clone();
        z_candidates.sort_by_key(|p| {
            let z_last: Vec<u8> = p
                .letters
                .iter()
                .map(|&l| match l {
                    Pauli::I => 0u8,
                    Pauli::Z => 1,
                    Pauli::Y => 2,
                    Pauli::X => 3,
                })
                .collect();
            (p.weight(), z_last)
        });
        for _ in 0..self.k {
            let chosen: Vec<&PauliOperator> = logical_z.iter().chain(&logical_x).collect();
            let z = z_candidates
                .iter()
                .find(|p| {
                    self.syndrome_bits(p) == 0
                        && chosen.iter().all(|l| p.commutes_with(l))
                        && !in_gf2_span(&span, symplectic_bits(p))
                })
                .ok_or_else(|| {
                    CtqecError::InvalidGenerators("no logical Z candidate found".into())
                })?
                .clone();
            let x = candidates
                .iter()
                .find(|p| {
                    self.syndrome_bits(p) == 0
                        && !p.commutes_with(&z)
                        && chosen.iter().all(|l| p.commutes_with(l))
                })
                .ok_or_else(|| {
                    CtqecError::InvalidGenerators("no logical X candidate found".into())
                })?
                .clone();
            span.push(symplectic_bits(&z));
            span.push(symplectic_bits(&x));
            logical_z.push(z);
            logical_x.push(x);
        }
        Ok((logical_x, logical_z))
    }

    fn encoding_unitary(
        &self,
        reps: &[PauliOperator],
        logical_x: &[PauliOperator],
        logical_z: &[PauliOperator],
    ) -> Result<CMatrix> {
        let dim = 1usize << self.n;
        // |0_L>: the unique state fixed by every generator and logical Z.
        let mut proj = identity(dim);
        for g in self.generators.iter().chain(logical_z) {
            proj = proj * (identity(dim) + g.matrix()).map(|z| z * 0.5);
        }
        let zero_logical = extract_unit_column(&proj)?;

        let num_syndromes = 1usize << (self.n - self.k);
        let mut u = CMatrix::zeros(dim, dim);
        for b in 0..(1usize << self.k) {
            // Logical qubit i is the i-th most significant information bit.
            let mut word = zero_logical.clone();
            for (i, lx) in logical_x.iter().enumerate() {
                if (b >> (self.k - 1 - i)) & 1 == 1 {
                    word = lx.matrix() * word;
                }
            }
            for (j, t) in reps.iter().enumerate() {
                let col = t.matrix() * &word;
                let idx = b * num_syndromes + j;
                for r in 0..dim {
                    u[(r, idx)] = col[r];
                }
            }
        }
        Ok(u)
    }
}

/// All phase-free n-qubit Paulis in lexicographic letter order.
fn enumerate_paulis_lex(n: usize) -> impl Iterator<Item = PauliOperator> {
    let total = 1usize << (2 * n);
    (0..total).map(move |code| {
        let letters = (0..n)
            .map(|q| match (code >> (2 * (n - 1 - q))) & 3 {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        PauliOperator::new(letters)
    })
}

fn paulis_by_weight_then_lex(n: usize) -> Vec<PauliOperator> {
    let mut all: Vec<PauliOperator> = enumerate_paulis_lex(n).collect();
    all.sort_by_key(|p| p.weight());
    all
}

/// Symplectic (x|z) bit representation; phase discarded.
fn symplectic_bits(p: &PauliOperator) -> u128 {
    let n = p.num_qubits();
    let mut bits = 0u128;
    for (q, &l) in p.letters.iter().enumerate() {
        let (x, z) = match l {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        };
        bits |= (x as u128) << q;
        bits |= (z as u128) << (n + q);
    }
    bits
}

fn gf2_rank(rows: &[u128]) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for &row in rows {
        let mut r = row;
        for &b in &basis {
            let pivot = 1u128 << (127 - b.leading_zeros());
            if r & pivot != 0 {
                r ^= b;
            }
        }
        if r != 0 {
            basis.push(r);
        }
    }
    basis.len()
}

fn in_gf2_span(rows: &[u128], v: u128) -> bool {
    let mut all = rows.to_vec();
    let rank_before = gf2_rank(&all);
    all.push(v);
    gf2_rank(&all) == rank_before
}

/// Pull the (normalized, phase-fixed) range vector out of a rank-1 projector.
fn extract_unit_column(proj: &CMatrix) -> Result<CVector> {
    let dim = proj.nrows();
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for c in 0..dim {
        let norm: f64 = (0..dim).map(|r| proj[(r, c)].norm_sqr()).sum();
        if norm > best_norm {
            best_norm = norm;
            best = c;
        }
    }
    if best_norm < 1e-20 {
        return Err(CtqecError::Numerical("projector has empty range".into()));
    }
    let mut v = CVector::from_fn(dim, |r, _| proj[(r, best)]);
    let norm = v.norm();
    v /= num_complex::Complex::new(norm, 0.0);
    let pivot = (0..dim).find(|&r| v[r].norm() > 1e-12).unwrap();
    let phase = v[pivot] / v[pivot].norm();
    v /= phase;
    Ok(v)
}
