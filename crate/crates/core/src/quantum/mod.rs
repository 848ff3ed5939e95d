//! Dense quantum Margolus automata on small tori.
//!
//! Global basis states follow the linear cell order: the basis index of a
//! classical configuration `c` is `sum_j c_j k^j`. Inside a block, and on any
//! region factor, words are big-endian in the canonical cell order, matching
//! the classical word convention.

mod channel;
mod observable;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::engine::{BlockLayout, Phase};
use crate::error::{Error, Result};
use crate::lattice::{Alphabet, Configuration, Torus};
use crate::rules::{BlockRule, RuleDocument, UnitaryBlock};

pub use channel::{implements_unitary, induced_channel, unitary_choi, ChoiMatrix, UnitaryCheck};
pub use observable::{
    commutator_norm, constraint_value, mean_field, quantum_shift_robustness, shift_bound, Observable,
    QuantumRobustness, ShiftBound, SiteObservable,
};

/// Largest state-vector dimension.
pub const MAX_PURE_DIM: usize = 1 << 14;
/// Largest density-matrix dimension.
pub const MAX_MIXED_DIM: usize = 1 << 10;
/// Largest dense operator on a region factor.
pub const MAX_FACTOR_DIM: usize = 1 << 10;

pub(crate) const UNIT_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn checked_dim(k: usize, n: usize, cap: usize) -> Result<usize> {
    let mut d: usize = 1;
    for _ in 0..n {
        d = d.checked_mul(k).filter(|&d| d <= cap).ok_or_else(|| {
            Error::TooLarge(format!("dimension {k}^{n} exceeds the dense cap of {cap}"))
        })?;
    }
    Ok(d)
}

/// Enumerates a tensor factor of the global space: `offsets[w]` is the
/// global index contribution of word `w` on `cells` (big-endian), `bases`
/// lists the global indices whose digits on `cells` are zero.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

impl Factor {
    pub fn new(k: usize, n: usize, cells: &[usize]) -> Factor {
        let pow: Vec<usize> = (0..n).scan(1usize, |p, _| {
            let cur = *p;
            *p *= k;
            Some(cur)
        })
        .collect();
        let m = cells.len();
        let words = k.pow(m as u32);
        let offsets = (0..words)
            .map(|mut w| {
                let mut off = 0;
                for i in (0..m).rev() {
                    off += (w % k) * pow[cells[i]];
                    w /= k;
                }
                off
            })
            .collect();
        let in_factor: Vec<bool> = (0..n).map(|j| cells.contains(&j)).collect();
        let mut bases = Vec::with_capacity(pow.last().map_or(1, |p| p * k) / words);
        let rest: Vec<usize> = (0..n).filter(|&j| !in_factor[j]).collect();
        let count = k.pow(rest.len() as u32);
        for mut r in 0..count {
            let mut g = 0;
            for &j in &rest {
                g += (r % k) * pow[j];
                r /= k;
            }
            bases.push(g);
        }
        Factor { offsets, bases }
    }

    /// `psi <- (op on this factor) psi`.
    pub fn apply(&self, op: &DMatrix<Complex64>, psi: &mut DVector<Complex64>) {
        let w = self.offsets.len();
        let mut buf = vec![Complex64::default(); w];
        for &b in &self.bases {
            for (slot, &o) in buf.iter_mut().zip(&self.offsets) {
                *slot = psi[b + o];
            }
            for (row, &o) in self.offsets.iter().enumerate() {
                let mut acc = Complex64::default();
                for (col, v) in buf.iter().enumerate() {
                    acc += op[(row, col)] * v;
                }
                psi[b + o] = acc;
            }
        }
    }
}

/// Pure state vector or density matrix over a whole torus.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Pure(DVector<Complex64>),
    Mixed(DMatrix<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    torus: Torus,
    k: usize,
    repr: Representation,
}

impl QuantumState {
    /// A normalized pure state; `amplitudes` must have unit norm.
    pub fn pure(torus: Torus, k: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        let d = checked_dim(k, torus.num_cells(), MAX_PURE_DIM)?;
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: amplitudes.len(),
            });
        }
        if (amplitudes.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Quantum(format!("state norm {} is not 1", amplitudes.norm())));
        }
        Ok(QuantumState {
            torus,
            k,
            repr: Representation::Pure(amplitudes),
        })
    }

    /// A density matrix; must be Hermitian, unit trace and positive semidefinite.
    pub fn mixed(torus: Torus, k: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let d = checked_dim(k, torus.num_cells(), MAX_MIXED_DIM)?;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
        }
        if (&rho - rho.adjoint()).norm() > UNIT_TOL {
            return Err(Error::Quantum("density matrix is not Hermitian".into()));
        }
        if (rho.trace() - c(1.0)).norm() > UNIT_TOL {
            return Err(Error::Quantum(format!("density matrix trace {} is not 1", rho.trace())));
        }
        let min = rho.clone().symmetric_eigen().eigenvalues.min();
        if min < -UNIT_TOL {
            return Err(Error::Quantum(format!("density matrix has negative eigenvalue {min}")));
        }
        Ok(QuantumState {
            torus,
            k,
            repr: Representation::Mixed(rho),
        })
    }

    /// The computational basis state of a classical configuration.
    pub fn basis(config: &Configuration) -> Result<Self> {
        let k = config.alphabet().size();
        let d = checked_dim(k, config.torus().num_cells(), MAX_PURE_DIM)?;
        let mut psi = DVector::zeros(d);
        psi[basis_index(config)] = c(1.0);
        QuantumState::pure(config.torus().clone(), k, psi)
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on every cell of a binary torus.
    pub fn cat(torus: &Torus) -> Result<Self> {
        let n = torus.num_cells();
        if !(2..=14).contains(&n) {
            return Err(Error::TooLarge(format!("cat state needs 2..=14 cells, got {n}")));
        }
        let d = 1usize << n;
        let mut psi = DVector::zeros(d);
        psi[0] = c(std::f64::consts::FRAC_1_SQRT_2);
        psi[d - 1] = c(std::f64::consts::FRAC_1_SQRT_2);
        QuantumState::pure(torus.clone(), 2, psi)
    }

    /// The product state with single-cell vector `sites[j]` on cell `j`.
    pub fn product(torus: &Torus, sites: &[DVector<Complex64>]) -> Result<Self> {
        let n = torus.num_cells();
        if sites.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sites.len() });
        }
        let k = sites[0].len();
        if sites.iter().any(|s| s.len() != k) {
            return Err(Error::Quantum("site vectors differ in dimension".into()));
        }
        let d = checked_dim(k, n, MAX_PURE_DIM)?;
        let mut psi = DVector::from_element(d, c(1.0));
        for (g, amp) in psi.iter_mut().enumerate() {
            let mut rem = g;
            for s in sites {
                *amp *= s[rem % k];
                rem /= k;
            }
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Quantum(format!("product state norm {norm} is not 1")));
        }
        QuantumState::pure(torus.clone(), k, psi)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Representation::Pure(v) => v.len(),
            Representation::Mixed(m) => m.nrows(),
        }
    }

    /// Norm of a pure state, trace of a mixed one.
    pub fn norm(&self) -> f64 {
        match &self.repr {
            Representation::Pure(v) => v.norm(),
            Representation::Mixed(m) => m.trace().re,
        }
    }

    pub fn density_matrix(&self) -> Result<DMatrix<Complex64>> {
        match &self.repr {
            Representation::Pure(v) => {
                checked_dim(self.k, self.torus.num_cells(), MAX_MIXED_DIM)?;
                Ok(v * v.adjoint())
            }
            Representation::Mixed(m) => Ok(m.clone()),
        }
    }

    /// `<x|y>`; both must be pure.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        match (&self.repr, &other.repr) {
            (Representation::Pure(a), Representation::Pure(b)) if a.len() == b.len() => Ok(a.dotc(b)),
            (Representation::Pure(a), Representation::Pure(b)) => Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            }),
            _ => Err(Error::Quantum("inner products need pure states".into())),
        }
    }

    /// The basis index if this is a basis state up to phase.
    pub fn as_basis_index(&self) -> Option<usize> {
        let Representation::Pure(v) = &self.repr else {
            return None;
        };
        let mut hit = None;
        for (i, a) in v.iter().enumerate() {
            if a.norm() > 1e-9 {
                if hit.is_some() || (a.norm() - 1.0).abs() > 1e-9 {
                    return None;
                }
                hit = Some(i);
            }
        }
        hit
    }

    /// Conjugation by the translation unitary: the amplitude of `c` moves to
    /// `shift(c, v)`.
    pub fn shift(&self, v: &[i64]) -> Result<QuantumState> {
        self.torus.check_vector(v)?;
        let perm = shift_permutation(&self.torus, self.k, v);
        let repr = match &self.repr {
            Representation::Pure(psi) => {
                let mut out = DVector::zeros(psi.len());
                for (g, &p) in perm.iter().enumerate() {
                    out[p] = psi[g];
                }
                Representation::Pure(out)
            }
            Representation::Mixed(rho) => {
                let d = rho.nrows();
                let mut out = DMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        out[(perm[i], perm[j])] = rho[(i, j)];
                    }
                }
                Representation::Mixed(out)
            }
        };
        Ok(QuantumState {
            torus: self.torus.clone(),
            k: self.k,
            repr,
        })
    }

    pub(crate) fn apply_factor(&mut self, factor: &Factor, op: &DMatrix<Complex64>) {
        match &mut self.repr {
            Representation::Pure(psi) => factor.apply(op, psi),
            Representation::Mixed(rho) => {
                // rho <- U rho U^dagger, column by column then via the adjoint
                let d = rho.nrows();
                let mut m = rho.clone();
                for j in 0..d {
                    let mut col = m.column(j).into_owned();
                    factor.apply(op, &mut col);
                    m.set_column(j, &col);
                }
                let mut m = m.adjoint();
                for j in 0..d {
                    let mut col = m.column(j).into_owned();
                    factor.apply(op, &mut col);
                    m.set_column(j, &col);
                }
                *rho = m.adjoint();
            }
        }
    }
}

/// Global basis index of a classical configuration.
pub fn basis_index(config: &Configuration) -> usize {
    let k = config.alphabet().size();
    config.values().iter().rev().fold(0, |acc, &s| acc * k + s as usize)
}

/// `perm[g]` is the basis index of the translate of basis state `g`.
fn shift_permutation(torus: &Torus, k: usize, v: &[i64]) -> Vec<usize> {
    let n = torus.num_cells();
    let pow: Vec<usize> = (0..n).map(|j| k.pow(j as u32)).collect();
    let dest: Vec<usize> = (0..n)
        .map(|j| torus.index_unchecked(torus.translate(&torus.cell_at(j), v).coords()))
        .collect();
    let d = k.pow(n as u32);
    (0..d)
        .map(|mut g| {
            let mut out = 0;
            for &t in &dest {
                out += (g % k) * pow[t];
                g /= k;
            }
            out
        })
        .collect()
}

/// A Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / c(n)
}

pub(crate) fn is_unitary(u: &DMatrix<Complex64>, tol: f64) -> bool {
    u.is_square() && (u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols())).norm() <= tol
}

/// Block unitaries for both phases.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRule {
    alphabet: Arc<Alphabet>,
    dim: usize,
    even: DMatrix<Complex64>,
    odd: DMatrix<Complex64>,
}

impl QuantumRule {
    pub fn new(alphabet: Arc<Alphabet>, dim: usize, even: DMatrix<Complex64>, odd: DMatrix<Complex64>) -> Result<Self> {
        let shape = crate::rules::BlockShape::new(dim)?;
        let size = checked_dim(alphabet.size(), shape.cells(), MAX_FACTOR_DIM)?;
        for (name, u) in [("even", &even), ("odd", &odd)] {
            if u.nrows() != size || u.ncols() != size {
                return Err(Error::DimensionMismatch { expected: size, got: u.nrows() });
            }
            if !is_unitary(u, UNIT_TOL) {
                return Err(Error::Quantum(format!("{name} block matrix is not unitary")));
            }
        }
        Ok(QuantumRule { alphabet, dim, even, odd })
    }

    /// Permutation matrices of a classical rule: `U|w> = |f(w)>`.
    pub fn from_block_rule(rule: &BlockRule) -> Result<Self> {
        QuantumRule::new(
            rule.alphabet_arc().clone(),
            rule.dim(),
            permutation_matrix(rule.table(Phase::Even)),
            permutation_matrix(rule.table(Phase::Odd)),
        )
    }

    /// Explicit unitary blocks where given, the classical permutation otherwise.
    pub fn from_document(doc: &RuleDocument) -> Result<Self> {
        let size = doc.rule.words();
        let explicit = |block: &UnitaryBlock| -> Result<Option<DMatrix<Complex64>>> {
            match block {
                UnitaryBlock::Same => Ok(None),
                UnitaryBlock::Entries { values, line } => {
                    if values.len() != size * size {
                        return Err(Error::Quantum(format!(
                            "unitary block at line {line} has {} entries, expected {}",
                            values.len(),
                            size * size
                        )));
                    }
                    Ok(Some(DMatrix::from_row_slice(size, size, values)))
                }
            }
        };
        let even = match &doc.even_unitary {
            Some(b) => explicit(b)?.unwrap_or_else(|| permutation_matrix(doc.rule.table(Phase::Even))),
            None => permutation_matrix(doc.rule.table(Phase::Even)),
        };
        let odd = match &doc.odd_unitary {
            Some(UnitaryBlock::Same) => even.clone(),
            Some(b) => explicit(b)?.expect("entries"),
            None => permutation_matrix(doc.rule.table(Phase::Odd)),
        };
        QuantumRule::new(doc.rule.alphabet_arc().clone(), doc.rule.dim(), even, odd)
    }

    /// `X` on every cell, both phases.
    pub fn global_x(dim: usize) -> Result<Self> {
        QuantumRule::from_block_rule(&BlockRule::complement(dim)?)
    }

    pub fn identity(alphabet: Arc<Alphabet>, dim: usize) -> Result<Self> {
        QuantumRule::from_block_rule(&BlockRule::identity(alphabet, dim)?)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unitary(&self, phase: Phase) -> &DMatrix<Complex64> {
        match phase {
            Phase::Even => &self.even,
            Phase::Odd => &self.odd,
        }
    }
}

fn permutation_matrix(table: &[u32]) -> DMatrix<Complex64> {
    let d = table.len();
    let mut u = DMatrix::zeros(d, d);
    for (w, &img) in table.iter().enumerate() {
        u[(img as usize, w)] = c(1.0);
    }
    u
}

/// Block factors of both phases on one torus.
pub(crate) struct QuantumStepper<'r> {
    rule: &'r QuantumRule,
    even: Vec<Factor>,
    odd: Vec<Factor>,
}

impl<'r> QuantumStepper<'r> {
    pub fn new(rule: &'r QuantumRule, torus: &Torus) -> Result<Self> {
        if rule.dim != torus.ndim() {
            return Err(Error::DimensionMismatch {
                expected: rule.dim,
                got: torus.ndim(),
            });
        }
        checked_dim(rule.alphabet.size(), torus.num_cells(), MAX_PURE_DIM)?;
        let shape = crate::rules::BlockShape::new(rule.dim)?;
        let k = rule.alphabet.size();
        let n = torus.num_cells();
        let factors = |phase| {
            BlockLayout::new(torus, shape.offsets(), phase)
                .cells
                .chunks(shape.cells())
                .map(|cells| Factor::new(k, n, cells))
                .collect()
        };
        Ok(QuantumStepper {
            rule,
            even: factors(Phase::Even),
            odd: factors(Phase::Odd),
        })
    }

    pub fn run(&self, state: &mut QuantumState, t: usize) {
        for s in 0..t {
            let phase = Phase::at_step(s);
            let factors = match phase {
                Phase::Even => &self.even,
                Phase::Odd => &self.odd,
            };
            for f in factors {
                state.apply_factor(f, self.rule.unitary(phase));
            }
        }
    }

    pub fn run_vector(&self, psi: &mut DVector<Complex64>, t: usize) {
        for s in 0..t {
            let phase = Phase::at_step(s);
            let factors = match phase {
                Phase::Even => &self.even,
                Phase::Odd => &self.odd,
            };
            for f in factors {
                f.apply(self.rule.unitary(phase), psi);
            }
        }
    }
}

/// Applies `t` alternating block-unitary layers, even first.
pub fn qevolve(state: &QuantumState, rule: &QuantumRule, t: usize) -> Result<QuantumState> {
    if state.k != rule.alphabet.size() {
        return Err(Error::AlphabetMismatch);
    }
    let stepper = QuantumStepper::new(rule, &state.torus)?;
    let mut out = state.clone();
    stepper.run(&mut out, t);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evolve;
    use crate::lattice::Cell;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t42() -> Torus {
        Torus::new(vec![4, 2]).unwrap()
    }

    #[test]
    fn basis_states_are_orthonormal() {
        let a = Arc::new(Alphabet::binary());
        let zero = Configuration::uniform(t42(), a.clone());
        let one = zero.with_value(&Cell::from([3, 1]), 1).unwrap();
        let s0 = QuantumState::basis(&zero).unwrap();
        let s1 = QuantumState::basis(&one).unwrap();
        assert_eq!(s0.as_basis_index(), Some(0));
        assert_eq!(s1.as_basis_index(), Some(1 << 7));
        assert!((s0.norm() - 1.0).abs() < 1e-12);
        assert_eq!(s0.inner(&s1).unwrap(), c(0.0));
        assert_eq!(s1.inner(&s1).unwrap(), c(1.0));
    }

    #[test]
    fn cat_state_amplitudes() {
        let s = QuantumState::cat(&Torus::new(vec![2]).unwrap()).unwrap();
        let Representation::Pure(v) = s.representation() else { panic!() };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v.as_slice(), &[c(h), c(0.0), c(0.0), c(h)]);
        assert!(QuantumState::cat(&Torus::new(vec![4, 4]).unwrap()).is_err());
    }

    #[test]
    fn evolution_examples() {
        let a = Arc::new(Alphabet::binary());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = haar_vector(256, &mut rng);
        let s = QuantumState::pure(t42(), 2, psi).unwrap();
        let id = QuantumRule::identity(a, 2).unwrap();
        assert_eq!(qevolve(&s, &id, 3).unwrap(), s);
        let x = QuantumRule::global_x(2).unwrap();
        let back = qevolve(&s, &x, 2).unwrap();
        assert!((back.inner(&s).unwrap().norm() - 1.0).abs() < 1e-12);
        let once = qevolve(&s, &x, 1).unwrap();
        assert!((once.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn permutation_rules_reproduce_the_engine() {
        let a = Arc::new(Alphabet::binary());
        let rule = crate::rules::parse_rule(
            "alphabet: 0 1\ndim: 2\neven: 1 0 0 0 -> 0 1 0 0\neven: 0 1 0 0 -> 0 0 1 0\neven: 0 0 1 0 -> 1 0 0 0\nodd: 1 1 0 0 -> 0 0 1 1\nodd: 0 0 1 1 -> 1 1 0 0\n",
        )
        .unwrap();
        let q = QuantumRule::from_block_rule(&rule).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let vals: Vec<u8> = (0..8).map(|_| rng.random_range(0..2)).collect();
            let c0 = Configuration::from_values(t42(), a.clone(), &vals).unwrap();
            for t in 0..=4 {
                let classical = evolve(&c0, &rule, t).unwrap();
                let quantum = qevolve(&QuantumState::basis(&c0).unwrap(), &q, t).unwrap();
                assert_eq!(quantum.as_basis_index(), Some(basis_index(&classical)));
            }
        }
    }

    #[test]
    fn mixed_evolution_matches_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = Torus::new(vec![2, 2]).unwrap();
        let psi = haar_vector(16, &mut rng);
        let pure = QuantumState::pure(t.clone(), 2, psi).unwrap();
        let mixed = QuantumState::mixed(t, 2, pure.density_matrix().unwrap()).unwrap();
        let u = crate::quantum::channel::tests_support::random_unitary(16, &mut rng);
        let rule = QuantumRule::new(Arc::new(Alphabet::binary()), 2, u.clone(), u.adjoint()).unwrap();
        let a = qevolve(&pure, &rule, 3).unwrap().density_matrix().unwrap();
        let b = qevolve(&mixed, &rule, 3).unwrap().density_matrix().unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn shift_moves_basis_states_like_configurations() {
        let a = Arc::new(Alphabet::binary());
        let c0 = Configuration::uniform(t42(), a)
            .with_value(&Cell::from([1, 0]), 1)
            .unwrap()
            .with_value(&Cell::from([3, 1]), 1)
            .unwrap();
        let v = [2, 1];
        let q = QuantumState::basis(&c0).unwrap().shift(&v).unwrap();
        assert_eq!(q.as_basis_index(), Some(basis_index(&c0.shift(&v).unwrap())));
    }

    #[test]
    fn non_unitary_blocks_are_rejected() {
        let a = Arc::new(Alphabet::binary());
        let m = DMatrix::from_element(16, 16, c(0.25));
        assert!(QuantumRule::new(a, 2, m.clone(), m).is_err());
    }

    #[test]
    fn unitary_document_blocks() {
        // Hadamard on the first block cell, identity elsewhere, as even-unitary
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut text = String::from("alphabet: 0 1\ndim: 1\neven-unitary:\n");
        for row in [[h, 0.0, h, 0.0], [0.0, h, 0.0, h], [h, 0.0, -h, 0.0], [0.0, h, 0.0, -h]] {
            let line: Vec<String> = row.iter().map(|x| format!("{x},0")).collect();
            text.push_str(&format!("  {}\n", line.join(" ")));
        }
        text.push_str("odd-unitary: same\n");
        let doc = crate::rules::parse_rule_document(&text).unwrap();
        let q = QuantumRule::from_document(&doc).unwrap();
        assert_eq!(q.unitary(Phase::Even), q.unitary(Phase::Odd));
        assert!((q.unitary(Phase::Even)[(2, 0)].re - h).abs() < 1e-15);
    }
}
