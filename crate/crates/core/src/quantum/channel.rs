//! Channels induced on a target region and their Choi matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{c, checked_dim, haar_vector, is_unitary, Factor, QuantumRule, QuantumStepper, MAX_PURE_DIM, UNIT_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Region, RegionConfig};

/// Largest target dimension `k^|T|`.
pub const MAX_TARGET_DIM: usize = 16;
/// Pure input states probed by [`implements_unitary`].
pub const HAAR_SAMPLES: usize = 100;

/// `J = (1/d) sum_ij |i><j| (x) Phi(|i><j|)`, input factor first, so that
/// `tr J = 1` and the partial trace over the output is `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    matrix: DMatrix<Complex64>,
}

fn trace_norm(h: &DMatrix<Complex64>) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.iter().map(|e| e.abs()).sum()
}

impl ChoiMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || !matrix.is_square() {
            return Err(Error::Quantum("Choi matrix must be d^2 x d^2".into()));
        }
        Ok(ChoiMatrix { d, matrix })
    }

    /// Dimension of the target factor.
    pub fn target_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `Tr_out J`, which equals `1/d` for trace-preserving maps.
    pub fn partial_trace_output(&self) -> DMatrix<Complex64> {
        let d = self.d;
        DMatrix::from_fn(d, d, |i, j| (0..d).map(|o| self.matrix[(i * d + o, j * d + o)]).sum())
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let expected = DMatrix::identity(self.d, self.d) / c(self.d as f64);
        (self.partial_trace_output() - expected).norm() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.min()
    }

    /// `Phi(gamma)`.
    pub fn apply(&self, gamma: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.d;
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let g = gamma[(i, j)];
                if g == Complex64::default() {
                    continue;
                }
                out += self.matrix.view((i * d, j * d), (d, d)) * g;
            }
        }
        out * c(d as f64)
    }

    /// Trace-norm distance of the (normalized) Choi matrices.
    pub fn distance(&self, other: &ChoiMatrix) -> Result<f64> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        Ok(trace_norm(&(&self.matrix - &other.matrix)))
    }
}

/// Choi matrix of `gamma -> u gamma u^dagger`.
pub fn unitary_choi(u: &DMatrix<Complex64>) -> Result<ChoiMatrix> {
    if !is_unitary(u, UNIT_TOL) {
        return Err(Error::Quantum("target matrix is not unitary".into()));
    }
    let d = u.nrows();
    let omega = DVector::from_fn(d * d, |r, _| u[(r % d, r / d)] / c((d as f64).sqrt()));
    ChoiMatrix::from_matrix(&omega * omega.adjoint())
}

/// Evolves `|complement> (x) |i>` for every target word `i` and returns the
/// global state vectors together with the target factor.
fn evolved_inputs(
    rule: &QuantumRule,
    complement: &Configuration,
    target: &Region,
    t: usize,
) -> Result<(Vec<DVector<Complex64>>, Factor)> {
    let k = rule.alphabet().size();
    if complement.alphabet().size() != k {
        return Err(Error::AlphabetMismatch);
    }
    if target.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = checked_dim(k, target.len(), MAX_TARGET_DIM)?;
    let torus = complement.torus();
    let n = torus.num_cells();
    let dim = checked_dim(k, n, MAX_PURE_DIM)?;
    let stepper = QuantumStepper::new(rule, torus)?;
    let zeroed = complement.patch(&RegionConfig::new(
        target.clone(),
        complement.alphabet_arc().clone(),
        vec![0; target.len()],
    )?)?;
    let base = super::basis_index(&zeroed);
    let factor = Factor::new(k, n, &target.indices(torus)?);
    let states = (0..d)
        .map(|i| {
            let mut psi = DVector::zeros(dim);
            psi[base + factor.offsets[i]] = c(1.0);
            stepper.run_vector(&mut psi, t);
            psi
        })
        .collect();
    Ok((states, factor))
}

/// Choi matrix of `gamma -> Tr_complement[U^t (|c><c| (x) gamma) U^t^dagger]`,
/// with the complement prepared in the basis state of `complement` (its
/// target cells are ignored).
pub fn induced_channel(rule: &QuantumRule, complement: &Configuration, target: &Region, t: usize) -> Result<ChoiMatrix> {
    let (states, factor) = evolved_inputs(rule, complement, target, t)?;
    let d = states.len();
    let mut j = DMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            for a in 0..d {
                for b in 0..d {
                    let mut acc = Complex64::default();
                    for &r in &factor.bases {
                        acc += states[i][r + factor.offsets[a]] * states[jj][r + factor.offsets[b]].conj();
                    }
                    j[(i * d + a, jj * d + b)] = acc / c(d as f64);
                }
            }
        }
    }
    ChoiMatrix::from_matrix(j)
}

/// Result of checking an induced channel against a target unitary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryCheck {
    pub passes: bool,
    /// Trace-norm distance of the normalized Choi matrices.
    pub choi_distance: f64,
    /// Largest `|| Phi(gamma) - u gamma u^dagger ||_1` over the sampled pure states.
    pub sampled_worst: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Whether the channel induced on `target` is within `eps` of conjugation
/// by `u`, measured by the normalized Choi distance. Also reports the worst
/// per-state deviation over [`HAAR_SAMPLES`] Haar-random pure inputs.
pub fn implements_unitary(
    rule: &QuantumRule,
    complement: &Configuration,
    target: &Region,
    u: &DMatrix<Complex64>,
    t: usize,
    eps: f64,
    seed: u64,
) -> Result<UnitaryCheck> {
    let want = unitary_choi(u)?;
    let got = induced_channel(rule, complement, target, t)?;
    let choi_distance = got.distance(&want)?;
    let d = got.target_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_worst: f64 = 0.0;
    for _ in 0..HAAR_SAMPLES {
        let phi = haar_vector(d, &mut rng);
        let gamma = &phi * phi.adjoint();
        let diff = got.apply(&gamma) - u * &gamma * u.adjoint();
        sampled_worst = sampled_worst.max(trace_norm(&diff));
    }
    Ok(UnitaryCheck {
        passes: choi_distance <= eps,
        choi_distance,
        sampled_worst,
        samples: HAAR_SAMPLES,
        seed,
    })
}

#[cfg(test)]
pub(crate) mod tests_support {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::Rng;

    /// Haar-ish unitary via QR of a complex Gaussian matrix.
    pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
        let cols: Vec<_> = (0..d).map(|_| super::haar_vector(d, rng)).collect();
        DMatrix::from_columns(&cols).qr().q()
    }
}
