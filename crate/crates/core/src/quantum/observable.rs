//! Single-site observables, mean fields and the quantum macroscopic
//! constraint.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{c, checked_dim, Factor, QuantumState, Representation, MAX_FACTOR_DIM, UNIT_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Alphabet, Region, Torus};
use crate::macroscopic::{overlap_deficit, Partition, Rational};

/// A Hermitian `k x k` operator with `||a|| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteObservable {
    name: String,
    matrix: DMatrix<Complex64>,
}

fn spectral_norm(h: &DMatrix<Complex64>) -> f64 {
    h.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
}

impl SiteObservable {
    pub fn new(name: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::Quantum("site observable must be a square matrix".into()));
        }
        if (&matrix - matrix.adjoint()).norm() > UNIT_TOL {
            return Err(Error::Quantum("site observable is not Hermitian".into()));
        }
        let norm = spectral_norm(&matrix);
        if norm > 1.0 + UNIT_TOL {
            return Err(Error::Quantum(format!("site observable has norm {norm} > 1")));
        }
        Ok(SiteObservable {
            name: name.into(),
            matrix,
        })
    }

    pub fn sx() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        SiteObservable { name: "sx".into(), matrix: m }
    }

    pub fn sy() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]);
        SiteObservable { name: "sy".into(), matrix: m }
    }

    pub fn sz() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        SiteObservable { name: "sz".into(), matrix: m }
    }

    /// `|s><s|` on a `k`-level cell.
    pub fn projection(s: u8, alphabet: &Alphabet) -> Result<Self> {
        let s = alphabet.check_symbol(s as usize)? as usize;
        let k = alphabet.size();
        let mut m = DMatrix::zeros(k, k);
        m[(s, s)] = c(1.0);
        Ok(SiteObservable {
            name: format!("proj{}", alphabet.label(s as u8)),
            matrix: m,
        })
    }

    /// `sx`, `sy`, `sz`, `proj<symbol>`, or `k*k` row-major `re,im` entries
    /// separated by whitespace.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let text = text.trim();
        let k = alphabet.size();
        let pauli = |o: SiteObservable| {
            if k == 2 {
                Ok(o)
            } else {
                Err(Error::Quantum(format!("{text} needs a binary alphabet")))
            }
        };
        match text {
            "sx" => return pauli(SiteObservable::sx()),
            "sy" => return pauli(SiteObservable::sy()),
            "sz" => return pauli(SiteObservable::sz()),
            _ => {}
        }
        if let Some(label) = text.strip_prefix("proj") {
            let s = alphabet
                .index_of(label)
                .ok_or_else(|| Error::Quantum(format!("unknown symbol {label:?}")))?;
            return SiteObservable::projection(s, alphabet);
        }
        let entries = text
            .split_whitespace()
            .map(|tok| {
                let (re, im) = tok.split_once(',').unwrap_or((tok, "0"));
                match (re.parse::<f64>(), im.parse::<f64>()) {
                    (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
                    _ => Err(Error::Quantum(format!("invalid matrix entry {tok:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != k * k {
            return Err(Error::Quantum(format!(
                "unknown observable {text:?}; expected sx, sy, sz, proj<symbol> or {} entries",
                k * k
            )));
        }
        SiteObservable::new("custom", DMatrix::from_row_slice(k, k, &entries))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }
}

/// `|| sum_p weight_p * h_p ||` for Hermitian `h` on distinct cells. The terms
/// commute, so the extreme eigenvalues pick an extreme eigenvalue of `h` per
/// cell.
fn site_sum_norm(h: &DMatrix<Complex64>, weights: &[f64]) -> f64 {
    let eig = h.clone().symmetric_eigen().eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (top, bottom) = weights.iter().fold((0.0, 0.0), |(t, b), &w| {
        (t + (w * hi).max(w * lo), b + (w * hi).min(w * lo))
    });
    f64::max(top, -bottom)
}

/// `sum_p weight_p * a_{cells[p]}` as a dense matrix on the factor of `q`
/// cells, big-endian.
fn dense_sum(a: &DMatrix<Complex64>, weights: &[f64]) -> Result<DMatrix<Complex64>> {
    let k = a.nrows();
    let q = weights.len();
    let d = checked_dim(k, q, MAX_FACTOR_DIM)?;
    let mut out = DMatrix::zeros(d, d);
    for (p, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let left = DMatrix::<Complex64>::identity(k.pow(p as u32), k.pow(p as u32));
        let right = DMatrix::<Complex64>::identity(k.pow((q - p - 1) as u32), k.pow((q - p - 1) as u32));
        out += left.kronecker(a).kronecker(&right) * c(w);
    }
    Ok(out)
}

/// The mean field `(1/|R|) sum_{x in R} a_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    torus: Torus,
    region: Region,
    site: SiteObservable,
}

impl Observable {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn site(&self) -> &SiteObservable {
        &self.site
    }

    /// Dense matrix on the region's own factor (big-endian in region order).
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        let m = self.region.len();
        dense_sum(self.site.matrix(), &vec![1.0 / m as f64; m])
    }

    /// `(self - l) psi` on the full space.
    fn apply_shifted(&self, psi: &DVector<Complex64>, l: f64, factors: &[Factor]) -> DVector<Complex64> {
        let m = self.region.len() as f64;
        let mut out = psi * c(-l);
        for f in factors {
            let mut term = psi.clone();
            f.apply(self.site.matrix(), &mut term);
            out += term * c(1.0 / m);
        }
        out
    }

    fn factors(&self) -> Result<Vec<Factor>> {
        let k = self.site.k();
        let n = self.torus.num_cells();
        Ok(self
            .region
            .indices(&self.torus)?
            .into_iter()
            .map(|j| Factor::new(k, n, &[j]))
            .collect())
    }

    /// `<a_R>` in `state`.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        self.check(state)?;
        let factors = self.factors()?;
        Ok(match state.representation() {
            Representation::Pure(psi) => psi.dotc(&self.apply_shifted(psi, 0.0, &factors)).re,
            Representation::Mixed(rho) => (0..rho.ncols())
                .map(|j| self.apply_shifted(&rho.column(j).into_owned(), 0.0, &factors)[j].re)
                .sum(),
        })
    }

    fn check(&self, state: &QuantumState) -> Result<()> {
        if state.torus() != &self.torus {
            return Err(Error::RegionMismatch("state and observable live on different tori".into()));
        }
        if state.k() != self.site.k() {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }
}

pub fn mean_field(a: &SiteObservable, region: &Region, torus: &Torus) -> Result<Observable> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    region.check_on(torus)?;
    if a.norm() > 1.0 + UNIT_TOL {
        return Err(Error::Quantum("single-site observable must have norm at most 1".into()));
    }
    Ok(Observable {
        torus: torus.clone(),
        region: region.clone(),
        site: a.clone(),
    })
}

/// `<(a_R - l)^2>` in `state`.
pub fn constraint_value(state: &QuantumState, a: &SiteObservable, region: &Region, l: f64) -> Result<f64> {
    if l.abs() > 1.0 {
        return Err(Error::Precondition(format!("target value {l} must satisfy |l| <= 1")));
    }
    let obs = mean_field(a, region, state.torus())?;
    obs.check(state)?;
    let factors = obs.factors()?;
    Ok(match state.representation() {
        Representation::Pure(psi) => obs.apply_shifted(psi, l, &factors).norm_squared(),
        Representation::Mixed(rho) => {
            let d = rho.ncols();
            let mut xr = DMatrix::zeros(d, d);
            for j in 0..d {
                xr.set_column(j, &obs.apply_shifted(&rho.column(j).into_owned(), l, &factors));
            }
            (0..d)
                .map(|j| obs.apply_shifted(&xr.column(j).into_owned(), l, &factors)[j].re)
                .sum()
        }
    })
}

/// `|| a_{R+v} - a_R ||` against `2 * deficit(R, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftBound {
    pub lhs: f64,
    pub deficit: Rational,
    /// `2 * deficit`.
    pub bound: f64,
}

impl ShiftBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound + 1e-9
    }
}

/// Exact operator norm of the mean-field change under translation, from a
/// dense eigensolve on the cells where the two regions differ (terms on the
/// overlap cancel).
pub fn shift_bound(a: &SiteObservable, region: &Region, v: &[i64], torus: &Torus) -> Result<ShiftBound> {
    mean_field(a, region, torus)?;
    let deficit = overlap_deficit(region, v, torus)?;
    let shifted = region.shift(torus, v)?;
    let entering = shifted.difference(region);
    let leaving = region.difference(&shifted);
    let m = region.len() as f64;
    let cells = entering.union(&leaving);
    let weights: Vec<f64> = cells
        .iter()
        .map(|x| if entering.contains(x) { 1.0 / m } else { -1.0 / m })
        .collect();
    let lhs = site_sum_norm(a.matrix(), &weights);
    Ok(ShiftBound {
        lhs,
        bound: 2.0 * deficit.to_f64().unwrap_or(f64::NAN),
        deficit,
    })
}

/// `|| [a_R, b_R] ||`. Only the on-site terms survive, leaving
/// `(1/|R|^2) sum_x [a, b]_x`.
pub fn commutator_norm(a: &SiteObservable, b: &SiteObservable, region: &Region, torus: &Torus) -> Result<f64> {
    mean_field(a, region, torus)?;
    mean_field(b, region, torus)?;
    let (ma, mb) = (a.matrix(), b.matrix());
    // i[a, b] is Hermitian with the same norm
    let comm = (ma * mb - mb * ma) * Complex64::new(0.0, 1.0);
    let m = region.len() as f64;
    Ok(site_sum_norm(&comm, &vec![1.0 / (m * m); region.len()]))
}

/// Checks: every constraint value at most ε/2 and every deficit at most ε/4
/// imply every constraint value of the translated state is at most ε.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRobustness {
    /// `values[j][o]` for region `j` and observable `o`.
    pub before: Vec<Vec<f64>>,
    pub after: Vec<Vec<f64>>,
    pub deficits: Vec<Rational>,
    pub premise: bool,
    pub deficits_ok: bool,
    pub conclusion: bool,
}

impl QuantumRobustness {
    pub fn holds(&self) -> bool {
        !(self.premise && self.deficits_ok) || self.conclusion
    }
}

pub fn quantum_shift_robustness(
    state: &QuantumState,
    observables: &[SiteObservable],
    partition: &Partition,
    l: &[Vec<f64>],
    eps: f64,
    v: &[i64],
) -> Result<QuantumRobustness> {
    if partition.torus() != state.torus() {
        return Err(Error::InvalidPartition("partition/torus mismatch".into()));
    }
    let regions = partition.regions();
    if l.len() != regions.len() || l.iter().any(|row| row.len() != observables.len()) {
        return Err(Error::DimensionMismatch {
            expected: regions.len() * observables.len(),
            got: l.iter().map(Vec::len).sum(),
        });
    }
    let shifted = state.shift(v)?;
    let values = |s: &QuantumState| -> Result<Vec<Vec<f64>>> {
        regions
            .iter()
            .zip(l)
            .map(|((_, r), row)| {
                observables
                    .iter()
                    .zip(row)
                    .map(|(a, &lv)| constraint_value(s, a, r, lv))
                    .collect()
            })
            .collect()
    };
    let before = values(state)?;
    let after = values(&shifted)?;
    let deficits = partition.deficits(v)?;
    let tol = 1e-12;
    let quarter = eps / 4.0;
    Ok(QuantumRobustness {
        premise: before.iter().flatten().all(|&x| x <= eps / 2.0 + tol),
        deficits_ok: deficits.iter().all(|d| d.to_f64().unwrap_or(f64::NAN) <= quarter + tol),
        conclusion: after.iter().flatten().all(|&x| x <= eps + tol),
        before,
        after,
        deficits,
    })
}
