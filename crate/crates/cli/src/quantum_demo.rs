//! The quantum lemma suite behind `puca quantum-demo`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use puca_core::lattice::{Alphabet, Cell, Configuration, Region, Torus};
use puca_core::macroscopic::{Partition, Rational};
use puca_core::quantum::{
    commutator_norm, constraint_value, haar_vector, implements_unitary, mean_field, quantum_shift_robustness,
    shift_bound, QuantumRule, QuantumState, SiteObservable,
};

use crate::{json, Done, Run, Usage};

const TOL: f64 = 1e-9;

#[derive(Serialize)]
struct ScaledValue {
    region_size: usize,
    value: f64,
    scaled: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ShiftBoundSummary {
    cases: usize,
    failures: usize,
    /// Largest lhs / deficit over cases with nonzero deficit.
    max_ratio: f64,
}

#[derive(Serialize)]
struct RobustnessSummary {
    family: &'static str,
    trials: usize,
    premise_met: usize,
    failures: usize,
}

#[derive(Serialize)]
struct ChannelCase {
    name: &'static str,
    choi_distance: f64,
    sampled_worst: f64,
    expect_match: bool,
    pass: bool,
}

#[derive(Serialize)]
struct QuantumReport {
    tool_version: String,
    seed: u64,
    epsilon: String,
    cells: usize,
    commutator_times_size: Vec<ScaledValue>,
    product_variance_times_size: Vec<ScaledValue>,
    shift_bounds: ShiftBoundSummary,
    robustness_deficit: String,
    robustness: Vec<RobustnessSummary>,
    channels: Vec<ChannelCase>,
    targets: &'static str,
    passed: bool,
}

fn ring_region(cells: std::ops::Range<usize>) -> Region {
    Region::new(cells.map(|x| Cell::new(vec![x])))
}

fn plus_state(torus: &Torus) -> Run<QuantumState> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(QuantumState::product(torus, &vec![DVector::from_element(2, h); torus.num_cells()])?)
}

/// `alpha |0...0> + beta |1...1>`.
fn cat_like(torus: &Torus, coeffs: &DVector<Complex64>) -> Run<QuantumState> {
    let d = 1usize << torus.num_cells();
    let mut psi = DVector::zeros(d);
    psi[0] = coeffs[0];
    psi[d - 1] = coeffs[1];
    Ok(QuantumState::pure(torus.clone(), 2, psi)?)
}

fn own_means(state: &QuantumState, obs: &[SiteObservable], partition: &Partition) -> Run<Vec<Vec<f64>>> {
    partition
        .regions()
        .iter()
        .map(|(_, r)| {
            obs.iter()
                .map(|a| Ok(mean_field(a, r, state.torus())?.expectation(state)?))
                .collect()
        })
        .collect()
}

pub fn run(cells: usize, epsilon: Rational, trials: usize, seed: u64) -> Run<Done> {
    if !(4..=10).contains(&cells) || !cells.is_multiple_of(2) {
        return Err(Usage("--cells must be an even number between 4 and 10".into()));
    }
    let eps = epsilon.to_f64().filter(|e| *e > 0.0 && *e <= 1.0).ok_or_else(|| Usage("--epsilon must lie in (0, 1]".into()))?;
    let ring = Torus::new(vec![cells])?;
    let (sx, sy, sz) = (SiteObservable::sx(), SiteObservable::sy(), SiteObservable::sz());

    let mut commutator = Vec::new();
    let mut variance = Vec::new();
    let plus = plus_state(&ring)?;
    for m in 2..=cells {
        let r = ring_region(0..m);
        let norm = commutator_norm(&sx, &sz, &r, &ring)?;
        commutator.push(ScaledValue {
            region_size: m,
            value: norm,
            scaled: norm * m as f64,
            pass: (norm * m as f64 - 2.0).abs() <= TOL,
        });
        let v = constraint_value(&plus, &sz, &r, 0.0)?;
        variance.push(ScaledValue {
            region_size: m,
            value: v,
            scaled: v * m as f64,
            pass: (v * m as f64 - 1.0).abs() <= TOL,
        });
    }

    let mut bounds = ShiftBoundSummary {
        cases: 0,
        failures: 0,
        max_ratio: 0.0,
    };
    for a in [&sx, &sy, &sz] {
        for m in 1..=cells {
            for v in 0..cells as i64 {
                let b = shift_bound(a, &ring_region(0..m), &[v], &ring)?;
                bounds.cases += 1;
                if !b.holds() {
                    bounds.failures += 1;
                }
                let d = b.deficit.to_f64().unwrap_or(0.0);
                if d > 0.0 {
                    bounds.max_ratio = bounds.max_ratio.max(b.lhs / d);
                }
            }
        }
    }

    // robustness: target {0, 1}, one region covering the rest, shift by one cell
    let target = ring_region(0..2);
    let partition = Partition::new(ring.clone(), target.clone(), vec![("rest".into(), target.complement(&ring))])?;
    let deficit = partition.deficits(&[1])?[0];
    let observables = [sx.clone(), sy.clone(), sz.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut robustness = Vec::new();
    for family in ["product", "cat"] {
        let mut summary = RobustnessSummary {
            family,
            trials,
            premise_met: 0,
            failures: 0,
        };
        for i in 0..trials {
            let state = if family == "product" {
                let sites: Vec<_> = (0..cells).map(|_| haar_vector(2, &mut rng)).collect();
                QuantumState::product(&ring, &sites)?
            } else if i == 0 {
                QuantumState::cat(&ring)?
            } else {
                cat_like(&ring, &haar_vector(2, &mut rng))?
            };
            let l = own_means(&state, &observables, &partition)?;
            let rec = quantum_shift_robustness(&state, &observables, &partition, &l, eps, &[1])?;
            if rec.premise && rec.deficits_ok {
                summary.premise_met += 1;
            }
            if !rec.holds() {
                summary.failures += 1;
            }
        }
        robustness.push(summary);
    }

    let mut channels = Vec::new();
    let small = Torus::new(vec![4, 2])?;
    let binary = Arc::new(Alphabet::binary());
    let complement = Configuration::uniform(small, binary.clone());
    let pair: Region = "(0,0) (1,0)".parse().map_err(|e| Usage(format!("{e}")))?;
    let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).map(|v| Complex64::new(v, 0.0));
    let xx = x.kronecker(&x);
    let id = DMatrix::<Complex64>::identity(4, 4);
    let identity_rule = QuantumRule::identity(binary, 2)?;
    let global_x = QuantumRule::global_x(2)?;
    for (name, rule, u, expect_match) in [
        ("identity rule, u = 1", &identity_rule, &id, true),
        ("global X rule, u = X (x) X", &global_x, &xx, true),
        ("global X rule, u = 1", &global_x, &id, false),
    ] {
        let check = implements_unitary(rule, &complement, &pair, u, 1, TOL, seed)?;
        channels.push(ChannelCase {
            name,
            choi_distance: check.choi_distance,
            sampled_worst: check.sampled_worst,
            expect_match,
            pass: check.passes == expect_match,
        });
    }

    let passed = commutator.iter().all(|c| c.pass)
        && variance.iter().all(|c| c.pass)
        && bounds.failures == 0
        && robustness.iter().all(|r| r.failures == 0)
        && channels.iter().all(|c| c.pass);
    let report = QuantumReport {
        tool_version: puca_core::VERSION.into(),
        seed,
        epsilon: epsilon.to_string(),
        cells,
        commutator_times_size: commutator,
        product_variance_times_size: variance,
        shift_bounds: bounds,
        robustness_deficit: deficit.to_string(),
        robustness,
        channels,
        targets: "robustness targets are each state's own mean-field expectations",
        passed,
    };
    Ok(Done::new(json(&report), passed))
}
