//! Symbol densities over a region partition, the macroscopic constraint,
//! the density-shift lemma and the constructive no-go witness.
//!
//! All arithmetic is exact (`Ratio<i64>`).

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, ParseError, Result};
use crate::lattice::text::write_config;
use crate::lattice::{parse_cell_list, Alphabet, Cell, Configuration, Region, Torus};
use crate::rules::BlockRule;
use crate::universality::{
    describe_action, induced_map, search_program_where, CellMap, Program, RegionMap, SearchBudget, SearchOutcome,
};

pub type Rational = Ratio<i64>;

/// Parses `3/8`, `1`, `0.125` or `-1/2`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return None;
        }
        let neg = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = frac.parse().ok()?;
        let r = Rational::from_integer(whole.abs()) + Rational::new(num, den);
        return Some(if neg { -r } else { r });
    }
    let r: Rational = text.parse().ok()?;
    Some(r)
}

/// Exact per-symbol densities `N_i / |R|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityVector {
    counts: Vec<i64>,
    size: i64,
}

impl DensityVector {
    pub fn get(&self, symbol: u8) -> Rational {
        Rational::new(self.counts[symbol as usize], self.size)
    }

    pub fn count(&self, symbol: u8) -> i64 {
        self.counts[symbol as usize]
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn values(&self) -> Vec<Rational> {
        (0..self.counts.len()).map(|i| self.get(i as u8)).collect()
    }

    /// `max_i |self_i - other_i|`.
    pub fn max_difference(&self, other: &DensityVector) -> Rational {
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

pub fn densities(c: &Configuration, region: &Region) -> Result<DensityVector> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut counts = vec![0i64; c.alphabet().size()];
    for i in region.indices(c.torus())? {
        counts[c.get_index(i) as usize] += 1;
    }
    Ok(DensityVector {
        counts,
        size: region.len() as i64,
    })
}

/// Fraction of `region` not covered by its own translate by `v`:
/// `1 - |shift(R, v) ∩ R| / |R|`.
pub fn overlap_deficit(region: &Region, v: &[i64], torus: &Torus) -> Result<Rational> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let overlap = region.shift(torus, v)?.intersection(region).len();
    Ok(Rational::one() - Rational::new(overlap as i64, region.len() as i64))
}

/// Named regions exactly covering the torus minus a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    torus: Torus,
    target: Region,
    regions: Vec<(String, Region)>,
}

impl Partition {
    pub fn new(torus: Torus, target: Region, regions: Vec<(String, Region)>) -> Result<Self> {
        target.check_on(&torus)?;
        let mut names = BTreeSet::new();
        let mut covered = Region::empty();
        for (name, region) in &regions {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidPartition(format!("duplicate region name {name:?}")));
            }
            if region.is_empty() {
                return Err(Error::InvalidPartition(format!("region {name:?} is empty")));
            }
            region.check_on(&torus)?;
            if let Some(c) = region.intersection(&target).iter().next() {
                return Err(Error::InvalidPartition(format!("region {name:?} contains target cell {c}")));
            }
            if let Some(c) = region.intersection(&covered).iter().next() {
                return Err(Error::InvalidPartition(format!("cell {c} of region {name:?} lies in another region")));
            }
            covered = covered.union(region);
        }
        if let Some(c) = target.complement(&torus).difference(&covered).iter().next() {
            return Err(Error::InvalidPartition(format!("cell {c} is not covered by any region")));
        }
        Ok(Partition { torus, target, regions })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn target(&self) -> &Region {
        &self.target
    }

    pub fn regions(&self) -> &[(String, Region)] {
        &self.regions
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn deficits(&self, v: &[i64]) -> Result<Vec<Rational>> {
        self.regions
            .iter()
            .map(|(_, r)| overlap_deficit(r, v, &self.torus))
            .collect()
    }

    /// Parses the partition file format:
    ///
    /// ```text
    /// torus: 8x8
    /// target: (0,0) (2,0)
    /// region top: (1,0) (3,0) ...
    /// ```
    ///
    /// The `torus:` line may be omitted when `torus` is supplied.
    pub fn parse(text: &str, torus: Option<&Torus>) -> Result<Self> {
        let mut file_torus: Option<Torus> = None;
        let mut target: Option<Region> = None;
        let mut regions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let indent = body.len() - body.trim_start().len();
            let Some((head, rest)) = body.split_once(':') else {
                return Err(ParseError::new(line, indent + 1, "expected 'torus:', 'target:' or 'region <name>:'").into());
            };
            let rest_col = head.len() + 2;
            let words: Vec<&str> = head.split_whitespace().collect();
            match words.as_slice() {
                ["torus"] => {
                    if file_torus.is_some() {
                        return Err(ParseError::new(line, indent + 1, "duplicate 'torus:'").into());
                    }
                    file_torus = Some(
                        rest.trim()
                            .parse()
                            .map_err(|e: Error| ParseError::new(line, rest_col, e.to_string()))?,
                    );
                }
                ["target"] => {
                    if target.is_some() {
                        return Err(ParseError::new(line, indent + 1, "duplicate 'target:'").into());
                    }
                    target = Some(Region::new(parse_cell_list(rest, line, rest_col)?));
                }
                ["region", name] => {
                    regions.push((name.to_string(), Region::new(parse_cell_list(rest, line, rest_col)?)));
                }
                _ => {
                    return Err(ParseError::new(line, indent + 1, format!("unrecognized statement {:?}", head.trim())).into())
                }
            }
        }
        let torus = match (file_torus, torus) {
            (Some(a), Some(b)) if &a != b => {
                return Err(Error::InvalidPartition(format!("partition is for torus {a}, expected {b}")))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b.clone(),
            (None, None) => return Err(Error::InvalidPartition("no torus given".into())),
        };
        let target = target.ok_or_else(|| Error::InvalidPartition("missing 'target:' line".into()))?;
        Partition::new(torus, target, regions)
    }

    /// Canonical text form accepted by [`Partition::parse`].
    pub fn emit(&self) -> String {
        let cells = |r: &Region| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = format!("torus: {}\ntarget: {}\n", self.torus, cells(&self.target));
        for (name, r) in &self.regions {
            out.push_str(&format!("region {name}: {}\n", cells(r)));
        }
        out
    }
}

/// Target densities `l[j][i]` for region `j` and symbol `i`, plus tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroConstraintSet {
    partition: Partition,
    alphabet: Alphabet,
    targets: Vec<Vec<Rational>>,
    epsilon: Rational,
}

fn check_epsilon(epsilon: Rational) -> Result<()> {
    if epsilon <= Rational::zero() || epsilon > Rational::one() {
        return Err(Error::InvalidConstraints(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    Ok(())
}

impl MacroConstraintSet {
    pub fn new(partition: Partition, alphabet: Alphabet, targets: Vec<Vec<Rational>>, epsilon: Rational) -> Result<Self> {
        check_epsilon(epsilon)?;
        if targets.len() != partition.regions.len() {
            return Err(Error::InvalidConstraints(format!(
                "{} target rows for {} regions",
                targets.len(),
                partition.regions.len()
            )));
        }
        for (row, (name, _)) in targets.iter().zip(&partition.regions) {
            if row.len() != alphabet.size() {
                return Err(Error::InvalidConstraints(format!("region {name:?} needs one target per symbol")));
            }
            if let Some(l) = row.iter().find(|l| **l < Rational::zero() || **l > Rational::one()) {
                return Err(Error::InvalidConstraints(format!("target {l} for region {name:?} is outside [0, 1]")));
            }
        }
        Ok(MacroConstraintSet {
            partition,
            alphabet,
            targets,
            epsilon,
        })
    }

    /// Targets equal to the exact densities of `c`.
    pub fn from_densities(partition: Partition, c: &Configuration, epsilon: Rational) -> Result<Self> {
        if c.torus() != partition.torus() {
            return Err(Error::InvalidPartition("partition/torus mismatch".into()));
        }
        let targets = partition
            .regions
            .iter()
            .map(|(_, r)| densities(c, r).map(|d| d.values()))
            .collect::<Result<Vec<_>>>()?;
        MacroConstraintSet::new(partition, c.alphabet().clone(), targets, epsilon)
    }

    /// Parses `l <region> <symbol> = <rational>` and `epsilon = <rational>`
    /// lines. Every (region, symbol) pair must be given. `epsilon`, when
    /// supplied, overrides the file's value.
    pub fn parse(text: &str, partition: Partition, alphabet: Alphabet, epsilon: Option<Rational>) -> Result<Self> {
        let mut targets: Vec<Vec<Option<Rational>>> = vec![vec![None; alphabet.size()]; partition.regions.len()];
        let mut file_eps = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let err = |msg: String| -> Error { ParseError::new(line, 1, msg).into() };
            let Some((lhs, rhs)) = body.split_once('=') else {
                return Err(err("expected '='".into()));
            };
            let value = parse_rational(rhs).ok_or_else(|| err(format!("invalid rational {:?}", rhs.trim())))?;
            let words: Vec<&str> = lhs.split_whitespace().collect();
            match words.as_slice() {
                ["epsilon"] => {
                    if file_eps.replace(value).is_some() {
                        return Err(err("duplicate epsilon".into()));
                    }
                }
                ["l", region, symbol] => {
                    let j = partition
                        .regions
                        .iter()
                        .position(|(n, _)| n == region)
                        .ok_or_else(|| err(format!("unknown region {region:?}")))?;
                    let s = alphabet
                        .index_of(symbol)
                        .ok_or_else(|| err(format!("unknown symbol {symbol:?}")))?;
                    if targets[j][s as usize].replace(value).is_some() {
                        return Err(err(format!("duplicate target for region {region:?} symbol {symbol:?}")));
                    }
                }
                _ => return Err(err(format!("unrecognized statement {:?}", lhs.trim()))),
            }
        }
        let epsilon = epsilon
            .or(file_eps)
            .ok_or_else(|| Error::InvalidConstraints("no epsilon given".into()))?;
        let mut full = Vec::with_capacity(targets.len());
        for (row, (name, _)) in targets.into_iter().zip(&partition.regions) {
            let mut out = Vec::with_capacity(row.len());
            for (s, l) in row.into_iter().enumerate() {
                out.push(l.ok_or_else(|| {
                    Error::InvalidConstraints(format!(
                        "missing target for region {name:?} symbol {:?}",
                        alphabet.label(s as u8)
                    ))
                })?);
            }
            full.push(out);
        }
        MacroConstraintSet::new(partition, alphabet, full, epsilon)
    }

    pub fn emit(&self) -> String {
        let mut out = format!("epsilon = {}\n", self.epsilon);
        for ((name, _), row) in self.partition.regions.iter().zip(&self.targets) {
            for (s, l) in row.iter().enumerate() {
                out.push_str(&format!("l {name} {} = {l}\n", self.alphabet.label(s as u8)));
            }
        }
        out
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn targets(&self) -> &[Vec<Rational>] {
        &self.targets
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(MacroConstraintSet { epsilon, ..self.clone() })
    }

    fn check(&self, c: &Configuration) -> Result<()> {
        if c.torus() != self.partition.torus() {
            return Err(Error::InvalidPartition(format!(
                "partition is for torus {}, configuration lives on {}",
                self.partition.torus(),
                c.torus()
            )));
        }
        if c.alphabet().size() != self.alphabet.size() {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// `max_{i,j} |n^i_j(c) - l^i_j|`, with the maximizing (region, symbol).
    pub fn deviation(&self, c: &Configuration) -> Result<(Rational, usize, u8)> {
        self.check(c)?;
        let mut worst = (Rational::zero(), 0, 0);
        for (j, ((_, r), row)) in self.partition.regions.iter().zip(&self.targets).enumerate() {
            let d = densities(c, r)?;
            for (s, l) in row.iter().enumerate() {
                let dev = (d.get(s as u8) - l).abs();
                if dev > worst.0 {
                    worst = (dev, j, s as u8);
                }
            }
        }
        Ok(worst)
    }
}

/// Whether every `|n^i_j(c) - l^i_j| <= slack`.
pub fn satisfies(c: &Configuration, constraints: &MacroConstraintSet, slack: Rational) -> Result<bool> {
    Ok(constraints.deviation(c)?.0 <= slack)
}

/// A failure of the shift lemma; never expected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaViolation {
    pub region: String,
    pub symbol: u8,
    pub before: Rational,
    pub after: Rational,
    pub target: Rational,
}

/// Outcome of checking: constraints at ε/2 and deficits at most ε/2 imply
/// the shifted configuration meets the constraints at ε.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRobustness {
    pub satisfies_half: bool,
    pub max_deficit: Rational,
    pub satisfies_shifted: bool,
    /// Largest density change over all regions and symbols.
    pub max_density_change: Rational,
    pub violation: Option<LemmaViolation>,
}

impl ShiftRobustness {
    pub fn premise(&self, epsilon: Rational) -> bool {
        self.satisfies_half && self.max_deficit <= epsilon / 2
    }

    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn shift_robustness(c: &Configuration, constraints: &MacroConstraintSet, v: &[i64]) -> Result<ShiftRobustness> {
    let eps = constraints.epsilon();
    let shifted = c.shift(v)?;
    let satisfies_half = satisfies(c, constraints, eps / 2)?;
    let deficits = constraints.partition().deficits(v)?;
    let max_deficit = deficits.iter().copied().max().unwrap_or_else(Rational::zero);
    let satisfies_shifted = satisfies(&shifted, constraints, eps)?;
    let mut max_density_change = Rational::zero();
    for (_, r) in constraints.partition().regions() {
        let change = densities(&shifted, r)?.max_difference(&densities(c, r)?);
        max_density_change = max_density_change.max(change);
    }
    let mut record = ShiftRobustness {
        satisfies_half,
        max_deficit,
        satisfies_shifted,
        max_density_change,
        violation: None,
    };
    if record.premise(eps) && !satisfies_shifted {
        let (_, j, s) = constraints.deviation(&shifted)?;
        let (name, region) = &constraints.partition().regions()[j];
        record.violation = Some(LemmaViolation {
            region: name.clone(),
            symbol: s,
            before: densities(c, region)?.get(s),
            after: densities(&shifted, region)?.get(s),
            target: constraints.targets()[j][s as usize],
        });
    }
    Ok(record)
}

/// Where the target densities of a witness search come from.
#[derive(Debug, Clone)]
pub enum TargetDensities {
    /// Fixed in advance; candidates are filtered by the constraint at ε/2.
    Given(MacroConstraintSet),
    /// Set to the exact densities of the program found.
    FromProgram { partition: Partition, epsilon: Rational },
}

impl TargetDensities {
    fn partition(&self) -> &Partition {
        match self {
            TargetDensities::Given(cs) => cs.partition(),
            TargetDensities::FromProgram { partition, .. } => partition,
        }
    }

    fn epsilon(&self) -> Rational {
        match self {
            TargetDensities::Given(cs) => cs.epsilon(),
            TargetDensities::FromProgram { epsilon, .. } => *epsilon,
        }
    }
}

/// A program `c'` implementing (NOT on `a`, ID on `a+v`) and its translate
/// `c'' = shift(c', v)`, which meet the same macroscopic constraints yet act
/// as NOT on `a+v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoGoWitness {
    pub constraints: MacroConstraintSet,
    pub v: Vec<i64>,
    /// The cell `a`.
    pub anchor: Cell,
    pub beta: RegionMap,
    pub program: Program,
    pub shifted: Program,
    /// Map induced by `c'` on the target.
    pub induced: RegionMap,
    /// Map induced by `c''` on the shifted target.
    pub shifted_induced: RegionMap,
    /// `a + v`, where the two maps disagree.
    pub conflict: Cell,
    pub candidates_tested: u64,
    pub torus_only: bool,
}

/// Independent re-check of each witness claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessChecks {
    pub deficits_within_half_epsilon: bool,
    pub program_satisfies_half_epsilon: bool,
    pub shifted_satisfies_epsilon: bool,
    pub program_implements_beta: bool,
    pub shifted_implements_conjugate: bool,
    pub program_is_id_at_conflict: bool,
    pub shifted_is_not_at_conflict: bool,
}

impl WitnessChecks {
    pub fn all(&self) -> bool {
        self.deficits_within_half_epsilon
            && self.program_satisfies_half_epsilon
            && self.shifted_satisfies_epsilon
            && self.program_implements_beta
            && self.shifted_implements_conjugate
            && self.program_is_id_at_conflict
            && self.shifted_is_not_at_conflict
    }
}

impl NoGoWitness {
    /// Recomputes every claim from the two configurations alone.
    pub fn verify(&self, rule: &BlockRule) -> Result<WitnessChecks> {
        let cs = &self.constraints;
        let eps = cs.epsilon();
        let torus = cs.partition().torus();
        let expected_shift = self.program.config().shift(&self.v)?;
        let target = cs.partition().target();
        let shifted_target = target.shift(torus, &self.v)?;
        if self.shifted.target() != &shifted_target || self.shifted.time() != self.program.time() {
            return Err(Error::Precondition("shifted program does not match the translate of c'".into()));
        }
        let patched_shift = Program::new(&expected_shift, shifted_target, self.program.time())?;
        if patched_shift != self.shifted {
            return Err(Error::Precondition("shifted program does not match the translate of c'".into()));
        }
        let induced = induced_map(rule, &self.program)?.map;
        let shifted_induced = induced_map(rule, &self.shifted)?.map;
        let conjugate = self.beta.conjugate(torus, &self.v)?;
        let is = |map: &RegionMap, m: CellMap| {
            map.cell_action(&self.conflict).as_deref() == Some(&[m.apply(0), m.apply(1)][..])
        };
        Ok(WitnessChecks {
            deficits_within_half_epsilon: cs.partition().deficits(&self.v)?.iter().all(|d| *d <= eps / 2),
            program_satisfies_half_epsilon: satisfies(self.program.config(), cs, eps / 2)?,
            shifted_satisfies_epsilon: satisfies(&expected_shift, cs, eps)?,
            program_implements_beta: induced == self.beta && self.program.target() == target,
            shifted_implements_conjugate: shifted_induced == conjugate,
            program_is_id_at_conflict: is(&induced, CellMap::Id),
            shifted_is_not_at_conflict: is(&shifted_induced, CellMap::Not),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoGoOutcome {
    Found(Box<NoGoWitness>),
    /// No program within budget; not a refutation.
    NotFound { candidates_tested: u64, exhausted: bool },
}

/// The anchor `a` of a target pair `{a, a+v}`.
pub fn target_anchor(target: &Region, v: &[i64], torus: &Torus) -> Result<Cell> {
    if target.len() != 2 {
        return Err(Error::Precondition("the target must be a pair of cells {a, a+v}".into()));
    }
    target
        .iter()
        .find(|a| target.contains(&torus.translate(a, v)) && &torus.translate(a, v) != *a)
        .cloned()
        .ok_or_else(|| Error::Precondition("the target is not of the form {a, a+v}".into()))
}

/// Searches for `c'` implementing (NOT on `a`, ID on `a+v`) within `budget`
/// and builds the witness pair.
pub fn no_go_witness(
    rule: &BlockRule,
    densities_from: &TargetDensities,
    v: &[i64],
    budget: &SearchBudget,
) -> Result<NoGoOutcome> {
    let partition = densities_from.partition();
    let torus = partition.torus();
    let target = partition.target();
    let eps = densities_from.epsilon();
    check_epsilon(eps)?;
    if rule.alphabet().size() != 2 {
        return Err(Error::Precondition("the no-go witness needs a binary alphabet".into()));
    }
    torus.check_vector(v)?;
    let anchor = target_anchor(target, v, torus)?;
    for ((name, _), d) in partition.regions().iter().zip(partition.deficits(v)?) {
        if d > eps / 2 {
            return Err(Error::Precondition(format!(
                "region {name:?} has overlap deficit {d}, above epsilon/2 = {}",
                eps / 2
            )));
        }
    }
    let maps: Vec<CellMap> = target
        .iter()
        .map(|c| if *c == anchor { CellMap::Not } else { CellMap::Id })
        .collect();
    let beta = RegionMap::cellwise(target.clone(), rule.alphabet(), &maps)?;
    let result = match densities_from {
        TargetDensities::Given(cs) => {
            if cs.alphabet().size() != rule.alphabet().size() {
                return Err(Error::AlphabetMismatch);
            }
            let half = eps / 2;
            let accept = |c: &Configuration| satisfies(c, cs, half).unwrap_or(false);
            search_program_where(rule, torus, target, &beta, budget, &accept)?
        }
        TargetDensities::FromProgram { .. } => search_program_where(rule, torus, target, &beta, budget, &|_| true)?,
    };
    let (program, torus_only) = match result.outcome {
        SearchOutcome::NotFound { exhausted } => {
            return Ok(NoGoOutcome::NotFound {
                candidates_tested: result.candidates_tested,
                exhausted,
            })
        }
        SearchOutcome::Found { program, torus_only, .. } => (program, torus_only),
    };
    let constraints = match densities_from {
        TargetDensities::Given(cs) => cs.clone(),
        TargetDensities::FromProgram { partition, epsilon } => {
            MacroConstraintSet::from_densities(partition.clone(), program.config(), *epsilon)?
        }
    };
    let shifted = program.shifted(v)?;
    let induced = induced_map(rule, &program)?;
    let shifted_induced = induced_map(rule, &shifted)?;
    Ok(NoGoOutcome::Found(Box::new(NoGoWitness {
        constraints,
        v: v.to_vec(),
        conflict: torus.translate(&anchor, v),
        anchor,
        beta,
        program,
        shifted,
        induced: induced.map,
        shifted_induced: shifted_induced.map,
        candidates_tested: result.candidates_tested,
        torus_only: torus_only || induced.torus_only || shifted_induced.torus_only,
    })))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionReport {
    pub name: String,
    pub cells: usize,
    pub deficit: String,
    pub targets: Vec<String>,
    pub program_densities: Vec<String>,
    pub shifted_densities: Vec<String>,
}

/// Deterministic, machine-readable witness document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub tool_version: String,
    pub rule_hash: String,
    pub torus: String,
    pub epsilon: String,
    pub shift: Vec<i64>,
    pub target: Vec<String>,
    pub beta: Vec<String>,
    pub regions: Vec<RegionReport>,
    pub time: usize,
    pub candidates_tested: u64,
    pub program: String,
    pub program_induced_map: Vec<String>,
    pub shifted_target: Vec<String>,
    pub shifted_program: String,
    pub shifted_induced_map: Vec<String>,
    pub conflicting_cell: String,
    pub program_action_at_conflict: String,
    pub shifted_action_at_conflict: String,
    pub torus_only: bool,
    pub checks: WitnessChecks,
    pub verified: bool,
    pub note: String,
}

impl WitnessReport {
    pub fn new(rule: &BlockRule, w: &NoGoWitness) -> Result<Self> {
        let cs = &w.constraints;
        let alphabet = rule.alphabet();
        let checks = w.verify(rule)?;
        let strings = |v: Vec<Rational>| v.iter().map(|r| r.to_string()).collect::<Vec<_>>();
        let cells = |r: &Region| r.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let action = |m: &RegionMap| {
            m.cell_action(&w.conflict)
                .map(|a| describe_action(&a, alphabet))
                .unwrap_or_else(|| "not a single-cell map".into())
        };
        let mut regions = Vec::new();
        for ((name, r), (row, d)) in cs
            .partition()
            .regions()
            .iter()
            .zip(cs.targets().iter().zip(cs.partition().deficits(&w.v)?))
        {
            regions.push(RegionReport {
                name: name.clone(),
                cells: r.len(),
                deficit: d.to_string(),
                targets: strings(row.clone()),
                program_densities: strings(densities(w.program.config(), r)?.values()),
                shifted_densities: strings(densities(w.shifted.config(), r)?.values()),
            });
        }
        Ok(WitnessReport {
            tool_version: crate::VERSION.into(),
            rule_hash: rule.hash(),
            torus: cs.partition().torus().to_string(),
            epsilon: cs.epsilon().to_string(),
            shift: w.v.clone(),
            target: cells(w.program.target()),
            beta: w.beta.render_table(alphabet),
            regions,
            time: w.program.time(),
            candidates_tested: w.candidates_tested,
            program: write_config(w.program.config()),
            program_induced_map: w.induced.render_table(alphabet),
            shifted_target: cells(w.shifted.target()),
            shifted_program: write_config(w.shifted.config()),
            shifted_induced_map: w.shifted_induced.render_table(alphabet),
            conflicting_cell: w.conflict.to_string(),
            program_action_at_conflict: action(&w.induced),
            shifted_action_at_conflict: action(&w.shifted_induced),
            torus_only: w.torus_only,
            verified: checks.all(),
            checks,
            note: "on the torus the translate of c' is a total configuration, so the boundary fill-in \
                   of the infinite-lattice argument does not arise"
                .into(),
        })
    }
}

impl fmt::Display for NoGoWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "c' ({}):", self.program.target())?;
        write!(f, "{}", self.program)?;
        writeln!(f, "c'' ({}):", self.shifted.target())?;
        write!(f, "{}", self.shifted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn t8() -> Torus {
        Torus::new(vec![8, 8]).unwrap()
    }

    fn row_partition(torus: &Torus, target: &Region) -> Partition {
        let regions = (0..torus.dims()[1])
            .map(|y| {
                let row = Region::rect(torus, &[0, y], &[torus.dims()[0], 1]).unwrap();
                (format!("row{y}"), row.difference(target))
            })
            .collect();
        Partition::new(torus.clone(), target.clone(), regions).unwrap()
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2"), Some(r(1, 2)));
        assert_eq!(parse_rational(" 0.125 "), Some(r(1, 8)));
        assert_eq!(parse_rational("1"), Some(r(1, 1)));
        assert_eq!(parse_rational("-0.5"), Some(r(-1, 2)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn density_examples() {
        let t = t8();
        let c = Configuration::uniform(t.clone(), Arc::new(Alphabet::binary()));
        let region = Region::rect(&t, &[0, 0], &[8, 1]).unwrap();
        assert_eq!(densities(&c, &region).unwrap().values(), vec![r(1, 1), r(0, 1)]);
        let c = c.with_value(&Cell::from([0, 0]), 1).unwrap().with_value(&Cell::from([1, 0]), 1).unwrap();
        let square = Region::rect(&t, &[0, 0], &[2, 2]).unwrap();
        assert_eq!(densities(&c, &square).unwrap().values(), vec![r(1, 2), r(1, 2)]);
        assert!(densities(&c, &Region::empty()).is_err());
    }

    #[test]
    fn deficit_examples() {
        let big = Torus::new(vec![32, 32]).unwrap();
        let square = Region::rect(&big, &[0, 0], &[10, 10]).unwrap();
        assert_eq!(overlap_deficit(&square, &[0, 0], &big).unwrap(), r(0, 1));
        assert_eq!(overlap_deficit(&square, &[1, 0], &big).unwrap(), r(1, 10));
        let row = Region::rect(&big, &[0, 0], &[10, 1]).unwrap();
        assert_eq!(overlap_deficit(&row, &[2, 0], &big).unwrap(), r(1, 5));
        assert_eq!(overlap_deficit(&row, &[0, 1], &big).unwrap(), r(1, 1));
        // a full row of the torus is invariant under horizontal shifts
        let full_row = Region::rect(&t8(), &[0, 3], &[8, 1]).unwrap();
        assert_eq!(overlap_deficit(&full_row, &[2, 0], &t8()).unwrap(), r(0, 1));
    }

    #[test]
    fn partition_validation() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let p = row_partition(&t, &target);
        assert_eq!(Partition::parse(&p.emit(), None).unwrap(), p);
        assert_eq!(Partition::parse(&p.emit(), Some(&t)).unwrap(), p);
        assert!(Partition::parse(&p.emit(), Some(&Torus::new(vec![4, 4]).unwrap())).is_err());

        let mut regions = p.regions().to_vec();
        regions.pop();
        assert!(matches!(
            Partition::new(t.clone(), target.clone(), regions.clone()),
            Err(Error::InvalidPartition(_))
        ));
        regions.push(("dup".into(), p.regions()[0].1.clone()));
        assert!(Partition::new(t.clone(), target.clone(), regions).is_err());
        let mut with_target = p.regions().to_vec();
        with_target[0].1 = with_target[0].1.union(&target);
        assert!(Partition::new(t, target, with_target).is_err());

        let err = Partition::parse("target: (0,0)\nbogus line\n", Some(&t8())).unwrap_err();
        assert!(matches!(err, Error::Parse(ParseError { line: 2, .. })));
    }

    #[test]
    fn satisfies_examples() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let p = row_partition(&t, &target);
        let c = Configuration::uniform(t.clone(), Arc::new(Alphabet::binary()))
            .with_value(&Cell::from([1, 1]), 1)
            .unwrap();
        let own = MacroConstraintSet::from_densities(p.clone(), &c, r(1, 10)).unwrap();
        assert!(satisfies(&c, &own, r(1, 1000)).unwrap());
        assert!(satisfies(&c, &own, r(0, 1)).unwrap());

        let uniform = Configuration::uniform(t.clone(), Arc::new(Alphabet::binary()));
        let zero_q = vec![vec![r(0, 1), r(1, 1)]; p.regions().len()];
        let cs = MacroConstraintSet::new(p.clone(), Alphabet::binary(), zero_q, r(1, 10)).unwrap();
        assert!(!satisfies(&uniform, &cs, r(1, 10)).unwrap());

        let half = vec![vec![r(1, 2), r(1, 2)]; p.regions().len()];
        let cs = MacroConstraintSet::new(p.clone(), Alphabet::binary(), half, r(1, 10)).unwrap();
        let stripes = Configuration::from_values(
            t.clone(),
            Arc::new(Alphabet::binary()),
            &(0..64).map(|i| (i % 2) as u8).collect::<Vec<_>>(),
        )
        .unwrap();
        // row 0 loses its two even target cells, so only full rows are exactly half
        let (dev, j, _) = cs.deviation(&stripes).unwrap();
        assert_eq!(j, 0);
        assert_eq!(dev, r(1, 6));
        let bigger = Torus::new(vec![4, 4]).unwrap();
        let other = Configuration::uniform(bigger, Arc::new(Alphabet::binary()));
        assert!(satisfies(&other, &cs, r(1, 1)).is_err());
    }

    #[test]
    fn constraint_file_round_trip() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let p = row_partition(&t, &target);
        let c = Configuration::uniform(t, Arc::new(Alphabet::binary()))
            .with_value(&Cell::from([0, 1]), 1)
            .unwrap();
        let cs = MacroConstraintSet::from_densities(p.clone(), &c, r(1, 2)).unwrap();
        let back = MacroConstraintSet::parse(&cs.emit(), p.clone(), Alphabet::binary(), None).unwrap();
        assert_eq!(back, cs);
        let over = MacroConstraintSet::parse(&cs.emit(), p.clone(), Alphabet::binary(), Some(r(1, 4))).unwrap();
        assert_eq!(over.epsilon(), r(1, 4));
        let missing: String = cs.emit().lines().skip(2).map(|l| format!("{l}\n")).collect();
        assert!(MacroConstraintSet::parse(&missing, p.clone(), Alphabet::binary(), None).is_err());
        assert!(MacroConstraintSet::parse("epsilon = 2\n", p, Alphabet::binary(), None).is_err());
    }

    #[test]
    fn shift_robustness_adversarial_boundary_column() {
        // R = 4x8 block on a 16x8 torus, v = (2,0): deficit 1/2 = eps/2 for eps = 1.
        // All ones sit in the two columns that leave R.
        let t = Torus::new(vec![16, 8]).unwrap();
        let r_block = Region::rect(&t, &[0, 0], &[4, 8]).unwrap();
        let rest = r_block.complement(&t);
        let p = Partition::new(t.clone(), Region::empty(), vec![("r".into(), r_block), ("rest".into(), rest)]).unwrap();
        let ones: Vec<Cell> = (0..8).flat_map(|y| [2, 3].map(|x| Cell::from([x, y]))).collect();
        let c = Configuration::from_assignments(t.clone(), Arc::new(Alphabet::binary()), ones.iter().map(|c| (c, 1)))
            .unwrap();
        let cs = MacroConstraintSet::from_densities(p, &c, r(1, 1)).unwrap();
        let rec = shift_robustness(&c, &cs, &[2, 0]).unwrap();
        assert_eq!(rec.max_deficit, r(1, 2));
        assert_eq!(rec.max_density_change, r(1, 2));
        assert!(rec.premise(r(1, 1)));
        assert!(rec.satisfies_shifted && rec.holds());
    }

    #[test]
    fn shift_by_zero_is_trivial() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let c = Configuration::uniform(t.clone(), Arc::new(Alphabet::binary()))
            .with_value(&Cell::from([4, 4]), 1)
            .unwrap();
        let cs = MacroConstraintSet::from_densities(row_partition(&t, &target), &c, r(1, 2)).unwrap();
        let rec = shift_robustness(&c, &cs, &[0, 0]).unwrap();
        assert_eq!(rec.max_density_change, r(0, 1));
        assert!(rec.satisfies_half && rec.satisfies_shifted && rec.holds());
    }

    #[test]
    fn identity_rule_has_no_witness() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let rule = BlockRule::identity(Arc::new(Alphabet::binary()), 2).unwrap();
        let from = TargetDensities::FromProgram {
            partition: row_partition(&t, &target),
            epsilon: r(1, 2),
        };
        let budget = SearchBudget::light_cone(&t, &target, 1, u64::MAX).unwrap();
        let out = no_go_witness(&rule, &from, &[2, 0], &budget).unwrap();
        assert!(matches!(out, NoGoOutcome::NotFound { exhausted: true, .. }));
    }

    #[test]
    fn controlled_not_rule_yields_verified_witness() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        // flip offset (0,0) iff offset (0,1) holds a 1
        let rule = BlockRule::from_fns(
            Arc::new(Alphabet::binary()),
            2,
            |w: &[u8]| {
                let mut o = w.to_vec();
                o[0] ^= w[2];
                o
            },
            |w: &[u8]| {
                let mut o = w.to_vec();
                o[0] ^= w[2];
                o
            },
        )
        .unwrap();
        let from = TargetDensities::FromProgram {
            partition: row_partition(&t, &target),
            epsilon: r(1, 2),
        };
        let budget = SearchBudget::light_cone(&t, &target, 1, u64::MAX).unwrap();
        let NoGoOutcome::Found(w) = no_go_witness(&rule, &from, &[2, 0], &budget).unwrap() else {
            panic!("expected a witness");
        };
        assert_eq!(w.anchor, Cell::from([0, 0]));
        assert_eq!(w.conflict, Cell::from([2, 0]));
        assert_eq!(w.program.time(), 1);
        assert!(w.verify(&rule).unwrap().all());
        let report = WitnessReport::new(&rule, &w).unwrap();
        assert_eq!(report.program_action_at_conflict, "ID");
        assert_eq!(report.shifted_action_at_conflict, "NOT");

        // tampering with c'' is caught
        let mut bad = (*w).clone();
        bad.shifted = w.program.clone();
        assert!(bad.verify(&rule).is_err());
    }

    #[test]
    fn witness_rejects_large_deficits() {
        let t = t8();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let rest = target.complement(&t);
        let left: Region = Region::new(rest.iter().filter(|c| c.coords()[0] < 4).cloned());
        let right = rest.difference(&left);
        let p = Partition::new(t.clone(), target.clone(), vec![("left".into(), left), ("right".into(), right)]).unwrap();
        let rule = BlockRule::complement(2).unwrap();
        let from = TargetDensities::FromProgram { partition: p, epsilon: r(1, 2) };
        let budget = SearchBudget::light_cone(&t, &target, 1, 10).unwrap();
        assert!(matches!(no_go_witness(&rule, &from, &[2, 0], &budget), Err(Error::Precondition(_))));
    }
}
