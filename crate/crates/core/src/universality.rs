//! Programs, induced maps and brute-force program search.
//!
//! A program is a configuration of everything outside a target region plus a
//! running time `t`. It implements a map `beta` on the target when evolving
//! every patched configuration `(c, r)` for `t` steps and restricting to the
//! target yields `beta(r)`, for all `k^|T|` target words `r`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{light_cone, Stepper};
use crate::error::{Error, Result};
use crate::lattice::text::write_config;
use crate::lattice::{decode_word, encode_word, Alphabet, Cell, Configuration, RegionConfig, Region, Torus};
use crate::rules::BlockRule;

/// Largest number of target words an induced map may enumerate.
pub const MAX_REGION_WORDS: u64 = 1 << 20;
/// Largest number of halo configurations a search may enumerate.
pub const MAX_HALO_CANDIDATES: u128 = 1 << 24;

fn word_count(k: usize, len: usize) -> Result<u64> {
    let mut n: u64 = 1;
    for _ in 0..len {
        n = n.saturating_mul(k as u64);
    }
    if n > MAX_REGION_WORDS {
        return Err(Error::TooLarge(format!(
            "{k}^{len} region words exceed the cap of {MAX_REGION_WORDS}"
        )));
    }
    Ok(n)
}

/// A map acting on a single cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellMap {
    Id,
    /// Binary complement.
    Not,
    Const(u8),
}

impl CellMap {
    pub fn apply(self, s: u8) -> u8 {
        match self {
            CellMap::Id => s,
            CellMap::Not => 1 - s,
            CellMap::Const(c) => c,
        }
    }

    pub fn name(self, alphabet: &Alphabet) -> String {
        match self {
            CellMap::Id => "ID".into(),
            CellMap::Not => "NOT".into(),
            CellMap::Const(c) => format!("CONST{}", alphabet.label(c)),
        }
    }

    pub fn parse(name: &str, alphabet: &Alphabet) -> Result<CellMap> {
        let name = name.trim();
        match name.to_ascii_uppercase().as_str() {
            "ID" => Ok(CellMap::Id),
            "NOT" if alphabet.size() == 2 => Ok(CellMap::Not),
            "NOT" => Err(Error::Precondition("NOT is only defined for binary alphabets".into())),
            upper if upper.starts_with("CONST") => {
                let label = &name[5..];
                alphabet
                    .index_of(label)
                    .map(CellMap::Const)
                    .ok_or_else(|| Error::Precondition(format!("unknown symbol {label:?} in {name}")))
            }
            _ => Err(Error::Precondition(format!("unknown cell map {name:?}"))),
        }
    }

    /// All four maps on one binary cell, in the order ID, NOT, CONST0, CONST1.
    pub fn binary_maps() -> [CellMap; 4] {
        [CellMap::Id, CellMap::Not, CellMap::Const(0), CellMap::Const(1)]
    }
}

/// A total map on the words of a region. Word positions follow the region's
/// canonical cell order; table index `w` is the base-k word, first cell most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionMap {
    region: Region,
    k: usize,
    table: Vec<u32>,
}

impl RegionMap {
    pub fn new(region: Region, k: usize, table: Vec<u32>) -> Result<Self> {
        let n = word_count(k, region.len())?;
        if table.len() as u64 != n {
            return Err(Error::DimensionMismatch {
                expected: n as usize,
                got: table.len(),
            });
        }
        if let Some(bad) = table.iter().find(|&&w| w as u64 >= n) {
            return Err(Error::TooLarge(format!("image word {bad} out of range")));
        }
        Ok(RegionMap { region, k, table })
    }

    pub fn identity(region: Region, k: usize) -> Result<Self> {
        let n = word_count(k, region.len())?;
        RegionMap::new(region, k, (0..n as u32).collect())
    }

    /// Independent maps on each cell, in canonical cell order.
    pub fn cellwise(region: Region, alphabet: &Alphabet, maps: &[CellMap]) -> Result<Self> {
        if maps.len() != region.len() {
            return Err(Error::DimensionMismatch {
                expected: region.len(),
                got: maps.len(),
            });
        }
        let k = alphabet.size();
        for m in maps {
            match *m {
                CellMap::Not if k != 2 => {
                    return Err(Error::Precondition("NOT is only defined for binary alphabets".into()))
                }
                CellMap::Const(c) => {
                    alphabet.check_symbol(c as usize)?;
                }
                _ => {}
            }
        }
        let n = word_count(k, region.len())?;
        let table = (0..n)
            .map(|w| {
                let vals = decode_word(w, k, region.len());
                let out: Vec<u8> = vals.iter().zip(maps).map(|(&s, m)| m.apply(s)).collect();
                encode_word(&out, k) as u32
            })
            .collect();
        RegionMap::new(region, k, table)
    }

    /// Parses `NOT`, `ID`, `CONST1` (applied to every cell) or a comma
    /// separated per-cell list such as `NOT,ID`.
    pub fn parse_cellwise(spec: &str, region: Region, alphabet: &Alphabet) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').collect();
        let maps = if parts.len() == 1 {
            vec![CellMap::parse(parts[0], alphabet)?; region.len()]
        } else {
            parts
                .iter()
                .map(|p| CellMap::parse(p, alphabet))
                .collect::<Result<Vec<_>>>()?
        };
        RegionMap::cellwise(region, alphabet, &maps)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn apply(&self, word: u32) -> u32 {
        self.table[word as usize]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.table.len()];
        self.table.iter().all(|&w| !std::mem::replace(&mut seen[w as usize], true))
    }

    /// `shift ∘ self ∘ shift⁻¹`, acting on the shifted region.
    pub fn conjugate(&self, torus: &Torus, v: &[i64]) -> Result<RegionMap> {
        let shifted = self.region.shift(torus, v)?;
        let len = self.region.len();
        // position in `shifted` of (i-th cell of region) + v
        let to_new: Vec<usize> = self
            .region
            .iter()
            .map(|c| shifted.position(&torus.translate(c, v)).expect("shift is a bijection"))
            .collect();
        let table = (0..self.table.len() as u64)
            .map(|w_new| {
                let new_vals = decode_word(w_new, self.k, len);
                let old_in: Vec<u8> = to_new.iter().map(|&p| new_vals[p]).collect();
                let old_out = decode_word(self.apply(encode_word(&old_in, self.k) as u32) as u64, self.k, len);
                let mut new_out = vec![0u8; len];
                for (i, &p) in to_new.iter().enumerate() {
                    new_out[p] = old_out[i];
                }
                encode_word(&new_out, self.k) as u32
            })
            .collect();
        RegionMap::new(shifted, self.k, table)
    }

    /// The single-cell action at `cell`, if the output there depends only on
    /// the input there. Returned as the image of each symbol.
    pub fn cell_action(&self, cell: &Cell) -> Option<Vec<u8>> {
        let pos = self.region.position(cell)?;
        let len = self.region.len();
        let mut action: Vec<Option<u8>> = vec![None; self.k];
        for w in 0..self.table.len() as u64 {
            let input = decode_word(w, self.k, len)[pos];
            let output = decode_word(self.table[w as usize] as u64, self.k, len)[pos];
            match action[input as usize] {
                None => action[input as usize] = Some(output),
                Some(prev) if prev != output => return None,
                _ => {}
            }
        }
        action.into_iter().collect()
    }

    /// Human-readable rows `input -> output` in word order.
    pub fn render_table(&self, alphabet: &Alphabet) -> Vec<String> {
        let len = self.region.len();
        self.table
            .iter()
            .enumerate()
            .map(|(w, &img)| {
                format!(
                    "{} -> {}",
                    alphabet.render_word(&decode_word(w as u64, self.k, len)),
                    alphabet.render_word(&decode_word(img as u64, self.k, len))
                )
            })
            .collect()
    }
}

/// Names a single-cell action produced by [`RegionMap::cell_action`].
pub fn describe_action(action: &[u8], alphabet: &Alphabet) -> String {
    if action.iter().enumerate().all(|(i, &o)| i as u8 == o) {
        return "ID".into();
    }
    if action.len() == 2 && action == [1, 0] {
        return "NOT".into();
    }
    if action.iter().all(|&o| o == action[0]) {
        return CellMap::Const(action[0]).name(alphabet);
    }
    action
        .iter()
        .enumerate()
        .map(|(i, &o)| format!("{}->{}", alphabet.label(i as u8), alphabet.label(o)))
        .collect::<Vec<_>>()
        .join(",")
}

/// A complement configuration together with its running time.
///
/// Stored as a full configuration whose target cells hold the quiescent
/// symbol; those cells are overwritten by the target input when run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    config: Configuration,
    target: Region,
    time: usize,
}

impl Program {
    pub fn new(base: &Configuration, target: Region, time: usize) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyRegion);
        }
        target.check_on(base.torus())?;
        let q = base.alphabet().quiescent();
        let blank = RegionConfig::new(target.clone(), base.alphabet_arc().clone(), vec![q; target.len()])?;
        Ok(Program {
            config: base.patch(&blank)?,
            target,
            time,
        })
    }

    /// Builds a program from its complement configuration (on torus ∖ target).
    pub fn from_complement(torus: &Torus, target: Region, complement: &RegionConfig, time: usize) -> Result<Self> {
        if complement.region() != &target.complement(torus) {
            return Err(Error::RegionMismatch(
                "complement region must be exactly torus minus target".into(),
            ));
        }
        let base = Configuration::uniform(torus.clone(), std::sync::Arc::new(complement.alphabet().clone()));
        Program::new(&base.patch(complement)?, target, time)
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn target(&self) -> &Region {
        &self.target
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn torus(&self) -> &Torus {
        self.config.torus()
    }

    /// The configuration of torus ∖ target.
    pub fn complement(&self) -> RegionConfig {
        self.config
            .restrict(&self.target.complement(self.config.torus()))
            .expect("complement lies on the torus")
    }

    /// The program translated by `v`: configuration and target both shifted.
    pub fn shifted(&self, v: &[i64]) -> Result<Program> {
        let config = self.config.shift(v)?;
        let target = self.target.shift(self.config.torus(), v)?;
        Program::new(&config, target, self.time)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "time: {}", self.time)?;
        f.write_str(&write_config(&self.config))
    }
}

/// The map a program induces on its target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedMap {
    pub map: RegionMap,
    /// The target's light cone wraps the torus; the map is torus-only.
    pub torus_only: bool,
}

struct TargetRunner<'a> {
    stepper: Stepper<'a>,
    target_idx: Vec<usize>,
    k: usize,
}

impl<'a> TargetRunner<'a> {
    fn new(rule: &'a BlockRule, torus: &Torus, target: &Region) -> Result<Self> {
        let stepper = Stepper::new(rule, torus)?;
        Ok(TargetRunner {
            stepper,
            target_idx: target.indices(torus)?,
            k: rule.alphabet().size(),
        })
    }

    fn write(&self, cells: &mut crate::lattice::PackedCells, word: u64) {
        let vals = decode_word(word, self.k, self.target_idx.len());
        for (&i, &v) in self.target_idx.iter().zip(&vals) {
            cells.set(i, v);
        }
    }

    fn read(&self, cells: &crate::lattice::PackedCells) -> u32 {
        self.target_idx
            .iter()
            .fold(0u32, |acc, &i| acc * self.k as u32 + cells.get(i) as u32)
    }

    /// Target output after `time` steps for input `word`.
    fn run(&self, base: &Configuration, word: u64, time: usize) -> u32 {
        let mut cells = base.cells().clone();
        self.write(&mut cells, word);
        self.stepper.run_in_place(&mut cells, 0, time);
        self.read(&cells)
    }
}

/// Evolves `(c, r)` for every target word `r` and records the restriction.
pub fn induced_map(rule: &BlockRule, program: &Program) -> Result<InducedMap> {
    let torus = program.torus();
    let target = program.target();
    let runner = TargetRunner::new(rule, torus, target)?;
    runner.stepper.check(program.config())?;
    let n = word_count(runner.k, target.len())?;
    let table: Vec<u32> = (0..n)
        .into_par_iter()
        .map(|w| runner.run(program.config(), w, program.time()))
        .collect();
    Ok(InducedMap {
        map: RegionMap::new(target.clone(), runner.k, table)?,
        torus_only: light_cone(target, program.time(), torus)?.wrapped,
    })
}

/// Whether the program's induced map equals `beta` on every input.
pub fn implements(rule: &BlockRule, program: &Program, beta: &RegionMap) -> Result<bool> {
    if beta.region() != program.target() {
        return Err(Error::RegionMismatch("beta acts on a different region than the program's target".into()));
    }
    let runner = TargetRunner::new(rule, program.torus(), program.target())?;
    runner.stepper.check(program.config())?;
    if beta.k() != runner.k {
        return Err(Error::AlphabetMismatch);
    }
    Ok((0..beta.table().len() as u64)
        .into_par_iter()
        .all(|w| runner.run(program.config(), w, program.time()) == beta.apply(w as u32)))
}

/// Translating a program that implements `beta` by `v` yields a program
/// implementing the conjugated map on the translated target.
pub fn shift_covariance_holds(rule: &BlockRule, program: &Program, beta: &RegionMap, v: &[i64]) -> Result<bool> {
    let shifted = program.shifted(v)?;
    let conjugated = beta.conjugate(program.torus(), v)?;
    implements(rule, &shifted, &conjugated)
}

/// Finite truncation of the search space: only halo cells may be
/// non-quiescent, times range over `0..=t_max`, and at most
/// `max_candidates` (halo, t) pairs are tested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    pub halo: Region,
    pub t_max: usize,
    pub max_candidates: u64,
}

impl SearchBudget {
    /// Halo = light cone of the target after `t_max` steps, minus the target.
    pub fn light_cone(torus: &Torus, target: &Region, t_max: usize, max_candidates: u64) -> Result<Self> {
        let cone = light_cone(target, t_max, torus)?;
        Ok(SearchBudget {
            halo: cone.cells.difference(target),
            t_max,
            max_candidates,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        program: Program,
        /// Index of the halo configuration in enumeration order.
        halo_index: u64,
        torus_only: bool,
    },
    /// No candidate within budget; says nothing about nonexistence.
    NotFound {
        /// Whether the whole (halo, t) space was enumerated.
        exhausted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    /// Candidates up to and including the hit, in canonical order.
    pub candidates_tested: u64,
}

impl SearchResult {
    pub fn program(&self) -> Option<&Program> {
        match &self.outcome {
            SearchOutcome::Found { program, .. } => Some(program),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

/// First program (halo configurations in lexicographic order, first halo
/// cell most significant; `t` ascending within each) implementing `beta`.
pub fn search_program(
    rule: &BlockRule,
    torus: &Torus,
    target: &Region,
    beta: &RegionMap,
    budget: &SearchBudget,
) -> Result<SearchResult> {
    search_program_where(rule, torus, target, beta, budget, &|_| true)
}

/// As [`search_program`], skipping halo configurations rejected by `accept`.
/// The result is independent of thread scheduling.
pub fn search_program_where(
    rule: &BlockRule,
    torus: &Torus,
    target: &Region,
    beta: &RegionMap,
    budget: &SearchBudget,
    accept: &(dyn Fn(&Configuration) -> bool + Sync),
) -> Result<SearchResult> {
    if target.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if beta.region() != target {
        return Err(Error::RegionMismatch("beta acts on a different region than the target".into()));
    }
    if !budget.halo.is_disjoint(target) {
        return Err(Error::Precondition("halo intersects the target".into()));
    }
    budget.halo.check_on(torus)?;
    let k = rule.alphabet().size();
    if beta.k() != k {
        return Err(Error::AlphabetMismatch);
    }
    let halo_space = (k as u128).checked_pow(budget.halo.len() as u32).unwrap_or(u128::MAX);
    if halo_space > MAX_HALO_CANDIDATES {
        return Err(Error::CapExceeded {
            candidates: halo_space,
            cap: MAX_HALO_CANDIDATES,
        });
    }
    let runner = TargetRunner::new(rule, torus, target)?;
    let inputs = word_count(k, target.len())?;
    let per_halo = budget.t_max as u64 + 1;
    let total = halo_space as u64 * per_halo;
    let limit = total.min(budget.max_candidates);
    let halo_limit = limit.div_ceil(per_halo);
    let halo_idx = budget.halo.indices(torus)?;
    let base = Configuration::uniform(torus.clone(), rule.alphabet_arc().clone());
    let target_len = target.len();

    let hit = (0..halo_limit).into_par_iter().find_map_first(|h| {
        let mut config = base.clone();
        let vals = decode_word(h, k, halo_idx.len());
        for (&i, &v) in halo_idx.iter().zip(&vals) {
            config.cells_mut().set(i, v);
        }
        if !accept(&config) {
            return None;
        }
        // times available to this halo configuration under the limit
        let t_top = (limit - h * per_halo - 1).min(budget.t_max as u64) as usize;
        let mut ok = vec![true; t_top + 1];
        let mut alive = t_top + 1;
        for w in 0..inputs {
            let want = beta.apply(w as u32);
            let mut cells = config.cells().clone();
            runner.write(&mut cells, w);
            for t in 0..=t_top {
                if t > 0 {
                    runner.stepper.step_in_place(&mut cells, crate::engine::Phase::at_step(t - 1));
                }
                if ok[t] && runner.read(&cells) != want {
                    ok[t] = false;
                    alive -= 1;
                }
            }
            if alive == 0 {
                return None;
            }
        }
        debug_assert_eq!(target_len, runner.target_idx.len());
        ok.iter().position(|&b| b).map(|t| (h, t, config))
    });

    Ok(match hit {
        Some((h, t, config)) => {
            let program = Program::new(&config, target.clone(), t)?;
            SearchResult {
                candidates_tested: h * per_halo + t as u64 + 1,
                outcome: SearchOutcome::Found {
                    torus_only: light_cone(target, t, torus)?.wrapped,
                    program,
                    halo_index: h,
                },
            }
        }
        None => SearchResult {
            outcome: SearchOutcome::NotFound {
                exhausted: limit == total,
            },
            candidates_tested: limit,
        },
    })
}

/// One entry of a universality survey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyEntry {
    pub name: String,
    pub beta: RegionMap,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Survey {
    pub entries: Vec<SurveyEntry>,
}

impl Survey {
    /// Names of the maps realized within budget.
    pub fn coverage(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.result.program().is_some())
            .map(|e| e.name.as_str())
            .collect()
    }
}

/// Searches for a program for each map in `betas`. With `betas = None` the
/// target must be a single binary cell and all four maps on it are surveyed.
pub fn universality_survey(
    rule: &BlockRule,
    torus: &Torus,
    target: &Region,
    budget: &SearchBudget,
    betas: Option<Vec<(String, RegionMap)>>,
) -> Result<Survey> {
    let betas = match betas {
        Some(list) => list,
        None => {
            if target.len() != 1 || rule.alphabet().size() != 2 {
                return Err(Error::Precondition(
                    "enumerating every map is only supported for one binary cell; supply a list".into(),
                ));
            }
            CellMap::binary_maps()
                .iter()
                .map(|&m| {
                    Ok((
                        m.name(rule.alphabet()),
                        RegionMap::cellwise(target.clone(), rule.alphabet(), &[m])?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let entries = betas
        .into_iter()
        .map(|(name, beta)| {
            let result = search_program(rule, torus, target, &beta, budget)?;
            Ok(SurveyEntry { name, beta, result })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Survey { entries })
}

impl FromStr for CellMap {
    type Err = Error;

    /// Parses against the binary alphabet.
    fn from_str(s: &str) -> Result<Self> {
        CellMap::parse(s, &Alphabet::binary())
    }
}

/// Machine-readable search outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OutcomeReport {
    Found {
        time: usize,
        halo_index: u64,
        torus_only: bool,
        program: String,
    },
    NotFound {
        exhausted: bool,
        note: String,
    },
    CapExceeded {
        candidates: String,
        cap: String,
    },
}

impl OutcomeReport {
    pub fn from_result(result: &Result<SearchResult>) -> Option<OutcomeReport> {
        match result {
            Ok(r) => Some(match &r.outcome {
                SearchOutcome::Found {
                    program,
                    halo_index,
                    torus_only,
                } => OutcomeReport::Found {
                    time: program.time(),
                    halo_index: *halo_index,
                    torus_only: *torus_only,
                    program: write_config(program.config()),
                },
                SearchOutcome::NotFound { exhausted } => OutcomeReport::NotFound {
                    exhausted: *exhausted,
                    note: "no program within the search budget; this is not a proof of nonexistence".into(),
                },
            }),
            Err(Error::CapExceeded { candidates, cap }) => Some(OutcomeReport::CapExceeded {
                candidates: candidates.to_string(),
                cap: cap.to_string(),
            }),
            Err(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub halo: Vec<String>,
    pub t_max: usize,
    /// `None` when the search is unbounded.
    pub max_candidates: Option<u64>,
}

impl From<&SearchBudget> for BudgetReport {
    fn from(b: &SearchBudget) -> Self {
        BudgetReport {
            halo: b.halo.iter().map(|c| c.to_string()).collect(),
            t_max: b.t_max,
            max_candidates: (b.max_candidates != u64::MAX).then_some(b.max_candidates),
        }
    }
}

/// Structured report of one program search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub tool_version: String,
    pub rule_hash: String,
    pub torus: String,
    pub target: Vec<String>,
    pub beta: Vec<String>,
    pub budget: BudgetReport,
    pub outcome: OutcomeReport,
    pub candidates_tested: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl SearchReport {
    /// Runs the search and reports it. Errors other than the enumeration
    /// cap are returned as errors.
    pub fn run(
        rule: &BlockRule,
        torus: &Torus,
        target: &Region,
        beta: &RegionMap,
        budget: &SearchBudget,
        timed: bool,
    ) -> Result<(SearchReport, Option<SearchResult>)> {
        let start = std::time::Instant::now();
        let result = search_program(rule, torus, target, beta, budget);
        let elapsed = start.elapsed().as_millis();
        let outcome = match OutcomeReport::from_result(&result) {
            Some(o) => o,
            None => return Err(result.expect_err("only errors lack an outcome")),
        };
        let candidates_tested = result.as_ref().map_or(0, |r| r.candidates_tested);
        Ok((
            SearchReport {
                tool_version: crate::VERSION.into(),
                rule_hash: rule.hash(),
                torus: torus.to_string(),
                target: target.iter().map(|c| c.to_string()).collect(),
                beta: beta.render_table(rule.alphabet()),
                budget: budget.into(),
                outcome,
                candidates_tested,
                wall_time_ms: timed.then_some(elapsed),
            },
            result.ok(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rule;
    use std::sync::Arc;

    fn torus() -> Torus {
        Torus::new(vec![8, 8]).unwrap()
    }

    fn cell(x: usize, y: usize) -> Cell {
        Cell::from([x, y])
    }

    fn quiet() -> Configuration {
        Configuration::uniform(torus(), Arc::new(Alphabet::binary()))
    }

    #[test]
    fn identity_rule_at_time_zero_is_identity() {
        let rule = BlockRule::identity(Arc::new(Alphabet::binary()), 2).unwrap();
        let target: Region = "(0,0) (1,0)".parse().unwrap();
        let p = Program::new(&quiet(), target.clone(), 0).unwrap();
        let im = induced_map(&rule, &p).unwrap();
        assert_eq!(im.map, RegionMap::identity(target.clone(), 2).unwrap());
        assert!(!im.torus_only);
        assert!(implements(&rule, &p, &im.map).unwrap());
        let not = RegionMap::parse_cellwise("NOT", target, &Alphabet::binary()).unwrap();
        assert!(!implements(&rule, &p, &not).unwrap());
    }

    #[test]
    fn complement_rule_induces_cellwise_not() {
        let rule = BlockRule::complement(2).unwrap();
        let target: Region = "(0,0) (3,5)".parse().unwrap();
        let noisy = quiet().with_value(&cell(1, 0), 1).unwrap().with_value(&cell(6, 6), 1).unwrap();
        for base in [quiet(), noisy] {
            let p = Program::new(&base, target.clone(), 1).unwrap();
            let not = RegionMap::parse_cellwise("NOT", target.clone(), &Alphabet::binary()).unwrap();
            assert_eq!(induced_map(&rule, &p).unwrap().map, not);
        }
    }

    #[test]
    fn transposition_induced_map_matches_enumeration() {
        let rule = parse_rule("alphabet: 0 1\ndim: 2\neven: 0 0 0 1 -> 1 0 0 0\neven: 1 0 0 0 -> 0 0 0 1\n").unwrap();
        let target: Region = "(0,0)".parse().unwrap();
        let p = Program::new(&quiet(), target.clone(), 1).unwrap();
        // direct enumeration: input 0 -> block 0000 fixed; input 1 -> 1000 -> 0001,
        // so the particle leaves (0,0) for (1,1).
        let expected = RegionMap::new(target, 2, vec![0, 0]).unwrap();
        assert_eq!(induced_map(&rule, &p).unwrap().map, expected);
    }

    #[test]
    fn conjugation_relabels_cells() {
        let t = torus();
        let target: Region = "(6,0) (7,0)".parse().unwrap();
        let beta = RegionMap::parse_cellwise("NOT,CONST1", target, &Alphabet::binary()).unwrap();
        // shifting by (2,0) wraps (6,0)->(0,0) and (7,0)->(1,0): order is preserved
        let conj = beta.conjugate(&t, &[2, 0]).unwrap();
        assert_eq!(conj.region(), &"(0,0) (1,0)".parse().unwrap());
        assert_eq!(describe_action(&conj.cell_action(&cell(0, 0)).unwrap(), &Alphabet::binary()), "NOT");
        assert_eq!(describe_action(&conj.cell_action(&cell(1, 0)).unwrap(), &Alphabet::binary()), "CONST1");
        // shifting by (1,0) wraps only (7,0)->(0,0): order flips
        let conj = beta.conjugate(&t, &[1, 0]).unwrap();
        assert_eq!(conj.region(), &"(0,0) (7,0)".parse().unwrap());
        assert_eq!(conj.cell_action(&cell(7, 0)).unwrap(), vec![1, 0]);
        assert_eq!(conj.cell_action(&cell(0, 0)).unwrap(), vec![1, 1]);
        assert_eq!(beta.conjugate(&t, &[0, 0]).unwrap(), beta);
    }

    #[test]
    fn cell_action_detects_dependence() {
        let target: Region = "(0,0) (1,0)".parse().unwrap();
        // swap of the two cells: output at (0,0) depends on (1,0)
        let swap = RegionMap::new(target, 2, vec![0, 2, 1, 3]).unwrap();
        assert_eq!(swap.cell_action(&cell(0, 0)), None);
        assert!(swap.is_injective());
        assert!(!RegionMap::parse_cellwise("CONST0", "(0,0)".parse().unwrap(), &Alphabet::binary())
            .unwrap()
            .is_injective());
    }

    #[test]
    fn search_examples() {
        let t = torus();
        let target: Region = "(0,0)".parse().unwrap();
        let id_rule = BlockRule::identity(Arc::new(Alphabet::binary()), 2).unwrap();
        let budget = SearchBudget::light_cone(&t, &target, 2, u64::MAX).unwrap();
        let id = RegionMap::identity(target.clone(), 2).unwrap();
        let r = search_program(&id_rule, &t, &target, &id, &budget).unwrap();
        let p = r.program().unwrap();
        assert_eq!(p.time(), 0);
        assert!(p.config().support().is_empty());
        assert_eq!(r.candidates_tested, 1);

        let not = RegionMap::parse_cellwise("NOT", target.clone(), &Alphabet::binary()).unwrap();
        let r = search_program(&id_rule, &t, &target, &not, &budget).unwrap();
        assert_eq!(r.outcome, SearchOutcome::NotFound { exhausted: true });
        assert_eq!(r.candidates_tested, (1 << budget.halo.len()) * 3);

        let comp = BlockRule::complement(2).unwrap();
        let r = search_program(&comp, &t, &target, &not, &budget).unwrap();
        let p = r.program().unwrap();
        assert_eq!(p.time(), 1);
        assert!(p.config().support().is_empty());
        assert_eq!(r.candidates_tested, 2);

        let truncated = SearchBudget { max_candidates: 5, ..budget.clone() };
        let r = search_program(&id_rule, &t, &target, &not, &truncated).unwrap();
        assert_eq!(r.outcome, SearchOutcome::NotFound { exhausted: false });
        assert_eq!(r.candidates_tested, 5);

        let huge = SearchBudget::light_cone(&Torus::new(vec![16, 16]).unwrap(), &target, 6, u64::MAX).unwrap();
        let err = search_program(&id_rule, &Torus::new(vec![16, 16]).unwrap(), &target, &not, &huge);
        assert!(matches!(err, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn survey_examples() {
        let t = torus();
        let target: Region = "(0,0)".parse().unwrap();
        let budget = SearchBudget::light_cone(&t, &target, 2, u64::MAX).unwrap();
        let id_rule = BlockRule::identity(Arc::new(Alphabet::binary()), 2).unwrap();
        let s = universality_survey(&id_rule, &t, &target, &budget, None).unwrap();
        assert_eq!(s.coverage(), vec!["ID"]);

        let comp = BlockRule::complement(2).unwrap();
        let s = universality_survey(&comp, &t, &target, &budget, None).unwrap();
        assert_eq!(s.coverage(), vec!["ID", "NOT"]);
        assert_eq!(s.entries[0].result.program().unwrap().time(), 0);
        assert_eq!(s.entries[1].result.program().unwrap().time(), 1);

        let two: Region = "(0,0) (1,0)".parse().unwrap();
        assert!(universality_survey(&comp, &t, &two, &budget, None).is_err());
    }

    #[test]
    fn program_complement_round_trip() {
        let t = torus();
        let target: Region = "(0,0) (2,0)".parse().unwrap();
        let base = quiet().with_value(&cell(0, 0), 1).unwrap().with_value(&cell(0, 1), 1).unwrap();
        let p = Program::new(&base, target.clone(), 3).unwrap();
        assert_eq!(p.config().get(&cell(0, 0)).unwrap(), 0);
        let back = Program::from_complement(&t, target.clone(), &p.complement(), 3).unwrap();
        assert_eq!(back, p);
        let wrong = quiet().restrict(&target).unwrap();
        assert!(Program::from_complement(&t, target, &wrong, 3).is_err());
    }
}
