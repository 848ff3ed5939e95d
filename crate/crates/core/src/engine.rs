//! Margolus time evolution.
//!
//! One time step applies one phase. Step `s` uses the even partition when `s`
//! is even and the odd partition otherwise, so evolution always starts with
//! the even phase. Even blocks are anchored at all-even coordinates, odd
//! blocks at all-odd coordinates; blocks wrap around the torus.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::lattice::text::{parse_config_at, write_config};
use crate::lattice::{Configuration, PackedCells, Region, Torus};
use crate::rules::BlockRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Even,
    Odd,
}

impl Phase {
    /// Phase applied at time step `step` (0-based).
    pub fn at_step(step: usize) -> Phase {
        if step.is_multiple_of(2) {
            Phase::Even
        } else {
            Phase::Odd
        }
    }

    /// Per-axis anchor offset: 0 for even blocks, -1 for odd blocks.
    pub fn anchor_offset(self) -> i64 {
        match self {
            Phase::Even => 0,
            Phase::Odd => -1,
        }
    }

    /// Anchor coordinate of the block containing lattice coordinate `x`.
    fn anchor(self, x: i64) -> i64 {
        let off = self.anchor_offset();
        (x - off).div_euclid(2) * 2 + off
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Even => "even",
            Phase::Odd => "odd",
        })
    }
}

/// Linear cell indices of every block of one phase, `B` per block in
/// canonical offset order.
#[derive(Debug, Clone)]
pub(crate) struct BlockLayout {
    pub(crate) cells: Vec<usize>,
}

impl BlockLayout {
    pub(crate) fn new(torus: &Torus, block_cells: &[Vec<usize>], phase: Phase) -> Self {
        let dims = torus.dims();
        let per_axis: Vec<usize> = dims.iter().map(|n| n / 2).collect();
        let nblocks: usize = per_axis.iter().product();
        let mut cells = Vec::with_capacity(nblocks * block_cells.len());
        let mut coords = vec![0usize; dims.len()];
        for b in 0..nblocks {
            let mut rem = b;
            let anchor: Vec<i64> = per_axis
                .iter()
                .map(|&m| {
                    let i = (rem % m) as i64;
                    rem /= m;
                    2 * i + phase.anchor_offset()
                })
                .collect();
            for offset in block_cells {
                for (axis, slot) in coords.iter_mut().enumerate() {
                    *slot = (anchor[axis] + offset[axis] as i64).rem_euclid(dims[axis] as i64) as usize;
                }
                cells.push(torus.index_unchecked(&coords));
            }
        }
        BlockLayout { cells }
    }
}

/// A rule bound to a torus, with both block layouts precomputed.
#[derive(Debug, Clone)]
pub struct Stepper<'r> {
    rule: &'r BlockRule,
    torus: Torus,
    even: BlockLayout,
    odd: BlockLayout,
}

impl<'r> Stepper<'r> {
    pub fn new(rule: &'r BlockRule, torus: &Torus) -> Result<Self> {
        if rule.dim() != torus.ndim() {
            return Err(Error::DimensionMismatch {
                expected: rule.dim(),
                got: torus.ndim(),
            });
        }
        if torus.dims().iter().any(|n| n % 2 != 0) {
            return Err(Error::InvalidTorus("Margolus blocks need even side lengths".into()));
        }
        let offsets = rule.shape().offsets();
        Ok(Stepper {
            rule,
            torus: torus.clone(),
            even: BlockLayout::new(torus, offsets, Phase::Even),
            odd: BlockLayout::new(torus, offsets, Phase::Odd),
        })
    }

    pub fn rule(&self) -> &BlockRule {
        self.rule
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn check(&self, c: &Configuration) -> Result<()> {
        if c.torus() != &self.torus {
            return Err(Error::RegionMismatch(format!(
                "configuration torus {} differs from {}",
                c.torus(),
                self.torus
            )));
        }
        if c.alphabet() != self.rule.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// Applies `table` to every block of `phase`. Blocks are disjoint, so the
    /// order of application does not matter.
    pub(crate) fn apply_table(&self, cells: &mut PackedCells, phase: Phase, table: &[u32]) {
        let layout = match phase {
            Phase::Even => &self.even,
            Phase::Odd => &self.odd,
        };
        let b = self.rule.shape().cells();
        let k = self.rule.alphabet().size() as u32;
        for block in layout.cells.chunks_exact(b) {
            let mut word = 0u32;
            for &i in block {
                word = word * k + cells.get(i) as u32;
            }
            let mut image = table[word as usize];
            if image == word {
                continue;
            }
            for &i in block.iter().rev() {
                cells.set(i, (image % k) as u8);
                image /= k;
            }
        }
    }

    pub(crate) fn step_in_place(&self, cells: &mut PackedCells, phase: Phase) {
        self.apply_table(cells, phase, self.rule.table(phase));
    }

    /// Applies steps `start .. start + t`.
    pub(crate) fn run_in_place(&self, cells: &mut PackedCells, start: usize, t: usize) {
        for s in start..start + t {
            self.step_in_place(cells, Phase::at_step(s));
        }
    }

    pub fn step(&self, c: &Configuration, phase: Phase) -> Result<Configuration> {
        self.check(c)?;
        let mut out = c.clone();
        self.step_in_place(out.cells_mut(), phase);
        Ok(out)
    }

    pub fn evolve(&self, c: &Configuration, t: usize) -> Result<Configuration> {
        self.check(c)?;
        let mut out = c.clone();
        self.run_in_place(out.cells_mut(), 0, t);
        Ok(out)
    }
}

/// One phase application.
pub fn step(c: &Configuration, rule: &BlockRule, phase: Phase) -> Result<Configuration> {
    Stepper::new(rule, c.torus())?.step(c, phase)
}

/// `t` alternating phase applications starting with even.
pub fn evolve(c: &Configuration, rule: &BlockRule, t: usize) -> Result<Configuration> {
    Stepper::new(rule, c.torus())?.evolve(c, t)
}

/// Undoes [`evolve`]: applies the inverse phases of steps `t-1, ..., 0`.
pub fn evolve_back(c: &Configuration, rule: &BlockRule, t: usize) -> Result<Configuration> {
    let inverse = rule.invert()?;
    let stepper = Stepper::new(&inverse, c.torus())?;
    stepper.check(c)?;
    let mut out = c.clone();
    for s in (0..t).rev() {
        stepper.step_in_place(out.cells_mut(), Phase::at_step(s));
    }
    Ok(out)
}

/// Cells whose initial values can influence a region after some steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightCone {
    pub cells: Region,
    /// True when two distinct lattice points of the cone land on the same
    /// torus cell, in which case torus results are torus-only.
    pub wrapped: bool,
}

/// Backward light cone of `region` after `t` steps (starting at step 0).
///
/// The cone is grown on the integer lattice, one block partition per step,
/// then reduced onto the torus.
pub fn light_cone(region: &Region, t: usize, torus: &Torus) -> Result<LightCone> {
    region.check_on(torus)?;
    let d = torus.ndim();
    let mut set: BTreeSet<Vec<i64>> = region
        .iter()
        .map(|c| c.coords().iter().map(|&x| x as i64).collect())
        .collect();
    for s in (0..t).rev() {
        let phase = Phase::at_step(s);
        let mut next = BTreeSet::new();
        for p in &set {
            let anchor: Vec<i64> = p.iter().map(|&x| phase.anchor(x)).collect();
            for b in 0..1usize << d {
                next.insert(
                    anchor
                        .iter()
                        .enumerate()
                        .map(|(axis, &a)| a + ((b >> axis) & 1) as i64)
                        .collect::<Vec<i64>>(),
                );
            }
        }
        set = next;
    }
    let cells = Region::new(set.iter().map(|p| torus.reduce(p)));
    Ok(LightCone {
        wrapped: cells.len() != set.len(),
        cells,
    })
}

/// A recorded run: `snapshots[s]` is the configuration after `s` steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Configuration>,
}

impl Trajectory {
    pub fn record(initial: &Configuration, rule: &BlockRule, t: usize) -> Result<Self> {
        let stepper = Stepper::new(rule, initial.torus())?;
        stepper.check(initial)?;
        let mut snapshots = Vec::with_capacity(t + 1);
        snapshots.push(initial.clone());
        let mut cur = initial.clone();
        for s in 0..t {
            stepper.step_in_place(cur.cells_mut(), Phase::at_step(s));
            snapshots.push(cur.clone());
        }
        Ok(Trajectory { snapshots })
    }

    pub fn initial(&self) -> &Configuration {
        &self.snapshots[0]
    }

    /// Text dump with `--- step <n> (<phase>) ---` separators. The phase
    /// named is the one that produced the snapshot; step 0 is `initial`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (n, c) in self.snapshots.iter().enumerate() {
            let label = if n == 0 {
                "initial".to_string()
            } else {
                Phase::at_step(n - 1).to_string()
            };
            out.push_str(&format!("--- step {n} ({label}) ---\n"));
            out.push_str(&write_config(c));
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut snapshots = Vec::new();
        let mut block = String::new();
        let mut block_start = 0;
        let mut expected = 0usize;
        let flush = |block: &mut String, start: usize, snapshots: &mut Vec<Configuration>| -> Result<()> {
            if !block.trim().is_empty() {
                snapshots.push(parse_config_at(block, start)?);
            }
            block.clear();
            Ok(())
        };
        for (i, line) in text.lines().enumerate() {
            if let Some(marker) = line.trim().strip_prefix("--- step ") {
                if !snapshots.is_empty() || !block.trim().is_empty() || expected > 0 {
                    flush(&mut block, block_start, &mut snapshots)?;
                }
                let n: usize = marker
                    .split_whitespace()
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| ParseError::new(i + 1, 1, "malformed step marker"))?;
                if n != expected {
                    return Err(ParseError::new(i + 1, 1, format!("expected step {expected}, found {n}")).into());
                }
                expected += 1;
                block_start = i + 1;
            } else {
                if expected == 0 && !line.trim().is_empty() {
                    return Err(ParseError::new(i + 1, 1, "content before the first step marker").into());
                }
                block.push_str(line);
                block.push('\n');
            }
        }
        flush(&mut block, block_start, &mut snapshots)?;
        if snapshots.is_empty() {
            return Err(ParseError::new(1, 1, "empty trajectory").into());
        }
        if snapshots.len() != expected {
            return Err(ParseError::new(1, 1, "step marker without configuration").into());
        }
        Ok(Trajectory { snapshots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Alphabet, Cell};
    use crate::rules::parse_rule;
    use std::sync::Arc;

    fn binary() -> Arc<Alphabet> {
        Arc::new(Alphabet::binary())
    }

    fn single(torus: &Torus, cell: [usize; 2]) -> Configuration {
        Configuration::from_assignments(torus.clone(), binary(), [(&Cell::from(cell), 1)]).unwrap()
    }

    #[test]
    fn identity_and_complement_steps() {
        let torus = Torus::new(vec![4, 4]).unwrap();
        let c = single(&torus, [1, 2]);
        let id = BlockRule::identity(binary(), 2).unwrap();
        assert_eq!(step(&c, &id, Phase::Even).unwrap(), c);

        let q = Configuration::uniform(torus.clone(), binary());
        let not = BlockRule::complement(2).unwrap();
        assert_eq!(step(&q, &not, Phase::Even).unwrap().count(1), 16);
        assert_eq!(evolve(&c, &not, 2).unwrap(), c);
        assert_eq!(evolve(&c, &not, 0).unwrap(), c);
    }

    #[test]
    fn transposition_moves_single_particle() {
        // 0001 -> 1000: a particle at block offset (1,1) jumps to (0,0).
        let rule = parse_rule(
            "alphabet: 0 1\ndim: 2\neven: 0 0 0 1 -> 1 0 0 0\neven: 1 0 0 0 -> 0 0 0 1\n",
        )
        .unwrap();
        let torus = Torus::new(vec![4, 4]).unwrap();
        let c = single(&torus, [1, 1]);
        // oracle: table lookup on the active block anchored at (0,0)
        let word = rule.encode(&[0, 0, 0, 1]);
        let image = rule.decode(rule.table(Phase::Even)[word as usize]);
        let offsets = rule.shape().offsets();
        let expected = Region::new(
            image
                .iter()
                .zip(offsets)
                .filter(|(&s, _)| s == 1)
                .map(|(_, o)| Cell::new(o.clone())),
        );
        let out = step(&c, &rule, Phase::Even).unwrap();
        assert_eq!(out.support(), expected);
        assert_eq!(out.support(), Region::new([Cell::from([0, 0])]));
        // the odd phase uses the identity table here
        assert_eq!(step(&c, &rule, Phase::Odd).unwrap(), c);
    }

    #[test]
    fn odd_blocks_are_anchored_at_odd_coordinates() {
        // swap offsets (0,0) <-> (1,1) for single particles in the odd phase
        let rule = parse_rule(
            "alphabet: 0 1\ndim: 2\nodd: 1 0 0 0 -> 0 0 0 1\nodd: 0 0 0 1 -> 1 0 0 0\n",
        )
        .unwrap();
        let torus = Torus::new(vec![4, 4]).unwrap();
        // (1,1) is the anchor of an odd block covering (1..=2, 1..=2)
        let out = step(&single(&torus, [1, 1]), &rule, Phase::Odd).unwrap();
        assert_eq!(out.support(), Region::new([Cell::from([2, 2])]));
        // (0,0) sits at offset (1,1) of the wrapped odd block anchored at (3,3)
        let out = step(&single(&torus, [0, 0]), &rule, Phase::Odd).unwrap();
        assert_eq!(out.support(), Region::new([Cell::from([3, 3])]));
    }

    #[test]
    fn evolve_matches_unrolled_steps() {
        let rule = BlockRule::from_fns(
            binary(),
            2,
            |w| vec![w[3], w[0], w[1], w[2]],
            |w| vec![w[0] ^ w[3], w[1], w[2], w[3]],
        )
        .unwrap();
        let torus = Torus::new(vec![4, 4]).unwrap();
        for seed in 0..64u64 {
            let vals: Vec<u8> = (0..16).map(|i| (((seed * 2654435761) >> i) & 1) as u8).collect();
            let c = Configuration::from_values(torus.clone(), binary(), &vals).unwrap();
            let mut unrolled = c.clone();
            for t in 0..=6 {
                assert_eq!(evolve(&c, &rule, t).unwrap(), unrolled);
                unrolled = step(&unrolled, &rule, Phase::at_step(t)).unwrap();
            }
        }
    }

    #[test]
    fn evolve_back_round_trips() {
        let rule = BlockRule::from_fns(
            binary(),
            2,
            |w| vec![w[1], w[2], w[3], w[0]],
            |w| vec![w[0], w[1] ^ w[0], w[2], w[3]],
        )
        .unwrap();
        let torus = Torus::new(vec![6, 6]).unwrap();
        let vals: Vec<u8> = (0..36).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let c = Configuration::from_values(torus, binary(), &vals).unwrap();
        assert_eq!(evolve_back(&c, &rule, 0).unwrap(), c);
        let fwd = evolve(&c, &rule, 5).unwrap();
        assert_ne!(fwd, c);
        assert_eq!(evolve_back(&fwd, &rule, 5).unwrap(), c);
        let id = BlockRule::identity(binary(), 2).unwrap();
        assert_eq!(evolve_back(&c, &id, 7).unwrap(), c);
    }

    #[test]
    fn mismatches_are_errors() {
        let torus = Torus::new(vec![4, 4]).unwrap();
        let other = Arc::new(Alphabet::new(vec!["a", "b"], 0).unwrap());
        let c = Configuration::uniform(torus.clone(), other);
        let id = BlockRule::identity(binary(), 2).unwrap();
        assert_eq!(evolve(&c, &id, 1), Err(Error::AlphabetMismatch));
        let c1 = Configuration::uniform(Torus::new(vec![4]).unwrap(), binary());
        assert!(matches!(evolve(&c1, &id, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn light_cone_examples() {
        let torus = Torus::new(vec![8, 8]).unwrap();
        let r = Region::new([Cell::from([0, 0])]);
        let c0 = light_cone(&r, 0, &torus).unwrap();
        assert_eq!(c0.cells, r);
        assert!(!c0.wrapped);

        let c1 = light_cone(&r, 1, &torus).unwrap();
        assert_eq!(c1.cells, "(0,0) (1,0) (0,1) (1,1)".parse().unwrap());

        let c2 = light_cone(&r, 2, &torus).unwrap();
        assert_eq!(c2.cells.len(), 16);
        assert!(!c2.wrapped);
        let nbhd = Region::new((0..16).map(|i| torus.reduce(&[i % 4 - 2, i / 4 - 2])));
        assert!(c2.cells.is_subset(&nbhd));

        let small = Torus::new(vec![4, 4]).unwrap();
        assert!(light_cone(&r, 4, &small).unwrap().wrapped);
    }

    #[test]
    fn trajectory_dump_round_trips() {
        let torus = Torus::new(vec![4, 2]).unwrap();
        let c = Configuration::from_assignments(torus, binary(), [(&Cell::from([1, 0]), 1)]).unwrap();
        let rule = BlockRule::complement(2).unwrap();
        let traj = Trajectory::record(&c, &rule, 3).unwrap();
        let dump = traj.dump();
        assert!(dump.starts_with("--- step 0 (initial) ---\n"));
        assert!(dump.contains("--- step 1 (even) ---\n"));
        assert!(dump.contains("--- step 2 (odd) ---\n"));
        let back = Trajectory::parse_dump(&dump).unwrap();
        assert_eq!(back.snapshots, traj.snapshots);
        assert!(Trajectory::parse_dump("--- step 1 (even) ---\n").is_err());
    }
}
