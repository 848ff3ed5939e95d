//! Text and PGM rendering of trajectory dumps.

use puca_core::engine::{Phase, Trajectory};
use puca_core::lattice::Configuration;

use crate::{Run, Usage};

fn selected(t: &Trajectory, step: Option<usize>) -> Run<Vec<(usize, &Configuration)>> {
    match step {
        Some(s) => t
            .snapshots
            .get(s)
            .map(|c| vec![(s, c)])
            .ok_or_else(|| Usage(format!("step {s} is not in the trajectory ({} snapshots)", t.snapshots.len()))),
        None => Ok(t.snapshots.iter().enumerate().collect()),
    }
}

fn grid_shape(c: &Configuration) -> Run<(usize, usize)> {
    match c.torus().dims() {
        [w] => Ok((*w, 1)),
        [w, h] => Ok((*w, *h)),
        dims => Err(Usage(format!("cannot draw a {}-dimensional torus", dims.len()))),
    }
}

/// One grid per snapshot, row `y = 0` first, quiescent cells as `.`.
pub fn text(t: &Trajectory, step: Option<usize>) -> Run<String> {
    let mut out = String::new();
    for (s, c) in selected(t, step)? {
        let (w, _) = grid_shape(c)?;
        let label = if s == 0 { "initial".to_string() } else { Phase::at_step(s - 1).to_string() };
        out.push_str(&format!("step {s} ({label})\n"));
        let q = c.alphabet().quiescent();
        for row in c.values().chunks(w) {
            let cells: Vec<&str> = row
                .iter()
                .map(|&v| if v == q { "." } else { c.alphabet().label(v) })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

/// Plain (P2) PGM with the selected snapshots stacked top to bottom; the
/// gray level of a cell is its symbol index.
pub fn pgm(t: &Trajectory, step: Option<usize>) -> Run<String> {
    let frames = selected(t, step)?;
    let first = frames.first().ok_or_else(|| Usage("empty trajectory".into()))?.1;
    let (w, h) = grid_shape(first)?;
    let maxval = first.alphabet().size().saturating_sub(1).max(1);
    let mut out = format!("P2\n{w} {}\n{maxval}\n", h * frames.len());
    for (_, c) in frames {
        for row in c.values().chunks(w) {
            let px: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&px.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}
