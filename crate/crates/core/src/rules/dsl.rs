//! Line-oriented rule definition language.
//!
//! ```text
//! # HPP-style lattice gas
//! alphabet: 0 1
//! quiescent: 0
//! dim: 2
//! even: 1 0 0 1 -> 0 1 1 0
//! even: 0 1 1 0 -> 1 0 0 1
//! odd: same
//! ```
//!
//! Only non-identity mappings are listed. Quantum rule files may add
//! `even-unitary:` / `odd-unitary:` blocks whose entries (`re,im` pairs,
//! row-major) follow on the same and subsequent lines.

use std::sync::Arc;

use num_complex::Complex64;

use super::{table_size, BlockRule, BlockShape};
use crate::error::{Error, ParseError, Result};
use crate::lattice::{encode_word, Alphabet};

/// Entries of a block unitary as written in a rule file.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryBlock {
    Same,
    Entries { line: usize, values: Vec<Complex64> },
}

/// A parsed rule file: the classical tables plus any unitary blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDocument {
    pub rule: BlockRule,
    pub even_unitary: Option<UnitaryBlock>,
    pub odd_unitary: Option<UnitaryBlock>,
}

struct Mapping {
    line: usize,
    lhs: Vec<(usize, String)>,
    rhs: Vec<(usize, String)>,
}

enum OddSpec {
    Unset,
    Same,
    Listed,
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse(ParseError::new(line, column, msg))
}

/// Splits `text` into whitespace separated tokens with 1-based columns.
fn tokens(text: &str, column0: usize) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((column0 + s, text[s..i].to_string()));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((column0 + s, text[s..].to_string()));
    }
    out
}

const KEYWORDS: [&str; 7] = [
    "alphabet",
    "quiescent",
    "dim",
    "even",
    "odd",
    "even-unitary",
    "odd-unitary",
];

fn parse_complex(line: usize, column: usize, tok: &str) -> Result<Complex64> {
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| syntax(line, column, format!("expected re,im but found {tok:?}")))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| syntax(line, column, format!("bad real part {re:?}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| syntax(line, column, format!("bad imaginary part {im:?}")))?;
    Ok(Complex64::new(re, im))
}

/// Parses a classical rule file; unitary blocks are rejected.
pub fn parse_rule(source: &str) -> Result<BlockRule> {
    let doc = parse_rule_document(source)?;
    if let Some(UnitaryBlock::Entries { line, .. }) = doc.even_unitary.as_ref().or(doc.odd_unitary.as_ref()) {
        return Err(syntax(*line, 1, "unitary blocks are only accepted by the quantum rule loader"));
    }
    Ok(doc.rule)
}

/// Parses a rule file including optional unitary blocks. The classical
/// tables are checked for bijectivity eagerly.
pub fn parse_rule_document(source: &str) -> Result<RuleDocument> {
    let mut alphabet: Option<(usize, Vec<(usize, String)>)> = None;
    let mut quiescent: Option<(usize, usize, String)> = None;
    let mut dim: Option<(usize, usize)> = None;
    let mut even_maps: Vec<Mapping> = Vec::new();
    let mut odd_maps: Vec<Mapping> = Vec::new();
    let mut odd_spec = OddSpec::Unset;
    let mut even_unitary: Option<UnitaryBlock> = None;
    let mut odd_unitary: Option<UnitaryBlock> = None;
    // Which unitary block continuation lines belong to.
    let mut open_unitary: Option<bool> = None;

    for (i, raw) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let keyword = line
            .split_once(':')
            .map(|(k, rest)| (k.trim(), rest, k.len() + 1))
            .filter(|(k, _, _)| KEYWORDS.contains(k));

        let Some((key, rest, rest_col0)) = keyword else {
            // continuation of a unitary block
            let Some(is_even) = open_unitary else {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(syntax(lineno, col, format!("unrecognized statement {:?}", line.trim())));
            };
            let slot = if is_even { &mut even_unitary } else { &mut odd_unitary };
            if let Some(UnitaryBlock::Entries { values, .. }) = slot {
                for (col, tok) in tokens(line, 1) {
                    values.push(parse_complex(lineno, col, &tok)?);
                }
            }
            continue;
        };
        open_unitary = None;
        let rest_col0 = rest_col0 + 1;

        match key {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(syntax(lineno, 1, "duplicate header 'alphabet'"));
                }
                alphabet = Some((lineno, tokens(rest, rest_col0)));
            }
            "quiescent" => {
                if quiescent.is_some() {
                    return Err(syntax(lineno, 1, "duplicate header 'quiescent'"));
                }
                let toks = tokens(rest, rest_col0);
                if toks.len() != 1 {
                    return Err(syntax(lineno, rest_col0, "expected exactly one quiescent symbol"));
                }
                let (col, sym) = toks.into_iter().next().expect("one token");
                quiescent = Some((lineno, col, sym));
            }
            "dim" => {
                if dim.is_some() {
                    return Err(syntax(lineno, 1, "duplicate header 'dim'"));
                }
                let toks = tokens(rest, rest_col0);
                let d = match toks.as_slice() {
                    [(col, t)] => t
                        .parse::<usize>()
                        .map_err(|_| syntax(lineno, *col, format!("bad dimension {t:?}")))?,
                    _ => return Err(syntax(lineno, rest_col0, "expected a single dimension")),
                };
                dim = Some((lineno, d));
            }
            "even" | "odd" => {
                let toks = tokens(rest, rest_col0);
                if key == "odd" && toks.len() == 1 && toks[0].1 == "same" {
                    match odd_spec {
                        OddSpec::Unset => odd_spec = OddSpec::Same,
                        OddSpec::Same => return Err(syntax(lineno, 1, "duplicate 'odd: same'")),
                        OddSpec::Listed => {
                            return Err(syntax(lineno, 1, "'odd: same' conflicts with odd mappings"))
                        }
                    }
                    continue;
                }
                let arrow = toks.iter().position(|(_, t)| t == "->");
                // tolerate "a->b" written without spaces
                let (lhs, rhs) = match arrow {
                    Some(p) => (toks[..p].to_vec(), toks[p + 1..].to_vec()),
                    None => match rest.find("->") {
                        Some(p) => (
                            tokens(&rest[..p], rest_col0),
                            tokens(&rest[p + 2..], rest_col0 + p + 2),
                        ),
                        None => return Err(syntax(lineno, rest_col0, "expected '->'")),
                    },
                };
                let mapping = Mapping {
                    line: lineno,
                    lhs,
                    rhs,
                };
                if key == "even" {
                    even_maps.push(mapping);
                } else {
                    if let OddSpec::Same = odd_spec {
                        return Err(syntax(lineno, 1, "odd mappings conflict with 'odd: same'"));
                    }
                    odd_spec = OddSpec::Listed;
                    odd_maps.push(mapping);
                }
            }
            "even-unitary" | "odd-unitary" => {
                let is_even = key == "even-unitary";
                let slot = if is_even { &mut even_unitary } else { &mut odd_unitary };
                if slot.is_some() {
                    return Err(syntax(lineno, 1, format!("duplicate header '{key}'")));
                }
                let toks = tokens(rest, rest_col0);
                if !is_even && toks.len() == 1 && toks[0].1 == "same" {
                    *slot = Some(UnitaryBlock::Same);
                    continue;
                }
                let mut values = Vec::new();
                for (col, tok) in toks {
                    values.push(parse_complex(lineno, col, &tok)?);
                }
                *slot = Some(UnitaryBlock::Entries {
                    line: lineno,
                    values,
                });
                open_unitary = Some(is_even);
            }
            _ => unreachable!("filtered by KEYWORDS"),
        }
    }

    let (aline, labels) = alphabet.ok_or_else(|| syntax(1, 1, "missing 'alphabet:' header"))?;
    let (_, d) = dim.ok_or_else(|| syntax(1, 1, "missing 'dim:' header"))?;
    let names: Vec<String> = labels.iter().map(|(_, s)| s.clone()).collect();
    let q = match &quiescent {
        Some((qline, qcol, sym)) => names
            .iter()
            .position(|s| s == sym)
            .ok_or_else(|| syntax(*qline, *qcol, format!("unknown symbol {sym:?}")))?,
        None => 0,
    };
    let alphabet = Arc::new(Alphabet::new(names, q).map_err(|e| syntax(aline, 1, e.to_string()))?);
    let shape = BlockShape::new(d)?;
    let size = table_size(alphabet.size(), shape.cells())?;

    let resolve = |maps: &[Mapping], phase: &str| -> Result<Vec<u32>> {
        let mut table: Vec<u32> = (0..size as u32).collect();
        let mut listed = vec![None::<usize>; size];
        for m in maps {
            let mut words = [Vec::new(), Vec::new()];
            for (side, toks) in [&m.lhs, &m.rhs].into_iter().enumerate() {
                if toks.len() != shape.cells() {
                    let col = toks.first().map_or(1, |t| t.0);
                    return Err(syntax(
                        m.line,
                        col,
                        format!("expected {} symbols per block word, found {}", shape.cells(), toks.len()),
                    ));
                }
                for (col, tok) in toks {
                    let s = alphabet
                        .index_of(tok)
                        .ok_or_else(|| syntax(m.line, *col, format!("unknown symbol {tok:?}")))?;
                    words[side].push(s);
                }
            }
            let lhs = encode_word(&words[0], alphabet.size()) as usize;
            let rhs = encode_word(&words[1], alphabet.size()) as u32;
            if let Some(prev) = listed[lhs] {
                return Err(syntax(
                    m.line,
                    m.lhs[0].0,
                    format!("duplicate {phase} mapping for {} (first given on line {prev})", alphabet.render_word(&words[0])),
                ));
            }
            listed[lhs] = Some(m.line);
            table[lhs] = rhs;
        }
        Ok(table)
    };

    let even = resolve(&even_maps, "even")?;
    let odd = match odd_spec {
        OddSpec::Same => even.clone(),
        _ => resolve(&odd_maps, "odd")?,
    };
    let rule = BlockRule::from_tables(alphabet, d, even, odd)?;
    rule.validate()?;
    Ok(RuleDocument {
        rule,
        even_unitary,
        odd_unitary,
    })
}
