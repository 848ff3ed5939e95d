//! Configuration text format.
//!
//! ```text
//! torus: 4 x 4
//! alphabet: a b
//! quiescent: a
//! cell (0,0) = b
//! ```
//!
//! For one- and two-dimensional tori the body may instead be given as rows of
//! symbols, row `y = 0` first. The writer always emits the general form with
//! non-quiescent cells in lexicographic order; a header with no body is the
//! all-quiescent configuration.

use std::sync::Arc;

use super::{Alphabet, Cell, Configuration, Torus};
use crate::error::{Error, ParseError, Result};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn err(line: usize, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse(ParseError::new(line, column, msg))
}

pub fn parse_config(text: &str) -> Result<Configuration> {
    parse_config_at(text, 0)
}

/// Parses a configuration whose first line is line `offset + 1` of a larger file.
pub fn parse_config_at(text: &str, offset: usize) -> Result<Configuration> {
    let mut torus: Option<Torus> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut quiescent: Option<(String, usize)> = None;
    let mut body: Vec<(usize, &str)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = offset + i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let header = line.split_once(':').filter(|(k, _)| {
            matches!(k.trim(), "torus" | "alphabet" | "quiescent")
        });
        match header {
            Some((key, value)) if body.is_empty() => {
                let key = key.trim();
                let dup = match key {
                    "torus" => torus.is_some(),
                    "alphabet" => labels.is_some(),
                    _ => quiescent.is_some(),
                };
                if dup {
                    return Err(err(lineno, 1, format!("duplicate header '{key}'")));
                }
                match key {
                    "torus" => {
                        torus = Some(value.trim().parse::<Torus>().map_err(|e| {
                            err(lineno, key.len() + 2, e.to_string())
                        })?)
                    }
                    "alphabet" => {
                        labels = Some(value.split_whitespace().map(String::from).collect())
                    }
                    _ => quiescent = Some((value.trim().to_string(), lineno)),
                }
            }
            Some((key, _)) => {
                return Err(err(lineno, 1, format!("header '{}' after body", key.trim())))
            }
            None => body.push((lineno, line)),
        }
    }

    let torus = torus.ok_or_else(|| err(offset + 1, 1, "missing 'torus:' header"))?;
    let labels = labels.ok_or_else(|| err(offset + 1, 1, "missing 'alphabet:' header"))?;
    let (q, qline) = quiescent.ok_or_else(|| err(offset + 1, 1, "missing 'quiescent:' header"))?;
    let qi = labels
        .iter()
        .position(|s| *s == q)
        .ok_or_else(|| err(qline, 1, format!("unknown quiescent symbol {q:?}")))?;
    let alphabet = Arc::new(Alphabet::new(labels, qi)?);

    let symbol = |lineno: usize, tok: &str| -> Result<u8> {
        alphabet
            .index_of(tok)
            .ok_or_else(|| err(lineno, 1, format!("unknown symbol {tok:?}")))
    };

    // an empty body is the all-quiescent configuration
    let general = body.first().is_none_or(|(_, l)| l.starts_with("cell"));
    if general {
        let mut c = Configuration::uniform(torus.clone(), alphabet.clone());
        for (lineno, line) in body {
            let rest = line
                .strip_prefix("cell")
                .ok_or_else(|| err(lineno, 1, "expected 'cell (x,...) = s'"))?;
            let (lhs, rhs) = rest
                .split_once('=')
                .ok_or_else(|| err(lineno, 1, "expected '='"))?;
            let cell: Cell = lhs
                .trim()
                .parse()
                .map_err(|e: ParseError| err(lineno, 5, e.message))?;
            let idx = torus
                .index_of(&cell)
                .map_err(|e| err(lineno, 5, e.to_string()))?;
            let s = symbol(lineno, rhs.trim())?;
            c.cells_mut().set(idx, s);
        }
        Ok(c)
    } else {
        if torus.ndim() > 2 {
            return Err(err(
                body.first().map_or(offset + 1, |b| b.0),
                1,
                "row form is only available for tori of dimension 1 or 2",
            ));
        }
        let width = torus.dims()[0];
        let height = torus.dims().get(1).copied().unwrap_or(1);
        if body.len() != height {
            return Err(err(
                body.last().map_or(offset + 1, |b| b.0),
                1,
                format!("expected {height} rows, found {}", body.len()),
            ));
        }
        let mut values = Vec::with_capacity(width * height);
        for (lineno, line) in body {
            let row: Vec<&str> = line.split_whitespace().collect();
            if row.len() != width {
                return Err(err(
                    lineno,
                    1,
                    format!("expected {width} symbols, found {}", row.len()),
                ));
            }
            for tok in row {
                values.push(symbol(lineno, tok)?);
            }
        }
        Configuration::from_values(torus, alphabet, &values)
    }
}

fn write_header(c: &Configuration, out: &mut String) {
    out.push_str(&format!("torus: {}\n", c.torus()));
    out.push_str(&format!("alphabet: {}\n", c.alphabet().symbols().join(" ")));
    out.push_str(&format!(
        "quiescent: {}\n",
        c.alphabet().label(c.alphabet().quiescent())
    ));
}

/// Canonical general form.
pub fn write_config(c: &Configuration) -> String {
    let mut out = String::new();
    write_header(c, &mut out);
    for cell in c.support().iter() {
        let v = c.get(cell).expect("support lies on the torus");
        out.push_str(&format!("cell {} = {}\n", cell, c.alphabet().label(v)));
    }
    out
}

/// Row form for tori of dimension at most two.
pub fn write_config_rows(c: &Configuration) -> Result<String> {
    if c.torus().ndim() > 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: c.torus().ndim(),
        });
    }
    let mut out = String::new();
    write_header(c, &mut out);
    let width = c.torus().dims()[0];
    let values = c.values();
    for row in values.chunks(width) {
        let labels: Vec<&str> = row.iter().map(|&v| c.alphabet().label(v)).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROWS: &str = "\
torus: 4 x 2
alphabet: a b
quiescent: a
# row y = 0
a b a a
a a a b
";

    #[test]
    fn row_and_general_forms_agree() {
        let c = parse_config(ROWS).unwrap();
        assert_eq!(c.get(&Cell::from([1, 0])).unwrap(), 1);
        assert_eq!(c.get(&Cell::from([3, 1])).unwrap(), 1);
        let general = write_config(&c);
        assert_eq!(
            general,
            "torus: 4 x 2\nalphabet: a b\nquiescent: a\ncell (1,0) = b\ncell (3,1) = b\n"
        );
        assert_eq!(parse_config(&general).unwrap(), c);
        assert_eq!(parse_config(&write_config_rows(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "torus: 4 x 2\nalphabet: a b\nquiescent: a\ncell (9,0) = b\n";
        match parse_config(bad) {
            Err(Error::Parse(e)) => assert_eq!(e.line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let dup = "torus: 4 x 2\ntorus: 4 x 2\n";
        assert!(matches!(parse_config(dup), Err(Error::Parse(e)) if e.line == 2));
        let sym = "torus: 2 x 2\nalphabet: a b\nquiescent: a\na c\na a\n";
        assert!(matches!(parse_config(sym), Err(Error::Parse(e)) if e.line == 4));
        let odd = "torus: 3 x 2\nalphabet: a b\nquiescent: a\n";
        assert!(parse_config(odd).is_err());
    }

    #[test]
    fn three_dimensional_general_form() {
        let text = "torus: 2 x 2 x 2\nalphabet: 0 1 2\nquiescent: 0\ncell (1,1,1) = 2\n";
        let c = parse_config(text).unwrap();
        assert_eq!(write_config(&c), text);
    }
}
