//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 2
//! h 0
//! cx 0 1
//! rx 1 3.0000000000000000e-1   # angles carry 17 significant digits
//! ```

use super::{Circuit, Gate};
use crate::error::{Error, Result};

pub fn serialize(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n_qubits());
    for g in c.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token { text: &content[s..i], column: s + 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &content[s..], column: s + 1 });
    }
    out
}

fn qubit(tok: &Token<'_>, line: usize, n: usize) -> Result<usize> {
    let q: usize = tok
        .text
        .parse()
        .map_err(|_| Error::parse(line, tok.column, format!("expected qubit index, found '{}'", tok.text)))?;
    if q >= n {
        return Err(Error::parse(line, tok.column, format!("qubit {q} out of range for {n} qubits")));
    }
    Ok(q)
}

fn angle(tok: &Token<'_>, line: usize) -> Result<f64> {
    let a: f64 = tok
        .text
        .parse()
        .map_err(|_| Error::parse(line, tok.column, format!("expected angle, found '{}'", tok.text)))?;
    if !a.is_finite() {
        return Err(Error::parse(line, tok.column, "angle must be finite"));
    }
    Ok(a)
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(raw);
        let Some(head) = toks.first() else { continue };
        let Some(n_q) = n else {
            if head.text != "qubits" || toks.len() != 2 {
                return Err(Error::parse(line, head.column, "expected header 'qubits <n>'"));
            }
            let v: usize = toks[1]
                .text
                .parse()
                .map_err(|_| Error::parse(line, toks[1].column, "qubit count must be a positive integer"))?;
            super::check_qubit_count(v).map_err(|e| Error::parse(line, toks[1].column, e.to_string()))?;
            n = Some(v);
            continue;
        };
        let arity = match head.text {
            "h" | "s" | "t" => 2,
            "cx" | "rx" | "ry" | "rz" => 3,
            other => return Err(Error::parse(line, head.column, format!("unknown gate '{other}'"))),
        };
        if toks.len() != arity {
            let col = toks.get(arity).map_or(raw.len() + 1, |t| t.column);
            return Err(Error::parse(
                line,
                col,
                format!("'{}' takes {} operands, found {}", head.text, arity - 1, toks.len() - 1),
            ));
        }
        let gate = match head.text {
            "h" => Gate::H(qubit(&toks[1], line, n_q)?),
            "s" => Gate::S(qubit(&toks[1], line, n_q)?),
            "t" => Gate::T(qubit(&toks[1], line, n_q)?),
            "cx" => {
                let c = qubit(&toks[1], line, n_q)?;
                let t = qubit(&toks[2], line, n_q)?;
                if c == t {
                    return Err(Error::parse(line, toks[2].column, "CNOT control equals target"));
                }
                Gate::Cnot(c, t)
            }
            "rx" => Gate::Rx(qubit(&toks[1], line, n_q)?, angle(&toks[2], line)?),
            "ry" => Gate::Ry(qubit(&toks[1], line, n_q)?, angle(&toks[2], line)?),
            "rz" => Gate::Rz(qubit(&toks[1], line, n_q)?, angle(&toks[2], line)?),
            _ => unreachable!(),
        };
        gates.push(gate);
    }
    match n {
        Some(n) => Ok(Circuit::from_parts_unchecked(n, gates)),
        None => Err(Error::parse(last_line.max(1), 1, "missing 'qubits <n>' header")),
    }
}
