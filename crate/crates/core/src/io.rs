//! Plain-text persistence for circuits, ansatz angles, and dual factors.
//!
//! All formats are line-oriented, `#`-commented, and lossless for floats
//! (values are printed with Rust's shortest-roundtrip formatting).

use crate::circuits::{gate_signature, Circuit, HvaParams};
use crate::error::{Error, Result};
use crate::frames::Provenance;
use crate::linalg::RMat;
use std::fmt::Write as _;
use std::path::Path;

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| parse_err(path, format!("line {line}: bad {what} '{tok}'")))
}

/// Write ansatz angles: a `layers` header, then one `layer i γ β` line each.
pub fn save_hva_params(path: impl AsRef<Path>, params: &HvaParams) -> Result<()> {
    let mut out = String::from("# variational angles: layer <index> <gamma> <beta>\n");
    writeln!(out, "layers {}", params.layers()).unwrap();
    for (i, (g, b)) in params.gammas.iter().zip(&params.betas).enumerate() {
        writeln!(out, "layer {i} {g} {b}").unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_hva_params(path: impl AsRef<Path>) -> Result<HvaParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty params file"))?;
    let layers: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["layers", n] => parse_num(path, ln, n, "layer count")?,
        _ => return Err(parse_err(path, format!("line {ln}: expected 'layers <n>'"))),
    };
    let mut gammas = vec![f64::NAN; layers];
    let mut betas = vec![f64::NAN; layers];
    let mut seen = vec![false; layers];
    for (ln, line) in lines {
        match line.split_whitespace().collect::<Vec<_>>()[..] {
            ["layer", i, g, b] => {
                let i: usize = parse_num(path, ln, i, "layer index")?;
                if i >= layers {
                    return Err(parse_err(path, format!("line {ln}: layer {i} out of range")));
                }
                if seen[i] {
                    return Err(parse_err(path, format!("line {ln}: layer {i} repeated")));
                }
                gammas[i] = parse_num(path, ln, g, "gamma")?;
                betas[i] = parse_num(path, ln, b, "beta")?;
                seen[i] = true;
            }
            _ => {
                return Err(parse_err(
                    path,
                    format!("line {ln}: expected 'layer <i> <gamma> <beta>'"),
                ))
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(parse_err(path, format!("layer {missing} missing")));
    }
    Ok(HvaParams { gammas, betas })
}

/// Write a circuit: a `qubits` header, then one op per line
/// (`[interface] <gate> <qubits…> [param]`).
pub fn save_circuit(path: impl AsRef<Path>, circuit: &Circuit) -> Result<()> {
    let mut out = String::from("# ops: [interface] <gate> <qubits...> [param]\n");
    writeln!(out, "qubits {}", circuit.n).unwrap();
    for op in &circuit.ops {
        let g = op.gate();
        let mut line = String::new();
        if op.is_interface() {
            line.push_str("interface ");
        }
        line.push_str(&g.name);
        for q in &g.qubits {
            write!(line, " {q}").unwrap();
        }
        if let Some(p) = g.param {
            write!(line, " {p}").unwrap();
        }
        writeln!(out, "{line}").unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty circuit file"))?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["qubits", n] => parse_num(path, ln, n, "qubit count")?,
        _ => return Err(parse_err(path, format!("line {ln}: expected 'qubits <n>'"))),
    };
    let mut circuit = Circuit::new(n);
    for (ln, line) in lines {
        let mut toks: Vec<&str> = line.split_whitespace().collect();
        let interface = toks.first() == Some(&"interface");
        if interface {
            toks.remove(0);
        }
        let Some((&name, rest)) = toks.split_first() else {
            return Err(parse_err(path, format!("line {ln}: missing gate name")));
        };
        let (arity, takes_param) =
            gate_signature(name).map_err(|e| parse_err(path, format!("line {ln}: {e}")))?;
        let expected = arity + usize::from(takes_param);
        if rest.len() != expected {
            return Err(parse_err(
                path,
                format!("line {ln}: '{name}' expects {expected} arguments, got {}", rest.len()),
            ));
        }
        let qubits: Vec<usize> = rest[..arity]
            .iter()
            .map(|t| parse_num(path, ln, t, "qubit index"))
            .collect::<Result<_>>()?;
        let param = if takes_param {
            Some(parse_num(path, ln, rest[arity], "parameter")?)
        } else {
            None
        };
        let push = if interface {
            Circuit::add_interface
        } else {
            Circuit::add_gate
        };
        push(&mut circuit, name, &qubits, param)
            .map_err(|e| parse_err(path, format!("line {ln}: {e}")))?;
    }
    Ok(circuit)
}

fn write_factor_list(out: &mut String, label: &str, factors: &[RMat]) {
    writeln!(out, "{label} {}", factors.len()).unwrap();
    for f in factors {
        writeln!(out, "factor {} {}", f.nrows(), f.ncols()).unwrap();
        for r in 0..f.nrows() {
            let row: Vec<String> = (0..f.ncols()).map(|c| f[(r, c)].to_string()).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
}

/// Write per-qubit dual factors for both interface sides.
pub fn save_dual_factors(
    path: impl AsRef<Path>,
    out_factors: &[RMat],
    in_factors: &[RMat],
    provenance: Provenance,
) -> Result<()> {
    let mut out = String::from("# dual coefficient factors, row-major\n");
    writeln!(out, "provenance {provenance}").unwrap();
    write_factor_list(&mut out, "factors_out", out_factors);
    write_factor_list(&mut out, "factors_in", in_factors);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_dual_factors(path: impl AsRef<Path>) -> Result<(Vec<RMat>, Vec<RMat>, Provenance)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = content_lines(&text).peekable();
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty dual file"))?;
    let provenance: Provenance = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["provenance", p] => p
            .parse()
            .map_err(|e: String| parse_err(path, format!("line {ln}: {e}")))?,
        _ => return Err(parse_err(path, format!("line {ln}: expected 'provenance <p>'"))),
    };
    let mut read_factors = |label: &str| -> Result<Vec<RMat>> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, format!("missing '{label}' section")))?;
        let count: usize = match line.split_whitespace().collect::<Vec<_>>()[..] {
            [l, n] if l == label => parse_num(path, ln, n, "factor count")?,
            _ => {
                return Err(parse_err(path, format!("line {ln}: expected '{label} <count>'")))
            }
        };
        let mut factors = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| parse_err(path, "missing 'factor' header"))?;
            let (rows, cols) = match line.split_whitespace().collect::<Vec<_>>()[..] {
                ["factor", r, c] => (
                    parse_num::<usize>(path, ln, r, "row count")?,
                    parse_num::<usize>(path, ln, c, "column count")?,
                ),
                _ => {
                    return Err(parse_err(
                        path,
                        format!("line {ln}: expected 'factor <rows> <cols>'"),
                    ))
                }
            };
            let mut m = RMat::zeros(rows, cols);
            for r in 0..rows {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(path, "matrix row missing"))?;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != cols {
                    return Err(parse_err(
                        path,
                        format!("line {ln}: expected {cols} entries, got {}", toks.len()),
                    ));
                }
                for (c, tok) in toks.iter().enumerate() {
                    m[(r, c)] = parse_num(path, ln, tok, "matrix entry")?;
                }
            }
            factors.push(m);
        }
        Ok(factors)
    };
    let out_factors = read_factors("factors_out")?;
    let in_factors = read_factors("factors_in")?;
    Ok((out_factors, in_factors, provenance))
}
