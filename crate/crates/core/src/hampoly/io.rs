//! Line-based text form: a block per polynomial, headed by `degree K`, then one
//! line `j_1 s_1 ... j_d s_d re im` per stored orbit. Lines starting with `#`
//! are comments (used for manifests).

use std::io::Write;

use num_complex::Complex64;

use super::key::MonomialKey;
use super::PolyHamiltonian;
use crate::error::{Error, Result};

pub fn write_polynomials<W: Write>(mut w: W, polys: &[PolyHamiltonian]) -> std::io::Result<()> {
    for p in polys {
        writeln!(w, "{} {}", p.degree(), p.grid_size())?;
        for (key, c) in p.iter() {
            for f in key.factors() {
                write!(w, "{} {} ", f.mode, f.sign)?;
            }
            writeln!(w, "{:.16e} {:.16e}", c.re, c.im)?;
        }
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_polynomials(text: &str) -> Result<Vec<PolyHamiltonian>> {
    let mut out: Vec<PolyHamiltonian> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() == 2 {
            let degree = tokens[0].parse::<usize>().map_err(|_| parse_err(line_no, "bad degree"))?;
            let k = tokens[1].parse::<usize>().map_err(|_| parse_err(line_no, "bad grid size"))?;
            out.push(PolyHamiltonian::zero(k, degree));
            continue;
        }
        let p = out
            .last_mut()
            .ok_or_else(|| parse_err(line_no, "coefficient line before a `degree K` header"))?;
        let d = p.degree();
        if tokens.len() != 2 * d + 2 {
            return Err(parse_err(line_no, format!("expected {} fields, got {}", 2 * d + 2, tokens.len())));
        }
        let mut pairs = Vec::with_capacity(d);
        for i in 0..d {
            let j = tokens[2 * i].parse::<i64>().map_err(|_| parse_err(line_no, "bad mode"))?;
            let s = tokens[2 * i + 1].parse::<i8>().map_err(|_| parse_err(line_no, "bad sign"))?;
            pairs.push((j, s));
        }
        let key = MonomialKey::from_pairs(pairs).map_err(|e| parse_err(line_no, e.to_string()))?;
        let re = tokens[2 * d].parse::<f64>().map_err(|_| parse_err(line_no, "bad real part"))?;
        let im = tokens[2 * d + 1].parse::<f64>().map_err(|_| parse_err(line_no, "bad imaginary part"))?;
        let k = p.grid_size() as i64;
        if key.momentum().rem_euclid(k) != 0 {
            return Err(parse_err(line_no, format!("momentum condition violated by {key}")));
        }
        if key.factors().iter().any(|f| (f.mode as i64) < -(k / 2) || (f.mode as i64) >= k - k / 2) {
            return Err(parse_err(line_no, format!("mode out of range in {key}")));
        }
        if key > key.conjugate() {
            return Err(parse_err(line_no, format!("{key} is not a stored representative")));
        }
        p.coeffs.insert(key, Complex64::new(re, im));
    }
    Ok(out)
}
