//! Text serialization: `# key=value` manifest lines, then polynomial blocks in
//! the hampoly text format, each introduced by `# block <name> <index> [<power>]`.

use std::collections::BTreeMap;
use std::io::Write;

use super::{BirkhoffDiagnostics, BirkhoffOutput, CohomologySolution, EPS_SIGN};
use crate::error::{Error, Result};
use crate::hampoly::{read_polynomials, write_polynomials, PolyHamiltonian, TimePoly};

/// Parsed `# key=value` header lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("manifest key '{key}' missing"),
            })
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("manifest key '{key}' has bad value '{v}'"),
        })
    }
}

struct Block {
    name: String,
    index: Vec<usize>,
    poly: PolyHamiltonian,
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<writer>", e)
}

fn write_block<W: Write>(w: &mut W, label: &str, p: &PolyHamiltonian) -> Result<()> {
    writeln!(w, "# block {label}").map_err(io_err)?;
    write_polynomials(&mut *w, std::slice::from_ref(p)).map_err(io_err)
}

fn parse_blocks(text: &str) -> Result<(Manifest, Vec<Block>)> {
    let mut manifest = Manifest::default();
    let mut blocks: Vec<(usize, String, Vec<usize>, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("# block ") {
            let mut it = rest.split_whitespace();
            let name = it.next().unwrap_or_default().to_string();
            let index = it
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: n + 1,
                        msg: format!("bad block index '{t}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push((n + 1, name, index, String::new()));
        } else if let Some(rest) = line.strip_prefix('#') {
            if blocks.is_empty() {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    manifest.0.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        } else if let Some(b) = blocks.last_mut() {
            b.3.push_str(line);
            b.3.push('\n');
        } else if !line.is_empty() {
            return Err(Error::Parse {
                line: n + 1,
                msg: "data before the first block".into(),
            });
        }
    }
    let blocks = blocks
        .into_iter()
        .map(|(line, name, index, body)| {
            let mut polys = read_polynomials(&body).map_err(|e| Error::Parse {
                line,
                msg: format!("in block {name}: {e}"),
            })?;
            if polys.len() != 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("block {name} holds {} polynomials, expected 1", polys.len()),
                });
            }
            Ok(Block {
                name,
                index,
                poly: polys.remove(0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, blocks))
}

pub fn write_solution<W: Write>(mut w: W, sol: &CohomologySolution) -> Result<()> {
    let header = format!(
        "# kgnf cohomology solution\n# h={:e}\n# r={}\n# K={}\n# rho={:e}\n# mollifier={}\n# eps_sign={}\n",
        sol.h, sol.r, sol.grid_size, sol.rho, sol.mollifier, EPS_SIGN
    );
    w.write_all(header.as_bytes()).map_err(io_err)?;
    for (n, b) in sol.b.iter().enumerate() {
        for (a, c) in b.coefficients().iter().enumerate() {
            write_block(&mut w, &format!("B {} {a}", n + 1), c)?;
        }
    }
    Ok(())
}

pub fn read_solution(text: &str) -> Result<CohomologySolution> {
    let (m, blocks) = parse_blocks(text)?;
    let eps: f64 = m.parse("eps_sign")?;
    if eps != EPS_SIGN {
        return Err(Error::Parse {
            line: 0,
            msg: format!("file was written with eps_sign = {eps}, this build uses {EPS_SIGN}"),
        });
    }
    let r: usize = m.parse("r")?;
    let k: usize = m.parse("K")?;
    let mut coeffs: Vec<Vec<PolyHamiltonian>> = vec![Vec::new(); r];
    for b in blocks {
        match (b.name.as_str(), b.index.as_slice()) {
            ("B", &[n, a]) if (1..=r).contains(&n) => {
                let v = &mut coeffs[n - 1];
                if v.len() <= a {
                    v.resize(a + 1, PolyHamiltonian::zero(k, n + 2));
                }
                v[a] = b.poly;
            }
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected block {} {:?}", b.name, b.index),
                })
            }
        }
    }
    let b = coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| TimePoly::from_coefficients(k, n + 3, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(CohomologySolution {
        h: m.parse("h")?,
        r,
        grid_size: k,
        rho: m.parse("rho")?,
        mollifier: m.get("mollifier")?.to_string(),
        b,
    })
}

pub fn write_birkhoff<W: Write>(mut w: W, out: &BirkhoffOutput, grid_size: usize, rho: f64) -> Result<()> {
    let mut header = format!(
        "# kgnf birkhoff normal form\n# gamma={:e}\n# r={}\n# K={grid_size}\n# rho={rho:e}\n# min_kept_modulus={:e}\n# max_removed_modulus={:e}\n",
        out.gamma,
        out.chi.len(),
        out.diagnostics.min_kept_modulus,
        out.diagnostics.max_removed_modulus
    );
    for (d, (kept, removed)) in &out.diagnostics.counts {
        header.push_str(&format!("# orbits_{d}={kept},{removed}\n"));
    }
    w.write_all(header.as_bytes()).map_err(io_err)?;
    for (l, c) in out.chi.iter().enumerate() {
        write_block(&mut w, &format!("chi {}", l + 1), c)?;
    }
    for (l, q) in out.q.iter().enumerate() {
        write_block(&mut w, &format!("Q {}", l + 1), q)?;
    }
    Ok(())
}

pub fn read_birkhoff(text: &str) -> Result<BirkhoffOutput> {
    let (m, blocks) = parse_blocks(text)?;
    let r: usize = m.parse("r")?;
    let k: usize = m.parse("K")?;
    let mut chi: Vec<PolyHamiltonian> = (0..r).map(|l| PolyHamiltonian::zero(k, l + 3)).collect();
    let mut q = chi.clone();
    for b in blocks {
        let slot = match (b.name.as_str(), b.index.as_slice()) {
            ("chi", &[l]) if (1..=r).contains(&l) => &mut chi[l - 1],
            ("Q", &[l]) if (1..=r).contains(&l) => &mut q[l - 1],
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected block {} {:?}", b.name, b.index),
                })
            }
        };
        *slot = b.poly;
    }
    let mut counts = BTreeMap::new();
    for (key, v) in &m.0 {
        if let Some(d) = key.strip_prefix("orbits_") {
            if let (Ok(d), Some((a, b))) = (d.parse::<usize>(), v.split_once(',')) {
                if let (Ok(a), Ok(b)) = (a.parse(), b.parse()) {
                    counts.insert(d, (a, b));
                }
            }
        }
    }
    Ok(BirkhoffOutput {
        gamma: m.parse("gamma")?,
        chi,
        q,
        diagnostics: BirkhoffDiagnostics {
            min_kept_modulus: m.parse("min_kept_modulus")?,
            max_removed_modulus: m.parse("max_removed_modulus")?,
            counts,
        },
    })
}
