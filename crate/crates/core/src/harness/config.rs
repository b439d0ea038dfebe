use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::integrators::{MethodSpec, Scheme};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{FrequencySpec, Mollifier, TorusGrid};

/// Flat `key = value` experiment description.
///
/// Keys: `K`, `rho` (a number or `sqrt(x)`), `g` (`zero`, `monomial:p:c`, sums
/// with `+`), `mollifier` (`identity`, `sinc`), `h`, `scheme` (`lie`, `strang`,
/// `twostep`), `r`, `delta`, `s0`, `eps`, `T`, `modes` (comma list, `a..=b`
/// ranges allowed), `out` (CSV path, empty for none), `seed`, `strict`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid_size: usize,
    pub rho: f64,
    pub g: NonlinearitySpec,
    pub mollifier: Mollifier,
    pub h: f64,
    pub scheme: Scheme,
    pub r: usize,
    pub delta: f64,
    pub s0: f64,
    pub eps: f64,
    pub t_final: f64,
    pub modes: Vec<i64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub strict: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid_size: 8,
            rho: 1.0,
            g: NonlinearitySpec::zero(),
            mollifier: Mollifier::Identity,
            h: 0.01,
            scheme: Scheme::Strang,
            r: 1,
            delta: 0.1,
            s0: 1.0,
            eps: 0.1,
            t_final: 1.0,
            modes: vec![0, 1, 2],
            out: None,
            seed: 0,
            strict: false,
        }
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config(format!("line {line}: {}", msg.into()))
}

fn parse_f64(v: &str) -> Option<f64> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        return inner.trim().parse::<f64>().ok().map(f64::sqrt);
    }
    v.parse().ok()
}

fn parse_modes(v: &str) -> Option<Vec<i64>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..=") {
            let (a, b): (i64, i64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            if b < a {
                return None;
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().ok()?);
        }
    }
    Some(out)
}

fn format_modes(modes: &[i64]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < modes.len() {
        let mut j = i;
        while j + 1 < modes.len() && modes[j + 1] == modes[j] + 1 {
            j += 1;
        }
        if j >= i + 2 {
            parts.push(format!("{}..={}", modes[i], modes[j]));
        } else {
            parts.extend(modes[i..=j].iter().map(|m| m.to_string()));
        }
        i = j + 1;
    }
    parts.join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(cfg_err(line_no, format!("duplicate key '{key}'")));
            }
            let num = |what: &str| parse_f64(value).ok_or_else(|| cfg_err(line_no, format!("bad {what} '{value}'")));
            let int = |what: &str| {
                value
                    .parse::<u64>()
                    .map_err(|_| cfg_err(line_no, format!("bad {what} '{value}'")))
            };
            match key {
                "K" => c.grid_size = int("K")? as usize,
                "rho" => c.rho = num("rho")?,
                "g" => c.g = NonlinearitySpec::parse(value).map_err(|e| cfg_err(line_no, e.to_string()))?,
                "mollifier" => c.mollifier = Mollifier::from_id(value).map_err(|e| cfg_err(line_no, e.to_string()))?,
                "h" => c.h = num("h")?,
                "scheme" => c.scheme = value.parse().map_err(|e: Error| cfg_err(line_no, e.to_string()))?,
                "r" => c.r = int("r")? as usize,
                "delta" => c.delta = num("delta")?,
                "s0" => c.s0 = num("s0")?,
                "eps" => c.eps = num("eps")?,
                "T" => c.t_final = num("T")?,
                "modes" => c.modes = parse_modes(value).ok_or_else(|| cfg_err(line_no, format!("bad mode list '{value}'")))?,
                "out" => c.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
                "seed" => c.seed = int("seed")?,
                "strict" => {
                    c.strict = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(cfg_err(line_no, format!("bad strict flag '{value}'"))),
                    }
                }
                other => return Err(cfg_err(line_no, format!("unknown key '{other}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.grid_size == 0 {
            return bad("K must be positive".into());
        }
        for (name, v) in [("rho", self.rho), ("h", self.h), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [("eps", self.eps), ("T", self.t_final), ("s0", self.s0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        let grid = TorusGrid::new(self.grid_size)?;
        for &k in &self.modes {
            if !grid.contains(k) {
                return bad(format!("observed mode {k} is not in N_K for K = {}", self.grid_size));
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "K = {}", self.grid_size);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "g = {}", self.g.id());
        let _ = writeln!(s, "mollifier = {}", self.mollifier.id());
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "scheme = {}", self.scheme.name());
        let _ = writeln!(s, "r = {}", self.r);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "s0 = {}", self.s0);
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "T = {}", self.t_final);
        let _ = writeln!(s, "modes = {}", format_modes(&self.modes));
        let _ = writeln!(
            s,
            "out = {}",
            self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "strict = {}", self.strict);
        s
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid_size)
    }

    pub fn method(&self) -> Result<MethodSpec> {
        let grid = self.grid()?;
        let freq = FrequencySpec::new(&grid, self.rho)?;
        MethodSpec::new(grid, freq, self.h, self.scheme, self.mollifier.clone())
    }

    /// Number of steps covering `[0, T]`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.h).round() as usize
    }
}
