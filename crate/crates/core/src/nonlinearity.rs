//! The nonlinearity `g` with `g(0) = g'(0) = 0`, its primitive `G` and the
//! Taylor coefficients of `G` at the origin.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One term `c * y^p` of a polynomial nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub power: u32,
    pub coeff: f64,
}

#[derive(Clone)]
enum Kind {
    /// Terms and the dense coefficients of `g` for Horner evaluation.
    Polynomial(Vec<Monomial>, Vec<f64>),
    Custom { g: RealFn, big_g: RealFn },
}

/// Nonlinearity of the equation together with the data needed by the normal
/// form (the Taylor coefficients `G^{(m)}(0)/m!` of its primitive).
#[derive(Clone)]
pub struct NonlinearitySpec {
    id: String,
    kind: Kind,
    /// `taylor[m] = G^{(m)}(0) / m!`; entries past the end are treated as zero
    /// for polynomials and as unknown otherwise.
    taylor: Vec<f64>,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NonlinearitySpec({})", self.id)
    }
}

impl PartialEq for NonlinearitySpec {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        Self {
            id: "zero".into(),
            kind: Kind::Polynomial(Vec::new(), Vec::new()),
            taylor: vec![0.0; 3],
        }
    }

    /// `g(y) = sum c y^p` with every `p >= 2`.
    pub fn polynomial(terms: &[Monomial]) -> Result<Self> {
        let mut merged: Vec<Monomial> = Vec::new();
        for t in terms {
            if t.power < 2 {
                return Err(Error::Parameter(format!(
                    "nonlinearity must vanish to second order, got a y^{} term",
                    t.power
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Parameter("non-finite nonlinearity coefficient".into()));
            }
            match merged.iter_mut().find(|m| m.power == t.power) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(*t),
            }
        }
        merged.retain(|m| m.coeff != 0.0);
        merged.sort_by_key(|m| m.power);
        let max_order = merged.iter().map(|m| m.power as usize + 1).max().unwrap_or(2);
        let mut taylor = vec![0.0; max_order + 1];
        let mut dense = vec![0.0; merged.last().map_or(0, |m| m.power as usize + 1)];
        for m in &merged {
            dense[m.power as usize] = m.coeff;
            taylor[m.power as usize + 1] += m.coeff / (m.power as f64 + 1.0);
        }
        let id = if merged.is_empty() {
            "zero".to_string()
        } else {
            merged
                .iter()
                .map(|m| format!("monomial:{}:{}", m.power, m.coeff))
                .collect::<Vec<_>>()
                .join("+")
        };
        Ok(Self {
            id,
            kind: Kind::Polynomial(merged, dense),
            taylor,
        })
    }

    pub fn monomial(power: u32, coeff: f64) -> Result<Self> {
        Self::polynomial(&[Monomial { power, coeff }])
    }

    /// Arbitrary nonlinearity given in closed form, with `G^{(m)}(0)` for
    /// `m = 0..derivs.len()` supplied for the normal-form path.
    pub fn custom<F, P>(id: impl Into<String>, g: F, big_g: P, derivs: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut fact = 1.0;
        let taylor = derivs
            .iter()
            .enumerate()
            .map(|(m, d)| {
                if m > 0 {
                    fact *= m as f64;
                }
                d / fact
            })
            .collect();
        let spec = Self {
            id: id.into(),
            kind: Kind::Custom {
                g: Arc::new(g),
                big_g: Arc::new(big_g),
            },
            taylor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses `zero`, `monomial:p:c` or a `+`-separated sum of monomials.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Self::zero());
        }
        let mut terms = Vec::new();
        for part in s.split('+') {
            let fields: Vec<&str> = part.trim().split(':').collect();
            match fields.as_slice() {
                ["zero"] => {}
                ["monomial", p, c] => {
                    let power = p
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Config(format!("bad monomial power '{p}'")))?;
                    let coeff = c
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad monomial coefficient '{c}'")))?;
                    terms.push(Monomial { power, coeff });
                }
                _ => return Err(Error::Config(format!("unknown nonlinearity '{part}'"))),
            }
        }
        Self::polynomial(&terms).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.kind, Kind::Polynomial(t, _) if t.is_empty())
    }

    pub fn monomials(&self) -> Option<&[Monomial]> {
        match &self.kind {
            Kind::Polynomial(t, _) => Some(t),
            Kind::Custom { .. } => None,
        }
    }

    #[inline]
    pub fn g(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(_, dense) => dense.iter().rev().fold(0.0, |acc, &c| acc * y + c),
            Kind::Custom { g, .. } => g(y),
        }
    }

    /// Primitive `G` with `G(0) = 0`.
    #[inline]
    pub fn big_g(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(terms, _) => terms
                .iter()
                .map(|m| m.coeff * y.powi(m.power as i32 + 1) / (m.power as f64 + 1.0))
                .sum(),
            Kind::Custom { big_g, .. } => big_g(y),
        }
    }

    /// `c_n = G^{(n+2)}(0) / (n+2)!`.
    pub fn taylor_coefficient(&self, n: usize) -> Result<f64> {
        let m = n + 2;
        match (&self.kind, self.taylor.get(m)) {
            (_, Some(&c)) => Ok(c),
            (Kind::Polynomial(..), None) => Ok(0.0),
            (Kind::Custom { .. }, None) => Err(Error::Parameter(format!(
                "derivative table of '{}' does not reach order {m}",
                self.id
            ))),
        }
    }

    /// Finite-difference checks of `g(0) = g'(0) = 0` and `G' = g`.
    pub fn validate(&self) -> Result<()> {
        let fd = 1e-5;
        let g0 = self.g(0.0);
        let dg0 = (self.g(fd) - self.g(-fd)) / (2.0 * fd);
        if g0.abs() > 1e-8 || dg0.abs() > 1e-8 {
            return Err(Error::Parameter(format!(
                "nonlinearity '{}' must satisfy g(0) = g'(0) = 0 (got {g0:e}, {dg0:e})",
                self.id
            )));
        }
        if self.big_g(0.0).abs() > 1e-14 {
            return Err(Error::Parameter(format!("primitive of '{}' must vanish at 0", self.id)));
        }
        for &y in &[-0.7, -0.31, 0.12, 0.45, 0.9] {
            let dg = (self.big_g(y + fd) - self.big_g(y - fd)) / (2.0 * fd);
            let scale = 1.0 + self.g(y).abs();
            if (dg - self.g(y)).abs() > 1e-8 * scale {
                return Err(Error::Parameter(format!(
                    "primitive of '{}' is inconsistent with g at y = {y}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_coefficients() {
        let nl = NonlinearitySpec::monomial(5, -1.0).unwrap();
        assert_eq!(nl.taylor_coefficient(4).unwrap(), -1.0 / 6.0);
        for n in [1, 2, 3, 5, 9] {
            assert_eq!(nl.taylor_coefficient(n).unwrap(), 0.0);
        }
        assert_eq!(nl.g(2.0), -32.0);
        assert!((nl.big_g(2.0) + 64.0 / 6.0).abs() < 1e-14);
        nl.validate().unwrap();
    }

    #[test]
    fn parse_sums() {
        let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
        assert_eq!(nl.taylor_coefficient(1).unwrap(), 1.0 / 3.0);
        assert_eq!(nl.taylor_coefficient(2).unwrap(), 1.0 / 4.0);
        assert_eq!(nl.g(2.0), 12.0);
        let again = NonlinearitySpec::parse(nl.id()).unwrap();
        assert_eq!(again.monomials(), nl.monomials());
        assert!(NonlinearitySpec::parse("zero").unwrap().is_zero());
        assert!(NonlinearitySpec::parse("monomial:1:1").is_err());
        assert!(NonlinearitySpec::parse("cubic").is_err());
    }

    #[test]
    fn custom_checks() {
        let nl = NonlinearitySpec::custom(
            "sin-cubic",
            |y: f64| y.sin() - y,
            |y: f64| 1.0 - y.cos() - y * y / 2.0,
            &[0.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!((nl.taylor_coefficient(2).unwrap() - 1.0 / 24.0).abs() < 1e-16);
        assert!(nl.taylor_coefficient(3).is_err());
        assert!(NonlinearitySpec::custom("linear", |y: f64| y, |y: f64| y * y / 2.0, &[]).is_err());
        assert!(NonlinearitySpec::custom("wrong", |y: f64| y * y, |y: f64| y * y, &[]).is_err());
    }
}
