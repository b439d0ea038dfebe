use super::{poisson_bracket, PolyHamiltonian};
use crate::error::{Error, Result};

/// A polynomial in `t` whose coefficients are polynomials of one fixed
/// degree in `u`: `sum_a t^a X_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoly {
    grid_size: usize,
    degree: usize,
    coeffs: Vec<PolyHamiltonian>,
}

impl TimePoly {
    pub fn zero(grid_size: usize, degree: usize) -> Self {
        Self {
            grid_size,
            degree,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(p: PolyHamiltonian) -> Self {
        Self {
            grid_size: p.grid_size(),
            degree: p.degree(),
            coeffs: vec![p],
        }
    }

    pub fn from_coefficients(grid_size: usize, degree: usize, coeffs: Vec<PolyHamiltonian>) -> Result<Self> {
        for c in &coeffs {
            if c.grid_size() != grid_size || c.degree() != degree {
                return Err(Error::Parameter(format!(
                    "t-coefficient of degree {} on K={} in a family of degree {degree} on K={grid_size}",
                    c.degree(),
                    c.grid_size()
                )));
            }
        }
        let mut tp = Self {
            grid_size,
            degree,
            coeffs,
        };
        tp.trim();
        Ok(tp)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_empty()) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients by power of `t` (trailing zeros trimmed).
    #[inline]
    pub fn coefficients(&self) -> &[PolyHamiltonian] {
        &self.coeffs
    }

    /// Highest power of `t` present, `None` for the zero family.
    pub fn t_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_empty())
    }

    pub fn coefficient(&self, power: usize) -> PolyHamiltonian {
        self.coeffs
            .get(power)
            .cloned()
            .unwrap_or_else(|| PolyHamiltonian::zero(self.grid_size, self.degree))
    }

    /// `sum_a t^a X_a` as a single polynomial.
    pub fn eval(&self, t: f64) -> Result<PolyHamiltonian> {
        let mut acc = PolyHamiltonian::zero(self.grid_size, self.degree);
        let mut tp = 1.0;
        for c in &self.coeffs {
            acc = acc.add_scaled(c, tp)?;
            tp *= t;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(a, c)| c.scale(a as f64))
            .collect();
        let mut tp = Self {
            grid_size: self.grid_size,
            degree: self.degree,
            coeffs,
        };
        tp.trim();
        tp
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![PolyHamiltonian::zero(self.grid_size, self.degree)];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(a, c)| c.scale(1.0 / (a as f64 + 1.0))),
        );
        let mut tp = Self {
            grid_size: self.grid_size,
            degree: self.degree,
            coeffs,
        };
        tp.trim();
        tp
    }

    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.grid_size != other.grid_size || self.degree != other.degree {
            return Err(Error::Parameter("adding incompatible t-polynomials".into()));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|a| self.coefficient(a).add_scaled(&other.coefficient(a), factor))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coefficients(self.grid_size, self.degree, coeffs)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut tp = Self {
            grid_size: self.grid_size,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.scale(factor)).collect(),
        };
        tp.trim();
        tp
    }

    /// Applies a `u`-linear map to every `t`-coefficient.
    pub fn map(&self, mut f: impl FnMut(&PolyHamiltonian) -> Result<PolyHamiltonian>) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        let degree = coeffs.first().map(|c| c.degree()).unwrap_or(self.degree);
        Self::from_coefficients(self.grid_size, degree, coeffs)
    }

    /// `{self, other}` with the `t`-powers multiplied out.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let degree = self.degree + other.degree - 2;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.grid_size, degree));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs: Vec<PolyHamiltonian> = (0..n).map(|_| PolyHamiltonian::zero(self.grid_size, degree)).collect();
        for (a, x) in self.coeffs.iter().enumerate() {
            if x.is_empty() {
                continue;
            }
            for (b, y) in other.coeffs.iter().enumerate() {
                if y.is_empty() {
                    continue;
                }
                coeffs[a + b] = coeffs[a + b].add(&poisson_bracket(x, y)?)?;
            }
        }
        Self::from_coefficients(self.grid_size, degree, coeffs)
    }

    /// `sum_a scale^a ||X_a||_H`, a size measure for `t` in `[0, scale]`.
    pub fn weighted_norm(&self, scale: f64) -> f64 {
        let mut w = 1.0;
        let mut s = 0.0;
        for c in &self.coeffs {
            s += w * c.h_norm();
            w *= scale;
        }
        s
    }
}
