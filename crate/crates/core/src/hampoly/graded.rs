use num_complex::Complex64;

use super::{PolyHamiltonian, TimePoly};
use crate::error::{Error, Result};

/// Default relative size of the last accepted term of the `phi(ad)` series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 200;

/// Family of t-polynomials indexed by grade; grade `g` has `u`-degree `g + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedFamily {
    grid_size: usize,
    grades: Vec<TimePoly>,
}

impl GradedFamily {
    pub fn zero(grid_size: usize, max_grade: usize) -> Self {
        Self {
            grid_size,
            grades: (0..=max_grade).map(|g| TimePoly::zero(grid_size, g + 2)).collect(),
        }
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    #[inline]
    pub fn max_grade(&self) -> usize {
        self.grades.len() - 1
    }

    pub fn grade(&self, g: usize) -> &TimePoly {
        &self.grades[g]
    }

    pub fn set(&mut self, g: usize, value: TimePoly) -> Result<()> {
        if g > self.max_grade() {
            return Err(Error::Parameter(format!("grade {g} beyond {}", self.max_grade())));
        }
        if value.degree() != g + 2 || value.grid_size() != self.grid_size {
            return Err(Error::Parameter(format!(
                "grade {g} needs degree {} on K={}, got degree {} on K={}",
                g + 2,
                self.grid_size,
                value.degree(),
                value.grid_size()
            )));
        }
        self.grades[g] = value;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.grades.iter().all(|t| t.is_zero())
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        for (a, b) in self.grades.iter_mut().zip(&other.grades) {
            if !b.is_zero() {
                *a = a.add_scaled(b, factor)?;
            }
        }
        Ok(())
    }
}

/// Diagonal multiplication `X -> i (sum sigma lambda_j) X`, i.e. `{B_0, X}` for
/// `B_0 = (1/2) sum lambda_k |u_k|^2`.
pub(crate) fn ad_diagonal_left(p: &PolyHamiltonian, lambda: &[f64]) -> PolyHamiltonian {
    let offset = (p.grid_size() / 2) as i64;
    p.map_stored(|key, c| {
        let s: f64 = key
            .factors()
            .iter()
            .map(|f| f.sign as f64 * lambda[(f.mode as i64 + offset) as usize])
            .sum();
        c * Complex64::new(0.0, s)
    })
}

/// Generator `B = B_0 + B_1 + ... + B_r` of the graded adjoint series, with
/// `B_0 = (1/2) sum lambda_k |u_k|^2` diagonal and `B_i` of grade `i`.
#[derive(Debug, Clone)]
pub struct GradedGenerator<'a> {
    pub b0_lambda: &'a [f64],
    /// `higher[i - 1]` is `B_i`.
    pub higher: &'a [TimePoly],
    /// Overall sign `s` in `phi(s ad_B)`.
    pub sign: f64,
    /// Size of the `t`-interval used to weigh `t`-powers in the stopping test.
    pub t_scale: f64,
}

fn ad_step(gen: &GradedGenerator<'_>, x: &GradedFamily) -> Result<GradedFamily> {
    let max = x.max_grade();
    let mut out = GradedFamily::zero(x.grid_size, max);
    for g in 0..=max {
        let src = x.grade(g);
        if src.is_zero() {
            continue;
        }
        let diag = src.map(|p| Ok(ad_diagonal_left(p, gen.b0_lambda).scale(gen.sign)))?;
        out.grades[g] = out.grades[g].add(&diag)?;
        for (i, b) in gen.higher.iter().enumerate() {
            let target = g + i + 1;
            if target > max || b.is_zero() {
                continue;
            }
            let br = b.bracket(src)?.scale(gen.sign);
            out.grades[target] = out.grades[target].add(&br)?;
        }
    }
    Ok(out)
}

/// `phi(ad_B) Y = sum_k ad_B^k Y / (k+1)!`, truncated at `max_grade`.
///
/// Terms are added until, on every grade, the newest term is below
/// `tail_tol` times the running sum (twice in a row, and not before every
/// grade up to `max_grade` can have been reached).
pub fn exp_ad_graded(gen: &GradedGenerator<'_>, y: &GradedFamily, max_grade: usize, tail_tol: f64) -> Result<GradedFamily> {
    let mut term = GradedFamily::zero(y.grid_size, max_grade);
    for g in 0..=max_grade.min(y.max_grade()) {
        term.grades[g] = y.grade(g).clone();
    }
    let mut sum = term.clone();
    if term.is_zero() {
        return Ok(sum);
    }
    let mut quiet = 0;
    for k in 1..MAX_SERIES_TERMS {
        term = ad_step(gen, &term)?;
        // term now holds ad^k Y / (k+1)! after rescaling by 1/(k+1)
        term = GradedFamily {
            grid_size: term.grid_size,
            grades: term.grades.iter().map(|t| t.scale(1.0 / (k as f64 + 1.0))).collect(),
        };
        sum.add_scaled(&term, 1.0)?;
        let mut worst: (f64, usize) = (0.0, 0);
        for g in 0..=max_grade {
            let inc = term.grade(g).weighted_norm(gen.t_scale);
            let tot = sum.grade(g).weighted_norm(gen.t_scale);
            let rel = if inc == 0.0 { 0.0 } else if tot == 0.0 { f64::INFINITY } else { inc / tot };
            if rel > worst.0 {
                worst = (rel, g);
            }
        }
        if worst.0 <= tail_tol && k >= max_grade {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        if k + 1 == MAX_SERIES_TERMS {
            return Err(Error::SeriesDivergence {
                terms: MAX_SERIES_TERMS,
                grade: worst.1,
                increment: worst.0,
            });
        }
        if term.is_zero() {
            return Ok(sum);
        }
    }
    unreachable!("series loop always returns")
}
