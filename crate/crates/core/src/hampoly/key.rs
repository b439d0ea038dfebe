use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// One factor `u_j` (`sign = +1`) or `conj(u_j)` (`sign = -1`) of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub mode: i16,
    pub sign: i8,
}

impl Factor {
    #[inline]
    pub fn conj(self) -> Self {
        Factor {
            mode: self.mode,
            sign: -self.sign,
        }
    }

    #[inline]
    fn value(self, u: &[Complex64], offset: i64) -> Complex64 {
        let z = u[(self.mode as i64 + offset) as usize];
        if self.sign > 0 {
            z
        } else {
            z.conj()
        }
    }
}

pub(crate) type Factors = SmallVec<[Factor; 6]>;

/// Sorted multiset of factors: the canonical representative of a
/// permutation orbit of `(j, sigma)` tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialKey(Factors);

impl MonomialKey {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, i8)>) -> Result<Self> {
        let mut f = Factors::new();
        for (j, s) in pairs {
            if s != 1 && s != -1 {
                return Err(Error::Parameter(format!("sign must be +1 or -1, got {s}")));
            }
            let mode = i16::try_from(j).map_err(|_| Error::Parameter(format!("mode {j} out of range")))?;
            f.push(Factor { mode, sign: s });
        }
        Ok(Self::from_factors(f))
    }

    pub(crate) fn from_factors(mut f: Factors) -> Self {
        f.sort_unstable();
        MonomialKey(f)
    }

    #[inline]
    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn momentum(&self) -> i64 {
        self.0.iter().map(|f| f.sign as i64 * f.mode as i64).sum()
    }

    pub fn conjugate(&self) -> Self {
        Self::from_factors(self.0.iter().map(|f| f.conj()).collect())
    }

    pub fn is_self_conjugate(&self) -> bool {
        *self == self.conjugate()
    }

    /// Number of distinct ordered tuples in the orbit, `d! / prod(count!)`.
    pub fn multiplicity(&self) -> u64 {
        let mut m: u64 = (1..=self.0.len() as u64).product();
        let mut i = 0;
        while i < self.0.len() {
            let mut c = 1;
            while i + c < self.0.len() && self.0[i + c] == self.0[i] {
                c += 1;
            }
            m /= (1..=c as u64).product::<u64>();
            i += c;
        }
        m
    }

    /// `prod u_{j_i}^{sigma_i}`; `offset` maps a mode to its storage position.
    #[inline]
    pub(crate) fn monomial(&self, u: &[Complex64], offset: i64) -> Complex64 {
        self.0
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.value(u, offset))
    }

    /// The monomial with the factor at position `skip` removed.
    #[inline]
    pub(crate) fn monomial_without(&self, u: &[Complex64], offset: i64, skip: usize) -> Complex64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .fold(Complex64::new(1.0, 0.0), |acc, (_, f)| acc * f.value(u, offset))
    }

    /// Number of occurrences of `f`.
    pub fn count(&self, f: Factor) -> usize {
        self.0.iter().filter(|&&g| g == f).count()
    }

    /// Factors with one occurrence of `f` removed (assumed present).
    pub(crate) fn without(&self, f: Factor) -> Factors {
        let mut out = self.0.clone();
        if let Some(pos) = out.iter().position(|&g| g == f) {
            out.remove(pos);
        }
        out
    }

    /// Signed count `sum sigma_a 1_{|j_a| = b}` for every `b = 0..=max_abs`.
    pub fn abs_mode_profile(&self, max_abs: usize) -> Vec<i64> {
        let mut m = vec![0i64; max_abs + 1];
        for f in &self.0 {
            m[f.mode.unsigned_abs() as usize] += f.sign as i64;
        }
        m
    }
}

impl fmt::Display for MonomialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {:+})", x.mode, x.sign)?;
        }
        write!(f, "]")
    }
}
