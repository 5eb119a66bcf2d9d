//! Exact Hecke operator matrices on a Miller basis.

use rug::ops::Pow;
use rug::Integer;

use super::qexp::QExpansion;
use crate::arith::is_prime;
use crate::error::{Error, Result};

/// Matrix of `T_p` in a Miller basis: column `j` holds the first `d` coefficients of `T_p g_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeMatrix {
    weight: u32,
    prime: u64,
    entries: Vec<Vec<Integer>>,
}

impl HeckeMatrix {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Vec<Integer>] {
        &self.entries
    }

    pub fn trace(&self) -> Integer {
        let mut t = Integer::new();
        for (i, row) in self.entries.iter().enumerate() {
            t += &row[i];
        }
        t
    }

    pub fn mul(&self, other: &HeckeMatrix) -> Vec<Vec<Integer>> {
        let d = self.dim();
        let mut out = vec![vec![Integer::new(); d]; d];
        for i in 0..d {
            for k in 0..d {
                if self.entries[i][k] == 0 {
                    continue;
                }
                for j in 0..d {
                    out[i][j] += &self.entries[i][k] * &other.entries[k][j];
                }
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &HeckeMatrix) -> bool {
        self.mul(other) == other.mul(self)
    }
}

/// Exact matrix of `T_p: a(n) -> a(pn) + p^(k-1) a(n/p)` on `basis`.
pub fn hecke_matrix(k: u32, p: u64, basis: &[QExpansion]) -> Result<HeckeMatrix> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let d = basis.len();
    let needed = p as usize * (d + 1);
    for g in basis {
        if g.weight() != k {
            return Err(Error::InvalidArgument("basis weight mismatch".into()));
        }
        if g.nterms() < needed {
            return Err(Error::InsufficientCoefficients { needed, available: g.nterms() });
        }
    }
    let pk = Integer::from(p).pow(k - 1);
    let pu = p as usize;
    let mut entries = vec![vec![Integer::new(); d]; d];
    for (j, g) in basis.iter().enumerate() {
        for i in 1..=d {
            let mut v = g.coeff(pu * i).clone();
            if i % pu == 0 {
                v += &pk * g.coeff(i / pu);
            }
            entries[i - 1][j] = v;
        }
    }
    Ok(HeckeMatrix { weight: k, prime: p, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::miller::miller_basis;

    #[test]
    fn delta_t2() {
        let b = miller_basis(12, 10).unwrap();
        let m = hecke_matrix(12, 2, &b).unwrap();
        assert_eq!(m.entries(), &[vec![Integer::from(-24)]]);
        let m3 = hecke_matrix(12, 3, &b).unwrap();
        assert_eq!(m3.entries()[0][0], 252);
    }

    #[test]
    fn weight_24_trace_and_commutation() {
        let b = miller_basis(24, 20).unwrap();
        let t2 = hecke_matrix(24, 2, &b).unwrap();
        let t3 = hecke_matrix(24, 3, &b).unwrap();
        assert_eq!(t2.trace(), 1080);
        assert!(t2.commutes_with(&t3));
    }

    #[test]
    fn insufficient_terms() {
        let b = miller_basis(24, 8).unwrap();
        assert!(hecke_matrix(24, 2, &b).is_ok());
        assert!(matches!(hecke_matrix(24, 3, &b), Err(Error::InsufficientCoefficients { .. })));
    }
}
