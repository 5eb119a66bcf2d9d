//! Exact integer q-expansions of E4, E6 and Delta.

use rug::Integer;

use crate::arith::sigma;
use crate::error::{Error, Result};

/// Truncated Fourier expansion `c + a(1) q + ... + a(N) q^N` with exact integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    weight: u32,
    constant: Integer,
    coeffs: Vec<Integer>,
}

impl QExpansion {
    pub fn new(weight: u32, constant: Integer, coeffs: Vec<Integer>) -> Result<Self> {
        if weight < 4 || weight % 2 != 0 {
            return Err(Error::InvalidWeight { weight, reason: "must be even and >= 4" });
        }
        Ok(QExpansion { weight, constant, coeffs })
    }

    /// Builds from a dense vector whose entry 0 is the constant term.
    pub(crate) fn from_dense(weight: u32, mut dense: Vec<Integer>) -> Self {
        let constant = if dense.is_empty() { Integer::new() } else { dense.remove(0) };
        QExpansion { weight, constant, coeffs: dense }
    }

    pub(crate) fn to_dense(&self) -> Vec<Integer> {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(self.constant.clone());
        v.extend(self.coeffs.iter().cloned());
        v
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn nterms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn constant(&self) -> &Integer {
        &self.constant
    }

    /// Coefficients `a(1..=N)`.
    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// `a(n)`; `a(0)` is the constant term.
    pub fn coeff(&self, n: usize) -> &Integer {
        if n == 0 {
            &self.constant
        } else {
            &self.coeffs[n - 1]
        }
    }

    pub fn is_cusp_form(&self) -> bool {
        self.constant == 0
    }
}

/// Dense product truncated to `len` entries.
pub(crate) fn mul_trunc(a: &[Integer], b: &[Integer], len: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); len];
    let va = a.iter().position(|x| *x != 0);
    let vb = b.iter().position(|x| *x != 0);
    let (Some(va), Some(vb)) = (va, vb) else {
        return out;
    };
    for i in va..a.len().min(len) {
        if a[i] == 0 {
            continue;
        }
        let jmax = (len - i).min(b.len());
        for j in vb..jmax {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

/// Inverse of a series with constant term 1, truncated to `len`.
pub(crate) fn inverse_unit(a: &[Integer], len: usize) -> Result<Vec<Integer>> {
    if a.first().map_or(true, |c| *c != 1) {
        return Err(Error::Internal("series inverse needs constant term 1".into()));
    }
    let mut out = vec![Integer::new(); len];
    if len == 0 {
        return Ok(out);
    }
    out[0] = Integer::from(1);
    for n in 1..len {
        let mut acc = Integer::new();
        for j in 1..=n.min(a.len() - 1) {
            acc += &a[j] * &out[n - j];
        }
        out[n] = -acc;
    }
    Ok(out)
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n` or `E6 = 1 - 504 sum sigma_5(n) q^n`.
pub fn eisenstein_qexp(weight: u32, nterms: usize) -> Result<QExpansion> {
    let (mult, r): (i64, u32) = match weight {
        4 => (240, 3),
        6 => (-504, 5),
        _ => return Err(Error::InvalidWeight { weight, reason: "Eisenstein series available for 4 and 6" }),
    };
    let coeffs = (1..=nterms as u64).map(|n| sigma(n, r) * mult).collect();
    Ok(QExpansion { weight, constant: Integer::from(1), coeffs })
}

/// `Delta = (E4^3 - E6^2) / 1728`.
pub fn delta_qexp(nterms: usize) -> Result<QExpansion> {
    let len = nterms + 1;
    let e4 = eisenstein_qexp(4, nterms)?.to_dense();
    let e6 = eisenstein_qexp(6, nterms)?.to_dense();
    let e4sq = mul_trunc(&e4, &e4, len);
    let e4cube = mul_trunc(&e4sq, &e4, len);
    let e6sq = mul_trunc(&e6, &e6, len);
    let d1728 = Integer::from(1728);
    let mut dense = Vec::with_capacity(len);
    for (x, y) in e4cube.into_iter().zip(e6sq) {
        let num = x - y;
        if !num.is_divisible(&d1728) {
            return Err(Error::Internal("inexact division by 1728".into()));
        }
        dense.push(num.div_exact(&d1728));
    }
    Ok(QExpansion::from_dense(12, dense))
}

/// Dimension of the space of level-one cusp forms of weight `k`.
pub fn dim_cusp_forms(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let m = (k / 12) as usize + usize::from(k % 12 != 2);
    m - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn eisenstein_examples() {
        let e4 = eisenstein_qexp(4, 2).unwrap();
        assert_eq!(*e4.constant(), 1);
        assert_eq!(e4.coeffs(), &ints(&[240, 2160])[..]);
        let e6 = eisenstein_qexp(6, 1).unwrap();
        assert_eq!(e6.coeffs(), &ints(&[-504])[..]);
        let empty = eisenstein_qexp(4, 0).unwrap();
        assert_eq!(empty.nterms(), 0);
        assert_eq!(*empty.constant(), 1);
        assert!(eisenstein_qexp(8, 3).is_err());
    }

    #[test]
    fn delta_examples() {
        let d = delta_qexp(4).unwrap();
        assert!(d.is_cusp_form());
        assert_eq!(d.coeffs(), &ints(&[1, -24, 252, -1472])[..]);
    }

    #[test]
    fn delta_matches_product_formula() {
        // q * prod (1 - q^n)^24
        let n = 40;
        let mut p = vec![Integer::new(); n + 1];
        p[1] = Integer::from(1);
        for m in 1..=n {
            for _ in 0..24 {
                for i in (m..=n).rev() {
                    let t = p[i - m].clone();
                    p[i] -= t;
                }
            }
        }
        let d = delta_qexp(n).unwrap();
        assert_eq!(d.to_dense(), p);
    }

    #[test]
    fn dimension_formula() {
        let expect = [(12, 1), (14, 0), (16, 1), (24, 2), (26, 1), (36, 3), (38, 2), (48, 4), (50, 3)];
        for (k, d) in expect {
            assert_eq!(dim_cusp_forms(k), d, "k={k}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let e6 = eisenstein_qexp(6, 20).unwrap().to_dense();
        let inv = inverse_unit(&e6, 21).unwrap();
        let prod = mul_trunc(&e6, &inv, 21);
        assert_eq!(prod[0], 1);
        assert!(prod[1..].iter().all(|x| *x == 0));
    }
}
