//! Exact integer characteristic polynomials by multimodular reduction.

use rug::{Assign, Integer};

use crate::error::{Error, Result};

/// Arithmetic modulo an odd prime `p < 2^62` in Montgomery form.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Mont {
    p: u64,
    pinv: u64,
    r2: u64,
}

impl Mont {
    pub(crate) fn new(p: u64) -> Self {
        debug_assert!(p % 2 == 1 && p < 1 << 62);
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Mont { p, pinv: inv.wrapping_neg(), r2 }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.pinv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub(crate) fn to_mont(&self, a: u64) -> u64 {
        self.redc(a as u128 * self.r2 as u128)
    }

    pub(crate) fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    pub(crate) fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub(crate) fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below `2^62`, descending.
pub(crate) fn large_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime_u64(n) {
            out.push(n);
        }
        n -= 2;
    }
    out
}

fn reduce(x: &Integer, p: u64, tmp: &mut Integer) -> u64 {
    tmp.assign(x % p);
    let r = tmp.to_i64().expect("remainder fits");
    if r < 0 {
        (r + p as i64) as u64
    } else {
        r as u64
    }
}

/// Characteristic polynomial of `a` modulo `p`, coefficients of `x^0..x^d` in ordinary form.
pub(crate) fn charpoly_mod(a: &[Vec<u64>], mt: &Mont) -> Vec<u64> {
    let n = a.len();
    let mut h: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| mt.to_mont(x)).collect()).collect();
    // similarity reduction to upper Hessenberg form
    for m in 1..n.saturating_sub(1) {
        let Some(piv) = (m..n).find(|&i| h[i][m - 1] != 0) else {
            continue;
        };
        if piv != m {
            h.swap(piv, m);
            for row in h.iter_mut() {
                row.swap(piv, m);
            }
        }
        let inv = mt.inv(h[m][m - 1]);
        for i in m + 1..n {
            if h[i][m - 1] == 0 {
                continue;
            }
            let u = mt.mul(h[i][m - 1], inv);
            let (top, bottom) = h.split_at_mut(i);
            let rm = &top[m];
            let ri = &mut bottom[0];
            for c in m - 1..n {
                ri[c] = mt.sub(ri[c], mt.mul(u, rm[c]));
            }
            for row in h.iter_mut() {
                let t = mt.mul(u, row[i]);
                row[m] = mt.add(row[m], t);
            }
        }
    }
    let one = mt.to_mont(1);
    let mut polys: Vec<Vec<u64>> = vec![vec![one]];
    for m in 1..=n {
        let prev = &polys[m - 1];
        let hmm = h[m - 1][m - 1];
        let mut pm = vec![0u64; m + 1];
        for (j, &c) in prev.iter().enumerate() {
            pm[j + 1] = mt.add(pm[j + 1], c);
            pm[j] = mt.sub(pm[j], mt.mul(hmm, c));
        }
        let mut t = one;
        for i in (1..m).rev() {
            t = mt.mul(t, h[i][i - 1]);
            if t == 0 {
                break;
            }
            let coef = mt.mul(h[i - 1][m - 1], t);
            if coef == 0 {
                continue;
            }
            for (j, &c) in polys[i - 1].iter().enumerate() {
                pm[j] = mt.sub(pm[j], mt.mul(coef, c));
            }
        }
        polys.push(pm);
    }
    polys.pop().unwrap().into_iter().map(|c| mt.from_mont(c)).collect()
}

/// Bits needed to hold any coefficient of a degree-`d` monic polynomial whose roots
/// are bounded by `2^root_log2` in absolute value.
pub(crate) fn coefficient_bits(d: usize, root_log2: f64) -> f64 {
    let mut best: f64 = 0.0;
    let mut lbinom = 0.0f64;
    for m in 0..=d {
        if m > 0 {
            lbinom += ((d - m + 1) as f64 / m as f64).log2();
        }
        best = best.max(lbinom + m as f64 * root_log2);
    }
    best
}

/// Exact characteristic polynomial `det(xI - A)` (coefficients of `x^0..x^d`) of an
/// integer matrix whose eigenvalues are bounded by `2^root_log2`.
pub fn charpoly_bounded(a: &[Vec<Integer>], root_log2: f64) -> Result<Vec<Integer>> {
    let d = a.len();
    if a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let bits = coefficient_bits(d, root_log2) + 2.0;
    let count = (bits / 61.0).ceil() as usize + 2;
    let primes = large_primes(count);
    let mut coeffs = vec![Integer::new(); d + 1];
    let mut modulus = Integer::from(1);
    let mut tmp = Integer::new();
    let mut reduced = vec![vec![0u64; d]; d];
    let mut previous: Option<Vec<Integer>> = None;
    for (idx, &p) in primes.iter().enumerate() {
        let mt = Mont::new(p);
        for (ri, row) in a.iter().enumerate() {
            for (ci, x) in row.iter().enumerate() {
                reduced[ri][ci] = reduce(x, p, &mut tmp);
            }
        }
        let cp = charpoly_mod(&reduced, &mt);
        let minv = mt.from_mont(mt.inv(mt.to_mont(reduce(&modulus, p, &mut tmp))));
        let minv_m = mt.to_mont(minv);
        for (c, &r) in coeffs.iter_mut().zip(cp.iter()) {
            let cur = reduce(c, p, &mut tmp);
            let diff = mt.to_mont(if r >= cur { r - cur } else { r + p - cur });
            let t = mt.from_mont(mt.mul(diff, minv_m));
            if t != 0 {
                *c += &modulus * t;
            }
        }
        modulus *= p;
        if idx + 2 == primes.len() {
            previous = Some(symmetric(&coeffs, &modulus));
        }
    }
    let result = symmetric(&coeffs, &modulus);
    if let Some(prev) = previous {
        if prev != result {
            return Err(Error::Internal("characteristic polynomial did not stabilize".into()));
        }
    }
    if result[d] != 1 {
        return Err(Error::Internal("characteristic polynomial not monic".into()));
    }
    Ok(result)
}

fn symmetric(coeffs: &[Integer], modulus: &Integer) -> Vec<Integer> {
    let half = Integer::from(modulus >> 1);
    coeffs
        .iter()
        .map(|c| if *c > half { Integer::from(c - modulus) } else { c.clone() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Integer>> {
        rows.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect()
    }

    #[test]
    fn montgomery_matches_u128() {
        let p = large_primes(1)[0];
        let mt = Mont::new(p);
        let vals = [0u64, 1, 2, p - 1, p / 3, 123_456_789_012_345];
        for &a in &vals {
            for &b in &vals {
                let want = mulmod(a, b, p);
                let got = mt.from_mont(mt.mul(mt.to_mont(a), mt.to_mont(b)));
                assert_eq!(got, want);
            }
            if a != 0 {
                let ia = mt.inv(mt.to_mont(a));
                assert_eq!(mt.from_mont(mt.mul(ia, mt.to_mont(a))), 1);
            }
        }
    }

    #[test]
    fn primes_are_prime() {
        let ps = large_primes(3);
        assert!(ps.iter().all(|&p| p < 1 << 62 && p > 1 << 61));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn small_matrices() {
        // [[1,2],[3,4]] -> x^2 - 5x - 2
        let cp = charpoly_bounded(&mat(&[&[1, 2], &[3, 4]]), 3.0).unwrap();
        assert_eq!(cp, vec![Integer::from(-2), Integer::from(-5), Integer::from(1)]);
        // needs pivoting: zero subdiagonal entry
        let cp = charpoly_bounded(&mat(&[&[2, 1, 1], &[0, 3, 1], &[5, 0, 1]]), 4.0).unwrap();
        let a = [[2i64, 1, 1], [0, 3, 1], [5, 0, 1]];
        let tr = a[0][0] + a[1][1] + a[2][2];
        let minors = (a[0][0] * a[1][1] - a[0][1] * a[1][0])
            + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
            + (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        assert_eq!(cp, vec![Integer::from(-det), Integer::from(minors), Integer::from(-tr), Integer::from(1)]);
    }
}
