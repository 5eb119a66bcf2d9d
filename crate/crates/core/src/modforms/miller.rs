//! Integer echelon basis of level-one cusp forms.

use rug::Integer;

use super::qexp::{delta_qexp, dim_cusp_forms, eisenstein_qexp, inverse_unit, mul_trunc, QExpansion};
use crate::error::{Error, Result};

fn check_weight(k: u32) -> Result<()> {
    if k % 2 != 0 {
        return Err(Error::InvalidWeight { weight: k, reason: "must be even" });
    }
    if k < 12 {
        return Err(Error::InvalidWeight { weight: k, reason: "must be >= 12" });
    }
    Ok(())
}

fn pow_trunc(a: &[Integer], e: u32, len: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); len];
    if len > 0 {
        out[0] = Integer::from(1);
    }
    let mut base = a[..a.len().min(len)].to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            out = mul_trunc(&out, &base, len);
        }
        e >>= 1;
        if e > 0 {
            base = mul_trunc(&base, &base, len);
        }
    }
    out
}

/// Forms `g_1..g_d` of weight `k` with `a_{g_i}(j) = [i == j]` for `1 <= i, j <= d`.
pub fn miller_basis(k: u32, nterms: usize) -> Result<Vec<QExpansion>> {
    check_weight(k)?;
    let d = dim_cusp_forms(k);
    let needed = 2 * d + 2;
    if nterms < needed {
        return Err(Error::InsufficientCoefficients { needed, available: nterms });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let len = nterms + 1;
    let rest = k - 12 * d as u32;
    let (a, b) = match rest {
        0 => (0, 0),
        4 => (1, 0),
        6 => (0, 1),
        8 => (2, 0),
        10 => (1, 1),
        14 => (2, 1),
        _ => return Err(Error::Internal(format!("unexpected residual weight {rest}"))),
    };
    let e4 = eisenstein_qexp(4, nterms)?.to_dense();
    let e6 = eisenstein_qexp(6, nterms)?.to_dense();
    let delta = delta_qexp(nterms)?.to_dense();
    let e6sq = mul_trunc(&e6, &e6, len);

    // F_j = Delta^j E6^(2(d-j)) E4^a E6^b = G * R^j with G = E4^a E6^(b+2d), R = Delta / E6^2
    let mut g = pow_trunc(&e4, a, len);
    g = mul_trunc(&g, &pow_trunc(&e6, b + 2 * d as u32, len), len);
    let r = mul_trunc(&delta, &inverse_unit(&e6sq, len)?, len);

    let mut forms: Vec<Vec<Integer>> = Vec::with_capacity(d);
    let mut rj = r.clone();
    for j in 1..=d {
        forms.push(mul_trunc(&g, &rj, len));
        if j < d {
            rj = mul_trunc(&rj, &r, len);
        }
    }

    for (j, f) in forms.iter().enumerate() {
        let lead = j + 1;
        if f[lead] != 1 || f[..lead].iter().any(|x| *x != 0) {
            return Err(Error::Internal(format!("echelon rank check failed at row {lead}")));
        }
    }

    for i in (0..d).rev() {
        for j in i + 1..d {
            let c = forms[i][j + 1].clone();
            if c != 0 {
                let (head, tail) = forms.split_at_mut(j);
                let target = &mut head[i];
                for (x, y) in target.iter_mut().zip(tail[0].iter()).skip(j + 1) {
                    *x -= &c * y;
                }
            }
        }
    }

    Ok(forms.into_iter().map(|f| QExpansion::from_dense(k, f)).collect())
}
