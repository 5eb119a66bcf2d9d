//! Versioned text cache for eigenforms.
//!
//! ```text
//! CUSPZERO-EIGEN v1 k=24 idx=0 prec=192 nterms=26
//! 1 1.000...e0
//! 2 -1.386...e0
//! ...
//! EXACT
//! 1 1
//! ...
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rug::{Float, Integer};

use super::eigen::{default_nterms, eigenforms, Eigenform};
use super::qexp::dim_cusp_forms;
use crate::error::{Error, Result};

const MAGIC: &str = "CUSPZERO-EIGEN";
const VERSION: &str = "v1";

/// Significant decimal digits written for a given mantissa size.
pub fn decimal_digits(precision_bits: u32) -> usize {
    (precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// `<dir>/eigen_k<k>_i<idx>.txt`
pub fn cache_path(dir: &Path, k: u32, idx: usize) -> PathBuf {
    dir.join(format!("eigen_k{k:05}_i{idx:03}.txt"))
}

pub fn format_eigenform(f: &Eigenform) -> String {
    let digits = decimal_digits(f.precision_bits());
    let mut s = format!(
        "{MAGIC} {VERSION} k={} idx={} prec={} nterms={}\n",
        f.weight(),
        f.dim_index(),
        f.precision_bits(),
        f.nterms()
    );
    for (n, x) in f.lambdas().iter().enumerate() {
        s.push_str(&format!("{} {}\n", n + 1, x.to_string_radix(10, Some(digits))));
    }
    if let Some(a) = f.a_int() {
        s.push_str("EXACT\n");
        for (n, x) in a.iter().enumerate() {
            s.push_str(&format!("{} {}\n", n + 1, x));
        }
    }
    s
}

fn header_field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    let tok = tok.ok_or_else(|| Error::CacheFormat(format!("missing header field {key}")))?;
    tok.strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::CacheFormat(format!("expected {key}=..., found {tok}")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::CacheFormat(format!("bad {what}: {s}")))
}

fn mantissa_digits(s: &str) -> usize {
    let body = s.trim_start_matches('-');
    let mant = body.split(['e', 'E', '@']).next().unwrap_or("");
    mant.chars().filter(|c| c.is_ascii_digit()).count()
}

pub fn parse_eigenform(text: &str) -> Result<Eigenform> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::CacheFormat("empty file".into()))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(MAGIC) {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    match toks.next() {
        Some(VERSION) => {}
        Some(v) => return Err(Error::CacheFormat(format!("unsupported version {v}"))),
        None => return Err(Error::CacheFormat("missing version".into())),
    }
    let k: u32 = parse_num(header_field(toks.next(), "k")?, "weight")?;
    let idx: usize = parse_num(header_field(toks.next(), "idx")?, "index")?;
    let prec: u32 = parse_num(header_field(toks.next(), "prec")?, "precision")?;
    let nterms: usize = parse_num(header_field(toks.next(), "nterms")?, "nterms")?;
    if toks.next().is_some() {
        return Err(Error::CacheFormat("trailing header fields".into()));
    }
    if prec < 64 || nterms == 0 {
        return Err(Error::CacheFormat("invalid header values".into()));
    }
    let digits = decimal_digits(prec);
    let mut lambdas = Vec::with_capacity(nterms);
    for n in 1..=nterms {
        let line = lines.next().ok_or_else(|| Error::CacheFormat(format!("truncated at n={n}")))?;
        let (idx_s, val) = line
            .split_once(' ')
            .ok_or_else(|| Error::CacheFormat(format!("malformed line for n={n}")))?;
        if parse_num::<usize>(idx_s, "index")? != n {
            return Err(Error::CacheFormat(format!("out-of-order line for n={n}")));
        }
        let got = mantissa_digits(val);
        if got != digits && !(val.trim_start_matches('-') == "0" || val.starts_with("0.")) {
            return Err(Error::CacheFormat(format!("n={n}: {got} digits, expected {digits}")));
        }
        let parsed = Float::parse(val).map_err(|_| Error::CacheFormat(format!("n={n}: bad decimal")))?;
        lambdas.push(Float::with_val(prec, parsed));
    }
    let mut a_int = None;
    match lines.next() {
        None => {}
        Some("EXACT") => {
            let mut a = Vec::with_capacity(nterms);
            for n in 1..=nterms {
                let line = lines.next().ok_or_else(|| Error::CacheFormat(format!("EXACT truncated at n={n}")))?;
                let (idx_s, val) = line
                    .split_once(' ')
                    .ok_or_else(|| Error::CacheFormat(format!("malformed EXACT line for n={n}")))?;
                if parse_num::<usize>(idx_s, "index")? != n {
                    return Err(Error::CacheFormat(format!("out-of-order EXACT line for n={n}")));
                }
                let v = Integer::parse(val).map_err(|_| Error::CacheFormat(format!("n={n}: bad integer")))?;
                a.push(Integer::from(v));
            }
            a_int = Some(a);
        }
        Some(other) => return Err(Error::CacheFormat(format!("unexpected line: {other}"))),
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::CacheFormat("trailing content".into()));
    }
    if lambdas[0] != 1 {
        return Err(Error::CacheFormat("lambda(1) != 1".into()));
    }
    Eigenform::from_lambdas(k, idx, prec, lambdas, a_int)
}

pub fn read_eigenform(path: &Path) -> Result<Eigenform> {
    parse_eigenform(&fs::read_to_string(path)?)
}

/// Writes atomically through a temporary file in the same directory.
pub fn write_eigenform(path: &Path, f: &Eigenform) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(format_eigenform(f).as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Outcome of [`load_or_build`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Reused,
    Built,
    /// an existing file failed validation and was replaced
    Rebuilt,
}

fn load_valid(dir: &Path, k: u32, precision_bits: u32, nterms: usize) -> Result<Option<Vec<Eigenform>>> {
    let dim = dim_cusp_forms(k);
    let mut forms = Vec::with_capacity(dim);
    for idx in 0..dim {
        let path = cache_path(dir, k, idx);
        if !path.exists() {
            return Ok(None);
        }
        let f = read_eigenform(&path)?;
        if f.weight() != k || f.dim_index() != idx {
            return Err(Error::CacheFormat(format!("{} holds k={} idx={}", path.display(), f.weight(), f.dim_index())));
        }
        if f.precision_bits() < precision_bits || f.nterms() < nterms {
            return Ok(None);
        }
        forms.push(f);
    }
    Ok(Some(forms))
}

/// Eigenforms of weight `k` from `dir`, computing and writing them when absent, invalid,
/// smaller than requested, or when `force` is set. Valid files are never rewritten.
pub fn load_or_build(
    dir: &Path,
    k: u32,
    precision_bits: u32,
    nterms: Option<usize>,
    force: bool,
) -> Result<(Vec<Eigenform>, CacheStatus)> {
    let n = nterms.unwrap_or_else(|| default_nterms(k));
    let mut status = CacheStatus::Built;
    if !force {
        match load_valid(dir, k, precision_bits, n) {
            Ok(Some(forms)) => return Ok((forms, CacheStatus::Reused)),
            Ok(None) => {}
            Err(e) => {
                log::warn!("weight {k}: discarding cache: {e}");
                status = CacheStatus::Rebuilt;
            }
        }
    }
    let forms = eigenforms(k, precision_bits, Some(n))?;
    fs::create_dir_all(dir)?;
    for f in &forms {
        write_eigenform(&cache_path(dir, k, f.dim_index()), f)?;
    }
    Ok((forms, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::eigenforms;

    #[test]
    fn roundtrip_rational_and_irrational() {
        for k in [12u32, 24] {
            for f in eigenforms(k, 192, None).unwrap() {
                let text = format_eigenform(&f);
                let g = parse_eigenform(&text).unwrap();
                assert_eq!(g.lambdas(), f.lambdas());
                assert_eq!(g.a_int(), f.a_int());
                assert_eq!(format_eigenform(&g), text);
            }
        }
    }

    #[test]
    fn rejects_unknown_version_and_corruption() {
        let f = &eigenforms(12, 128, None).unwrap()[0];
        let text = format_eigenform(f);
        assert!(matches!(
            parse_eigenform(&text.replacen("v1", "v2", 1)),
            Err(Error::CacheFormat(_))
        ));
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let l = lines[3].clone();
        lines[3] = l[..l.len() - 6].to_string() + &l[l.len() - 4..];
        assert!(parse_eigenform(&lines.join("\n")).is_err());
        let truncated: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(parse_eigenform(&truncated).is_err());
    }

    #[test]
    fn load_or_build_reuses_and_repairs() {
        let dir = tempfile::tempdir().unwrap();
        let (a, st) = load_or_build(dir.path(), 24, 128, None, false).unwrap();
        assert_eq!((a.len(), st), (2, CacheStatus::Built));
        let path = cache_path(dir.path(), 24, 1);
        let before = fs::metadata(&path).unwrap().modified().unwrap();
        let (b, st) = load_or_build(dir.path(), 24, 128, None, false).unwrap();
        assert_eq!(st, CacheStatus::Reused);
        assert_eq!(a[1].lambdas(), b[1].lambdas());
        assert_eq!(fs::metadata(&path).unwrap().modified().unwrap(), before);
        let text = fs::read_to_string(&path).unwrap().replacen("\n3 ", "\n3 9", 1);
        fs::write(&path, text).unwrap();
        let (c, st) = load_or_build(dir.path(), 24, 128, None, false).unwrap();
        assert_eq!(st, CacheStatus::Rebuilt);
        assert_eq!(a[1].lambdas(), c[1].lambdas());
        assert!(read_eigenform(&path).is_ok());
    }
}
