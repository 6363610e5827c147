//! Exact rational and complex-rational arithmetic helpers.
//!
//! Class data (Hermitian forms, intersection matrices, polynomial
//! coefficients) is kept exact; floating point enters only in the grid
//! numerics and eigenvalue routines.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Complex;

use crate::error::Error;

/// Exact rational scalar.
pub type Q = BigRational;
/// Exact complex-rational scalar.
pub type QC = Complex<BigRational>;

pub fn q_from_i64(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

pub fn q_ratio(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qc_from_q(re: Q) -> QC {
    Complex::new(re, Q::zero())
}

pub fn qc_from_i64(re: i64) -> QC {
    qc_from_q(q_from_i64(re))
}

pub fn qc_new(re: Q, im: Q) -> QC {
    Complex::new(re, im)
}

pub fn q_to_f64(v: &Q) -> f64 {
    v.to_f64()
        .unwrap_or_else(|| v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN))
}

pub fn qc_to_c64(v: &QC) -> Complex<f64> {
    Complex::new(q_to_f64(&v.re), q_to_f64(&v.im))
}

/// Exact conversion of a finite f64 into a rational.
pub fn q_from_f64(v: f64) -> Result<Q, Error> {
    BigRational::from_float(v).ok_or_else(|| Error::Parse(format!("non-finite value {v}")))
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, Error> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("bad rational literal `{s}`")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(num)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// Parses a complex rational: `"a/b"`, `"a/b+c/d*i"`, `"-c*i"`, `"i"`, `"-i"`.
pub fn parse_qc(s: &str) -> Result<QC, Error> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    // Split at the sign introducing the imaginary part, if any.
    if let Some(body) = compact.strip_suffix('i') {
        // Find the split point: last '+' or '-' that is not the leading sign
        // and not inside an exponent (no exponents in rational literals).
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if bytes[k] == b'+' || bytes[k] == b'-' {
                split = Some(k);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im_str = im_part.trim_end_matches('*');
        let im = match im_str {
            "" | "+" => Q::one(),
            "-" => -Q::one(),
            t => parse_q(t)?,
        };
        let re = if re_part.is_empty() { Q::zero() } else { parse_q(re_part)? };
        Ok(Complex::new(re, im))
    } else {
        Ok(qc_from_q(parse_q(&compact)?))
    }
}

pub fn format_q(v: &Q) -> String {
    if v.denom().is_one() {
        format!("{}", v.numer())
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn format_qc(v: &QC) -> String {
    if v.im.is_zero() {
        format_q(&v.re)
    } else if v.re.is_zero() {
        format!("{}i", format_q(&v.im))
    } else if v.im.is_negative() {
        format!("{}{}i", format_q(&v.re), format_q(&v.im))
    } else {
        format!("{}+{}i", format_q(&v.re), format_q(&v.im))
    }
}

/// Exact determinant of a square complex-rational matrix (Gaussian
/// elimination with division; sizes stay tiny here).
pub fn det_qc(m: &[Vec<QC>]) -> QC {
    let n = m.len();
    let mut a: Vec<Vec<QC>> = m.to_vec();
    let mut det = QC::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return QC::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col..n {
                let sub = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
    }
    det
}

/// Exact rank of a complex-rational matrix given as columns.
pub fn rank_qc_columns(cols: &[Vec<QC>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let rows = cols[0].len();
    // row-major copy, columns as given
    let mut a: Vec<Vec<QC>> = (0..rows)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let ncols = cols.len();
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..rows).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(p, rank);
        let pv = a[rank][col].clone();
        for r in 0..rows {
            if r == rank || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in 0..ncols {
                let sub = f.clone() * a[rank][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Solves the exact linear system `A x = b` by Gaussian elimination.
/// Returns an error if `A` is singular.
pub fn solve_linear_q(a: &[Vec<Q>], b: &[Q]) -> Result<Vec<Q>, Error> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else {
            return Err(Error::Internal("singular linear system".into()));
        };
        m.swap(p, col);
        let pv = m[col][col].clone();
        for c in col..=n {
            m[col][c] = m[col][c].clone() / pv.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..=n {
                let sub = f.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - sub;
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}
