//! Exact polynomial machinery: the divided-difference coefficient table,
//! the moment systems producing the nef-certification identity, certified
//! positivity boxes in the Bernstein basis, and Sturm-sequence root
//! isolation for single-variable positivity on rays.
//!
//! Everything here is exact rational arithmetic; there is no floating
//! point fast path.

use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;

use crate::error::Error;
use crate::rational::{format_q, q_from_i64, Q};

pub const MAX_DEGREE: usize = 12;

// ---------------------------------------------------------------------
// univariate polynomials
// ---------------------------------------------------------------------

/// Univariate polynomial with exact rational coefficients, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    coeffs: Vec<Q>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Q::zero());
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: vec![Q::zero()] }
    }

    pub fn constant(c: Q) -> Self {
        RatPoly { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &Q {
        self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Q::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c.clone();
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c.clone();
        }
        RatPoly::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        RatPoly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a.clone() * b.clone();
            }
        }
        RatPoly::new(out)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.clone() * q_from_i64((i + 1) as i64))
                .collect(),
        )
    }

    /// Euclidean remainder self mod other.
    pub fn rem(&self, other: &Self) -> Self {
        assert!(!other.is_zero());
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= other.degree() {
            let shift = r.degree() - other.degree();
            let factor = r.leading().clone() / other.leading().clone();
            let mut sub = vec![Q::zero(); shift];
            sub.extend(other.coeffs.iter().map(|c| c.clone() * factor.clone()));
            let prev_len = r.coeffs.len();
            r = r.sub(&RatPoly::new(sub));
            debug_assert!(r.is_zero() || r.coeffs.len() < prev_len);
        }
        r
    }

    /// Exact integral over [0,1].
    pub fn integral_unit(&self) -> Q {
        let mut acc = Q::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c.clone() / q_from_i64((i + 1) as i64);
        }
        acc
    }

    pub fn to_string_in(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = match i {
                0 => format_q(c),
                1 if c.is_one() => var.to_string(),
                1 => format!("{}*{var}", format_q(c)),
                _ if c.is_one() => format!("{var}^{i}"),
                _ => format!("{}*{var}^{i}", format_q(c)),
            };
            parts.push(term);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ").replace("+ -", "- ")
        }
    }
}

// ---------------------------------------------------------------------
// Sturm sequences
// ---------------------------------------------------------------------

fn sturm_sequence(p: &RatPoly) -> Vec<RatPoly> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let r = seq[n - 2].rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(r.scale(&-Q::one()));
    }
    seq
}

fn sign_changes(seq: &[RatPoly], x: &Q) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for p in seq {
        let v = p.eval(x);
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

/// Number of distinct real roots in the half-open interval (a, b].
pub fn count_roots(p: &RatPoly, a: &Q, b: &Q) -> usize {
    if p.is_zero() {
        return 0;
    }
    let seq = sturm_sequence(p);
    sign_changes(&seq, a).saturating_sub(sign_changes(&seq, b))
}

/// Cauchy-style bound: every real root of p lies in [-B, B],
/// B = 1 + max |a_i / a_lead|.
pub fn root_bound(p: &RatPoly) -> Q {
    let lead = p.leading().clone();
    let mut m = Q::zero();
    for c in &p.coeffs()[..p.degree()] {
        let r = (c.clone() / lead.clone()).abs();
        if r > m {
            m = r;
        }
    }
    Q::one() + m
}

/// Outcome of certifying q(t) > 0 on the closed ray [0, ∞).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RayPositivity {
    /// q(t) > 0 for all t ≥ 0.
    Positive,
    /// q(t) > 0 for t > 0 but q(0) = 0.
    ZeroAtOrigin,
    /// q vanishes (or is negative) somewhere on the open ray.
    NotPositive,
}

/// Exact positivity of q on [0, ∞): Sturm root counting on (0, B] plus
/// the leading-coefficient sign for the tail.
pub fn ray_positivity(q: &RatPoly) -> RayPositivity {
    if q.is_zero() {
        return RayPositivity::NotPositive;
    }
    if q.degree() == 0 {
        return if q.coeffs()[0].is_positive() {
            RayPositivity::Positive
        } else {
            RayPositivity::NotPositive
        };
    }
    if !q.leading().is_positive() {
        return RayPositivity::NotPositive;
    }
    let bound = root_bound(q);
    if count_roots(q, &Q::zero(), &bound) > 0 {
        return RayPositivity::NotPositive;
    }
    let at0 = q.eval(&Q::zero());
    if at0.is_positive() {
        RayPositivity::Positive
    } else if at0.is_zero() {
        RayPositivity::ZeroAtOrigin
    } else {
        // negative at 0 with no positive roots and positive leading
        // coefficient cannot happen
        RayPositivity::NotPositive
    }
}

// ---------------------------------------------------------------------
// trivariate ring Q[x, y, δ] and the coefficient table
// ---------------------------------------------------------------------

/// Sparse polynomial in x, y, δ keyed by (x-power, y-power, δ-power).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriPoly {
    terms: BTreeMap<(usize, usize, usize), Q>,
}

impl TriPoly {
    pub fn zero() -> Self {
        TriPoly::default()
    }

    pub fn term(x: usize, y: usize, d: usize, c: Q) -> Self {
        let mut t = TriPoly::default();
        if !c.is_zero() {
            t.terms.insert((x, y, d), c);
        }
        t
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, v) in &other.terms {
            let e = self.terms.entry(*k).or_insert_with(Q::zero);
            *e += v.clone();
            if e.is_zero() {
                self.terms.remove(k);
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            let e = out.terms.entry(*k).or_insert_with(Q::zero);
            *e -= v.clone();
            if e.is_zero() {
                out.terms.remove(k);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = TriPoly::default();
        for ((x1, y1, d1), c1) in &self.terms {
            for ((x2, y2, d2), c2) in &other.terms {
                let k = (x1 + x2, y1 + y2, d1 + d2);
                let e = out.terms.entry(k).or_insert_with(Q::zero);
                *e += c1.clone() * c2.clone();
                if e.is_zero() {
                    out.terms.remove(&k);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = TriPoly::term(0, 0, 0, Q::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, x: usize, y: usize, d: usize) -> Q {
        self.terms.get(&(x, y, d)).cloned().unwrap_or_else(Q::zero)
    }

    /// Divides by (y − x); returns (quotient, remainder with y-degree 0).
    fn div_by_y_minus_x(&self) -> (TriPoly, TriPoly) {
        // collect coefficients of y^j: maps (x,δ) -> Q per j
        let deg_y = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let mut layers: Vec<TriPoly> = vec![TriPoly::default(); deg_y + 1];
        for ((x, y, d), c) in &self.terms {
            layers[*y].add_assign(&TriPoly::term(*x, 0, *d, c.clone()));
        }
        // synthetic division: q_{j-1} = c_j + x * q_j, remainder = c_0 + x q_0
        let x = TriPoly::term(1, 0, 0, Q::one());
        let mut quotient_layers: Vec<TriPoly> = vec![TriPoly::default(); deg_y];
        let mut carry = TriPoly::default();
        for j in (1..=deg_y).rev() {
            let mut qj = layers[j].clone();
            qj.add_assign(&carry);
            carry = x.mul(&qj);
            quotient_layers[j - 1] = qj;
        }
        let mut remainder = layers[0].clone();
        remainder.add_assign(&carry);
        // reassemble quotient with y powers
        let mut quotient = TriPoly::default();
        for (j, layer) in quotient_layers.iter().enumerate() {
            for ((xp, _, dp), c) in &layer.terms {
                quotient.add_assign(&TriPoly::term(*xp, j, *dp, c.clone()));
            }
        }
        (quotient, remainder)
    }
}

/// The source polynomial (y − δx)^p − (1−δ)^p x^p.
pub fn source_poly(p: usize) -> TriPoly {
    let mut y_minus_dx = TriPoly::term(0, 1, 0, Q::one());
    y_minus_dx.add_assign(&TriPoly::term(1, 0, 1, -Q::one()));
    let mut one_minus_d = TriPoly::term(0, 0, 0, Q::one());
    one_minus_d.add_assign(&TriPoly::term(0, 0, 1, -Q::one()));
    let xp = TriPoly::term(p, 0, 0, Q::one());
    y_minus_dx.pow(p).sub(&one_minus_d.pow(p).mul(&xp))
}

/// Exact divided expansion: the table b_{ℓ,m} with
/// (y−δx)^p − (1−δ)^p x^p = (y−x) Σ b_{ℓ,m} x^ℓ y^{p−1−ℓ} δ^m.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub p: usize,
    /// b[(ℓ, m)], zero entries omitted.
    pub b: BTreeMap<(usize, usize), Q>,
}

impl CoeffTable {
    pub fn get(&self, l: usize, m: usize) -> Q {
        self.b.get(&(l, m)).cloned().unwrap_or_else(Q::zero)
    }

    /// Reconstructs (y−x) × quotient and compares with the source
    /// polynomial; the division contract of the table.
    pub fn verify(&self) -> bool {
        let mut quotient = TriPoly::default();
        for ((l, m), c) in &self.b {
            quotient.add_assign(&TriPoly::term(*l, self.p - 1 - l, *m, c.clone()));
        }
        let mut y_minus_x = TriPoly::term(0, 1, 0, Q::one());
        y_minus_x.add_assign(&TriPoly::term(1, 0, 0, -Q::one()));
        y_minus_x.mul(&quotient) == source_poly(self.p)
    }
}

pub fn divided_expansion(p: usize) -> Result<CoeffTable, Error> {
    if p == 0 || p > MAX_DEGREE {
        return Err(Error::Argument(format!(
            "degree p={p} outside the exact-arithmetic envelope 1..={MAX_DEGREE}"
        )));
    }
    let (quotient, remainder) = source_poly(p).div_by_y_minus_x();
    if !remainder.is_zero() {
        return Err(Error::Internal("division by y - x left a remainder".into()));
    }
    let mut b = BTreeMap::new();
    for ((x, y, d), c) in &quotient.terms {
        debug_assert_eq!(x + y, p - 1);
        b.insert((*x, *d), c.clone());
    }
    Ok(CoeffTable { p, b })
}

// ---------------------------------------------------------------------
// the identity A_p(t, δ)
// ---------------------------------------------------------------------

/// The identity data: A_p(t,δ) = Σ_m a_m(t) δ^m with deg a_m ≤ p−1, and
/// an optional certified δ₀.
#[derive(Debug, Clone)]
pub struct PolyIdentity {
    pub p: usize,
    /// a[m] is the coefficient polynomial of δ^m.
    pub a: Vec<RatPoly>,
    pub delta0: Option<(Q, Delta0Certificate)>,
}

fn binomial(n: usize, k: usize) -> Q {
    let mut v = Q::one();
    for i in 0..k {
        v = v * q_from_i64((n - i) as i64) / q_from_i64((i + 1) as i64);
    }
    v
}

/// ∫₀¹ (1−t)^a t^b dt = a! b! / (a+b+1)!
fn beta_integral(a: usize, b: usize) -> Q {
    let mut num = Q::one();
    for i in 1..=a {
        num *= q_from_i64(i as i64);
    }
    for i in 1..=b {
        num *= q_from_i64(i as i64);
    }
    let mut den = Q::one();
    for i in 1..=(a + b + 1) {
        den *= q_from_i64(i as i64);
    }
    num / den
}

/// Solves the Bernstein-moment systems for the a_m(t) from the divided
/// expansion table.
pub fn solve_identity(p: usize) -> Result<PolyIdentity, Error> {
    let table = divided_expansion(p)?;
    // moment matrix M[ℓ][d] = C(p−1,ℓ) ∫ (1−t)^ℓ t^{p−1−ℓ+d} dt
    let m_rows: Vec<Vec<Q>> = (0..p)
        .map(|l| {
            (0..p)
                .map(|d| binomial(p - 1, l) * beta_integral(l, p - 1 - l + d))
                .collect()
        })
        .collect();
    let mut a = Vec::with_capacity(p + 1);
    for m in 0..=p {
        let rhs: Vec<Q> = (0..p).map(|l| table.get(l, m)).collect();
        let coeffs = crate::rational::solve_linear_q(&m_rows, &rhs)
            .map_err(|_| Error::Internal("singular moment matrix".into()))?;
        a.push(RatPoly::new(coeffs));
    }
    let identity = PolyIdentity { p, a, delta0: None };
    if !identity.verify() {
        return Err(Error::Internal("identity verification failed".into()));
    }
    Ok(identity)
}

impl PolyIdentity {
    /// A_p(t, δ) as a matrix of coefficients c[m][d] of δ^m t^d.
    pub fn coefficient_grid(&self) -> Vec<Vec<Q>> {
        self.a.iter().map(|poly| poly.coeffs().to_vec()).collect()
    }

    /// Exact check of the defining identity: integrate
    /// A_p(t,δ)((1−t)x + ty)^{p−1} term by term over t ∈ [0,1],
    /// multiply by (y−x), and compare with (y−δx)^p − (1−δ)^p x^p.
    pub fn verify(&self) -> bool {
        let p = self.p;
        let mut integrated = TriPoly::default();
        for (m, am) in self.a.iter().enumerate() {
            for k in 0..p {
                // coefficient of x^{p-1-k} y^k: C(p−1,k) ∫ a_m(t)(1−t)^{p−1−k} t^k dt
                let mut moment = Q::zero();
                for (d, c) in am.coeffs().iter().enumerate() {
                    moment += c.clone() * beta_integral(p - 1 - k, k + d);
                }
                let coeff = binomial(p - 1, k) * moment;
                integrated.add_assign(&TriPoly::term(p - 1 - k, k, m, coeff));
            }
        }
        let mut y_minus_x = TriPoly::term(0, 1, 0, Q::one());
        y_minus_x.add_assign(&TriPoly::term(1, 0, 0, -Q::one()));
        y_minus_x.mul(&integrated) == source_poly(p)
    }

    /// A_p(t, 0); constant in t for every p (the constant is p).
    pub fn at_delta_zero(&self) -> &RatPoly {
        &self.a[0]
    }

    /// Evaluates A_p(t, δ) exactly.
    pub fn eval(&self, t: &Q, delta: &Q) -> Q {
        let mut acc = Q::zero();
        let mut dp = Q::one();
        for am in &self.a {
            acc += am.eval(t) * dp.clone();
            dp *= delta.clone();
        }
        acc
    }
}

// ---------------------------------------------------------------------
// Bernstein positivity certificates and the δ₀ search
// ---------------------------------------------------------------------

const MAX_SUBDIVISION_DEPTH: usize = 12;

/// Record of a successful positivity certification for one degree p.
#[derive(Debug, Clone, PartialEq)]
pub struct CertRecord {
    pub p: usize,
    /// Certificate kind; currently always Bernstein-coefficient
    /// positivity on a dyadic subdivision.
    pub kind: String,
    pub boxes: usize,
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delta0Certificate {
    pub delta0: Q,
    pub records: Vec<CertRecord>,
}

/// Bivariate coefficients c[i][j] of t^i s^j, dense.
type Grid = Vec<Vec<Q>>;

fn monomial_to_bernstein(c: &Grid) -> Grid {
    let dt = c.len() - 1;
    let ds = c[0].len() - 1;
    let mut b = vec![vec![Q::zero(); ds + 1]; dt + 1];
    for i in 0..=dt {
        for j in 0..=ds {
            let mut acc = Q::zero();
            for k in 0..=i {
                for l in 0..=j {
                    acc += binomial(i, k) * binomial(j, l) / (binomial(dt, k) * binomial(ds, l))
                        * c[k][l].clone();
                }
            }
            b[i][j] = acc;
        }
    }
    b
}

fn de_casteljau_split_rows(b: &Grid) -> (Grid, Grid) {
    // split along the first index at 1/2
    let half = crate::rational::q_ratio(1, 2);
    let n = b.len();
    let cols = b[0].len();
    let mut left = vec![vec![Q::zero(); cols]; n];
    let mut right = vec![vec![Q::zero(); cols]; n];
    for j in 0..cols {
        let mut layer: Vec<Q> = b.iter().map(|row| row[j].clone()).collect();
        for step in 0..n {
            left[step][j] = layer[0].clone();
            right[n - 1 - step][j] = layer[layer.len() - 1].clone();
            if layer.len() == 1 {
                break;
            }
            layer = layer
                .windows(2)
                .map(|w| (w[0].clone() + w[1].clone()) * half.clone())
                .collect();
        }
    }
    (left, right)
}

fn transpose(b: &Grid) -> Grid {
    let rows = b.len();
    let cols = b[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| b[i][j].clone()).collect())
        .collect()
}

/// Recursive Bernstein positivity check on [0,1]². Returns box count on
/// success.
fn bernstein_positive(b: &Grid, depth: usize) -> Option<usize> {
    if b.iter().flatten().all(|c| c.is_positive()) {
        return Some(1);
    }
    // corner Bernstein coefficients equal corner values of the polynomial
    let rows = b.len();
    let cols = b[0].len();
    for (i, j) in [(0, 0), (0, cols - 1), (rows - 1, 0), (rows - 1, cols - 1)] {
        if !b[i][j].is_positive() {
            return None;
        }
    }
    if depth == 0 {
        return None;
    }
    let (lo, hi) = de_casteljau_split_rows(b);
    let mut total = 0;
    for half in [lo, hi] {
        let t = transpose(&half);
        let (a, c) = de_casteljau_split_rows(&t);
        for quarter in [a, c] {
            total += bernstein_positive(&transpose(&quarter), depth - 1)?;
        }
    }
    Some(total)
}

/// Certifies A_p(t,δ) > 0 on [0,1] × [0,δ₀] for every p ≤ n with the
/// given candidate δ₀, or reports the first failing degree.
pub fn certify_delta0(n: usize, candidate: &Q) -> Result<Delta0Certificate, Error> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::Argument(format!("n={n} outside envelope 1..={MAX_DEGREE}")));
    }
    if !candidate.is_positive() || candidate >= &Q::one() {
        return Err(Error::Argument("candidate δ₀ must lie in (0, 1)".into()));
    }
    let mut records = Vec::new();
    for p in 1..=n {
        let identity = solve_identity(p)?;
        // substitute δ = δ₀ · s and certify on [0,1]²
        let grid_raw = identity.coefficient_grid(); // c[m][d] of δ^m t^d
        let dt = p.saturating_sub(1);
        let ds = p;
        let mut c = vec![vec![Q::zero(); ds + 1]; dt + 1];
        let mut scale = Q::one();
        for (m, row) in grid_raw.iter().enumerate() {
            for (d, v) in row.iter().enumerate() {
                c[d][m] = v.clone() * scale.clone();
            }
            scale *= candidate.clone();
        }
        let b = monomial_to_bernstein(&c);
        match bernstein_positive(&b, MAX_SUBDIVISION_DEPTH) {
            Some(boxes) => records.push(CertRecord {
                p,
                kind: "bernstein-subdivision".into(),
                boxes,
                max_depth: MAX_SUBDIVISION_DEPTH,
            }),
            None => {
                return Err(Error::Numerical(format!(
                    "candidate δ₀ = {} fails positivity certification at p = {p}",
                    format_q(candidate)
                )))
            }
        }
    }
    Ok(Delta0Certificate {
        delta0: candidate.clone(),
        records,
    })
}

/// Searches for a certified δ₀ by halving from 1/2 downward.
pub fn find_delta0(n: usize) -> Result<(Q, Delta0Certificate), Error> {
    let mut candidate = crate::rational::q_ratio(1, 2);
    for _ in 0..MAX_SUBDIVISION_DEPTH * 4 {
        match certify_delta0(n, &candidate) {
            Ok(cert) => return Ok((candidate, cert)),
            Err(Error::Numerical(_)) => candidate /= q_from_i64(2),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numerical("no certifiable δ₀ found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_ratio;

    fn poly(coeffs: &[i64]) -> RatPoly {
        RatPoly::new(coeffs.iter().map(|&c| q_from_i64(c)).collect())
    }

    #[test]
    fn sturm_counts_roots() {
        // (t-1)(t-2) = t² - 3t + 2
        let p = poly(&[2, -3, 1]);
        assert_eq!(count_roots(&p, &Q::zero(), &q_from_i64(10)), 2);
        assert_eq!(count_roots(&p, &Q::zero(), &q_ratio(3, 2)), 1);
        assert_eq!(count_roots(&p, &q_from_i64(3), &q_from_i64(10)), 0);
    }

    #[test]
    fn ray_positivity_cases() {
        assert_eq!(ray_positivity(&poly(&[1, 0, 1])), RayPositivity::Positive);
        assert_eq!(ray_positivity(&poly(&[0, 1])), RayPositivity::ZeroAtOrigin);
        // 2(t-1)² has a root on the open ray
        assert_eq!(ray_positivity(&poly(&[2, -4, 2])), RayPositivity::NotPositive);
        assert_eq!(ray_positivity(&poly(&[-1, 1])), RayPositivity::NotPositive);
        assert_eq!(ray_positivity(&poly(&[1, -1])), RayPositivity::NotPositive);
    }

    #[test]
    fn divided_expansion_small_degrees() {
        let t1 = divided_expansion(1).unwrap();
        assert_eq!(t1.get(0, 0), Q::one());
        assert_eq!(t1.b.len(), 1);

        // (y−δx)² − (1−δ)²x² = (y−x)(y + x − 2δx)
        let t2 = divided_expansion(2).unwrap();
        assert_eq!(t2.get(0, 0), Q::one());
        assert_eq!(t2.get(1, 0), Q::one());
        assert_eq!(t2.get(1, 1), q_from_i64(-2));
        assert_eq!(t2.b.len(), 3);

        for p in 1..=8 {
            assert!(divided_expansion(p).unwrap().verify(), "p={p}");
        }
        assert!(divided_expansion(0).is_err());
        assert!(divided_expansion(13).is_err());
    }

    #[test]
    fn identity_small_degrees() {
        let id1 = solve_identity(1).unwrap();
        assert_eq!(id1.a[0], RatPoly::constant(Q::one()));
        assert!(id1.a[1].is_zero());

        // A_2(t, δ) = 2 + (12t − 8)δ
        let id2 = solve_identity(2).unwrap();
        assert_eq!(id2.a[0], RatPoly::constant(q_from_i64(2)));
        assert_eq!(id2.a[1], poly(&[-8, 12]));
        assert!(id2.a[2].is_zero());
        assert_eq!(id2.at_delta_zero(), &RatPoly::constant(q_from_i64(2)));
    }

    #[test]
    fn delta_zero_slice_is_the_constant_p() {
        // closed-form moment oracle: a constant c gives b_{ℓ,0} = c/p, and
        // the division yields b_{ℓ,0} = 1, so c = p.
        for p in 1..=8 {
            let id = solve_identity(p).unwrap();
            let a0 = id.at_delta_zero();
            assert_eq!(a0.degree(), 0, "p={p}");
            assert_eq!(a0.coeffs()[0], q_from_i64(p as i64), "p={p}");
        }
    }

    #[test]
    fn identity_uniqueness_spot_check() {
        // perturbing a single coefficient of any a_m breaks the identity
        let mut id = solve_identity(3).unwrap();
        let orig = id.a[1].clone();
        id.a[1] = orig.add(&RatPoly::new(vec![Q::zero(), q_ratio(1, 7)]));
        assert!(!id.verify());
        id.a[1] = orig;
        assert!(id.verify());
    }

    #[test]
    fn delta0_certification() {
        // n=2: min over t of 2 + (12t−8)δ is 2 − 8δ, so δ < 1/4 is needed
        assert!(certify_delta0(2, &q_ratio(1, 8)).is_ok());
        assert!(certify_delta0(2, &q_ratio(1, 3)).is_err());
        let (d0, cert) = find_delta0(2).unwrap();
        assert!(d0 > Q::zero() && d0 < q_ratio(1, 4));
        assert_eq!(cert.records.len(), 2);
        // n=1: A_1 ≡ 1, any δ < 1 certifies
        assert!(certify_delta0(1, &q_ratio(1, 2)).is_ok());
    }
}
