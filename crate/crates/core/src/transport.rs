//! Hodge frames and parallel transport along paths of linear complex
//! structures on a real 2n-torus. Degree-2 cohomology is the space of
//! constant alternating 2-forms; a complex structure J splits it into
//! types through the induced infinitesimal action L(S) = JᵀS + SJ,
//! whose eigenvalues are 2i, 0, −2i on the (2,0), (1,1), (0,2) parts.
//!
//! Transport uses the connection induced on the (1,1) subbundle of the
//! flat degree-2 bundle: for a section s with s = Πs and flat
//! derivative constrained by Π(s′ − Π′s) = 0, differentiating s = Πs
//! and using ΠΠ′Π = 0 gives s′ = Π′s, which is the equation integrated
//! here (classical Runge–Kutta).
//!
//! Declared cycles are constant integral forms assumed analytic in
//! every fiber; families are restricted to linear polynomial paths, so
//! the excluded locus of a general deformation argument is empty by
//! construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exterior::{subsets, wedge_top, AlternatingForm};
use crate::grid::C64;
use crate::rational::{format_q, parse_q, q_from_i64, q_to_f64, Q};
use num::traits::Zero;

// ---------------------------------------------------------------------
// paths and family documents
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct TransportCycle {
    pub name: String,
    pub degree: usize,
    /// Terms (strictly increasing index tuple, coefficient).
    pub terms: Vec<(Vec<usize>, Q)>,
}

impl TransportCycle {
    pub fn to_form(&self, dim: usize) -> AlternatingForm<C64> {
        let mut form = AlternatingForm::zero(dim, self.degree);
        for (indices, c) in &self.terms {
            let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
            form.add_term(mask, C64::new(q_to_f64(c), 0.0));
        }
        form
    }
}

/// Polynomial path of complex structures J(u) = Σ_k C_k u^k, u ∈ [0,1],
/// with exact rational coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructurePath {
    pub n: usize,
    /// Coefficient matrices by ascending power of u; 2n×2n row-major.
    coeffs: Vec<Vec<Q>>,
    pub cycles: Vec<TransportCycle>,
}

fn matrix_from_q(entries: &[Q], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |r, c| q_to_f64(&entries[r * d + c]))
}

fn q_identity(d: usize) -> Vec<Q> {
    let mut id = vec![Q::zero(); d * d];
    for i in 0..d {
        id[i * d + i] = q_from_i64(1);
    }
    id
}

fn q_mat_mul(a: &[Q], b: &[Q], d: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); d * d];
    for r in 0..d {
        for c in 0..d {
            let mut acc = Q::zero();
            for k in 0..d {
                acc += a[r * d + k].clone() * b[k * d + c].clone();
            }
            out[r * d + c] = acc;
        }
    }
    out
}

impl ComplexStructurePath {
    pub fn new(n: usize, coeffs: Vec<Vec<Q>>, cycles: Vec<TransportCycle>) -> Result<Self, Error> {
        let d = 2 * n;
        if coeffs.is_empty() || coeffs.iter().any(|c| c.len() != d * d) {
            return Err(Error::Model(format!(
                "path coefficient matrices must be {d}×{d}"
            )));
        }
        for c in &cycles {
            if c.degree % 2 != 0 || c.degree > d {
                return Err(Error::Model(format!(
                    "cycle `{}` has invalid degree {}",
                    c.name, c.degree
                )));
            }
            for (indices, _) in &c.terms {
                if indices.len() != c.degree
                    || indices.windows(2).any(|w| w[0] >= w[1])
                    || indices.iter().any(|&i| i >= d)
                {
                    return Err(Error::Model(format!(
                        "cycle `{}` has a malformed index tuple",
                        c.name
                    )));
                }
            }
        }
        let path = ComplexStructurePath { n, coeffs, cycles };
        // J(u)² = −I along the whole parameter interval
        let id = DMatrix::<f64>::identity(d, d);
        for k in 0..=100 {
            let u = k as f64 / 100.0;
            let j = path.j_at(u);
            let defect = (&j * &j + &id).norm();
            if defect > 1e-12 {
                return Err(Error::Model(format!(
                    "J(u)² deviates from −Identity at u = {u} (defect {defect:.3e})"
                )));
            }
        }
        Ok(path)
    }

    /// Constant path at a single structure J₀.
    pub fn constant(n: usize, j0: Vec<Q>, cycles: Vec<TransportCycle>) -> Result<Self, Error> {
        ComplexStructurePath::new(n, vec![j0], cycles)
    }

    /// Conjugated family J(u) = (I + uN) J₀ (I + uN)⁻¹ for nilpotent N;
    /// the inverse truncates because the series ends, so J(u) is an
    /// exact matrix polynomial in u.
    pub fn conjugated(
        n: usize,
        j0: Vec<Q>,
        nilpotent: Vec<Q>,
        cycles: Vec<TransportCycle>,
    ) -> Result<Self, Error> {
        let d = 2 * n;
        if j0.len() != d * d || nilpotent.len() != d * d {
            return Err(Error::Model(format!("matrices must be {d}×{d}")));
        }
        // nilpotency degree
        let mut powers = vec![q_identity(d)];
        loop {
            let next = q_mat_mul(powers.last().unwrap(), &nilpotent, d);
            if next.iter().all(|x| x == &Q::zero()) {
                break;
            }
            if powers.len() > d {
                return Err(Error::Model("conjugation matrix is not nilpotent".into()));
            }
            powers.push(next);
        }
        let degree = powers.len() - 1;
        // J(u) = Σ_a u^a N^a J₀ · Σ_b (−u)^b N^b, collected by power
        let mut coeffs = vec![vec![Q::zero(); d * d]; 2 * degree + 1];
        for a in 0..=degree {
            let left = q_mat_mul(&powers[a], &j0, d);
            for b in 0..=degree {
                let term = q_mat_mul(&left, &powers[b], d);
                let sign = if b % 2 == 0 { 1 } else { -1 };
                for (i, t) in term.into_iter().enumerate() {
                    coeffs[a + b][i] += t * q_from_i64(sign);
                }
            }
        }
        while coeffs.len() > 1 && coeffs.last().unwrap().iter().all(|x| x == &Q::zero()) {
            coeffs.pop();
        }
        ComplexStructurePath::new(n, coeffs, cycles)
    }

    /// Rotated family J(u) = e^{uK} J₀ e^{−uK}, with each exponential
    /// replaced by its degree-`degree` Taylor polynomial so the path has
    /// exact rational coefficients. The truncation error must keep
    /// J(u)² within the constructor's tolerance of −Identity over
    /// [0, 1]; for ‖K‖ of order one, `degree` around 20 suffices. Unlike
    /// a nilpotent conjugation, a generic rotation produces a transport
    /// equation whose solution is not polynomial in u.
    pub fn rotated(
        n: usize,
        j0: Vec<Q>,
        generator: Vec<Q>,
        degree: usize,
        cycles: Vec<TransportCycle>,
    ) -> Result<Self, Error> {
        let d = 2 * n;
        if j0.len() != d * d || generator.len() != d * d {
            return Err(Error::Model(format!("matrices must be {d}×{d}")));
        }
        if degree == 0 {
            return Err(Error::Argument("truncation degree must be positive".into()));
        }
        // Taylor terms K^m / m! of the forward exponential
        let mut forward = vec![q_identity(d)];
        let mut power = q_identity(d);
        let mut factorial = q_from_i64(1);
        for m in 1..=degree {
            power = q_mat_mul(&power, &generator, d);
            factorial *= q_from_i64(m as i64);
            forward.push(power.iter().map(|x| x.clone() / factorial.clone()).collect());
        }
        // the reverse exponential flips the sign of every odd term
        let reverse: Vec<Vec<Q>> = forward
            .iter()
            .enumerate()
            .map(|(m, c)| {
                if m % 2 == 1 {
                    c.iter().map(|x| -x.clone()).collect()
                } else {
                    c.clone()
                }
            })
            .collect();
        let mut coeffs = vec![vec![Q::zero(); d * d]; 2 * degree + 1];
        for (a, ca) in forward.iter().enumerate() {
            let left = q_mat_mul(ca, &j0, d);
            for (b, cb) in reverse.iter().enumerate() {
                let term = q_mat_mul(&left, cb, d);
                for (i, t) in term.into_iter().enumerate() {
                    coeffs[a + b][i] += t;
                }
            }
        }
        while coeffs.len() > 1 && coeffs.last().unwrap().iter().all(|x| x == &Q::zero()) {
            coeffs.pop();
        }
        ComplexStructurePath::new(n, coeffs, cycles)
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn j_at(&self, u: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        let mut pw = 1.0;
        for c in &self.coeffs {
            out += matrix_from_q(c, d) * pw;
            pw *= u;
        }
        out
    }

    /// Analytic derivative J′(u) of the polynomial path.
    pub fn j_prime_at(&self, u: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        let mut pw = 1.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            out += matrix_from_q(c, d) * (k as f64 * pw);
            pw *= u;
        }
        out
    }
}

// ---------------------------------------------------------------------
// Hodge frames
// ---------------------------------------------------------------------

/// Matrix of the map S ↦ AᵀS + SB on the degree-2 coefficient space.
fn two_form_action(a: &DMatrix<f64>, b: &DMatrix<f64>, masks: &[u32]) -> DMatrix<f64> {
    let d = a.nrows();
    let nn = masks.len();
    let mut out = DMatrix::zeros(nn, nn);
    for (col, &mask) in masks.iter().enumerate() {
        let lo = mask.trailing_zeros() as usize;
        let hi = (31 - mask.leading_zeros()) as usize;
        // E = e_lo ∧ e_hi as an antisymmetric matrix
        let mut e = DMatrix::<f64>::zeros(d, d);
        e[(lo, hi)] = 1.0;
        e[(hi, lo)] = -1.0;
        let m = a.transpose() * &e + &e * b;
        for (row, &rmask) in masks.iter().enumerate() {
            let rl = rmask.trailing_zeros() as usize;
            let rh = (31 - rmask.leading_zeros()) as usize;
            out[(row, col)] = m[(rl, rh)];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeFrame {
    pub n: usize,
    pub masks: Vec<u32>,
    /// The real action L = JᵀS + SJ on 2-form coefficients.
    pub l: DMatrix<f64>,
    pub pi20: DMatrix<C64>,
    pub pi11: DMatrix<C64>,
    pub pi02: DMatrix<C64>,
}

fn to_c(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Spectral projectors of L onto the eigenvalues 2i, 0, −2i.
pub fn hodge_projectors(n: usize, j: &DMatrix<f64>) -> Result<HodgeFrame, Error> {
    let d = 2 * n;
    if j.nrows() != d || j.ncols() != d {
        return Err(Error::Dimension(format!("J must be {d}×{d}")));
    }
    let id = DMatrix::<f64>::identity(d, d);
    if (j * j + &id).norm() > 1e-12 {
        return Err(Error::Argument("J is not an almost-complex structure".into()));
    }
    let masks = subsets(d, 2);
    let l = two_form_action(j, j, &masks);
    let nn = masks.len();
    let idn = to_c(&DMatrix::identity(nn, nn));
    let lc = to_c(&l);
    let l2 = &lc * &lc;
    let pi11 = &idn + &l2 * C64::new(0.25, 0.0);
    let two_i = C64::new(0.0, 2.0);
    let pi20 = (&l2 + &lc * two_i) * C64::new(-0.125, 0.0);
    let pi02 = (&l2 - &lc * two_i) * C64::new(-0.125, 0.0);
    Ok(HodgeFrame { n, masks, l, pi20, pi11, pi02 })
}

impl HodgeFrame {
    /// Largest defect across the projector axioms: idempotence,
    /// partition of the identity, conjugation symmetry, and the
    /// expected ranks (traces) C(n,2), n², C(n,2).
    pub fn axiom_defect(&self) -> f64 {
        let nn = self.masks.len();
        let id = to_c(&DMatrix::identity(nn, nn));
        let mut worst = 0.0f64;
        for p in [&self.pi20, &self.pi11, &self.pi02] {
            worst = worst.max((p * p - p).norm());
        }
        worst = worst.max((&self.pi20 + &self.pi11 + &self.pi02 - &id).norm());
        worst = worst.max((self.pi20.map(|v| v.conj()) - &self.pi02).norm());
        worst = worst.max((self.pi11.map(|v| v.conj()) - &self.pi11).norm());
        let choose2 = (self.n * (self.n - 1) / 2) as f64;
        let tr = |m: &DMatrix<C64>| m.diagonal().iter().sum::<C64>();
        worst = worst.max((tr(&self.pi20) - C64::new(choose2, 0.0)).norm());
        worst = worst.max((tr(&self.pi11) - C64::new((self.n * self.n) as f64, 0.0)).norm());
        worst = worst.max((tr(&self.pi02) - C64::new(choose2, 0.0)).norm());
        worst
    }
}

// ---------------------------------------------------------------------
// transport
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct TransportRun {
    /// Sample parameters u, including both endpoints.
    pub us: Vec<f64>,
    /// Class coefficients per sample in the degree-2 mask basis.
    pub samples: Vec<DVector<C64>>,
    pub max_subbundle_defect: f64,
    pub max_reality_defect: f64,
}

fn pi11_prime(path: &ComplexStructurePath, masks: &[u32], u: f64) -> DMatrix<f64> {
    // Π^{1,1} = I + L²/4 gives Π′ = (L′L + LL′)/4, and L′ is the same
    // bilinear action with J replaced by J′: L′(S) = J′ᵀS + SJ′
    let j = path.j_at(u);
    let jp = path.j_prime_at(u);
    let l = two_form_action(&j, &j, masks);
    let lprime = two_form_action(&jp, &jp, masks);
    (&lprime * &l + &l * &lprime) * 0.25
}

/// Transports a real (1,1)-class along the path by integrating
/// s′ = Π′s with classical 4th-order Runge–Kutta.
pub fn transport(
    path: &ComplexStructurePath,
    alpha0: &DVector<C64>,
    steps: usize,
) -> Result<TransportRun, Error> {
    if steps < 100 {
        return Err(Error::Argument("need at least 100 integration steps".into()));
    }
    let masks = subsets(path.dim(), 2);
    if alpha0.len() != masks.len() {
        return Err(Error::Dimension("class coefficient count mismatch".into()));
    }
    let frame0 = hodge_projectors(path.n, &path.j_at(0.0))?;
    let scale = alpha0.norm().max(1.0);
    if (&frame0.pi11 * alpha0 - alpha0).norm() > 1e-10 * scale {
        return Err(Error::Argument(
            "initial class is not of type (1,1) at u = 0".into(),
        ));
    }

    let h = 1.0 / steps as f64;
    let rhs = |u: f64, s: &DVector<C64>| -> DVector<C64> {
        to_c(&pi11_prime(path, &masks, u)) * s
    };
    let mut s = alpha0.clone();
    let mut us = vec![0.0];
    let mut samples = vec![s.clone()];
    for k in 0..steps {
        let u = k as f64 * h;
        let k1 = rhs(u, &s);
        let k2 = rhs(u + 0.5 * h, &(&s + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = rhs(u + 0.5 * h, &(&s + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = rhs(u + h, &(&s + &k3 * C64::new(h, 0.0)));
        s = &s + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(h / 6.0, 0.0);
        us.push((k + 1) as f64 * h);
        samples.push(s.clone());
    }

    let mut max_subbundle_defect = 0.0f64;
    let mut max_reality_defect = 0.0f64;
    for (u, s) in us.iter().zip(&samples) {
        let frame = hodge_projectors(path.n, &path.j_at(*u))?;
        let sub = (&frame.pi11 * s - s).norm() / scale;
        let real = (s.map(|v| v.conj()) - s).norm() / scale;
        if sub > 1e-6 || real > 1e-6 {
            return Err(Error::Numerical(format!(
                "transport defect overflow at u = {u}: subbundle {sub:.3e}, reality {real:.3e}; reduce the step size"
            )));
        }
        max_subbundle_defect = max_subbundle_defect.max(sub);
        max_reality_defect = max_reality_defect.max(real);
    }
    Ok(TransportRun { us, samples, max_subbundle_defect, max_reality_defect })
}

/// Negative control: drags the class by pointwise projection
/// s(u) = Π^{1,1}(u) s₀, leaving the derivative unconstrained by the
/// induced connection. Pairings are not conserved along this path.
pub fn transport_naive(
    path: &ComplexStructurePath,
    alpha0: &DVector<C64>,
    steps: usize,
) -> Result<TransportRun, Error> {
    let h = 1.0 / steps as f64;
    let mut us = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let u = k as f64 * h;
        let frame = hodge_projectors(path.n, &path.j_at(u))?;
        us.push(u);
        samples.push(&frame.pi11 * alpha0);
    }
    Ok(TransportRun { us, samples, max_subbundle_defect: 0.0, max_reality_defect: f64::NAN })
}

fn form_from_sample(dim: usize, masks: &[u32], s: &DVector<C64>) -> AlternatingForm<C64> {
    let mut form = AlternatingForm::zero(dim, 2);
    for (i, &mask) in masks.iter().enumerate() {
        form.add_term(mask, s[i]);
    }
    form
}

/// Max drift of the pairing α(u)^p · ζ across the run.
pub fn pairing_drift(
    path: &ComplexStructurePath,
    run: &TransportRun,
    cycle: &TransportCycle,
    p: usize,
) -> Result<f64, Error> {
    let dim = path.dim();
    if 2 * p + cycle.degree != dim {
        return Err(Error::Argument(format!(
            "degree mismatch: 2·{p} + {} ≠ {dim}",
            cycle.degree
        )));
    }
    let masks = subsets(dim, 2);
    let zeta = cycle.to_form(dim);
    let mut base = None;
    let mut drift = 0.0f64;
    for s in &run.samples {
        let alpha = form_from_sample(dim, &masks, s);
        let mut forms: Vec<AlternatingForm<C64>> = std::iter::repeat(alpha).take(p).collect();
        forms.push(zeta.clone());
        let value = wedge_top(&forms)?;
        match &base {
            None => base = Some(value),
            Some(b) => drift = drift.max((value - b).norm()),
        }
    }
    Ok(drift)
}

/// Per-fiber positivity data for a transported class on a generic
/// torus: the volume pairing ∫ α(u)^n and the signature of the
/// associated symmetric form α(u)(·, J(u)·).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVerdict {
    pub u: f64,
    /// wedge-top value of α(u)^n (2·det of the Hermitian matrix at n=2).
    pub volume: f64,
    pub in_p: bool,
    /// Signature of the symmetric form, halved: Hermitian inertia.
    pub signature: (usize, usize),
}

pub fn verdict_invariance(
    path: &ComplexStructurePath,
    run: &TransportRun,
) -> Result<Vec<FiberVerdict>, Error> {
    let dim = path.dim();
    let n = path.n;
    let masks = subsets(dim, 2);
    let mut out = Vec::with_capacity(run.samples.len());
    for (u, s) in run.us.iter().zip(&run.samples) {
        let alpha = form_from_sample(dim, &masks, s);
        let forms: Vec<AlternatingForm<C64>> = std::iter::repeat(alpha).take(n).collect();
        let volume = wedge_top(&forms)?.re;
        // symmetric form G = S·J(u): eigenvalues pair up, giving twice
        // the Hermitian inertia
        let mut sm = DMatrix::<f64>::zeros(dim, dim);
        for (i, &mask) in masks.iter().enumerate() {
            let lo = mask.trailing_zeros() as usize;
            let hi = (31 - mask.leading_zeros()) as usize;
            sm[(lo, hi)] = s[i].re;
            sm[(hi, lo)] = -s[i].re;
        }
        let g = sm * path.j_at(*u);
        let sym_defect = (&g - g.transpose()).norm();
        if sym_defect > 1e-6 * g.norm().max(1.0) {
            return Err(Error::Numerical(format!(
                "transported class is not (1,1) at u = {u}: symmetry defect {sym_defect:.3e}"
            )));
        }
        let gs = (&g + g.transpose()) * 0.5;
        let eig = gs.symmetric_eigenvalues();
        let tol = 1e-9 * eig.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let pos = eig.iter().filter(|&&v| v > tol).count();
        let neg = eig.iter().filter(|&&v| v < -tol).count();
        out.push(FiberVerdict {
            u: *u,
            volume,
            in_p: volume > 0.0,
            signature: (pos / 2, neg / 2),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// family documents
// ---------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    indices: Vec<usize>,
    coeff: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct FamilyCycleDoc {
    name: String,
    degree: usize,
    #[serde(default)]
    terms: Vec<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JCoeffDoc {
    rows: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FamilyDoc {
    kind: String,
    n: usize,
    j: Vec<JCoeffDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cycles: Vec<FamilyCycleDoc>,
}

pub fn load_family(document: &str) -> Result<ComplexStructurePath, Error> {
    let doc: FamilyDoc = toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.kind != "family" {
        return Err(Error::Model(format!("unknown document kind `{}`", doc.kind)));
    }
    let d = 2 * doc.n;
    let mut coeffs = Vec::new();
    for c in &doc.j {
        if c.rows.len() != d || c.rows.iter().any(|r| r.len() != d) {
            return Err(Error::Model(format!("J coefficients must be {d}×{d}")));
        }
        let mut flat = Vec::with_capacity(d * d);
        for row in &c.rows {
            for s in row {
                flat.push(parse_q(s)?);
            }
        }
        coeffs.push(flat);
    }
    let cycles = doc
        .cycles
        .iter()
        .map(|c| {
            let terms = c
                .terms
                .iter()
                .map(|t| Ok((t.indices.clone(), parse_q(&t.coeff)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(TransportCycle { name: c.name.clone(), degree: c.degree, terms })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    ComplexStructurePath::new(doc.n, coeffs, cycles)
}

pub fn serialize_family(path: &ComplexStructurePath) -> String {
    let d = path.dim();
    let doc = FamilyDoc {
        kind: "family".into(),
        n: path.n,
        j: path
            .coeffs
            .iter()
            .map(|c| JCoeffDoc {
                rows: (0..d)
                    .map(|r| (0..d).map(|col| format_q(&c[r * d + col])).collect())
                    .collect(),
            })
            .collect(),
        cycles: path
            .cycles
            .iter()
            .map(|c| FamilyCycleDoc {
                name: c.name.clone(),
                degree: c.degree,
                terms: c
                    .terms
                    .iter()
                    .map(|(indices, q)| TermDoc { indices: indices.clone(), coeff: format_q(q) })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("family documents serialize")
}

// ---------------------------------------------------------------------
// helpers shared with tests and the CLI
// ---------------------------------------------------------------------

/// Standard structure on ℝ^{2n} with coordinates (x₁,y₁,…): J e_{2j} =
/// e_{2j+1}, J e_{2j+1} = −e_{2j}.
pub fn standard_j(n: usize) -> Vec<Q> {
    let d = 2 * n;
    let mut j = vec![Q::zero(); d * d];
    for b in 0..n {
        // column e_{2b} maps to e_{2b+1}, column e_{2b+1} to −e_{2b}
        j[(2 * b + 1) * d + 2 * b] = q_from_i64(1);
        j[2 * b * d + (2 * b + 1)] = q_from_i64(-1);
    }
    j
}

/// Coefficients of a real (1,1)-class from a Hermitian matrix, in the
/// degree-2 mask basis.
pub fn class_vector(h: &DMatrix<C64>) -> DVector<C64> {
    let form = crate::exterior::realize_hermitian_f64(h);
    DVector::from_iterator(
        form.coeffs().len(),
        form.coeffs().iter().map(|&v| C64::new(v, 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_from_i64;

    fn c64m(vals: &[f64], n: usize) -> DMatrix<C64> {
        DMatrix::from_iterator(n, n, vals.iter().map(|&v| C64::new(v, 0.0)))
    }

    fn test_family(n2_entries: &[i64]) -> ComplexStructurePath {
        // nilpotent N with range in the z₁-plane and kernel containing it
        let d = 4;
        let mut nil = vec![Q::zero(); d * d];
        for (i, &v) in n2_entries.iter().enumerate() {
            // rows 0..1 (z₁-plane), columns 2..3 (z₂ directions)
            nil[(i / 2) * d + 2 + (i % 2)] = q_from_i64(v);
        }
        let zeta = TransportCycle {
            name: "T".into(),
            degree: 2,
            terms: vec![(vec![2, 3], q_from_i64(1))],
        };
        let point = TransportCycle { name: "X".into(), degree: 0, terms: vec![(vec![], q_from_i64(1))] };
        ComplexStructurePath::conjugated(2, standard_j(2), nil, vec![zeta, point]).unwrap()
    }

    #[test]
    fn standard_structure_squares_to_minus_identity() {
        for n in 1..=3 {
            let p = ComplexStructurePath::constant(n, standard_j(n), vec![]).unwrap();
            let j = p.j_at(0.3);
            let d = 2 * n;
            assert!((&j * &j + DMatrix::<f64>::identity(d, d)).norm() < 1e-14);
        }
    }

    #[test]
    fn projector_axioms_and_ranks() {
        // n = 1: the whole space is (1,1)
        let p1 = ComplexStructurePath::constant(1, standard_j(1), vec![]).unwrap();
        let f1 = hodge_projectors(1, &p1.j_at(0.0)).unwrap();
        assert!(f1.axiom_defect() < 1e-12);
        assert!((f1.pi11 - to_c(&DMatrix::identity(1, 1))).norm() < 1e-14);
        // n = 2: ranks (1, 4, 1)
        let p2 = test_family(&[1, 0, 0, 1]);
        for u in [0.0, 0.33, 1.0] {
            let f = hodge_projectors(2, &p2.j_at(u)).unwrap();
            assert!(f.axiom_defect() < 1e-12, "u = {u}: {}", f.axiom_defect());
        }
        // J and −J exchange the (2,0) and (0,2) projectors
        let j = p2.j_at(0.0);
        let fp = hodge_projectors(2, &j).unwrap();
        let fm = hodge_projectors(2, &(-&j)).unwrap();
        assert!((&fp.pi20 - &fm.pi02).norm() < 1e-12);
        assert!((&fp.pi11 - &fm.pi11).norm() < 1e-12);
        // non-structure rejected
        assert!(hodge_projectors(2, &DMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn constant_path_transport_is_identity() {
        let p = ComplexStructurePath::constant(2, standard_j(2), vec![]).unwrap();
        let a0 = class_vector(&c64m(&[1.0, 0.0, 0.0, 2.0], 2));
        let run = transport(&p, &a0, 200).unwrap();
        for s in &run.samples {
            assert!((s - &a0).norm() < 1e-13);
        }
        assert!(run.max_subbundle_defect < 1e-12);
        assert!(run.max_reality_defect < 1e-12);
    }

    #[test]
    fn one_dimensional_transport_is_trivial() {
        // any n=1 path: the (1,1) space is the full line, Π′ = 0
        let p = ComplexStructurePath::constant(1, standard_j(1), vec![]).unwrap();
        let a0 = class_vector(&c64m(&[3.0], 1));
        let run = transport(&p, &a0, 100).unwrap();
        assert!((run.samples.last().unwrap() - &a0).norm() < 1e-13);
    }

    /// A family whose transport equation has a non-polynomial solution,
    /// so the integrator's truncation error is actually visible. A
    /// nilpotent conjugation would not do: its transport is an exact
    /// matrix polynomial of low degree, which the 4th-order scheme
    /// integrates to rounding error at every step size.
    fn rotated_family() -> ComplexStructurePath {
        let mut k = vec![Q::zero(); 16];
        // rotation generator in the (e₀, e₂) plane, not commuting with J₀
        k[2] = q_from_i64(-1);
        k[2 * 4] = q_from_i64(1);
        ComplexStructurePath::rotated(2, standard_j(2), k, 20, vec![]).unwrap()
    }

    #[test]
    fn transport_defects_and_convergence() {
        let p = rotated_family();
        let a0 = class_vector(&c64m(&[2.0, 0.0, 0.0, 1.0], 2));
        let at_millistep = transport(&p, &a0, 1000).unwrap();
        assert!(
            at_millistep.max_subbundle_defect <= 1e-8,
            "{}",
            at_millistep.max_subbundle_defect
        );
        assert!(at_millistep.max_reality_defect <= 1e-8);
        // classical 4th-order scheme: the end-state error against a much
        // finer reference shrinks ≈ 16× per step halving
        let reference = transport(&p, &a0, 6400).unwrap();
        let sref = reference.samples.last().unwrap();
        let errs: Vec<f64> = [100usize, 200, 400]
            .iter()
            .map(|&steps| {
                let run = transport(&p, &a0, steps).unwrap();
                (run.samples.last().unwrap() - sref).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1].max(1e-300);
            assert!(ratio > 8.0 && ratio < 40.0, "ratio {ratio} in {errs:?}");
        }
    }

    #[test]
    fn pairings_are_conserved() {
        let p = test_family(&[1, 2, -1, 1]);
        let a0 = class_vector(&c64m(&[2.0, 0.0, 0.0, 1.0], 2));
        let run = transport(&p, &a0, 1000).unwrap();
        for cycle in &p.cycles {
            let pexp = (p.dim() - cycle.degree) / 2;
            let drift = pairing_drift(&p, &run, cycle, pexp).unwrap();
            assert!(drift <= 1e-8, "cycle {}: drift {drift}", cycle.name);
        }
    }

    #[test]
    fn naive_transport_drifts() {
        // control: projecting the initial class into each fiber's (1,1)
        // space, with no connection term, loses the total volume pairing
        let p = test_family(&[1, 2, -1, 1]);
        let a0 = class_vector(&c64m(&[2.0, 0.0, 0.0, 1.0], 2));
        let naive = transport_naive(&p, &a0, 1000).unwrap();
        let fundamental = &p.cycles[1];
        assert_eq!(fundamental.degree, 0);
        let drift = pairing_drift(&p, &naive, fundamental, 2).unwrap();
        assert!(drift > 1e-4, "control drift only {drift}");
        // the connection transport conserves the same pairing
        let run = transport(&p, &a0, 1000).unwrap();
        let conserved = pairing_drift(&p, &run, fundamental, 2).unwrap();
        assert!(conserved <= 1e-8, "{conserved}");
    }

    #[test]
    fn verdicts_constant_along_family() {
        let p = test_family(&[1, 2, 0, 1]);
        // positive definite start
        let a0 = class_vector(&c64m(&[1.0, 0.0, 0.0, 1.0], 2));
        let run = transport(&p, &a0, 1000).unwrap();
        let verdicts = verdict_invariance(&p, &run).unwrap();
        assert!(verdicts.iter().all(|v| v.in_p && v.signature == (2, 0)));
        // negative definite: in P but never in the Kähler component
        let b0 = class_vector(&c64m(&[-1.0, 0.0, 0.0, -1.0], 2));
        let run = transport(&p, &b0, 1000).unwrap();
        let verdicts = verdict_invariance(&p, &run).unwrap();
        assert!(verdicts.iter().all(|v| v.in_p && v.signature == (0, 2)));
        // indefinite: det < 0 throughout
        let c0 = class_vector(&c64m(&[1.0, 0.0, 0.0, -1.0], 2));
        let run = transport(&p, &c0, 1000).unwrap();
        let verdicts = verdict_invariance(&p, &run).unwrap();
        assert!(verdicts.iter().all(|v| !v.in_p));
    }

    #[test]
    fn family_document_roundtrip() {
        let p = test_family(&[1, 2, -1, 1]);
        let doc = serialize_family(&p);
        let p2 = load_family(&doc).unwrap();
        assert_eq!(p, p2);
        // a malformed structure is rejected
        let bad = doc.replace("kind = \"family\"", "kind = \"family\"\n");
        assert!(load_family(&bad).is_ok());
        let err = load_family("kind = \"family\"\nn = 1\n[[j]]\nrows = [[\"1\",\"0\"],[\"0\",\"1\"]]\n")
            .unwrap_err();
        assert!(err.to_string().contains("Identity"), "{err}");
    }
}
