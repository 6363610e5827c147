//! Hermitian forms and the eigenvalue / mixed-discriminant machinery.
//!
//! Constant real (1,1)-classes on a torus are exactly the Hermitian
//! matrices; all intersection numbers of such classes reduce to mixed
//! discriminants, which we evaluate exactly over the rationals.

use nalgebra::{Complex, DMatrix};
use num::traits::{One, Signed, Zero};

use crate::error::Error;
use crate::rational::{qc_to_c64, Q, QC};

pub type C64 = Complex<f64>;

/// Constant-coefficient real (1,1)-form on a torus, stored as an exact
/// n×n Hermitian matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    n: usize,
    entries: Vec<QC>,
}

impl HermitianForm {
    pub fn new(n: usize, entries: Vec<QC>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Argument("hermitian form needs dimension >= 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for dimension {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        let form = HermitianForm { n, entries };
        for j in 0..n {
            for k in 0..n {
                if form.entry(j, k) != &form.entry(k, j).conj() {
                    return Err(Error::Argument(format!(
                        "matrix is not hermitian at entry ({j},{k})"
                    )));
                }
            }
        }
        Ok(form)
    }

    pub fn from_rows(rows: Vec<Vec<QC>>) -> Result<Self, Error> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows have unequal lengths".into()));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![Q::one(); n])
    }

    pub fn zero(n: usize) -> Self {
        HermitianForm {
            n,
            entries: vec![QC::zero(); n * n],
        }
    }

    pub fn diag(values: &[Q]) -> Self {
        let n = values.len();
        let mut entries = vec![QC::zero(); n * n];
        for (j, v) in values.iter().enumerate() {
            entries[j * n + j] = QC::new(v.clone(), Q::zero());
        }
        HermitianForm { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> &QC {
        &self.entries[j * self.n + k]
    }

    pub fn entries(&self) -> &[QC] {
        &self.entries
    }

    pub fn scale(&self, c: &Q) -> Self {
        let cc = QC::new(c.clone(), Q::zero());
        HermitianForm {
            n: self.n,
            entries: self.entries.iter().map(|e| e.clone() * cc.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot add forms of dimensions {} and {}",
                self.n, other.n
            )));
        }
        Ok(HermitianForm {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    /// Exact determinant; real because the matrix is Hermitian.
    pub fn det(&self) -> Q {
        let rows: Vec<Vec<QC>> = (0..self.n)
            .map(|j| (0..self.n).map(|k| self.entry(j, k).clone()).collect())
            .collect();
        let d = crate::rational::det_qc(&rows);
        debug_assert!(d.im.is_zero());
        d.re
    }

    pub fn to_c64(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |j, k| qc_to_c64(self.entry(j, k)))
    }

    /// Block-diagonal sum; realizes π₁*α + π₂*β on a product torus.
    pub fn block_diag(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut entries = vec![QC::zero(); n * n];
        for j in 0..self.n {
            for k in 0..self.n {
                entries[j * n + k] = self.entry(j, k).clone();
            }
        }
        for j in 0..other.n {
            for k in 0..other.n {
                entries[(self.n + j) * n + (self.n + k)] = other.entry(j, k).clone();
            }
        }
        HermitianForm { n, entries }
    }

    /// Restriction to a complex subspace with basis columns `b` (each of
    /// length n): returns Bᴴ·H·B as a p×p Hermitian form.
    pub fn restrict(&self, basis: &[Vec<QC>]) -> Result<Self, Error> {
        let p = basis.len();
        if p == 0 {
            return Err(Error::Argument("empty restriction basis".into()));
        }
        if basis.iter().any(|col| col.len() != self.n) {
            return Err(Error::Dimension("basis column length mismatch".into()));
        }
        let mut entries = Vec::with_capacity(p * p);
        for a in 0..p {
            for b in 0..p {
                let mut acc = QC::zero();
                for j in 0..self.n {
                    for k in 0..self.n {
                        acc = acc + basis[a][j].conj() * self.entry(j, k).clone() * basis[b][k].clone();
                    }
                }
                entries.push(acc);
            }
        }
        HermitianForm::new(p, entries)
    }
}

/// Nondecreasing list of (generalized) eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        EigenSpectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().collect()
}

/// Generalized eigenvalues of the pencil det(α − λω) = 0 for ω positive
/// definite, via Cholesky reduction to an ordinary Hermitian problem.
pub fn relative_eigenvalues(alpha: &HermitianForm, omega: &HermitianForm) -> Result<EigenSpectrum, Error> {
    relative_eigenvalues_c64(&alpha.to_c64(), &omega.to_c64())
}

/// Floating-point entry point used by the grid code.
pub fn relative_eigenvalues_c64(alpha: &DMatrix<C64>, omega: &DMatrix<C64>) -> Result<EigenSpectrum, Error> {
    if alpha.nrows() != omega.nrows() {
        return Err(Error::Dimension(format!(
            "pencil dimensions {} vs {}",
            alpha.nrows(),
            omega.nrows()
        )));
    }
    // nalgebra's complex Cholesky does not reject indefinite input, so
    // gate on the spectrum first.
    let min_eig = hermitian_eigenvalues(omega)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let chol = omega
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eig })?;
    // B = L⁻¹ α L⁻ᴴ has the same eigenvalues as the pencil.
    let l = chol.l();
    let li = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("cholesky factor not invertible".into()))?;
    let b = &li * alpha * li.adjoint();
    Ok(EigenSpectrum::from_unsorted(hermitian_eigenvalues(&b)))
}

/// Inertia of a Hermitian form from floating-point eigenvalues, with a
/// scale-invariant zero threshold of 1e-9 × max |λ| (1 if all vanish).
pub fn signature(alpha: &HermitianForm) -> (usize, usize, usize) {
    let eigs = hermitian_eigenvalues(&alpha.to_c64());
    let scale = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * if scale == 0.0 { 1.0 } else { scale };
    let mut sig = (0, 0, 0);
    for v in eigs {
        if v > tol {
            sig.0 += 1;
        } else if v < -tol {
            sig.1 += 1;
        } else {
            sig.2 += 1;
        }
    }
    sig
}

/// Exact inertia by congruence reduction (Sylvester's law). Used where
/// verdicts must be exact on rational inputs.
pub fn exact_signature(alpha: &HermitianForm) -> (usize, usize, usize) {
    let n = alpha.dim();
    let mut m: Vec<Vec<QC>> = (0..n)
        .map(|j| (0..n).map(|k| alpha.entry(j, k).clone()).collect())
        .collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut pos = 0usize;
    let mut neg = 0usize;
    while !alive.is_empty() {
        // Prefer a nonzero diagonal pivot.
        if let Some(&j) = alive.iter().find(|&&j| !m[j][j].is_zero()) {
            let d = m[j][j].re.clone();
            debug_assert!(m[j][j].im.is_zero());
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            alive.retain(|&x| x != j);
            for &r in &alive {
                for &c in &alive {
                    // H'_{rc} = H_{rc} - H_{rj} H_{jc} / d
                    let adj = m[r][j].clone() * m[j][c].clone() / QC::new(d.clone(), Q::zero());
                    m[r][c] = m[r][c].clone() - adj;
                }
            }
            continue;
        }
        // All diagonal entries vanish; look for an off-diagonal entry and
        // rotate it onto the diagonal.
        let mut pair = None;
        'outer: for (a, &j) in alive.iter().enumerate() {
            for &k in &alive[a + 1..] {
                if !m[j][k].is_zero() {
                    pair = Some((j, k));
                    break 'outer;
                }
            }
        }
        let Some((j, k)) = pair else { break };
        // Basis change e_j <- e_j + c e_k with c chosen so the new
        // diagonal entry 2 Re(c * H_{jk}) is nonzero.
        let a = m[j][k].clone();
        let c = if !a.re.is_zero() {
            QC::one()
        } else {
            QC::new(Q::zero(), Q::one())
        };
        let idx: Vec<usize> = (0..n).collect();
        for &t in &idx {
            let add = c.clone() * m[t][k].clone();
            m[t][j] = m[t][j].clone() + add;
        }
        for &t in &idx {
            let add = c.conj() * m[k][t].clone();
            m[j][t] = m[j][t].clone() + add;
        }
    }
    (pos, neg, n - pos - neg)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(current: &mut Vec<usize>, remaining: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            current.push(v);
            rec(current, remaining, out);
            current.pop();
            remaining.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// Mixed discriminant D(α₁,…,αₙ), normalized so D(α,…,α) = det α.
/// Exact over the rationals: D = (1/n!) Σ_σ det(col j taken from α_{σ(j)}).
pub fn mixed_discriminant(forms: &[&HermitianForm]) -> Result<Q, Error> {
    let n = forms.len();
    if n == 0 {
        return Err(Error::Argument("mixed discriminant of no forms".into()));
    }
    if forms.iter().any(|f| f.dim() != n) {
        return Err(Error::Dimension(format!(
            "mixed discriminant needs {n} forms of dimension {n}"
        )));
    }
    let mut acc = QC::zero();
    for sigma in permutations(n) {
        let rows: Vec<Vec<QC>> = (0..n)
            .map(|j| (0..n).map(|k| forms[sigma[k]].entry(j, k).clone()).collect())
            .collect();
        acc = acc + crate::rational::det_qc(&rows);
    }
    let mut fact = Q::one();
    for i in 2..=n {
        fact *= crate::rational::q_from_i64(i as i64);
    }
    let d = acc / QC::new(fact, Q::zero());
    if !d.im.is_zero() {
        return Err(Error::Internal("mixed discriminant came out non-real".into()));
    }
    Ok(d.re)
}

/// Floating-point mixed discriminant for grid densities.
pub fn mixed_discriminant_f64(forms: &[&DMatrix<C64>]) -> f64 {
    let n = forms.len();
    let mut acc = C64::new(0.0, 0.0);
    for sigma in permutations(n) {
        let m = DMatrix::from_fn(n, n, |j, k| forms[sigma[k]][(j, k)]);
        acc += m.determinant();
    }
    let fact: f64 = (2..=n).map(|i| i as f64).product::<f64>().max(1.0);
    acc.re / fact
}
