//! Constant alternating forms on the real 2n-torus.
//!
//! These realize cohomology classes as exterior-algebra elements and act
//! as the independent oracle for cup products: the top wedge coefficient
//! is the intersection number (lattice volume normalized to 1).

use num::traits::{One, Zero};
use std::ops::{Add, Mul, Neg};

use crate::error::Error;
use crate::hermitian::{HermitianForm, C64};
use crate::rational::{Q, QC};
use nalgebra::DMatrix;

/// Enumerates all bitmasks over `dim` bits with `k` bits set, in
/// increasing numeric order.
pub fn subsets(dim: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << dim) {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

fn wedge_sign(a: u32, b: u32) -> i32 {
    // (-1)^{#{(i,j) : i ∈ a, j ∈ b, i > j}}
    let mut inversions = 0u32;
    let mut bits_b = b;
    while bits_b != 0 {
        let j = bits_b.trailing_zeros();
        bits_b &= bits_b - 1;
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Degree-k alternating form on ℝ^{2n}; one coefficient per strictly
/// increasing k-subset of the real basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingForm<T> {
    dim: usize,
    degree: usize,
    masks: Vec<u32>,
    coeffs: Vec<T>,
}

impl<T> AlternatingForm<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    pub fn zero(dim: usize, degree: usize) -> Self {
        let masks = subsets(dim, degree);
        let coeffs = vec![T::zero(); masks.len()];
        AlternatingForm { dim, degree, masks, coeffs }
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<T>) -> Result<Self, Error> {
        let masks = subsets(dim, degree);
        if coeffs.len() != masks.len() {
            return Err(Error::Dimension(format!(
                "degree-{degree} form on R^{dim} needs {} coefficients, got {}",
                masks.len(),
                coeffs.len()
            )));
        }
        Ok(AlternatingForm { dim, degree, masks, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    fn index_of(&self, mask: u32) -> usize {
        self.masks.binary_search(&mask).expect("mask of correct degree")
    }

    pub fn add_term(&mut self, mask: u32, value: T) {
        let i = self.index_of(mask);
        self.coeffs[i] = self.coeffs[i].clone() + value;
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, Error> {
        if self.dim != other.dim {
            return Err(Error::Dimension("wedge of forms on different spaces".into()));
        }
        if self.degree + other.degree > self.dim {
            return Err(Error::Dimension(format!(
                "wedge degree {} exceeds space dimension {}",
                self.degree + other.degree,
                self.dim
            )));
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (ma, ca) in self.masks.iter().zip(&self.coeffs) {
            if ca.is_zero() {
                continue;
            }
            for (mb, cb) in other.masks.iter().zip(&other.coeffs) {
                if cb.is_zero() || ma & mb != 0 {
                    continue;
                }
                let prod = ca.clone() * cb.clone();
                let term = if wedge_sign(*ma, *mb) > 0 { prod } else { -prod };
                out.add_term(ma | mb, term);
            }
        }
        Ok(out)
    }
}

/// Coefficient of the top basis form e_{1…dim} in the wedge of all
/// arguments; the degrees must sum to the space dimension.
pub fn wedge_top<T>(forms: &[AlternatingForm<T>]) -> Result<T, Error>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    let Some(first) = forms.first() else {
        return Err(Error::Argument("wedge_top of no forms".into()));
    };
    let dim = first.dim();
    let total: usize = forms.iter().map(|f| f.degree()).sum();
    if total != dim {
        return Err(Error::Dimension(format!(
            "degrees sum to {total}, expected {dim}"
        )));
    }
    let mut acc = AlternatingForm::<T>::zero(dim, 0);
    acc.coeffs[0] = T::one();
    for f in forms {
        acc = acc.wedge(f)?;
    }
    Ok(acc.coeffs[0].clone())
}

/// Real 2-form realizing the Hermitian form h: ω = (i/2) Σ h_{jk} dz_j ∧ dz̄_k
/// on the basis e_{2j} = dx_j, e_{2j+1} = dy_j. Exact coefficients.
pub fn realize_hermitian(h: &HermitianForm) -> AlternatingForm<Q> {
    let n = h.dim();
    let mut out = AlternatingForm::<Q>::zero(2 * n, 2);
    let half_i = QC::new(Q::zero(), crate::rational::q_ratio(1, 2));
    for j in 0..n {
        for k in 0..n {
            let c = half_i.clone() * h.entry(j, k).clone();
            // dz_j ∧ dz̄_k = dx_j∧dx_k - i dx_j∧dy_k + i dy_j∧dx_k + dy_j∧dy_k
            let terms: [(usize, usize, QC); 4] = [
                (2 * j, 2 * k, c.clone()),
                (2 * j, 2 * k + 1, c.clone() * QC::new(Q::zero(), -Q::one())),
                (2 * j + 1, 2 * k, c.clone() * QC::new(Q::zero(), Q::one())),
                (2 * j + 1, 2 * k + 1, c.clone()),
            ];
            for (a, b, v) in terms {
                if a == b {
                    continue;
                }
                let (lo, hi, v) = if a < b { (a, b, v) } else { (b, a, -v) };
                debug_assert!(v.im.is_zero() || !v.re.is_zero() || true);
                out.add_term((1 << lo) | (1 << hi), v.re.clone());
            }
        }
    }
    out
}

/// Floating-point realization of a pointwise Hermitian matrix.
pub fn realize_hermitian_f64(h: &DMatrix<C64>) -> AlternatingForm<f64> {
    let n = h.nrows();
    let mut out = AlternatingForm::<f64>::zero(2 * n, 2);
    for j in 0..n {
        for k in 0..n {
            let c = C64::new(0.0, 0.5) * h[(j, k)];
            let terms: [(usize, usize, C64); 4] = [
                (2 * j, 2 * k, c),
                (2 * j, 2 * k + 1, c * C64::new(0.0, -1.0)),
                (2 * j + 1, 2 * k, c * C64::new(0.0, 1.0)),
                (2 * j + 1, 2 * k + 1, c),
            ];
            for (a, b, v) in terms {
                if a == b {
                    continue;
                }
                let (lo, hi, v) = if a < b { (a, b, v) } else { (b, a, -v) };
                out.add_term((1 << lo) | (1 << hi), v.re);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::mixed_discriminant;
    use crate::rational::{q_from_i64, q_ratio, qc_new};
    use rand::{Rng, SeedableRng};

    #[test]
    fn wedge_top_basics() {
        // n=1: a·e12 -> a
        let f = AlternatingForm::from_coeffs(2, 2, vec![q_ratio(5, 3)]).unwrap();
        assert_eq!(wedge_top(&[f]).unwrap(), q_ratio(5, 3));
        // n=2: e12 ∧ e34 -> 1
        let mut a = AlternatingForm::<Q>::zero(4, 2);
        a.add_term(0b0011, Q::one());
        let mut b = AlternatingForm::<Q>::zero(4, 2);
        b.add_term(0b1100, Q::one());
        assert_eq!(wedge_top(&[a.clone(), b.clone()]).unwrap(), Q::one());
        // graded-commutative in even degree, sign flip comes from odd pairs
        assert_eq!(wedge_top(&[b, a]).unwrap(), Q::one());
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let a = AlternatingForm::<Q>::zero(4, 2);
        assert!(wedge_top(&[a]).is_err());
    }

    #[test]
    fn identity_realization_squares_to_two() {
        let id = HermitianForm::identity(2);
        let w = realize_hermitian(&id);
        assert_eq!(wedge_top(&[w.clone(), w]).unwrap(), q_from_i64(2));
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianForm {
        let mut rows = vec![vec![QC::new(Q::zero(), Q::zero()); n]; n];
        for j in 0..n {
            rows[j][j] = QC::new(q_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3)), Q::zero());
            for k in j + 1..n {
                let re = q_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                let im = q_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                rows[j][k] = qc_new(re.clone(), im.clone());
                rows[k][j] = qc_new(re, -im);
            }
        }
        HermitianForm::from_rows(rows).unwrap()
    }

    #[test]
    fn realization_matches_mixed_discriminant() {
        // wedge_top of n realizations = n! × mixed discriminant, exactly.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for n in 1..=3usize {
            for _ in 0..8 {
                let forms: Vec<HermitianForm> = (0..n).map(|_| random_hermitian(&mut rng, n)).collect();
                let refs: Vec<&HermitianForm> = forms.iter().collect();
                let realizations: Vec<_> = forms.iter().map(realize_hermitian).collect();
                let mut fact = Q::one();
                for i in 2..=n {
                    fact *= q_from_i64(i as i64);
                }
                assert_eq!(
                    wedge_top(&realizations).unwrap(),
                    mixed_discriminant(&refs).unwrap() * fact,
                    "n={n}"
                );
            }
        }
    }
}
