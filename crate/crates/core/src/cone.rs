//! Positivity verdicts on (1,1)-classes over a manifold model: membership
//! in the numerically positive set P, Kähler and nef tests, component
//! classification by signature, finitely generated dual-cone membership,
//! and the iterative nef certification driven by the divided polynomial
//! identity.
//!
//! Every verdict is relative to the model's declared cycle table.

use crate::error::Error;
use crate::hermitian::{exact_signature, HermitianForm};
use crate::lp::{nonnegative_combination, LpResult};
use crate::model::{CohClass, CycleClass, ManifoldModel};
use crate::poly::{certify_delta0, ray_positivity, RatPoly, RayPositivity};
use crate::rational::{q_from_i64, Q};
use num::traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Boundary,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Boundary => "boundary",
        }
    }
}

/// One failing or tight constraint: the cycle, the exponent split
/// (copies of α, copies of ω), and the constraint value. `detail`
/// carries a rendered ray polynomial when the test was over all t ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub cycle: String,
    pub exponents: (usize, usize),
    pub value: Q,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub answer: Answer,
    pub witnesses: Vec<Witness>,
    /// Smallest constraint value encountered across all cycles.
    pub margin: Option<Q>,
}

impl Verdict {
    fn from_strict(constraints: Vec<Witness>) -> Verdict {
        let margin = constraints.iter().map(|w| w.value.clone()).min();
        let witnesses: Vec<Witness> = constraints
            .into_iter()
            .filter(|w| !w.value.is_positive())
            .collect();
        let answer = if witnesses.iter().any(|w| w.value.is_negative()) {
            Answer::No
        } else if !witnesses.is_empty() {
            Answer::Boundary
        } else {
            Answer::Yes
        };
        Verdict { answer, witnesses, margin }
    }

    fn from_weak(constraints: Vec<Witness>) -> Verdict {
        let margin = constraints.iter().map(|w| w.value.clone()).min();
        let witnesses: Vec<Witness> = constraints
            .into_iter()
            .filter(|w| w.value.is_negative())
            .collect();
        let answer = if witnesses.is_empty() { Answer::Yes } else { Answer::No };
        Verdict { answer, witnesses, margin }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentLabel {
    NotInP,
    /// Inertia (p, q) of the form; (n, 0) is the Kähler component.
    Signature { pos: usize, neg: usize },
}

impl ComponentLabel {
    pub fn is_kahler_component(&self) -> bool {
        matches!(self, ComponentLabel::Signature { neg: 0, .. })
    }
}

fn binom(n: usize, k: usize) -> Q {
    let mut v = Q::one();
    for i in 0..k {
        v = v * q_from_i64((n - i) as i64) / q_from_i64((i + 1) as i64);
    }
    v
}

fn positive_cycles(model: &ManifoldModel) -> impl Iterator<Item = &CycleClass> {
    model.cycles.iter().filter(|c| c.dim_p >= 1)
}

/// ∫_Y α^k ∧ ω^{p−k} for a dimension-p cycle.
fn mixed_power(
    model: &ManifoldModel,
    cycle: &CycleClass,
    alpha: &CohClass,
    omega: &CohClass,
    k: usize,
) -> Result<Q, Error> {
    let p = cycle.dim_p;
    let mut forms: Vec<&CohClass> = Vec::with_capacity(p);
    forms.extend(std::iter::repeat(alpha).take(k));
    forms.extend(std::iter::repeat(omega).take(p - k));
    model.intersect(cycle, &forms)
}

/// Membership in P: ∫_Y α^p > 0 for every declared cycle of dimension
/// p ≥ 1. Strict; an exact zero yields "boundary".
pub fn in_p(model: &ManifoldModel, alpha: &CohClass) -> Result<Verdict, Error> {
    let mut constraints = Vec::new();
    for cycle in positive_cycles(model) {
        let forms: Vec<&CohClass> = std::iter::repeat(alpha).take(cycle.dim_p).collect();
        let value = model.intersect(cycle, &forms)?;
        constraints.push(Witness {
            cycle: cycle.name.clone(),
            exponents: (cycle.dim_p, 0),
            value,
            detail: None,
        });
    }
    Ok(Verdict::from_strict(constraints))
}

/// Connected component of P containing a generic-torus class, labelled
/// by the signature of the form; only defined on generic tori.
pub fn classify_component(model: &ManifoldModel, alpha: &CohClass) -> Result<ComponentLabel, Error> {
    if !model.is_generic_torus() {
        return Err(Error::Argument(
            "component classification requires a generic torus model".into(),
        ));
    }
    let h = alpha.as_torus()?;
    if in_p(model, alpha)?.answer != Answer::Yes {
        return Ok(ComponentLabel::NotInP);
    }
    let (pos, neg, _zero) = exact_signature(h);
    Ok(ComponentLabel::Signature { pos, neg })
}

/// The exact ray polynomial q_Y(t) = ∫_Y (α + tω)^p.
pub fn ray_polynomial(
    model: &ManifoldModel,
    cycle: &CycleClass,
    alpha: &CohClass,
    omega: &CohClass,
) -> Result<RatPoly, Error> {
    let p = cycle.dim_p;
    let mut coeffs = Vec::with_capacity(p + 1);
    for k in 0..=p {
        // coefficient of t^k
        coeffs.push(binom(p, k) * mixed_power(model, cycle, alpha, omega, p - k)?);
    }
    Ok(RatPoly::new(coeffs))
}

fn check_reference(model: &ManifoldModel, omega: &CohClass) -> Result<(), Error> {
    if !model.is_kahler_reference(omega)? {
        return Err(Error::Argument(
            "reference class fails the model's Kähler contract".into(),
        ));
    }
    Ok(())
}

/// Kähler test: q_Y(t) = ∫_Y (α + tω)^p must be strictly positive on
/// [0, ∞) for every cycle, certified by exact root counting.
pub fn is_kahler(model: &ManifoldModel, alpha: &CohClass, omega: &CohClass) -> Result<Verdict, Error> {
    check_reference(model, omega)?;
    let mut witnesses = Vec::new();
    let mut margin: Option<Q> = None;
    let mut boundary = false;
    for cycle in positive_cycles(model) {
        let q = ray_polynomial(model, cycle, alpha, omega)?;
        let at0 = q.eval(&Q::zero());
        margin = Some(match margin {
            Some(m) => m.min(at0.clone()),
            None => at0.clone(),
        });
        match ray_positivity(&q) {
            RayPositivity::Positive => {}
            RayPositivity::ZeroAtOrigin => {
                boundary = true;
                witnesses.push(Witness {
                    cycle: cycle.name.clone(),
                    exponents: (cycle.dim_p, 0),
                    value: Q::zero(),
                    detail: Some(format!("q(t) = {}", q.to_string_in("t"))),
                });
            }
            RayPositivity::NotPositive => {
                // the ray polynomial attains a nonpositive value; report
                // its value at 0 when that is already nonpositive, else
                // the root value 0
                let value = if at0.is_positive() { Q::zero() } else { at0.clone() };
                witnesses.push(Witness {
                    cycle: cycle.name.clone(),
                    exponents: (cycle.dim_p, 0),
                    value,
                    detail: Some(format!("q(t) = {}", q.to_string_in("t"))),
                });
            }
        }
    }
    let failing = witnesses
        .iter()
        .any(|w| w.detail.is_some() && !boundary_only(w, boundary));
    let answer = if witnesses.is_empty() {
        Answer::Yes
    } else if failing {
        Answer::No
    } else {
        Answer::Boundary
    };
    Ok(Verdict { answer, witnesses, margin })
}

fn boundary_only(w: &Witness, boundary: bool) -> bool {
    boundary && w.value.is_zero()
}

/// Nef test: ∫_Y α^k ∧ ω^{p−k} ≥ 0 for every cycle and every k = 1..p.
pub fn is_nef(model: &ManifoldModel, alpha: &CohClass, omega: &CohClass) -> Result<Verdict, Error> {
    check_reference(model, omega)?;
    let mut constraints = Vec::new();
    for cycle in positive_cycles(model) {
        for k in 1..=cycle.dim_p {
            let value = mixed_power(model, cycle, alpha, omega, k)?;
            constraints.push(Witness {
                cycle: cycle.name.clone(),
                exponents: (k, cycle.dim_p - k),
                value,
                detail: None,
            });
        }
    }
    Ok(Verdict::from_weak(constraints))
}

// ---------------------------------------------------------------------
// dual cone
// ---------------------------------------------------------------------

/// Real coordinate basis of the model's (1,1) space: on a torus the n²
/// Hermitian matrices E_jj, E_jk + E_kj, i(E_jk − E_kj); on a surface
/// the lattice unit vectors.
pub fn coordinate_basis(model: &ManifoldModel) -> Result<Vec<CohClass>, Error> {
    match &model.data {
        crate::model::ModelData::Surface { rank, .. } => Ok((0..*rank)
            .map(|i| {
                let mut v = vec![Q::zero(); *rank];
                v[i] = Q::one();
                CohClass::Surface(v)
            })
            .collect()),
        _ => {
            let n = model.n;
            let mut basis = Vec::with_capacity(n * n);
            for j in 0..n {
                let mut d = vec![Q::zero(); n];
                d[j] = Q::one();
                basis.push(CohClass::Torus(HermitianForm::diag(&d)));
            }
            for j in 0..n {
                for k in j + 1..n {
                    basis.push(CohClass::Torus(unit_offdiag(n, j, k, false)?));
                    basis.push(CohClass::Torus(unit_offdiag(n, j, k, true)?));
                }
            }
            Ok(basis)
        }
    }
}

fn unit_offdiag(n: usize, j: usize, k: usize, imag: bool) -> Result<HermitianForm, Error> {
    use crate::rational::QC;
    let mut entries = vec![QC::new(Q::zero(), Q::zero()); n * n];
    if imag {
        entries[j * n + k] = QC::new(Q::zero(), Q::one());
        entries[k * n + j] = QC::new(Q::zero(), -Q::one());
    } else {
        entries[j * n + k] = QC::new(Q::one(), Q::zero());
        entries[k * n + j] = QC::new(Q::one(), Q::zero());
    }
    HermitianForm::new(n, entries)
}

/// Coordinates of a class in the `coordinate_basis` ordering.
pub fn class_coordinates(model: &ManifoldModel, class: &CohClass) -> Result<Vec<Q>, Error> {
    match class {
        CohClass::Surface(v) => Ok(v.clone()),
        CohClass::Torus(h) => {
            if h.dim() != model.n {
                return Err(Error::Dimension("class does not match model dimension".into()));
            }
            let n = model.n;
            let mut coords = Vec::with_capacity(n * n);
            for j in 0..n {
                coords.push(h.entry(j, j).re.clone());
            }
            for j in 0..n {
                for k in j + 1..n {
                    coords.push(h.entry(j, k).re.clone());
                    coords.push(h.entry(j, k).im.clone());
                }
            }
            Ok(coords)
        }
    }
}

/// Generators of the (finite-model) dual cone: for each cycle Y of
/// dimension p ≥ 1 and each reference ω, the functional
/// β ↦ ∫_Y β ∧ ω^{p−1} as a coordinate vector.
pub fn dual_cone_generators(
    model: &ManifoldModel,
    omegas: &[CohClass],
) -> Result<Vec<Vec<Q>>, Error> {
    if omegas.is_empty() {
        return Err(Error::Argument("need at least one reference class".into()));
    }
    for w in omegas {
        check_reference(model, w)?;
    }
    let basis = coordinate_basis(model)?;
    let mut gens = Vec::new();
    for cycle in positive_cycles(model) {
        let p = cycle.dim_p;
        for omega in omegas {
            let mut vec = Vec::with_capacity(basis.len());
            for e in &basis {
                let mut forms: Vec<&CohClass> = vec![e];
                forms.extend(std::iter::repeat(omega).take(p - 1));
                vec.push(model.intersect(cycle, &forms)?);
            }
            gens.push(vec);
        }
    }
    Ok(gens)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualMembership {
    pub feasible: bool,
    /// Nonnegative weights with Σ λᵢ gᵢ = β when feasible.
    pub lambda: Option<Vec<Q>>,
    /// Functional y with y·gᵢ ≤ 0 for all i and y·β > 0 otherwise.
    pub separating: Option<Vec<Q>>,
}

/// Exact membership of β in the cone generated by the given functionals.
pub fn in_dual_cone(generators: &[Vec<Q>], beta: &[Q]) -> Result<DualMembership, Error> {
    match nonnegative_combination(generators, beta)? {
        LpResult::Feasible { lambda } => Ok(DualMembership {
            feasible: true,
            lambda: Some(lambda),
            separating: None,
        }),
        LpResult::Infeasible { separating } => Ok(DualMembership {
            feasible: false,
            lambda: None,
            separating: Some(separating),
        }),
    }
}

// ---------------------------------------------------------------------
// iterative nef certification
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStep {
    pub nu: usize,
    /// (cycle, ∫_Y (α + (1−δ₀)^ν ω)^p), in cycle-table order.
    pub values: Vec<(String, Q)>,
    pub min_value: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationTrace {
    pub delta0: Q,
    /// ∫_Y α ∧ ω^{p−1} ≥ 0 for every cycle (checked before iterating).
    pub hypothesis_ok: bool,
    pub steps: Vec<IterationStep>,
    pub complete: bool,
    pub failure: Option<String>,
}

/// Iterated strict-positivity certification of α + (1−δ₀)^ν ω for
/// ν = 0..ν_max. Each step from ν ≥ 1 is recomputed through the divided
/// identity decomposition and must agree exactly with the direct
/// expansion. δ₀ must pass certification for every degree up to the
/// model dimension.
pub fn nef_by_iteration(
    model: &ManifoldModel,
    alpha: &CohClass,
    omega: &CohClass,
    delta0: &Q,
    nu_max: usize,
) -> Result<CertificationTrace, Error> {
    check_reference(model, omega)?;
    certify_delta0(model.n, delta0)?;

    let mut trace = CertificationTrace {
        delta0: delta0.clone(),
        hypothesis_ok: true,
        steps: Vec::new(),
        complete: false,
        failure: None,
    };

    for cycle in positive_cycles(model) {
        let v = mixed_power(model, cycle, alpha, omega, 1)?;
        if v.is_negative() {
            trace.hypothesis_ok = false;
            trace.failure = Some(format!(
                "hypothesis violated on cycle `{}`: the degree-1 pairing is {}",
                cycle.name,
                crate::rational::format_q(&v)
            ));
            return Ok(trace);
        }
    }

    let one_minus = Q::one() - delta0.clone();
    let tables: Vec<_> = (1..=model.n)
        .map(crate::poly::divided_expansion)
        .collect::<Result<Vec<_>, _>>()?;

    let mut scale_prev = Q::one(); // (1−δ₀)^{ν−1} going into step ν
    for nu in 0..=nu_max {
        let scale = if nu == 0 {
            Q::one()
        } else {
            scale_prev.clone() * one_minus.clone()
        };
        let omega_nu = omega.scale(&scale);
        let alpha_nu = alpha.add(&omega_nu)?;
        let mut values = Vec::new();
        for cycle in positive_cycles(model) {
            let p = cycle.dim_p;
            let forms: Vec<&CohClass> = std::iter::repeat(&alpha_nu).take(p).collect();
            let direct = model.intersect(cycle, &forms)?;
            if nu >= 1 {
                // decomposition at the previous iterate: with
                // x = ω_{ν−1}, y = α + ω_{ν−1},
                //   ∫ (y − δx)^p = (1−δ)^p ∫ x^p + Σ b_{ℓm} δ^m ∫ α x^ℓ y^{p−1−ℓ}
                let omega_prev = omega.scale(&scale_prev);
                let alpha_prev = alpha.add(&omega_prev)?;
                let x_forms: Vec<&CohClass> = std::iter::repeat(&omega_prev).take(p).collect();
                let mut decomposed =
                    one_minus.pow(p as i32) * model.intersect(cycle, &x_forms)?;
                let table = &tables[p - 1];
                for (&(l, m), b) in table.b.iter() {
                    let mut forms: Vec<&CohClass> = vec![alpha];
                    forms.extend(std::iter::repeat(&omega_prev).take(l));
                    forms.extend(std::iter::repeat(&alpha_prev).take(p - 1 - l));
                    let term = model.intersect(cycle, &forms)?;
                    decomposed += b.clone() * delta0.pow(m as i32) * term;
                }
                if decomposed != direct {
                    return Err(Error::Internal(format!(
                        "identity decomposition disagrees with direct expansion on cycle `{}` at step {nu}",
                        cycle.name
                    )));
                }
            }
            values.push((cycle.name.clone(), direct));
        }
        let min_value = values.iter().map(|(_, v)| v.clone()).min().unwrap();
        let ok = min_value.is_positive();
        trace.steps.push(IterationStep { nu, values, min_value: min_value.clone() });
        if !ok {
            trace.failure = Some(format!(
                "iterate {nu} fails strict positivity with minimum value {}",
                crate::rational::format_q(&min_value)
            ));
            return Ok(trace);
        }
        if nu >= 1 {
            scale_prev = scale;
        }
    }
    trace.complete = true;
    Ok(trace)
}
