//! Finite, checkable stand-ins for compact Kähler manifolds: a declared
//! cycle table plus an exact intersection evaluator. Three families are
//! supported: tori (classes are constant Hermitian forms), surfaces given
//! by an intersection matrix on the (1,1) lattice, and product tori X×X.
//!
//! All verdicts downstream are relative to the declared cycle table; a
//! finite model cannot quantify over every analytic subset.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exterior::{realize_hermitian, wedge_top};
use crate::hermitian::{exact_signature, mixed_discriminant, HermitianForm};
use crate::rational::{format_q, format_qc, parse_q, parse_qc, q_from_i64, Q, QC};
use num::traits::{One, Signed, Zero};

/// A cohomology class in the model's (1,1) space.
#[derive(Debug, Clone, PartialEq)]
pub enum CohClass {
    /// Constant Hermitian form (torus and product models).
    Torus(HermitianForm),
    /// Coordinate vector on the rank-h (1,1) lattice (surface models).
    Surface(Vec<Q>),
}

impl CohClass {
    pub fn as_torus(&self) -> Result<&HermitianForm, Error> {
        match self {
            CohClass::Torus(h) => Ok(h),
            CohClass::Surface(_) => Err(Error::Argument("expected a torus class".into())),
        }
    }

    pub fn as_surface(&self) -> Result<&[Q], Error> {
        match self {
            CohClass::Surface(v) => Ok(v),
            CohClass::Torus(_) => Err(Error::Argument("expected a surface class".into())),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        match self {
            CohClass::Torus(h) => CohClass::Torus(h.scale(c)),
            CohClass::Surface(v) => CohClass::Surface(v.iter().map(|x| x.clone() * c.clone()).collect()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        match (self, other) {
            (CohClass::Torus(a), CohClass::Torus(b)) => Ok(CohClass::Torus(a.add(b)?)),
            (CohClass::Surface(a), CohClass::Surface(b)) if a.len() == b.len() => Ok(CohClass::Surface(
                a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect(),
            )),
            _ => Err(Error::Dimension("cannot add classes of different kinds".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CyclePayload {
    /// The fundamental class [X].
    Fundamental,
    /// A reduced point; intersects to 1 against the empty form list.
    Point,
    /// Complex subspace through the origin of a torus: `basis` holds
    /// dim_p complex columns of length n, plus a positive volume weight.
    TorusSubspace { basis: Vec<Vec<QC>>, weight: Q },
    /// Integral curve class on the surface lattice.
    SurfaceCurve(Vec<Q>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleClass {
    pub name: String,
    pub dim_p: usize,
    pub payload: CyclePayload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelData {
    Torus {
        /// Generic tori carry no analytic subsets besides points and X.
        generic: bool,
    },
    Surface {
        rank: usize,
        /// Symmetric intersection matrix on the (1,1) lattice.
        q: Vec<Vec<Q>>,
        /// Declared reference class fixing the Kähler chamber.
        kahler_ref: Vec<Q>,
    },
    Product {
        base: Box<ManifoldModel>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    /// Complex dimension (products expose 2 × base dimension).
    pub n: usize,
    pub cycles: Vec<CycleClass>,
    pub data: ModelData,
}

fn factorial(n: usize) -> Q {
    let mut f = Q::one();
    for i in 2..=n {
        f *= q_from_i64(i as i64);
    }
    f
}

fn binom(n: usize, k: usize) -> Q {
    let mut v = Q::one();
    for i in 0..k {
        v = v * q_from_i64((n - i) as i64) / q_from_i64((i + 1) as i64);
    }
    v
}

impl ManifoldModel {
    pub fn generic_torus(n: usize) -> Self {
        ManifoldModel {
            n,
            cycles: vec![
                CycleClass {
                    name: "X".into(),
                    dim_p: n,
                    payload: CyclePayload::Fundamental,
                },
                CycleClass {
                    name: "pt".into(),
                    dim_p: 0,
                    payload: CyclePayload::Point,
                },
            ],
            data: ModelData::Torus { generic: true },
        }
    }

    pub fn is_generic_torus(&self) -> bool {
        matches!(self.data, ModelData::Torus { generic: true })
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.data, ModelData::Torus { .. })
    }

    pub fn cycle(&self, name: &str) -> Result<&CycleClass, Error> {
        self.cycles
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Model(format!("unknown cycle `{name}`")))
    }

    pub fn fundamental(&self) -> &CycleClass {
        self.cycles
            .iter()
            .find(|c| matches!(c.payload, CyclePayload::Fundamental))
            .expect("validated model has a fundamental class")
    }

    /// Validates that a class matches the model kind and dimension.
    pub fn check_class(&self, class: &CohClass) -> Result<(), Error> {
        match (&self.data, class) {
            (ModelData::Torus { .. }, CohClass::Torus(h)) | (ModelData::Product { .. }, CohClass::Torus(h)) => {
                if h.dim() != self.n {
                    return Err(Error::Dimension(format!(
                        "class dimension {} does not match model dimension {}",
                        h.dim(),
                        self.n
                    )));
                }
                Ok(())
            }
            (ModelData::Surface { rank, .. }, CohClass::Surface(v)) => {
                if v.len() != *rank {
                    return Err(Error::Dimension(format!(
                        "class rank {} does not match lattice rank {rank}",
                        v.len()
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Argument("class kind does not match model kind".into())),
        }
    }

    /// True when the class verifies the model's Kähler reference
    /// contract: positive definite on tori, inside the declared Kähler
    /// chamber on surfaces.
    pub fn is_kahler_reference(&self, class: &CohClass) -> Result<bool, Error> {
        self.check_class(class)?;
        match (&self.data, class) {
            (ModelData::Torus { .. }, CohClass::Torus(h)) | (ModelData::Product { .. }, CohClass::Torus(h)) => {
                Ok(exact_signature(h) == (h.dim(), 0, 0))
            }
            (ModelData::Surface { q, kahler_ref, .. }, CohClass::Surface(v)) => {
                let self_pair = pairing(q, v, v);
                if !self_pair.is_positive() {
                    return Ok(false);
                }
                if !pairing(q, v, kahler_ref).is_positive() {
                    return Ok(false);
                }
                for c in &self.cycles {
                    if let CyclePayload::SurfaceCurve(cv) = &c.payload {
                        if !pairing(q, v, cv).is_positive() {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            _ => unreachable!("check_class accepted"),
        }
    }

    /// Exact intersection number ∫_Y α₁ ∧ … ∧ α_p for a declared cycle Y
    /// of dimension p. Multilinear and symmetric in the forms.
    pub fn intersect(&self, cycle: &CycleClass, forms: &[&CohClass]) -> Result<Q, Error> {
        if forms.len() != cycle.dim_p {
            return Err(Error::Argument(format!(
                "cycle `{}` has dimension {}, got {} forms",
                cycle.name,
                cycle.dim_p,
                forms.len()
            )));
        }
        for f in forms {
            self.check_class(f)?;
        }
        match (&cycle.payload, &self.data) {
            (CyclePayload::Point, _) => Ok(Q::one()),
            (CyclePayload::Fundamental, ModelData::Torus { .. }) | (CyclePayload::Fundamental, ModelData::Product { .. }) => {
                let hs: Vec<&HermitianForm> = forms
                    .iter()
                    .map(|f| f.as_torus())
                    .collect::<Result<_, _>>()?;
                Ok(factorial(self.n) * mixed_discriminant(&hs)?)
            }
            (CyclePayload::TorusSubspace { basis, weight }, ModelData::Torus { .. }) => {
                let restricted: Vec<HermitianForm> = forms
                    .iter()
                    .map(|f| f.as_torus().and_then(|h| h.restrict(basis)))
                    .collect::<Result<_, _>>()?;
                let refs: Vec<&HermitianForm> = restricted.iter().collect();
                Ok(factorial(cycle.dim_p) * mixed_discriminant(&refs)? * weight.clone())
            }
            (CyclePayload::SurfaceCurve(c), ModelData::Surface { q, .. }) => {
                let v = forms[0].as_surface()?;
                Ok(pairing(q, v, c))
            }
            (CyclePayload::Fundamental, ModelData::Surface { q, .. }) => {
                let a = forms[0].as_surface()?;
                let b = forms[1].as_surface()?;
                Ok(pairing(q, a, b))
            }
            _ => Err(Error::Model(format!(
                "cycle `{}` is not valid for this model kind",
                cycle.name
            ))),
        }
    }

    /// Wedge-product oracle for torus intersections against the
    /// fundamental class; exact and independent of mixed discriminants.
    pub fn intersect_fundamental_oracle(&self, forms: &[&HermitianForm]) -> Result<Q, Error> {
        let realizations: Vec<_> = forms.iter().map(|h| realize_hermitian(h)).collect();
        wedge_top(&realizations)
    }

    /// Binomial product identity on X×X: the 2n-fold self-intersection of
    /// π₁*α + π₂*α versus C(2n,n)(∫_X α^n)². Equal exactly.
    pub fn product_intersection_check(&self, alpha: &CohClass) -> Result<(Q, Q), Error> {
        if !self.is_torus() {
            return Err(Error::Argument(
                "product intersection check requires a torus model".into(),
            ));
        }
        self.check_class(alpha)?;
        let h = alpha.as_torus()?;
        let n = self.n;
        let tilde = h.block_diag(h);
        let refs: Vec<&HermitianForm> = std::iter::repeat(&tilde).take(2 * n).collect();
        let lhs = factorial(2 * n) * mixed_discriminant(&refs)?;
        let base_refs: Vec<&HermitianForm> = std::iter::repeat(h).take(n).collect();
        let base = factorial(n) * mixed_discriminant(&base_refs)?;
        let rhs = binom(2 * n, n) * base.clone() * base;
        Ok((lhs, rhs))
    }
}

fn pairing(q: &[Vec<Q>], a: &[Q], b: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            acc += ai.clone() * q[i][j].clone() * bj.clone();
        }
    }
    acc
}

// ---------------------------------------------------------------------
// document format
// ---------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CycleDoc {
    name: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    fundamental: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<String>,
    /// Columns of the complex subspace basis, each as 2n real entries
    /// (Re v₁, Im v₁, …, Re v_n, Im v_n).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intersection_matrix: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kahler_class: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cycles: Vec<CycleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<ModelDoc>>,
}

fn parse_q_vec(v: &[String]) -> Result<Vec<Q>, Error> {
    v.iter().map(|s| parse_q(s)).collect()
}

fn doc_to_model(doc: &ModelDoc) -> Result<ManifoldModel, Error> {
    match doc.kind.as_str() {
        "torus" => {
            let n = doc.n.ok_or_else(|| Error::Model("torus model needs field `n`".into()))?;
            if n == 0 {
                return Err(Error::Model("dimension must be at least 1".into()));
            }
            let generic = doc.generic.unwrap_or(false);
            let mut cycles = Vec::new();
            let mut fundamental_count = 0;
            for c in &doc.cycles {
                if c.dim > n {
                    return Err(Error::Model(format!(
                        "cycle `{}` has dimension {} above the model dimension {n}",
                        c.name, c.dim
                    )));
                }
                let payload = if c.fundamental {
                    fundamental_count += 1;
                    if c.dim != n {
                        return Err(Error::Model(format!(
                            "fundamental class `{}` must have dimension {n}",
                            c.name
                        )));
                    }
                    CyclePayload::Fundamental
                } else if c.dim == 0 {
                    CyclePayload::Point
                } else {
                    let basis_doc = c.basis.as_ref().ok_or_else(|| {
                        Error::Model(format!("subtorus cycle `{}` needs a basis", c.name))
                    })?;
                    if basis_doc.len() != c.dim {
                        return Err(Error::Model(format!(
                            "cycle `{}` basis rank mismatch: {} columns for a {}-dimensional subtorus",
                            c.name,
                            basis_doc.len(),
                            c.dim
                        )));
                    }
                    let mut basis = Vec::new();
                    for col in basis_doc {
                        if col.len() != 2 * n {
                            return Err(Error::Model(format!(
                                "cycle `{}` basis columns need {} real entries",
                                c.name,
                                2 * n
                            )));
                        }
                        let reals = parse_q_vec(col)?;
                        let complex_col: Vec<QC> = (0..n)
                            .map(|j| QC::new(reals[2 * j].clone(), reals[2 * j + 1].clone()))
                            .collect();
                        basis.push(complex_col);
                    }
                    if crate::rational::rank_qc_columns(&basis) != c.dim {
                        return Err(Error::Model(format!(
                            "cycle `{}` basis rank mismatch: columns are not independent",
                            c.name
                        )));
                    }
                    let weight = match &c.weight {
                        Some(w) => parse_q(w)?,
                        None => Q::one(),
                    };
                    if !weight.is_positive() {
                        return Err(Error::Model(format!(
                            "cycle `{}` needs a positive weight",
                            c.name
                        )));
                    }
                    if generic {
                        return Err(Error::Model(
                            "a generic torus admits no subtorus cycles".into(),
                        ));
                    }
                    CyclePayload::TorusSubspace { basis, weight }
                };
                cycles.push(CycleClass {
                    name: c.name.clone(),
                    dim_p: c.dim,
                    payload,
                });
            }
            if fundamental_count != 1 {
                return Err(Error::Model("model needs exactly one fundamental class".into()));
            }
            Ok(ManifoldModel {
                n,
                cycles,
                data: ModelData::Torus { generic },
            })
        }
        "surface" => {
            let rank = doc
                .rank
                .ok_or_else(|| Error::Model("surface model needs field `rank`".into()))?;
            let qm = doc
                .intersection_matrix
                .as_ref()
                .ok_or_else(|| Error::Model("surface model needs an intersection matrix".into()))?;
            if qm.len() != rank || qm.iter().any(|r| r.len() != rank) {
                return Err(Error::Model(format!(
                    "intersection matrix must be {rank}×{rank}"
                )));
            }
            let q: Vec<Vec<Q>> = qm.iter().map(|r| parse_q_vec(r)).collect::<Result<_, _>>()?;
            for i in 0..rank {
                for j in 0..rank {
                    if q[i][j] != q[j][i] {
                        return Err(Error::Model("intersection matrix not symmetric".into()));
                    }
                }
            }
            let kahler_ref = parse_q_vec(
                doc.kahler_class
                    .as_ref()
                    .ok_or_else(|| Error::Model("surface model needs a `kahler_class`".into()))?,
            )?;
            if kahler_ref.len() != rank {
                return Err(Error::Model("kahler_class rank mismatch".into()));
            }
            let mut cycles = Vec::new();
            let mut fundamental_count = 0;
            for c in &doc.cycles {
                let payload = if c.fundamental {
                    fundamental_count += 1;
                    if c.dim != 2 {
                        return Err(Error::Model("surface fundamental class must have dimension 2".into()));
                    }
                    CyclePayload::Fundamental
                } else if c.dim == 0 {
                    CyclePayload::Point
                } else if c.dim == 1 {
                    let cls = parse_q_vec(c.class.as_ref().ok_or_else(|| {
                        Error::Model(format!("curve cycle `{}` needs a class vector", c.name))
                    })?)?;
                    if cls.len() != rank {
                        return Err(Error::Model(format!(
                            "curve `{}` class rank mismatch",
                            c.name
                        )));
                    }
                    CyclePayload::SurfaceCurve(cls)
                } else {
                    return Err(Error::Model(format!(
                        "surface cycle `{}` has invalid dimension {}",
                        c.name, c.dim
                    )));
                };
                cycles.push(CycleClass {
                    name: c.name.clone(),
                    dim_p: c.dim,
                    payload,
                });
            }
            if fundamental_count != 1 {
                return Err(Error::Model("model needs exactly one fundamental class".into()));
            }
            // the declared reference must itself pass the chamber test
            let model = ManifoldModel {
                n: 2,
                cycles,
                data: ModelData::Surface {
                    rank,
                    q,
                    kahler_ref: kahler_ref.clone(),
                },
            };
            if !model.is_kahler_reference(&CohClass::Surface(kahler_ref))? {
                return Err(Error::Model(
                    "declared kahler_class fails its own chamber test".into(),
                ));
            }
            Ok(model)
        }
        "product" => {
            let base_doc = doc
                .base
                .as_ref()
                .ok_or_else(|| Error::Model("product model needs a `base` block".into()))?;
            let base = doc_to_model(base_doc)?;
            if !base.is_torus() {
                return Err(Error::Model("product base must be a torus model".into()));
            }
            let n = 2 * base.n;
            Ok(ManifoldModel {
                n,
                cycles: vec![
                    CycleClass {
                        name: "X".into(),
                        dim_p: n,
                        payload: CyclePayload::Fundamental,
                    },
                    CycleClass {
                        name: "pt".into(),
                        dim_p: 0,
                        payload: CyclePayload::Point,
                    },
                ],
                data: ModelData::Product { base: Box::new(base) },
            })
        }
        other => Err(Error::Model(format!("unknown model kind `{other}`"))),
    }
}

fn model_to_doc(model: &ManifoldModel) -> ModelDoc {
    let mut doc = ModelDoc {
        kind: String::new(),
        n: None,
        generic: None,
        rank: None,
        intersection_matrix: None,
        kahler_class: None,
        cycles: Vec::new(),
        base: None,
    };
    match &model.data {
        ModelData::Torus { generic } => {
            doc.kind = "torus".into();
            doc.n = Some(model.n);
            doc.generic = Some(*generic);
        }
        ModelData::Surface { rank, q, kahler_ref } => {
            doc.kind = "surface".into();
            doc.rank = Some(*rank);
            doc.intersection_matrix = Some(
                q.iter()
                    .map(|row| row.iter().map(format_q).collect())
                    .collect(),
            );
            doc.kahler_class = Some(kahler_ref.iter().map(format_q).collect());
        }
        ModelData::Product { base } => {
            doc.kind = "product".into();
            doc.base = Some(Box::new(model_to_doc(base)));
            return doc;
        }
    }
    for c in &model.cycles {
        let mut cd = CycleDoc {
            name: c.name.clone(),
            dim: c.dim_p,
            fundamental: false,
            weight: None,
            basis: None,
            class: None,
        };
        match &c.payload {
            CyclePayload::Fundamental => cd.fundamental = true,
            CyclePayload::Point => {}
            CyclePayload::TorusSubspace { basis, weight } => {
                cd.weight = Some(format_q(weight));
                cd.basis = Some(
                    basis
                        .iter()
                        .map(|col| {
                            col.iter()
                                .flat_map(|z| [format_q(&z.re), format_q(&z.im)])
                                .collect()
                        })
                        .collect(),
                );
            }
            CyclePayload::SurfaceCurve(v) => {
                cd.class = Some(v.iter().map(format_q).collect());
            }
        }
        doc.cycles.push(cd);
    }
    doc
}

/// Parses and fully validates a model document.
pub fn load_model(document: &str) -> Result<ManifoldModel, Error> {
    let doc: ModelDoc = toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    doc_to_model(&doc)
}

/// Serializes a model back to its document form; loading the result
/// reproduces the model exactly.
pub fn serialize_model(model: &ManifoldModel) -> String {
    toml::to_string(&model_to_doc(model)).expect("model documents serialize")
}

// class documents ------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ClassDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<String>>,
}

/// Parses a class document: `matrix = [[…]]` of complex rationals for
/// torus models, `vector = […]` for surface models.
pub fn load_class(document: &str) -> Result<CohClass, Error> {
    let doc: ClassDoc = toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    match (doc.matrix, doc.vector) {
        (Some(m), None) => {
            let rows: Vec<Vec<QC>> = m
                .iter()
                .map(|r| r.iter().map(|s| parse_qc(s)).collect())
                .collect::<Result<_, _>>()?;
            Ok(CohClass::Torus(HermitianForm::from_rows(rows)?))
        }
        (None, Some(v)) => Ok(CohClass::Surface(parse_q_vec(&v)?)),
        _ => Err(Error::Parse(
            "class document needs exactly one of `matrix` or `vector`".into(),
        )),
    }
}

pub fn serialize_class(class: &CohClass) -> String {
    let doc = match class {
        CohClass::Torus(h) => ClassDoc {
            matrix: Some(
                (0..h.dim())
                    .map(|j| (0..h.dim()).map(|k| format_qc(h.entry(j, k))).collect())
                    .collect(),
            ),
            vector: None,
        },
        CohClass::Surface(v) => ClassDoc {
            matrix: None,
            vector: Some(v.iter().map(format_q).collect()),
        },
    };
    toml::to_string(&doc).expect("class documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_ratio, qc_from_i64};
    use rand::{Rng, SeedableRng};

    const GENERIC_TORUS_2: &str = r#"
kind = "torus"
n = 2
generic = true

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "pt"
dim = 0
"#;

    const SURFACE_HYPERBOLIC: &str = r#"
kind = "surface"
n = 2
rank = 2
intersection_matrix = [["0", "1"], ["1", "0"]]
kahler_class = ["1", "1"]

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "C1"
dim = 1
class = ["1", "0"]

[[cycles]]
name = "C2"
dim = 1
class = ["0", "1"]
"#;

    fn diag_i64(vals: &[i64]) -> HermitianForm {
        HermitianForm::diag(&vals.iter().map(|&v| q_from_i64(v)).collect::<Vec<_>>())
    }

    #[test]
    fn loads_generic_torus() {
        let m = load_model(GENERIC_TORUS_2).unwrap();
        assert!(m.is_generic_torus());
        assert_eq!(m.n, 2);
        assert_eq!(m.cycles.len(), 2);
    }

    #[test]
    fn rejects_asymmetric_intersection_matrix() {
        let doc = SURFACE_HYPERBOLIC.replace(r#"[["0", "1"], ["1", "0"]]"#, r#"[["0", "1"], ["2", "0"]]"#);
        let err = load_model(&doc).unwrap_err();
        assert!(err.to_string().contains("not symmetric"), "{err}");
    }

    #[test]
    fn rejects_basis_rank_mismatch() {
        let doc = r#"
kind = "torus"
n = 2

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "T"
dim = 2
basis = [["1","0","0","0"], ["1","0","0","0"], ["0","0","1","0"]]
"#;
        let err = load_model(doc).unwrap_err();
        assert!(err.to_string().contains("rank mismatch"), "{err}");
    }

    #[test]
    fn torus_intersections() {
        let m = load_model(GENERIC_TORUS_2).unwrap();
        let id = CohClass::Torus(HermitianForm::identity(2));
        let x = m.cycle("X").unwrap();
        // 2!·det(I)·1 = 2, cross-checked against the wedge oracle
        assert_eq!(m.intersect(x, &[&id, &id]).unwrap(), q_from_i64(2));
        let h = HermitianForm::identity(2);
        assert_eq!(m.intersect_fundamental_oracle(&[&h, &h]).unwrap(), q_from_i64(2));
        // point against the empty list
        let pt = m.cycle("pt").unwrap();
        assert_eq!(m.intersect(pt, &[]).unwrap(), Q::one());
        // arity error
        assert!(m.intersect(x, &[&id]).is_err());
    }

    #[test]
    fn subtorus_restriction() {
        let doc = r#"
kind = "torus"
n = 2

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "T"
dim = 1
weight = "1"
basis = [["1","0","0","0"]]
"#;
        let m = load_model(doc).unwrap();
        let t = m.cycle("T").unwrap();
        let id = CohClass::Torus(HermitianForm::identity(2));
        // 1!·(restricted 1×1 determinant)·1 = 1
        assert_eq!(m.intersect(t, &[&id]).unwrap(), Q::one());
    }

    #[test]
    fn surface_intersections() {
        let m = load_model(SURFACE_HYPERBOLIC).unwrap();
        let v = CohClass::Surface(vec![Q::one(), Q::one()]);
        let c1 = m.cycle("C1").unwrap();
        // vᵀQc for Q = [[0,1],[1,0]], v = (1,1), c = (1,0): 1
        assert_eq!(m.intersect(c1, &[&v]).unwrap(), Q::one());
        let x = m.cycle("X").unwrap();
        assert_eq!(m.intersect(x, &[&v, &v]).unwrap(), q_from_i64(2));
        assert!(m.is_kahler_reference(&v).unwrap());
        let bad = CohClass::Surface(vec![Q::one(), -Q::one()]);
        assert!(!m.is_kahler_reference(&bad).unwrap());
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianForm {
        let mut rows = vec![vec![QC::new(Q::zero(), Q::zero()); n]; n];
        for j in 0..n {
            rows[j][j] = qc_from_i64(rng.gen_range(-5..=5));
            for k in j + 1..n {
                let re = q_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                let im = q_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                rows[j][k] = QC::new(re.clone(), im.clone());
                rows[k][j] = QC::new(re, -im);
            }
        }
        HermitianForm::from_rows(rows).unwrap()
    }

    #[test]
    fn intersect_is_multilinear_and_matches_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3usize {
            let m = ManifoldModel::generic_torus(n);
            let x = m.fundamental().clone();
            for _ in 0..6 {
                let a = random_hermitian(&mut rng, n);
                let b = random_hermitian(&mut rng, n);
                let rest: Vec<HermitianForm> = (0..n - 1).map(|_| random_hermitian(&mut rng, n)).collect();
                let ca = CohClass::Torus(a.clone());
                let cb = CohClass::Torus(b.clone());
                let cab = CohClass::Torus(a.add(&b).unwrap());
                let crest: Vec<CohClass> = rest.iter().cloned().map(CohClass::Torus).collect();
                let mut fa: Vec<&CohClass> = vec![&ca];
                let mut fb: Vec<&CohClass> = vec![&cb];
                let mut fab: Vec<&CohClass> = vec![&cab];
                for r in &crest {
                    fa.push(r);
                    fb.push(r);
                    fab.push(r);
                }
                let lhs = m.intersect(&x, &fab).unwrap();
                let rhs = m.intersect(&x, &fa).unwrap() + m.intersect(&x, &fb).unwrap();
                assert_eq!(lhs, rhs, "multilinearity n={n}");
                // wedge oracle agreement for the pure power
                let pure: Vec<&CohClass> = std::iter::repeat(&ca).take(n).collect();
                let direct = m.intersect(&x, &pure).unwrap();
                let oracle = m
                    .intersect_fundamental_oracle(&std::iter::repeat(&a).take(n).collect::<Vec<_>>())
                    .unwrap();
                assert_eq!(direct, oracle, "oracle n={n}");
            }
        }
    }

    #[test]
    fn product_identity_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for n in 1..=3usize {
            let m = ManifoldModel::generic_torus(n);
            for _ in 0..10 {
                let a = CohClass::Torus(random_hermitian(&mut rng, n));
                let (lhs, rhs) = m.product_intersection_check(&a).unwrap();
                assert_eq!(lhs, rhs, "n={n}");
            }
            // zero class
            let z = CohClass::Torus(HermitianForm::zero(n));
            assert_eq!(m.product_intersection_check(&z).unwrap(), (Q::zero(), Q::zero()));
        }
        // n=1 closed form: lhs = rhs = 2a²
        let m = ManifoldModel::generic_torus(1);
        let a = CohClass::Torus(diag_i64(&[3]));
        let (lhs, rhs) = m.product_intersection_check(&a).unwrap();
        assert_eq!(lhs, q_from_i64(18));
        assert_eq!(rhs, q_from_i64(18));
    }

    #[test]
    fn model_roundtrip() {
        for doc in [GENERIC_TORUS_2, SURFACE_HYPERBOLIC] {
            let m = load_model(doc).unwrap();
            let out = serialize_model(&m);
            let m2 = load_model(&out).unwrap();
            assert_eq!(m, m2);
        }
    }

    #[test]
    fn class_roundtrip() {
        let c = CohClass::Torus(
            HermitianForm::from_rows(vec![
                vec![qc_from_i64(1), QC::new(q_ratio(1, 2), q_ratio(-1, 3))],
                vec![QC::new(q_ratio(1, 2), q_ratio(1, 3)), qc_from_i64(-2)],
            ])
            .unwrap(),
        );
        let s = serialize_class(&c);
        assert_eq!(load_class(&s).unwrap(), c);
        let v = CohClass::Surface(vec![Q::one(), q_ratio(-3, 7)]);
        assert_eq!(load_class(&serialize_class(&v)).unwrap(), v);
    }
}
