//! Acceptance suite: one check per release criterion, each printing a
//! pass line with its runtime (run with `--nocapture` to see them).
//! Binary-level determinism and exit codes are covered by the CLI
//! crate's own integration tests.

use std::time::Instant;

use nalgebra::DMatrix;
use num::traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};

use kcone::cone::{
    classify_component, dual_cone_generators, in_dual_cone, in_p, is_kahler, is_nef, Answer,
    ComponentLabel,
};
use kcone::error::Error;
use kcone::grid::{C64, GridChart, Region};
use kcone::hermitian::{exact_signature, HermitianForm};
use kcone::lp::dot;
use kcone::mass::{
    build_potentials, concentration_report, fubini_study_field, omega_eps, solve_ma, tube_mass,
    validated_floor, GeneratorSystem, MASolution,
};
use kcone::model::{load_class, load_model, serialize_class, serialize_model, CohClass, ManifoldModel};
use kcone::poly::{certify_delta0, find_delta0, solve_identity};
use kcone::rational::{q_from_i64, q_ratio, qc_from_i64, Q, QC};
use kcone::transport::{
    class_vector, hodge_projectors, load_family, pairing_drift, serialize_family, standard_j,
    transport, transport_naive, verdict_invariance, ComplexStructurePath, TransportCycle,
};

fn timed<F: FnOnce()>(label: &str, f: F) {
    let start = Instant::now();
    f();
    println!("criterion {label}: pass ({:.2}s)", start.elapsed().as_secs_f64());
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianForm {
    let mut rows = vec![vec![QC::new(Q::zero(), Q::zero()); n]; n];
    for j in 0..n {
        rows[j][j] = qc_from_i64(rng.gen_range(-3..=3));
        for k in j + 1..n {
            let re = q_from_i64(rng.gen_range(-3..=3));
            let im = q_from_i64(rng.gen_range(-3..=3));
            rows[j][k] = QC::new(re.clone(), im.clone());
            rows[k][j] = QC::new(re, -im);
        }
    }
    HermitianForm::from_rows(rows).unwrap()
}

fn identity_class(n: usize) -> CohClass {
    CohClass::Torus(HermitianForm::identity(n))
}

// surface fixtures whose declared curves generate the dual of the nef
// cone, so nef ⟺ nonnegativity against every curve generator
const SURFACE_RANK2: &str = r#"
kind = "surface"
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

const SURFACE_RANK3: &str = r#"
kind = "surface"
rank = 3
intersection_matrix = [["1", "0", "0"], ["0", "-1", "0"], ["0", "0", "-1"]]
kahler_class = ["3", "-1", "-1"]

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "E1"
dim = 1
class = ["0", "1", "0"]

[[cycles]]
name = "E2"
dim = 1
class = ["0", "0", "1"]

[[cycles]]
name = "L"
dim = 1
class = ["1", "-1", "-1"]
"#;

const SURFACE_RANK4: &str = r#"
kind = "surface"
rank = 4
intersection_matrix = [
    ["1", "0", "0", "0"],
    ["0", "-1", "0", "0"],
    ["0", "0", "-1", "0"],
    ["0", "0", "0", "-1"],
]
kahler_class = ["4", "-1", "-1", "-1"]

[[cycles]]
name = "X"
dim = 2
fundamental = true

[[cycles]]
name = "E1"
dim = 1
class = ["0", "1", "0", "0"]

[[cycles]]
name = "E2"
dim = 1
class = ["0", "0", "1", "0"]

[[cycles]]
name = "E3"
dim = 1
class = ["0", "0", "0", "1"]

[[cycles]]
name = "L12"
dim = 1
class = ["1", "-1", "-1", "0"]

[[cycles]]
name = "L13"
dim = 1
class = ["1", "-1", "0", "-1"]

[[cycles]]
name = "L23"
dim = 1
class = ["1", "0", "-1", "-1"]
"#;

const PRODUCT_MODEL: &str = r#"
kind = "product"

[base]
kind = "torus"
n = 2
generic = true

[[base.cycles]]
name = "X"
dim = 2
fundamental = true

[[base.cycles]]
name = "pt"
dim = 0
"#;

#[test]
fn acceptance_criteria() {
    // 1. exact divided expansion for p = 1..8
    timed("1 (divided polynomial identity)", || {
        for p in 1..=8 {
            let identity = solve_identity(p).unwrap();
            assert!(identity.verify(), "identity fails at p = {p}");
            let at0 = identity.at_delta_zero();
            assert_eq!(at0.coeffs(), &[q_from_i64(p as i64)], "A_{p}(t,0) = {p}");
        }
        let a2 = solve_identity(2).unwrap();
        assert_eq!(a2.a[0].coeffs(), &[q_from_i64(2)]);
        assert_eq!(a2.a[1].coeffs(), &[q_from_i64(-8), q_from_i64(12)]);
    });

    // 2. δ₀ certification
    timed("2 (delta0 certification)", || {
        let (d0, _) = find_delta0(2).unwrap();
        assert!(d0.is_positive() && d0 < q_ratio(1, 4), "delta0 = {d0}");
        assert!(certify_delta0(2, &q_ratio(1, 8)).is_ok());
        assert!(matches!(
            certify_delta0(2, &q_ratio(1, 3)),
            Err(Error::Numerical(_))
        ));
        for n in 1..=6 {
            find_delta0(n).unwrap();
        }
    });

    // 3. generic-torus cone laws on 10⁴ random forms
    timed("3 (generic-torus cone laws)", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        for n in 2..=3usize {
            let model = ManifoldModel::generic_torus(n);
            let omega = identity_class(n);
            for _ in 0..5000 {
                let h = random_hermitian(&mut rng, n);
                let class = CohClass::Torus(h.clone());
                let in_p_yes = in_p(&model, &class).unwrap().answer == Answer::Yes;
                assert_eq!(in_p_yes, h.det().is_positive());
                let kahler = is_kahler(&model, &class, &omega).unwrap().answer == Answer::Yes;
                assert_eq!(kahler, exact_signature(&h) == (n, 0, 0));
                if in_p_yes {
                    match classify_component(&model, &class).unwrap() {
                        ComponentLabel::Signature { neg, .. } => assert_eq!(neg % 2, 0),
                        ComponentLabel::NotInP => panic!("in P but labelled out"),
                    }
                }
            }
        }
    });

    // 4. product binomial identity on 100 random forms per dimension
    timed("4 (product binomial identity)", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(202);
        for n in 1..=3usize {
            let model = ManifoldModel::generic_torus(n);
            for _ in 0..100 {
                let h = random_hermitian(&mut rng, n);
                let (lhs, rhs) = model
                    .product_intersection_check(&CohClass::Torus(h))
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    });

    // 5. dual-cone consistency on surface models
    timed("5 (dual-cone consistency)", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(303);
        for doc in [SURFACE_RANK2, SURFACE_RANK3, SURFACE_RANK4] {
            let model = load_model(doc).unwrap();
            let rank = match &model.data {
                kcone::model::ModelData::Surface { rank, .. } => *rank,
                _ => unreachable!(),
            };
            let omega = match &model.data {
                kcone::model::ModelData::Surface { kahler_ref, .. } => {
                    CohClass::Surface(kahler_ref.clone())
                }
                _ => unreachable!(),
            };
            let generators = dual_cone_generators(&model, &[omega.clone()]).unwrap();
            for _ in 0..1000 {
                let coords: Vec<Q> =
                    (0..rank).map(|_| q_from_i64(rng.gen_range(-5..=5))).collect();
                let class = CohClass::Surface(coords.clone());
                let nef = is_nef(&model, &class, &omega).unwrap().answer != Answer::No;
                let lattice = kcone::cone::class_coordinates(&model, &class).unwrap();
                let gen_nonneg = generators
                    .iter()
                    .all(|g| !dot(g, &lattice).is_negative());
                assert_eq!(nef, gen_nonneg, "class {coords:?}");
            }
        }
        // brute-force agreement on ≤ 4-generator instances
        let mut feas = 0;
        let mut infeas = 0;
        for _ in 0..60 {
            let m = rng.gen_range(2..=3);
            let k = rng.gen_range(1..=4);
            let gens: Vec<Vec<Q>> = (0..k)
                .map(|_| (0..m).map(|_| q_from_i64(rng.gen_range(-2..=2))).collect())
                .collect();
            let target: Vec<Q> = (0..m).map(|_| q_from_i64(rng.gen_range(-2..=2))).collect();
            let membership = in_dual_cone(&gens, &target).unwrap();
            if membership.feasible {
                feas += 1;
                let lambda = membership.lambda.unwrap();
                for i in 0..m {
                    let got: Q = (0..k).map(|j| lambda[j].clone() * gens[j][i].clone()).sum();
                    assert_eq!(got, target[i]);
                }
            } else {
                infeas += 1;
                // float grid search finds nothing within 1e−6
                let gf: Vec<Vec<f64>> = gens
                    .iter()
                    .map(|g| g.iter().map(kcone::rational::q_to_f64).collect())
                    .collect();
                let tf: Vec<f64> = target.iter().map(kcone::rational::q_to_f64).collect();
                assert!(!grid_feasible_f64(&gf, &tf, 1e-6));
                let y = membership.separating.unwrap();
                assert!(dot(&y, &target).is_positive());
                assert!(gens.iter().all(|g| !dot(&y, g).is_positive()));
            }
        }
        assert!(feas > 0 && infeas > 0);
    });

    // 6. potential and metric numerics at full resolution
    timed("6 (regularized potential numerics)", || {
        for (n, res) in [(1usize, 512usize), (2, 128)] {
            let chart = GridChart::torus(n, res).unwrap();
            let h = chart.h();
            for system in [GeneratorSystem::single_chart(), GeneratorSystem::two_chart()] {
                assert!(system.partition_defect(chart) <= 1e-12);
                let omega = DMatrix::<C64>::identity(n, n);
                let (_, psi_eps) = build_potentials(&system, 0.1, chart).unwrap();
                let a = validated_floor(&psi_eps, &omega).unwrap();
                let w = omega_eps(&omega, &psi_eps, a).unwrap();
                assert!(w.min_rel_eig >= 0.5 - 10.0 * h * h, "{}", w.min_rel_eig);
            }
        }
        // Fubini–Study mass and cylinder stability at resolution 512
        let chart = GridChart::boxed(1, 512, 2.0).unwrap();
        let omega = DMatrix::<C64>::identity(1, 1);
        let mut cylinder = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let f = fubini_study_field(chart, eps).unwrap();
            let total = tube_mass(&f, 1, &omega, &Region::full(chart)).unwrap();
            assert!((total - 1.0).abs() <= 0.02, "eps {eps}: {total}");
            let cyl = Region::ball(chart, (0.0, 0.0), 3.0 * eps);
            cylinder.push(tube_mass(&f, 1, &omega, &cyl).unwrap());
        }
        for c in &cylinder {
            assert!((c - cylinder[0]).abs() / cylinder[0] <= 0.05, "{cylinder:?}");
        }
    });

    // 7. Monge–Ampère solves
    timed("7 (Monge-Ampere solves)", || {
        let system = GeneratorSystem::single_chart();
        let chart1 = GridChart::torus(1, 256).unwrap();
        let alpha1 = DMatrix::<C64>::identity(1, 1);
        let sol = solve_ma(&alpha1, &alpha1, 0.1, &system, chart1).unwrap();
        assert!(sol.residual <= 1e-10, "{}", sol.residual);
        assert!((sol.c_eps - sol.class_ratio()).abs() <= 1e-12);

        let chart2 = GridChart::torus(2, 64).unwrap();
        let alpha2 = DMatrix::<C64>::identity(2, 2);
        let sol = solve_ma(&alpha2, &alpha2, 0.2, &system, chart2).unwrap();
        assert!(sol.residual <= 1e-6, "{}", sol.residual);
        assert!(sol.min_eigenvalue > 0.0, "α_ε positive definite everywhere");
    });

    // 8. concentration chain over the ε ladder
    timed("8 (concentration chain)", || {
        let system = GeneratorSystem::single_chart();
        let ladder = [0.2, 0.1, 0.05];
        for (n, res) in [(1usize, 256usize), (2, 64)] {
            let chart = GridChart::torus(n, res).unwrap();
            let h = chart.h();
            let alpha = DMatrix::<C64>::identity(n, n);
            let runs: Vec<MASolution> = ladder
                .iter()
                .map(|&e| solve_ma(&alpha, &alpha, e, &system, chart).unwrap())
                .collect();
            let u = Region::ball(chart, (0.0, 0.0), 0.25);
            for p in 1..=n {
                let report = concentration_report(&runs, p, &u).unwrap();
                assert_eq!(report.rows.len(), 3);
                for row in &report.rows {
                    assert!(row.e_delta_measure <= row.delta * (1.0 + 10.0 * h));
                    assert!(row.tube_mass >= 0.5 * report.rows[0].tube_mass);
                }
            }
        }
    });

    // 9. transport defects, convergence, pairings, verdicts, control
    timed("9 (Hodge-frame transport)", || {
        // projector axioms on constant and curved structures
        for n in 1..=3usize {
            let frame = hodge_projectors(
                n,
                &ComplexStructurePath::constant(n, standard_j(n), vec![]).unwrap().j_at(0.0),
            )
            .unwrap();
            assert!(frame.axiom_defect() <= 1e-12);
        }
        let rotated = rotated_family();
        for u in [0.0, 0.37, 1.0] {
            let frame = hodge_projectors(2, &rotated.j_at(u)).unwrap();
            assert!(frame.axiom_defect() <= 1e-12);
        }
        // defects at RK step 1e−3 and 4th-order halving on a family
        // with non-polynomial transport
        let a0 = class_vector(&DMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0)));
        let at_millistep = transport(&rotated, &a0, 1000).unwrap();
        assert!(at_millistep.max_subbundle_defect <= 1e-8);
        assert!(at_millistep.max_reality_defect <= 1e-8);
        let reference = transport(&rotated, &a0, 6400).unwrap();
        let sref = reference.samples.last().unwrap();
        let errs: Vec<f64> = [100usize, 200, 400]
            .iter()
            .map(|&steps| {
                (transport(&rotated, &a0, steps).unwrap().samples.last().unwrap() - sref).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1].max(1e-300);
            assert!(ratio > 8.0 && ratio < 40.0, "halving ratio {ratio} in {errs:?}");
        }
        // pairing conservation and constant verdicts on a cycle-carrying
        // family, plus the naive-transport negative control
        let family = cycle_family();
        let b0 = class_vector(&DMatrix::from_iterator(
            2,
            2,
            [2.0, 0.0, 0.0, 1.0].iter().map(|&v| C64::new(v, 0.0)),
        ));
        let run = transport(&family, &b0, 1000).unwrap();
        for cycle in &family.cycles {
            let p = (family.dim() - cycle.degree) / 2;
            let drift = pairing_drift(&family, &run, cycle, p).unwrap();
            assert!(drift <= 1e-8, "cycle {}: {drift}", cycle.name);
        }
        let verdicts = verdict_invariance(&family, &run).unwrap();
        assert!(verdicts
            .iter()
            .all(|v| v.in_p == verdicts[0].in_p && v.signature == verdicts[0].signature));
        let naive = transport_naive(&family, &b0, 1000).unwrap();
        let fundamental = family.cycles.iter().find(|c| c.degree == 0).unwrap();
        let control = pairing_drift(&family, &naive, fundamental, 2).unwrap();
        assert!(control > 1e-4, "control drift only {control}");
    });

    // 10. document round-trips (CLI byte-identity lives in the CLI tests)
    timed("10 (document round-trips)", || {
        let torus = ManifoldModel::generic_torus(3);
        assert_eq!(load_model(&serialize_model(&torus)).unwrap(), torus);
        for doc in [SURFACE_RANK2, SURFACE_RANK3, SURFACE_RANK4, PRODUCT_MODEL] {
            let model = load_model(doc).unwrap();
            assert_eq!(load_model(&serialize_model(&model)).unwrap(), model);
        }
        let family = cycle_family();
        assert_eq!(load_family(&serialize_family(&family)).unwrap(), family);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(404);
        let torus_class = CohClass::Torus(random_hermitian(&mut rng, 3));
        assert_eq!(load_class(&serialize_class(&torus_class)).unwrap(), torus_class);
        let surface_class = CohClass::Surface(vec![q_ratio(7, 2), -Q::one(), Q::zero()]);
        assert_eq!(
            load_class(&serialize_class(&surface_class)).unwrap(),
            surface_class
        );
    });
}

/// Rotation-conjugated family whose induced transport is not polynomial
/// in the parameter, so integrator truncation error is observable.
fn rotated_family() -> ComplexStructurePath {
    let mut k = vec![Q::zero(); 16];
    k[2] = q_from_i64(-1);
    k[2 * 4] = q_from_i64(1);
    ComplexStructurePath::rotated(2, standard_j(2), k, 20, vec![]).unwrap()
}

/// Nilpotent-conjugated family on a torus with an invariant subtorus
/// cycle and the fundamental (degree-0) pairing cycle.
fn cycle_family() -> ComplexStructurePath {
    let d = 4;
    let mut nil = vec![Q::zero(); d * d];
    for (i, &v) in [1i64, 2, -1, 1].iter().enumerate() {
        nil[(i / 2) * d + 2 + (i % 2)] = q_from_i64(v);
    }
    let zeta = TransportCycle {
        name: "T".into(),
        degree: 2,
        terms: vec![(vec![2, 3], q_from_i64(1))],
    };
    let point = TransportCycle {
        name: "X".into(),
        degree: 0,
        terms: vec![(vec![], q_from_i64(1))],
    };
    ComplexStructurePath::conjugated(2, standard_j(2), nil, vec![zeta, point]).unwrap()
}

/// Coarse float grid oracle: only trusted for confirming feasibility of
/// Σ λᵢ gᵢ ≈ β with λ on a nonnegative grid.
fn grid_feasible_f64(gens: &[Vec<f64>], target: &[f64], tol: f64) -> bool {
    fn rec(gens: &[Vec<f64>], target: &[f64], acc: &mut Vec<f64>, tol: f64) -> bool {
        if acc.len() == gens.len() {
            return (0..target.len()).all(|i| {
                let s: f64 = (0..gens.len()).map(|j| acc[j] * gens[j][i]).sum();
                (s - target[i]).abs() <= tol
            });
        }
        for step in 0..=12 {
            acc.push(step as f64 * 0.25);
            if rec(gens, target, acc, tol) {
                return true;
            }
            acc.pop();
        }
        false
    }
    rec(gens, target, &mut Vec::new(), tol)
}
