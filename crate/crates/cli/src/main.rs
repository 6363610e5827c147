//! Batch front end: loads models, classes and families, runs verdicts
//! and grid experiments, and emits deterministic text or CSV reports.
//!
//! Exit codes: 0 affirmative verdict / successful experiment, 1 negative
//! verdict, 2 input error, 3 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num::traits::Signed;

use kcone::cone;
use kcone::error::Error;
use kcone::exterior::{subsets, wedge_top, AlternatingForm};
use kcone::grid::{C64, GridChart, Region};
use kcone::mass::{concentration_report, solve_ma, GeneratorSystem, MASolution};
use kcone::model::{load_class, load_model, CohClass, ManifoldModel, ModelData};
use kcone::poly::{certify_delta0, find_delta0, solve_identity, Delta0Certificate};
use kcone::rational::{format_q, parse_q, Q};
use kcone::transport::{
    class_vector, hodge_projectors, load_family, pairing_drift, transport, verdict_invariance,
    ComplexStructurePath, TransportRun,
};

#[derive(Parser)]
#[command(
    name = "kcone",
    version,
    about = "Numerical positivity verdicts for (1,1)-classes on finite manifold models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    /// Numerical positivity: ∫_Y α^p > 0 for every declared cycle.
    #[value(alias = "P")]
    P,
    Kahler,
    Nef,
    Component,
    Dual,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cone membership verdicts for a class against a model.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        class: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Reference Kähler class document; defaults to the identity
        /// form on tori and the model's declared class on surfaces.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Divided-difference coefficient tables and δ₀ certification.
    Poly {
        /// Degree of the expansion A_p(t, δ) to print.
        #[arg(long)]
        p: Option<usize>,
        /// Search for a certified δ₀ (requires --n).
        #[arg(long)]
        find_delta0: bool,
        /// Dimension bound for δ₀ certification.
        #[arg(long)]
        n: Option<usize>,
        /// Certify this candidate δ₀ instead of searching.
        #[arg(long)]
        delta0: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monge-Ampère mass-concentration experiment on a torus grid.
    Mass {
        /// Complex dimension of the torus (1 or 2).
        #[arg(long)]
        n: usize,
        /// Wedge power carried by the tube mass.
        #[arg(long)]
        p: usize,
        /// Grid resolution per axis (power of two).
        #[arg(long)]
        resolution: usize,
        /// ε ladder, repeatable; run in decreasing order.
        #[arg(long, required = true)]
        eps: Vec<f64>,
        /// Number of generator charts (1 or 2).
        #[arg(long, default_value_t = 1)]
        charts: usize,
        /// Class document for α (torus matrix); identity by default.
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel transport of a (1,1)-class along a family document.
    Transport {
        #[arg(long)]
        family: PathBuf,
        /// Initial class document (torus matrix); identity by default.
        #[arg(long)]
        class: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, result) = match cli.cmd {
        Cmd::Check { model, class, mode, reference, out } => {
            (out, run_check(&model, &class, mode, reference.as_deref()))
        }
        Cmd::Poly { p, find_delta0, n, delta0, out } => {
            (out, run_poly(p, find_delta0, n, delta0.as_deref()))
        }
        Cmd::Mass { n, p, resolution, eps, charts, alpha, format, out } => {
            (out, run_mass(n, p, resolution, &eps, charts, alpha.as_deref(), format))
        }
        Cmd::Transport { family, class, steps, format, out } => {
            (out, run_transport(&family, class.as_deref(), steps, format))
        }
    };
    match result {
        Ok((code, report)) => {
            let written = match out {
                Some(path) => std::fs::write(path, report),
                None => {
                    print!("{report}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

// ---------------------------------------------------------------------
// check
// ---------------------------------------------------------------------

fn default_reference(model: &ManifoldModel) -> CohClass {
    match &model.data {
        ModelData::Surface { kahler_ref, .. } => CohClass::Surface(kahler_ref.clone()),
        _ => CohClass::Torus(kcone::hermitian::HermitianForm::identity(model.n)),
    }
}

fn model_summary(model: &ManifoldModel) -> String {
    let kind = match &model.data {
        ModelData::Torus { generic: true } => "generic torus",
        ModelData::Torus { generic: false } => "torus",
        ModelData::Surface { .. } => "surface",
        ModelData::Product { .. } => "product",
    };
    format!("model: {kind}, n = {}, cycles = {}", model.n, model.cycles.len())
}

fn render_verdict(report: &mut String, verdict: &cone::Verdict) {
    let _ = writeln!(report, "verdict: {}", verdict.answer.as_str());
    if let Some(m) = &verdict.margin {
        let _ = writeln!(report, "margin: {}", format_q(m));
    }
    if !verdict.witnesses.is_empty() {
        let _ = writeln!(report, "witnesses:");
        for w in &verdict.witnesses {
            let detail = match &w.detail {
                Some(d) => format!(", {d}"),
                None => String::new(),
            };
            let _ = writeln!(
                report,
                "  cycle {}, exponents ({}, {}), value {}{detail}",
                w.cycle,
                w.exponents.0,
                w.exponents.1,
                format_q(&w.value),
            );
        }
    }
}

fn run_check(
    model_path: &std::path::Path,
    class_path: &std::path::Path,
    mode: Mode,
    reference: Option<&std::path::Path>,
) -> Result<(u8, String), Error> {
    let model = load_model(&read(model_path)?)?;
    let class = load_class(&read(class_path)?)?;
    model.check_class(&class)?;
    let omega = match reference {
        Some(p) => load_class(&read(p)?)?,
        None => default_reference(&model),
    };

    let mut report = String::new();
    let _ = writeln!(report, "# class membership report");
    let _ = writeln!(
        report,
        "# verdicts are relative to the declared cycle table of the model"
    );
    let _ = writeln!(report, "{}", model_summary(&model));

    let code = match mode {
        Mode::P => {
            let _ = writeln!(report, "mode: P");
            let v = cone::in_p(&model, &class)?;
            render_verdict(&mut report, &v);
            (v.answer == cone::Answer::Yes) as u8 ^ 1
        }
        Mode::Kahler => {
            let _ = writeln!(report, "mode: kahler");
            let v = cone::is_kahler(&model, &class, &omega)?;
            render_verdict(&mut report, &v);
            (v.answer == cone::Answer::Yes) as u8 ^ 1
        }
        Mode::Nef => {
            let _ = writeln!(report, "mode: nef");
            let v = cone::is_nef(&model, &class, &omega)?;
            render_verdict(&mut report, &v);
            // nef is a closed condition: tight constraints still pass
            (v.answer != cone::Answer::No) as u8 ^ 1
        }
        Mode::Component => {
            let _ = writeln!(report, "mode: component");
            match cone::classify_component(&model, &class)? {
                cone::ComponentLabel::NotInP => {
                    let _ = writeln!(report, "component: not in P");
                    1
                }
                cone::ComponentLabel::Signature { pos, neg } => {
                    let _ = writeln!(report, "component: signature ({pos}, {neg})");
                    let _ = writeln!(
                        report,
                        "kahler component: {}",
                        if pos == model.n && neg == 0 { "yes" } else { "no" }
                    );
                    0
                }
            }
        }
        Mode::Dual => {
            let _ = writeln!(report, "mode: dual");
            let gens = cone::dual_cone_generators(&model, &[omega.clone()])?;
            let beta = cone::class_coordinates(&model, &class)?;
            let membership = cone::in_dual_cone(&gens, &beta)?;
            if membership.feasible {
                let _ = writeln!(report, "verdict: yes");
                let lambda = membership.lambda.unwrap_or_default();
                let _ = writeln!(
                    report,
                    "weights: [{}]",
                    lambda.iter().map(format_q).collect::<Vec<_>>().join(", ")
                );
                0
            } else {
                let _ = writeln!(report, "verdict: no");
                let y = membership.separating.unwrap_or_default();
                let _ = writeln!(
                    report,
                    "separating functional: [{}]",
                    y.iter().map(format_q).collect::<Vec<_>>().join(", ")
                );
                1
            }
        }
    };
    Ok((code, report))
}

// ---------------------------------------------------------------------
// poly
// ---------------------------------------------------------------------

fn render_expansion(p: usize, polys: &[kcone::poly::RatPoly]) -> String {
    let mut parts = Vec::new();
    for (m, am) in polys.iter().enumerate() {
        if am.is_zero() && m > 0 {
            continue;
        }
        let s = am.to_string_in("t");
        let part = match m {
            0 => s,
            1 => format!("({s})*δ"),
            _ => format!("({s})*δ^{m}"),
        };
        parts.push(part);
    }
    format!("A_{p}(t,δ) = {}", parts.join(" + "))
}

fn render_certificate(report: &mut String, delta0: &Q, cert: &Delta0Certificate) {
    let _ = writeln!(report, "certified δ₀ = {}", format_q(delta0));
    for rec in &cert.records {
        let _ = writeln!(
            report,
            "  degree {}: {}, boxes = {}, max depth = {}",
            rec.p, rec.kind, rec.boxes, rec.max_depth
        );
    }
}

fn run_poly(
    p: Option<usize>,
    do_find: bool,
    n: Option<usize>,
    delta0: Option<&str>,
) -> Result<(u8, String), Error> {
    if p.is_none() && !do_find && delta0.is_none() {
        return Err(Error::Argument(
            "nothing to do: pass --p and/or --find-delta0/--delta0".into(),
        ));
    }
    let mut report = String::new();
    let _ = writeln!(report, "# divided-difference expansion report");
    if let Some(p) = p {
        if p == 0 {
            return Err(Error::Argument("degree p must be at least 1".into()));
        }
        let identity = solve_identity(p)?;
        let _ = writeln!(report, "{}", render_expansion(p, &identity.a));
        let _ = writeln!(
            report,
            "A_{p}(t,0) = {} (constant in t)",
            identity.at_delta_zero().to_string_in("t")
        );
        let _ = writeln!(
            report,
            "identity verified exactly: {}",
            if identity.verify() { "yes" } else { "no" }
        );
    }
    if do_find || delta0.is_some() {
        let n = n.ok_or_else(|| Error::Argument("δ₀ certification needs --n".into()))?;
        match delta0 {
            Some(text) => {
                let candidate = parse_q(text)?;
                if !candidate.is_positive() {
                    return Err(Error::Argument("candidate δ₀ must be positive".into()));
                }
                let cert = certify_delta0(n, &candidate)?;
                render_certificate(&mut report, &candidate, &cert);
            }
            None => {
                let (d0, cert) = find_delta0(n)?;
                render_certificate(&mut report, &d0, &cert);
            }
        }
    }
    Ok((0, report))
}

// ---------------------------------------------------------------------
// mass
// ---------------------------------------------------------------------

const MASS_CSV_HEADER: &str =
    "eps,C_eps,residual,tube_mass,E_delta_measure,M,delta,min_eig_alpha_eps";

fn mass_csv_rows(rows: &[kcone::mass::ConcentrationRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.eps,
            r.c_eps,
            r.residual,
            r.tube_mass,
            r.e_delta_measure,
            r.m_bound,
            r.delta,
            r.min_eig_alpha_eps,
        );
    }
    out
}

fn run_mass(
    n: usize,
    p: usize,
    resolution: usize,
    eps: &[f64],
    charts: usize,
    alpha_path: Option<&std::path::Path>,
    format: Format,
) -> Result<(u8, String), Error> {
    if !(1..=2).contains(&n) {
        return Err(Error::Argument("grid experiments support n = 1 or 2".into()));
    }
    if p == 0 || p > n {
        return Err(Error::Argument("need 1 ≤ p ≤ n".into()));
    }
    let system = match charts {
        1 => GeneratorSystem::single_chart(),
        2 => GeneratorSystem::two_chart(),
        _ => return Err(Error::Argument("chart count must be 1 or 2".into())),
    };
    let mut ladder: Vec<f64> = eps.to_vec();
    if ladder.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Argument("ε values must lie in (0, 1]".into()));
    }
    ladder.sort_by(|a, b| b.partial_cmp(a).expect("finite ε"));
    ladder.dedup();

    let chart = GridChart::torus(n, resolution)?;
    let identity = DMatrix::<C64>::identity(n, n);
    let alpha = match alpha_path {
        Some(path) => {
            let class = load_class(&read(path)?)?;
            let h = class.as_torus()?;
            if h.dim() != n {
                return Err(Error::Dimension("α does not match the grid dimension".into()));
            }
            h.to_c64()
        }
        None => identity.clone(),
    };

    let runs: Vec<MASolution> = ladder
        .iter()
        .map(|&e| solve_ma(&alpha, &identity, e, &system, chart))
        .collect::<Result<_, _>>()?;
    let u = Region::ball(chart, (0.0, 0.0), 0.25);
    let report = concentration_report(&runs, p, &u)?;

    let mut out = String::new();
    if format == Format::Text {
        let _ = writeln!(out, "# mass concentration report");
        let _ = writeln!(
            out,
            "n = {n}, p = {p}, resolution = {resolution}, charts = {charts}"
        );
        let _ = writeln!(out, "differentiation: spectral");
        let _ = writeln!(out, "delta_p(U) proxy = {:.12e}", report.delta_p_u);
    }
    let _ = writeln!(out, "{MASS_CSV_HEADER}");
    out.push_str(&mass_csv_rows(&report.rows));
    Ok((0, out))
}

// ---------------------------------------------------------------------
// transport
// ---------------------------------------------------------------------

/// Per-sample pairing value ∫ α(u)^p ∧ ζ for each declared cycle.
fn sample_pairings(
    path: &ComplexStructurePath,
    sample: &nalgebra::DVector<C64>,
) -> Result<Vec<C64>, Error> {
    let dim = path.dim();
    let alpha = AlternatingForm::from_coeffs(dim, 2, sample.iter().copied().collect())?;
    let mut out = Vec::with_capacity(path.cycles.len());
    for cycle in &path.cycles {
        let p = (dim - cycle.degree) / 2;
        let mut forms: Vec<AlternatingForm<C64>> =
            std::iter::repeat(alpha.clone()).take(p).collect();
        forms.push(cycle.to_form(dim));
        out.push(wedge_top(&forms)?);
    }
    Ok(out)
}

fn transport_csv(
    path: &ComplexStructurePath,
    run: &TransportRun,
    verdicts: &[kcone::transport::FiberVerdict],
) -> Result<String, Error> {
    let dim = path.dim();
    let masks = subsets(dim, 2);
    let mut out = String::new();
    let mut header = String::from("u");
    for &mask in &masks {
        let lo = mask.trailing_zeros();
        let hi = 31 - mask.leading_zeros();
        let _ = write!(header, ",c_{lo}{hi}");
    }
    header.push_str(",subbundle_defect,volume,in_P,sig_pos,sig_neg");
    for cycle in &path.cycles {
        let _ = write!(header, ",pair_{}", cycle.name);
    }
    let _ = writeln!(out, "{header}");
    for ((u, s), v) in run.us.iter().zip(&run.samples).zip(verdicts) {
        let frame = hodge_projectors(path.n, &path.j_at(*u))?;
        let pc = s.map(|z| z);
        let defect = (&frame.pi11 * &pc - &pc).norm();
        let _ = write!(out, "{u:.6}");
        for z in s.iter() {
            let _ = write!(out, ",{:.12e}", z.re);
        }
        let _ = write!(
            out,
            ",{:.12e},{:.12e},{},{},{}",
            defect, v.volume, v.in_p as u8, v.signature.0, v.signature.1
        );
        for value in sample_pairings(path, s)? {
            let _ = write!(out, ",{:.12e}", value.re);
        }
        out.push('\n');
    }
    Ok(out)
}

fn run_transport(
    family_path: &std::path::Path,
    class_path: Option<&std::path::Path>,
    steps: usize,
    format: Format,
) -> Result<(u8, String), Error> {
    let path = load_family(&read(family_path)?)?;
    let n = path.n;
    let a0 = match class_path {
        Some(p) => {
            let class = load_class(&read(p)?)?;
            let h = class.as_torus()?;
            if h.dim() != n {
                return Err(Error::Dimension(
                    "initial class does not match the family dimension".into(),
                ));
            }
            class_vector(&h.to_c64())
        }
        None => class_vector(&DMatrix::<C64>::identity(n, n)),
    };
    let run = transport(&path, &a0, steps)?;
    let verdicts = verdict_invariance(&path, &run)?;
    let constant = verdicts
        .iter()
        .all(|v| v.in_p == verdicts[0].in_p && v.signature == verdicts[0].signature);

    let mut out = String::new();
    if format == Format::Text {
        let _ = writeln!(out, "# transport report");
        let _ = writeln!(
            out,
            "# declared cycles are modeled as constant along the family; \
             verdicts are relative to the declared cycle table"
        );
        let _ = writeln!(out, "n = {n}, steps = {steps}, samples = {}", run.samples.len());
        let _ = writeln!(out, "max subbundle defect = {:.12e}", run.max_subbundle_defect);
        let _ = writeln!(out, "max reality defect = {:.12e}", run.max_reality_defect);
        for cycle in &path.cycles {
            let p = (path.dim() - cycle.degree) / 2;
            let drift = pairing_drift(&path, &run, cycle, p)?;
            let _ = writeln!(out, "cycle {}: pairing drift = {:.12e}", cycle.name, drift);
        }
        let first = &verdicts[0];
        let _ = writeln!(
            out,
            "verdict constant: {} (in_P = {}, signature = ({}, {}))",
            if constant { "yes" } else { "no" },
            first.in_p,
            first.signature.0,
            first.signature.1
        );
    } else {
        out.push_str(&transport_csv(&path, &run, &verdicts)?);
    }
    if !constant {
        return Err(Error::Numerical(
            "transported verdict changed along the family".into(),
        ));
    }
    Ok((0, out))
}
