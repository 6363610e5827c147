//! Mass concentration on grid tori: log-pole potentials with a
//! partition of unity, the regularized metrics ω_ε with a measured
//! Hessian floor, tube masses, the degenerate Monge–Ampère equation on
//! tori of dimension 1 and 2, and the exceptional-set/concentration
//! report derived from the pointwise eigenvalue spectra.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::grid::{
    complex_hessian, solve_quarter_laplacian, DiffMode, Domain, GridChart, HermitianField,
    Region, ScalarField, C64,
};
use crate::hermitian::{mixed_discriminant_f64, relative_eigenvalues_c64};

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

// ---------------------------------------------------------------------
// generator systems and potentials
// ---------------------------------------------------------------------

/// Closed-form potentials for the subset Y = {z₁ = 0} on the unit
/// torus: per chart, a cutoff θ_j and real trigonometric generators
/// vanishing exactly on Y, combined into e^{2ψ} = Σ θ_j² Σ_k |g_{j,k}|².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSystem {
    pub charts: usize,
}

impl GeneratorSystem {
    /// θ ≡ 1 with generators sin(πx₁), sin(πy₁).
    pub fn single_chart() -> Self {
        GeneratorSystem { charts: 1 }
    }

    /// Two charts with cutoffs |cos(πx₁)|, |sin(πx₁)| (squares sum to 1
    /// exactly) and chart-2 generators rescaled by 2, so the cross-chart
    /// weighting is exercised.
    pub fn two_chart() -> Self {
        GeneratorSystem { charts: 2 }
    }

    pub fn theta_sq(&self, j: usize, x: f64, _y: f64) -> f64 {
        if self.charts == 1 {
            1.0
        } else if j == 0 {
            (std::f64::consts::PI * x).cos().powi(2)
        } else {
            (std::f64::consts::PI * x).sin().powi(2)
        }
    }

    pub fn generator_sq_sum(&self, j: usize, x: f64, y: f64) -> f64 {
        let s = (std::f64::consts::PI * x).sin().powi(2) + (std::f64::consts::PI * y).sin().powi(2);
        if j == 0 {
            s
        } else {
            4.0 * s
        }
    }

    pub fn e2psi(&self, x: f64, y: f64) -> f64 {
        (0..self.charts)
            .map(|j| self.theta_sq(j, x, y) * self.generator_sq_sum(j, x, y))
            .sum()
    }

    /// Largest partition-of-unity defect |Σθ_j² − 1| over the grid.
    pub fn partition_defect(&self, chart: GridChart) -> f64 {
        let mut worst = 0.0f64;
        for (_, _, x, y) in chart.points() {
            let s: f64 = (0..self.charts).map(|j| self.theta_sq(j, x, y)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

/// ψ = ½ log e^{2ψ} and its regularization ψ_ε = ½ log(e^{2ψ} + ε²).
pub fn build_potentials(
    system: &GeneratorSystem,
    eps: f64,
    chart: GridChart,
) -> Result<(ScalarField, ScalarField), Error> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Argument("ε must lie in (0, 1]".into()));
    }
    if chart.domain != Domain::Torus {
        return Err(Error::Argument("generator systems live on torus charts".into()));
    }
    let psi = ScalarField::from_fn(chart, |x, y| 0.5 * system.e2psi(x, y).ln());
    let e2 = eps * eps;
    let psi_eps = ScalarField::from_fn(chart, |x, y| 0.5 * (system.e2psi(x, y) + e2).ln());
    Ok((psi, psi_eps))
}

// ---------------------------------------------------------------------
// regularized metrics
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEps {
    pub field: HermitianField,
    /// The validated Hessian floor constant.
    pub a: f64,
    /// Measured infimum of the relative eigenvalues of ω_ε against ω.
    pub min_rel_eig: f64,
}

fn min_relative_eigenvalue(field: &HermitianField, omega: &DMatrix<C64>) -> Result<f64, Error> {
    let mut worst = f64::INFINITY;
    if field.chart.n == 1 {
        let w = omega[(0, 0)].re;
        for idx in 0..field.chart.len() {
            worst = worst.min(field.at(idx)[(0, 0)].re / w);
        }
    } else {
        for idx in 0..field.chart.len() {
            let spec = relative_eigenvalues_c64(&field.at(idx), omega)?;
            worst = worst.min(spec.values()[0]);
        }
    }
    Ok(worst)
}

/// Smallest power of two A with i∂∂̄ψ_ε ≥ −Aω on the grid, found by
/// measurement: doubling until the measured infimum clears −A.
pub fn validated_floor(psi_eps: &ScalarField, omega: &DMatrix<C64>) -> Result<f64, Error> {
    let hess = complex_hessian(psi_eps, DiffMode::Spectral)?;
    let inf = min_relative_eigenvalue(&hess, omega)?;
    let mut a = 1.0f64;
    while -a > inf {
        a *= 2.0;
        if a > 1e12 {
            return Err(Error::Numerical(format!(
                "no reasonable Hessian floor: measured infimum {inf:e}"
            )));
        }
    }
    Ok(a)
}

/// ω_ε = ω + (1/2A)·i∂∂̄ψ_ε, validated against the ω/2 lower bound.
pub fn omega_eps(
    omega: &DMatrix<C64>,
    psi_eps: &ScalarField,
    a: f64,
) -> Result<OmegaEps, Error> {
    let hess = complex_hessian(psi_eps, DiffMode::Spectral)?;
    let base = HermitianField::constant(psi_eps.chart, omega)?;
    let field = base.add(&hess.scale(1.0 / (2.0 * a)))?;
    let min_rel_eig = min_relative_eigenvalue(&field, omega)?;
    let h = psi_eps.chart.h();
    let bound = 0.5 - 10.0 * h * h;
    if min_rel_eig < bound {
        return Err(Error::Numerical(format!(
            "Hessian floor violated: min relative eigenvalue {min_rel_eig:.6} < {bound:.6}; raise A (currently {a})"
        )));
    }
    Ok(OmegaEps { field, a, min_rel_eig })
}

// ---------------------------------------------------------------------
// tube masses
// ---------------------------------------------------------------------

/// ∫_region density of field^p ∧ ω^{n−p}; errors on an empty discrete
/// region rather than returning a silent zero.
pub fn tube_mass(
    field: &HermitianField,
    p: usize,
    omega: &DMatrix<C64>,
    region: &Region,
) -> Result<f64, Error> {
    if region.count() == 0 {
        return Err(Error::Numerical(
            "tube region is empty on this grid; ε is below the resolution".into(),
        ));
    }
    let dens = field.wedge_density(p, omega)?;
    region.integrate(&dens)
}

/// The rescaled Fubini–Study density (1/π)·ε²/(|z|²+ε²)² as a 1×1
/// Hermitian field on a box chart; total mass over ℂ is 1.
pub fn fubini_study_field(chart: GridChart, eps: f64) -> Result<HermitianField, Error> {
    if chart.n != 1 {
        return Err(Error::Argument("Fubini–Study field is one-dimensional".into()));
    }
    let e2 = eps * eps;
    let mut out = HermitianField::zero(chart);
    for (ix, iy, x, y) in chart.points() {
        let r2 = x * x + y * y;
        let v = e2 / (std::f64::consts::PI * (r2 + e2) * (r2 + e2));
        out.set(
            chart.index(ix, iy),
            &DMatrix::from_element(1, 1, C64::new(v, 0.0)),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Monge–Ampère
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MASolution {
    pub chart: GridChart,
    pub eps: f64,
    /// Zero-mean potential with α_ε = α + εω + i∂∂̄φ.
    pub phi: ScalarField,
    pub c_eps: f64,
    /// Sup-norm of the density defect α_ε^n − C_ε ω_ε^n over the grid.
    pub residual: f64,
    /// Infimum over the grid of the smallest (absolute) eigenvalue of α_ε.
    pub min_eigenvalue: f64,
    pub alpha_eps: HermitianField,
    pub omega_eps: OmegaEps,
    pub psi: ScalarField,
    pub alpha: DMatrix<C64>,
    pub omega: DMatrix<C64>,
    pub newton_iters: usize,
}

fn min_absolute_eigenvalue(field: &HermitianField) -> f64 {
    let n = field.chart.n;
    let mut worst = f64::INFINITY;
    for idx in 0..field.chart.len() {
        let m = field.at(idx);
        if n == 1 {
            worst = worst.min(m[(0, 0)].re);
        } else {
            // 2×2 Hermitian closed form
            let tr = m[(0, 0)].re + m[(1, 1)].re;
            let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            worst = worst.min(tr / 2.0 - disc);
        }
    }
    worst
}

fn det_field(field: &HermitianField) -> ScalarField {
    let n = field.chart.n;
    let mut values = vec![0.0; field.chart.len()];
    for idx in 0..field.chart.len() {
        let m = field.at(idx);
        values[idx] = if n == 1 {
            m[(0, 0)].re
        } else {
            (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
        };
    }
    ScalarField { chart: field.chart, values }
}

fn alpha_eps_field(
    base: &DMatrix<C64>,
    phi: &ScalarField,
) -> Result<HermitianField, Error> {
    let hess = complex_hessian(phi, DiffMode::Spectral)?;
    HermitianField::constant(phi.chart, base)?.add(&hess)
}

/// Solves α_ε^n = C_ε ω_ε^n for α_ε = α + εω + i∂∂̄φ with zero-mean φ.
/// n = 1 is a single spectral inversion; n = 2 runs a damped Newton
/// iteration with a positivity safeguard.
pub fn solve_ma(
    alpha: &DMatrix<C64>,
    omega: &DMatrix<C64>,
    eps: f64,
    system: &GeneratorSystem,
    chart: GridChart,
) -> Result<MASolution, Error> {
    let (psi, psi_eps) = build_potentials(system, eps, chart)?;
    solve_ma_with_potentials(alpha, omega, eps, psi, &psi_eps, chart)
}

/// Solver entry point with explicit potentials (exercised directly by
/// tests with degenerate ψ_ε).
pub fn solve_ma_with_potentials(
    alpha: &DMatrix<C64>,
    omega: &DMatrix<C64>,
    eps: f64,
    psi: ScalarField,
    psi_eps: &ScalarField,
    chart: GridChart,
) -> Result<MASolution, Error> {
    let n = chart.n;
    if alpha.nrows() != n || omega.nrows() != n {
        return Err(Error::Dimension("class data does not match the chart dimension".into()));
    }
    let base = alpha + omega * C64::new(eps, 0.0);
    let fact = factorial(n);
    let class_volume = fact * mixed_discriminant_f64(&std::iter::repeat(&base).take(n).collect::<Vec<_>>());
    if !(class_volume > 0.0) {
        return Err(Error::Argument(
            "the class volume of α + εω must be positive".into(),
        ));
    }

    let a = validated_floor(psi_eps, omega)?;
    let w_eps = omega_eps(omega, psi_eps, a)?;

    // C_ε from discrete masses; agrees with the exact class ratio
    // because spectral Hessians have exactly zero mean
    let det_weps = det_field(&w_eps.field);
    let c_eps = class_volume / (fact * det_weps.integral());

    let target = ScalarField {
        chart,
        values: det_weps.values.iter().map(|&d| c_eps * d).collect(),
    };

    let residual_of = |phi: &ScalarField| -> Result<(HermitianField, f64), Error> {
        let field = alpha_eps_field(&base, phi)?;
        let det_a = det_field(&field);
        let res = det_a
            .values
            .iter()
            .zip(&target.values)
            .fold(0.0f64, |m, (a, t)| m.max((a - t).abs()))
            * fact;
        Ok((field, res))
    };

    let mut phi = ScalarField::constant(chart, 0.0);
    let mut newton_iters = 0;

    if n == 1 {
        // linear: i∂∂̄φ = C_ε ω_ε − (α + εω)
        let rhs = ScalarField {
            chart,
            values: target
                .values
                .iter()
                .map(|&t| t - base[(0, 0)].re)
                .collect(),
        };
        phi = solve_quarter_laplacian(&rhs)?;
    } else {
        // det(base + g·E₁₁) = det(base) + g·base₂₂ is linear in
        // g = i∂∂̄φ, so the Newton Jacobian is the constant base₂₂;
        // damping and the positivity safeguard still guard the path
        let m22 = base[(1, 1)].re;
        if !(m22 > 0.0) {
            return Err(Error::Argument(
                "the equation degenerates: (α + εω)₂₂ must be positive".into(),
            ));
        }
        let h2 = chart.h() * chart.h();
        let (mut field, mut res) = residual_of(&phi)?;
        let mut history = vec![res];
        let mut failures = 0;
        let tol = 1e-9 * c_eps.abs().max(1.0);
        for _ in 0..40 {
            if res <= tol {
                break;
            }
            let det_a = det_field(&field);
            let f = ScalarField {
                chart,
                values: det_a
                    .values
                    .iter()
                    .zip(&target.values)
                    .map(|(a, t)| -(a - t) / m22)
                    .collect(),
            };
            let step = solve_quarter_laplacian(&f)?;
            let mut t = 1.0;
            loop {
                let trial = ScalarField {
                    chart,
                    values: phi
                        .values
                        .iter()
                        .zip(&step.values)
                        .map(|(p, s)| p + t * s)
                        .collect(),
                };
                let (trial_field, trial_res) = residual_of(&trial)?;
                if trial_res < res && min_absolute_eigenvalue(&trial_field) >= h2 {
                    phi = trial;
                    field = trial_field;
                    res = trial_res;
                    history.push(res);
                    break;
                }
                failures += 1;
                if failures >= 50 {
                    return Err(Error::Numerical(format!(
                        "Newton stagnated after {failures} rejected steps; residual history {history:?}"
                    )));
                }
                t *= 0.5;
                if t < h2 {
                    return Err(Error::Numerical(format!(
                        "positivity safeguard floor reached at step size {t:e}; residual history {history:?}"
                    )));
                }
            }
            newton_iters += 1;
        }
    }

    let (alpha_eps, residual) = residual_of(&phi)?;
    let min_eigenvalue = min_absolute_eigenvalue(&alpha_eps);
    Ok(MASolution {
        chart,
        eps,
        phi,
        c_eps,
        residual,
        min_eigenvalue,
        alpha_eps,
        omega_eps: w_eps,
        psi,
        alpha: alpha.clone(),
        omega: omega.clone(),
        newton_iters,
    })
}

impl MASolution {
    /// Exact-class-ratio cross-check value (∫(α+εω)^n)/(∫ω^n).
    pub fn class_ratio(&self) -> f64 {
        let n = self.chart.n;
        let base = &self.alpha + &self.omega * C64::new(self.eps, 0.0);
        let top = mixed_discriminant_f64(&std::iter::repeat(&base).take(n).collect::<Vec<_>>());
        let bottom = mixed_discriminant_f64(&std::iter::repeat(&self.omega).take(n).collect::<Vec<_>>());
        top / bottom
    }
}

// ---------------------------------------------------------------------
// concentration report
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub eps: f64,
    pub c_eps: f64,
    pub residual: f64,
    /// ∫_{U∩V_ε} α_ε^p ∧ ω^{n−p}.
    pub tube_mass: f64,
    /// ω_ε^n-measure of the exceptional set E_δ.
    pub e_delta_measure: f64,
    pub m_bound: f64,
    pub delta: f64,
    pub min_eig_alpha_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub n: usize,
    pub p: usize,
    /// Empirical stand-in for the tube-mass constant: the ω_ε mass of
    /// the coarsest-ε tube.
    pub delta_p_u: f64,
    pub rows: Vec<ConcentrationRow>,
}

/// Runs the exceptional-set chain over a family of solutions at
/// decreasing ε: per run, the λ-spectrum of α_ε against ω_ε, the mixed
/// mass bound M from class data, δ = 2^{−(n−p+1)} δ_p(U), the measure
/// of E_δ = {λ_{p+1}⋯λ_n > M/δ} (must stay ≤ δ(1+10h)), and the tube
/// mass of α_ε^p ∧ ω^{n−p} (must keep ≥ half the coarsest-ε value).
pub fn concentration_report(
    runs: &[MASolution],
    p: usize,
    u: &Region,
) -> Result<ConcentrationReport, Error> {
    let first = runs.first().ok_or_else(|| Error::Argument("no runs supplied".into()))?;
    let n = first.chart.n;
    if p == 0 || p > n {
        return Err(Error::Argument("need 1 ≤ p ≤ n".into()));
    }
    for r in runs {
        if r.chart != first.chart || r.omega != first.omega || r.alpha != first.alpha {
            return Err(Error::Argument("runs must share chart and class data".into()));
        }
    }
    if runs.windows(2).any(|w| w[1].eps >= w[0].eps) {
        return Err(Error::Argument("runs must be ordered by decreasing ε".into()));
    }

    // δ_p(U) proxy from the coarsest run's ω_ε tube mass
    let coarsest_region = Region::sublevel(&first.psi, first.eps.ln()).intersect(u)?;
    if coarsest_region.count() == 0 {
        return Err(Error::Numerical(
            "tube region is empty on this grid; ε is below the resolution".into(),
        ));
    }
    let delta_p_u = tube_mass(&first.omega_eps.field, p, &first.omega, &coarsest_region)?;
    let delta = delta_p_u * 0.5f64.powi((n - p + 1) as i32);
    let h = first.chart.h();

    let fact = factorial(n);
    let mut rows = Vec::new();
    for run in runs {
        let base = &run.alpha + &run.omega * C64::new(run.eps, 0.0);
        // M = n!·∫(α+εω)^{n−p} ∧ ω^p from class data
        let mut forms: Vec<&DMatrix<C64>> = Vec::new();
        forms.extend(std::iter::repeat(&base).take(n - p));
        forms.extend(std::iter::repeat(&run.omega).take(p));
        let m_bound = fact * fact * mixed_discriminant_f64(&forms);

        let region = Region::sublevel(&run.psi, run.eps.ln()).intersect(u)?;
        let mass = tube_mass(&run.alpha_eps, p, &run.omega, &region)?;

        // exceptional set from the pointwise relative spectra
        let threshold = m_bound / delta;
        let mut mask = vec![false; run.chart.len()];
        for idx in 0..run.chart.len() {
            let product: f64 = if p == n {
                1.0
            } else {
                let spec = relative_eigenvalues_c64(&run.alpha_eps.at(idx), &run.omega_eps.field.at(idx))?;
                spec.values()[p..].iter().product()
            };
            mask[idx] = product > threshold;
        }
        let e_region = Region { chart: run.chart, mask };
        let dens = run.omega_eps.field.wedge_density(n, &run.omega)?;
        // ω_ε^n density is independent of the reference slot when p = n
        let e_delta_measure = ScalarField {
            chart: run.chart,
            values: dens
                .values
                .iter()
                .zip(&e_region.mask)
                .map(|(v, &m)| if m { *v } else { 0.0 })
                .collect(),
        }
        .integral();

        if e_delta_measure > delta * (1.0 + 10.0 * h) {
            return Err(Error::Numerical(format!(
                "exceptional-set measure {e_delta_measure:.3e} exceeds the δ budget {delta:.3e} at ε = {}",
                run.eps
            )));
        }

        rows.push(ConcentrationRow {
            eps: run.eps,
            c_eps: run.c_eps,
            residual: run.residual,
            tube_mass: mass,
            e_delta_measure,
            m_bound,
            delta,
            min_eig_alpha_eps: run.min_eigenvalue,
        });
    }

    let coarsest_mass = rows[0].tube_mass;
    for row in &rows {
        if row.tube_mass < 0.5 * coarsest_mass {
            return Err(Error::Numerical(format!(
                "tube mass {:.3e} at ε = {} fell below half the coarsest value {:.3e}",
                row.tube_mass, row.eps, coarsest_mass
            )));
        }
    }

    Ok(ConcentrationReport { n, p, delta_p_u, rows })
}
