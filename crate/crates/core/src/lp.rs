//! Exact nonnegative-combination feasibility: does Σ λᵢ gᵢ = β admit
//! λ ≥ 0? Solved by a phase-I simplex over rationals with Bland's rule,
//! so there is no tolerance and termination is guaranteed. Infeasible
//! instances come with a separating functional y (y·gᵢ ≤ 0 for all i,
//! y·β > 0) extracted from the final dual values.

use crate::error::Error;
use crate::rational::Q;
use num::traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Feasible { lambda: Vec<Q> },
    Infeasible { separating: Vec<Q> },
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()).sum()
}

/// Decides feasibility of Σ λᵢ gᵢ = target with λ ≥ 0, exactly.
pub fn nonnegative_combination(generators: &[Vec<Q>], target: &[Q]) -> Result<LpResult, Error> {
    let m = target.len();
    if m == 0 {
        return Err(Error::Argument("empty coordinate space".into()));
    }
    for g in generators {
        if g.len() != m {
            return Err(Error::Dimension(
                "generator dimension does not match target".into(),
            ));
        }
    }
    let n = generators.len();

    // rows flipped so the right-hand side is nonnegative; artificials
    // form the initial basis
    let mut sign = vec![Q::one(); m];
    let mut rhs: Vec<Q> = target.to_vec();
    for i in 0..m {
        if rhs[i].is_negative() {
            sign[i] = -Q::one();
            rhs[i] = -rhs[i].clone();
        }
    }
    // tableau: m rows × (n real + m artificial) columns, kept in
    // canonical form with respect to the current basis
    let mut t: Vec<Vec<Q>> = (0..m)
        .map(|i| {
            let mut row: Vec<Q> = (0..n)
                .map(|j| generators[j][i].clone() * sign[i].clone())
                .collect();
            row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs for minimizing the artificial sum: r_j = c_j − Σ rows
    let total_cols = n + m;
    let mut reduced: Vec<Q> = (0..total_cols)
        .map(|j| {
            let cost = if j >= n { Q::one() } else { Q::zero() };
            let col_sum: Q = (0..m).map(|i| t[i][j].clone()).sum();
            cost - col_sum
        })
        .collect();
    loop {
        // Bland: entering column is the lowest index with negative cost
        let entering = match (0..total_cols).find(|&j| reduced[j].is_negative()) {
            Some(j) => j,
            None => break,
        };
        // ratio test, ties broken by lowest basis index
        let mut leave: Option<usize> = None;
        let mut best: Option<Q> = None;
        for i in 0..m {
            if t[i][entering].is_positive() {
                let ratio = rhs[i].clone() / t[i][entering].clone();
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // the phase-I objective is bounded below by 0, so an
            // unbounded ray cannot occur with exact arithmetic
            return Err(Error::Internal("phase-I simplex reported unbounded".into()));
        };
        // pivot on (r, entering)
        let piv = t[r][entering].clone();
        for v in t[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        rhs[r] = rhs[r].clone() / piv;
        for i in 0..m {
            if i != r && !t[i][entering].is_zero() {
                let f = t[i][entering].clone();
                for j in 0..total_cols {
                    let d = f.clone() * t[r][j].clone();
                    t[i][j] = t[i][j].clone() - d;
                }
                rhs[i] = rhs[i].clone() - f * rhs[r].clone();
            }
        }
        if !reduced[entering].is_zero() {
            let f = reduced[entering].clone();
            for j in 0..total_cols {
                let d = f.clone() * t[r][j].clone();
                reduced[j] = reduced[j].clone() - d;
            }
        }
        basis[r] = entering;
    }

    // the artificial sum at optimum, read off the basis directly
    let objective: Q = (0..m)
        .filter(|&i| basis[i] >= n)
        .map(|i| rhs[i].clone())
        .sum();

    if objective.is_zero() {
        let mut lambda = vec![Q::zero(); n];
        for i in 0..m {
            if basis[i] < n {
                lambda[basis[i]] = rhs[i].clone();
            }
        }
        debug_assert!({
            let combo: Vec<Q> = (0..m)
                .map(|i| {
                    (0..n)
                        .map(|j| lambda[j].clone() * generators[j][i].clone())
                        .sum()
                })
                .collect();
            combo == target
        });
        Ok(LpResult::Feasible { lambda })
    } else {
        // dual values y_i = Σ over basic artificial rows of B⁻¹, read
        // from the artificial columns; undo the row sign flips
        let mut y = vec![Q::zero(); m];
        for i in 0..m {
            let mut yi = Q::zero();
            for k in 0..m {
                if basis[k] >= n {
                    yi += t[k][n + i].clone();
                }
            }
            y[i] = yi * sign[i].clone();
        }
        debug_assert!(dot(&y, target).is_positive());
        debug_assert!(generators.iter().all(|g| !dot(&y, g).is_positive()));
        Ok(LpResult::Infeasible { separating: y })
    }
}
