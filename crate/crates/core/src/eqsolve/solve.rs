use std::fmt;

use super::linalg::{gaussian_solve, spectral_radius_estimate};
use super::{check_linearity, EquationSystem, SccDecomposition};
use crate::error::SolveError;
use crate::scalar::Scalar;

/// Pivots below this magnitude count as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Roundoff allowed outside `[0, 1]` before a value is rejected.
pub const VALUE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    StratifiedLinear,
    Fixpoint,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::StratifiedLinear => "stratified-linear",
            SolverKind::Fixpoint => "fixpoint",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// Indexed by equation variable.
    pub values: Vec<T>,
    pub method: SolverKind,
    /// Fixpoint steps that still changed the iterate; `None` for the linear
    /// solver.
    pub iterations: Option<usize>,
    pub converged: bool,
    /// One estimate per recursive stratum, in stratum order.
    pub spectral: Vec<f64>,
    /// Every fixpoint step was componentwise nondecreasing.
    pub monotone: bool,
    /// Every fixpoint iterate stayed at or below 1 (within slack).
    pub bounded: bool,
}

impl<T: Scalar> Solution<T> {
    pub fn value(&self, var: usize) -> T {
        self.values[var]
    }
}

/// `X = M X + Y` restricted to one stratum, with lower strata substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSystem<T> {
    pub vars: Vec<usize>,
    pub matrix: Vec<Vec<T>>,
    pub rhs: Vec<T>,
}

/// Builds `M` and `Y` for `vars` given solved values of all lower strata.
/// Terms must hold at most one variable of the stratum.
pub fn stratum_system<T: Scalar>(
    system: &EquationSystem<T>,
    vars: &[usize],
    solved: &[Option<T>],
) -> StratumSystem<T> {
    let k = vars.len();
    let local = |v: usize| vars.iter().position(|&w| w == v);
    let mut matrix = vec![vec![T::zero(); k]; k];
    let mut rhs = vec![T::zero(); k];
    for (row, &var) in vars.iter().enumerate() {
        for term in system.equation(var) {
            let mut coef = term.coef;
            let mut inner = None;
            for &v in &term.vars {
                match local(v) {
                    Some(col) => {
                        debug_assert!(inner.is_none(), "nonlinear term in stratum");
                        inner = Some(col);
                    }
                    None => coef = coef * solved[v].expect("lower stratum solved first"),
                }
            }
            match inner {
                Some(col) => matrix[row][col] = matrix[row][col] + coef,
                None => rhs[row] = rhs[row] + coef,
            }
        }
    }
    StratumSystem {
        vars: vars.to_vec(),
        matrix,
        rhs,
    }
}

fn clamp_unit<T: Scalar>(value: T, label: &str) -> Result<T, SolveError> {
    let slack = T::tolerance(VALUE_SLACK);
    if value < -slack || value > T::one() + slack {
        return Err(SolveError::OutOfRange {
            goal: label.to_string(),
            value: value.to_f64_lossy(),
        });
    }
    Ok(if value < T::zero() {
        T::zero()
    } else if value > T::one() {
        T::one()
    } else {
        value
    })
}

/// Solves strata bottom-up; recursive strata by `(I - M) X = Y`.
pub fn solve_stratified<T: Scalar>(
    system: &EquationSystem<T>,
    decomposition: &SccDecomposition,
) -> Result<Solution<T>, SolveError> {
    if let Some(v) = check_linearity(system, decomposition).into_iter().next() {
        return Err(SolveError::NonLinear {
            goal: v.goal,
            alternative: v.alternative,
        });
    }
    let mut solved: Vec<Option<T>> = vec![None; system.len()];
    let mut spectral = Vec::new();
    let pivot_tol = T::from_f64_lossy(PIVOT_TOLERANCE);
    for stratum in &decomposition.strata {
        if !stratum.recursive {
            let var = stratum.vars[0];
            let value = system.equation(var).iter().fold(T::zero(), |acc, term| {
                acc + term
                    .vars
                    .iter()
                    .fold(term.coef, |p, &v| p * solved[v].expect("lower stratum solved first"))
            });
            solved[var] = Some(clamp_unit(value, system.label(var))?);
            continue;
        }
        let sub = stratum_system(system, &stratum.vars, &solved);
        let rho = spectral_radius_estimate(&sub.matrix);
        spectral.push(rho);
        let k = sub.vars.len();
        let a: Vec<Vec<T>> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        let id = if r == c { T::one() } else { T::zero() };
                        id - sub.matrix[r][c]
                    })
                    .collect()
            })
            .collect();
        let x = gaussian_solve(a, sub.rhs, pivot_tol).map_err(|(_, pivot)| SolveError::Singular {
            goals: sub.vars.iter().map(|&v| system.label(v).to_string()).collect(),
            pivot,
            spectral: rho,
        })?;
        for (&var, value) in sub.vars.iter().zip(x) {
            solved[var] = Some(clamp_unit(value, system.label(var))?);
        }
    }
    Ok(Solution {
        values: solved.into_iter().map(|v| v.expect("every stratum solved")).collect(),
        method: SolverKind::StratifiedLinear,
        iterations: None,
        converged: true,
        spectral,
        monotone: true,
        bounded: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixpointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        FixpointOptions {
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Iterates `X <- T(X)` from zero until the max-norm change drops below
/// `tol`. Without convergence the last iterate comes back flagged.
pub fn solve_fixpoint<T: Scalar>(system: &EquationSystem<T>, options: FixpointOptions) -> Solution<T> {
    let tol = T::from_f64_lossy(options.tol);
    let ceiling = T::one() + T::tolerance(VALUE_SLACK);
    let mut x = vec![T::zero(); system.len()];
    let mut iterations = 0;
    let mut converged = false;
    let mut monotone = true;
    let mut bounded = true;
    loop {
        let next = system.apply(&x);
        let mut change = T::zero();
        for (new, old) in next.iter().zip(&x) {
            if new < old {
                monotone = false;
            }
            if *new > ceiling {
                bounded = false;
            }
            change = change.max_of((*new - *old).abs());
        }
        x = next;
        if change < tol {
            converged = true;
            break;
        }
        iterations += 1;
        if iterations >= options.max_iter {
            break;
        }
    }
    Solution {
        values: x,
        method: SolverKind::Fixpoint,
        iterations: Some(iterations),
        converged,
        spectral: Vec::new(),
        monotone,
        bounded,
    }
}
