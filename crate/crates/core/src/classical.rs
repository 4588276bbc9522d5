//! Classical reference solvers: cyclic Crank-Nicolson for advection and the
//! Heun (RK2) method of lines for any [`RhsSpec`] system.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolve::{initial_fields, Problem, ProblemKind, StepStats, Trajectory};
use crate::grid::Domain;
use crate::rhs::{apply_rhs, Field, RhsSpec};

/// Named field vectors at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub time: f64,
    fields: BTreeMap<Field, Vec<f64>>,
}

impl FieldSet {
    pub fn new(time: f64) -> Self {
        Self {
            time,
            fields: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, field: Field, values: Vec<f64>) -> Result<()> {
        if let Some(len) = self.fields.values().next().map(Vec::len) {
            if values.len() != len {
                return Err(Error::Shape(format!(
                    "field {field} has {} entries, expected {len}",
                    values.len()
                )));
            }
        }
        self.fields.insert(field, values);
        Ok(())
    }

    pub fn get(&self, field: Field) -> Result<&[f64]> {
        self.fields
            .get(&field)
            .map(Vec::as_slice)
            .ok_or(Error::MissingField(field))
    }

    pub fn fields(&self) -> &BTreeMap<Field, Vec<f64>> {
        &self.fields
    }
}

/// One Crank-Nicolson step of the advection equation: solves the cyclic
/// tridiagonal system
/// `alpha u'_{i+1} + u'_i - alpha u'_{i-1} = -alpha u_{i+1} + u_i + alpha u_{i-1}`
/// with `alpha = 0.25 v dt/dx`, using a Thomas sweep plus the Sherman-Morrison
/// rank-1 correction for the periodic corners.
pub fn cn_advection_step(u: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = u.len();
    if n < 2 {
        return Err(Error::Shape("grid must have at least 2 points".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha = {alpha} is not finite")));
    }

    let rhs: Vec<f64> = (0..n)
        .map(|i| -alpha * u[(i + 1) % n] + u[i] + alpha * u[(i + n - 1) % n])
        .collect();

    // with two points the shifted neighbours coincide and the system is the
    // identity
    let solution = if n == 2 || alpha == 0.0 {
        rhs.clone()
    } else {
        solve_cyclic(alpha, &rhs)?
    };

    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut residual = 0.0;
    for i in 0..n {
        let r = alpha * solution[(i + 1) % n] + solution[i]
            - alpha * solution[(i + n - 1) % n]
            - rhs[i];
        residual += r * r;
    }
    if residual.sqrt() > 1e-12 * norm + 1e-300 {
        return Err(Error::Solver(format!(
            "cyclic solve residual {} exceeds tolerance",
            residual.sqrt()
        )));
    }
    Ok(solution)
}

/// Sherman-Morrison solve of the cyclic system with diagonal 1, super
/// diagonal `alpha`, sub diagonal `-alpha` and matching periodic corners.
fn solve_cyclic(alpha: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let top_right = -alpha; // A[0][n-1], wrapped sub-diagonal
    let bottom_left = alpha; // A[n-1][0], wrapped super-diagonal
    let gamma = -1.0;

    let mut diag = vec![1.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= top_right * bottom_left / gamma;

    let x = thomas(alpha, &diag, rhs)?;
    // A = T + u v^T with u = (gamma, 0, .., bottom_left), v = (1, 0, .., top_right/gamma)
    let mut corner = vec![0.0; n];
    corner[0] = gamma;
    corner[n - 1] = bottom_left;
    let z = thomas(alpha, &diag, &corner)?;

    let denom = 1.0 + z[0] + top_right * z[n - 1] / gamma;
    if denom.abs() < 1e-14 {
        return Err(Error::Solver("singular rank-1 correction".into()));
    }
    let factor = (x[0] + top_right * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect())
}

/// Thomas sweep for the tridiagonal part with constant off-diagonals
/// (sub `-alpha`, super `alpha`) and the given main diagonal.
fn thomas(alpha: f64, diag: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let tol = 1e-14 * (1.0 + alpha * alpha);
    let mut pivot = diag[0];
    if pivot.abs() < tol {
        return Err(Error::Solver("zero pivot in tridiagonal sweep".into()));
    }
    let mut upper = vec![0.0; n];
    let mut x = vec![0.0; n];
    x[0] = rhs[0] / pivot;
    for j in 1..n {
        upper[j] = alpha / pivot;
        pivot = diag[j] + alpha * upper[j];
        if pivot.abs() < tol {
            return Err(Error::Solver("zero pivot in tridiagonal sweep".into()));
        }
        x[j] = (rhs[j] + alpha * x[j - 1]) / pivot;
    }
    for j in (0..n - 1).rev() {
        let next = x[j + 1];
        x[j] -= upper[j + 1] * next;
    }
    Ok(x)
}

/// One Heun step `u* = u + dt rhs(u)`, `u^{n+1} = (u + u* + dt rhs(u*))/2`,
/// applied simultaneously to every field the spec evolves.
pub fn rk2_step(fields: &FieldSet, spec: &RhsSpec, dt: f64) -> Result<FieldSet> {
    if !crate::grid::finite_positive(dt) {
        return Err(Error::Parameter(format!("dt = {dt} must be positive")));
    }
    let targets: Vec<Field> = spec.targets().collect();

    let mut star = FieldSet::new(fields.time);
    for (&f, v) in fields.fields() {
        let mut next = v.clone();
        if targets.contains(&f) {
            let r = apply_rhs(spec, fields.fields(), f)?;
            for (x, ri) in next.iter_mut().zip(&r) {
                *x += dt * ri;
            }
        }
        star.insert(f, next)?;
    }

    let mut out = FieldSet::new(fields.time + dt);
    for (&f, v) in fields.fields() {
        let mut next = star.get(f)?.to_vec();
        if targets.contains(&f) {
            let r = apply_rhs(spec, star.fields(), f)?;
            for ((x, u0), ri) in next.iter_mut().zip(v).zip(&r) {
                *x = 0.5 * (u0 + *x + dt * ri);
            }
        }
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Instability {
                time: fields.time,
                detail: format!("field {f} left the finite range"),
            });
        }
        out.insert(f, next)?;
    }
    Ok(out)
}

/// Runs the classical reference evolution: Crank-Nicolson for advection,
/// Heun's method of lines for the wave system and Burgers.
pub fn evolve_classical(problem: &Problem, domain: &Domain) -> Result<Trajectory> {
    let mut state = initial_fields(problem, domain);
    let mut trajectory = Trajectory::new(*domain);
    trajectory.push_snapshot(&state);

    for step in 0..domain.n_steps {
        let started = std::time::Instant::now();
        state = match problem.kind {
            ProblemKind::Advection { v } => {
                let alpha = 0.25 * v * domain.dt / domain.dx;
                let next = cn_advection_step(state.get(Field::U)?, alpha)?;
                let mut fs = FieldSet::new(state.time + domain.dt);
                fs.insert(Field::U, next)?;
                fs
            }
            ProblemKind::Wave | ProblemKind::Burgers { .. } => {
                let spec = problem.rhs_spec(domain.dx);
                rk2_step(&state, &spec, domain.dt)?
            }
        };
        trajectory.push_snapshot(&state);
        trajectory.push_stats(StepStats {
            step,
            time: state.time,
            minimizations: 0,
            cost_evals: 0,
            best_cost: 0.0,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(trajectory)
}
