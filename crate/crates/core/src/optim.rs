//! Gradient-free Nelder-Mead simplex minimizer over the flat real parameter
//! vector, with evaluation counting for the complexity study.

use crate::error::{Error, Result};

/// Simplex move coefficients, termination tolerances and budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    /// Terminate when the vertex-value spread drops below this...
    pub f_tol: f64,
    /// ...and the vertex coordinate spread below this.
    pub x_tol: f64,
    pub max_evals: u64,
    /// Relative size of the initial simplex around the warm start.
    pub init_step: f64,
}

impl SimplexOptions {
    /// Defaults for exact (noiseless) cost functions: tolerance-driven
    /// termination with a generous budget.
    pub fn svf_default(n_params: usize) -> Self {
        Self {
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            f_tol: 1e-9,
            x_tol: 1e-8,
            max_evals: 400 * n_params as u64,
            init_step: 0.05,
        }
    }

    /// Defaults for sampled cost functions. The value-spread criterion is
    /// unreliable on a stochastic function, so termination is dominated by a
    /// smaller budget.
    pub fn sef_default(n_params: usize) -> Self {
        Self {
            max_evals: 100 * n_params as u64,
            ..Self::svf_default(n_params)
        }
    }

    fn validate(&self) -> Result<()> {
        let coeffs = [self.reflect, self.expand, self.contract, self.shrink];
        if !coeffs.iter().all(|c| crate::grid::finite_positive(*c)) {
            return Err(Error::Parameter(
                "simplex coefficients must be positive".into(),
            ));
        }
        if ![self.f_tol, self.x_tol, self.init_step]
            .iter()
            .all(|t| crate::grid::finite_positive(*t))
        {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evals: u64,
    /// True when both spread tolerances were met before the budget ran out.
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with the standard Nelder-Mead moves.
/// Vertex `j` of the initial simplex perturbs coordinate `j` of the warm
/// start by `init_step * max(|x0_j|, 1)`. Every call of `f` is counted; a
/// non-finite value aborts with a diagnostic.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    opts.validate()?;
    if x0.is_empty() {
        return Err(Error::Parameter("empty parameter vector".into()));
    }
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("non-finite starting point".into()));
    }
    let dim = x0.len();
    let mut evals: u64 = 0;
    // None marks an exhausted budget; the count never exceeds max_evals
    let mut eval = |x: &[f64], evals: &mut u64| -> Result<Option<f64>> {
        if *evals >= opts.max_evals {
            return Ok(None);
        }
        *evals += 1;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteCost { evals: *evals });
        }
        Ok(Some(v))
    };

    // initial simplex around the warm start
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut converged = false;
    'run: {
        let Some(v0) = eval(x0, &mut evals)? else {
            return Err(Error::Parameter(
                "evaluation budget smaller than one".into(),
            ));
        };
        simplex.push((x0.to_vec(), v0));
        for j in 0..dim {
            let mut x = x0.to_vec();
            x[j] += opts.init_step * x0[j].abs().max(1.0);
            let Some(v) = eval(&x, &mut evals)? else {
                break 'run;
            };
            simplex.push((x, v));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

            let f_spread = simplex[dim].1 - simplex[0].1;
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread < opts.f_tol && x_spread < opts.x_tol {
                converged = true;
                break 'run;
            }

            // centroid of all but the worst vertex
            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let blend = |a: f64| -> Vec<f64> {
                // point centroid + a*(centroid - worst)
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + a * (c - w))
                    .collect()
            };

            let reflected = blend(opts.reflect);
            let Some(fr) = eval(&reflected, &mut evals)? else {
                break 'run;
            };
            if fr < simplex[0].1 {
                let expanded = blend(opts.reflect * opts.expand);
                let Some(fe) = eval(&expanded, &mut evals)? else {
                    simplex[dim] = (reflected, fr);
                    break 'run;
                };
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            // contraction, outside or inside of the worst vertex
            let contracted = if fr < worst.1 {
                blend(opts.reflect * opts.contract)
            } else {
                blend(-opts.contract)
            };
            let Some(fc) = eval(&contracted, &mut evals)? else {
                break 'run;
            };
            if fc < fr.min(worst.1) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            // shrink everything towards the best vertex
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = vertex
                    .0
                    .iter()
                    .zip(&best)
                    .map(|(xi, bi)| bi + opts.shrink * (xi - bi))
                    .collect();
                let Some(v) = eval(&x, &mut evals)? else {
                    break 'run;
                };
                *vertex = (x, v);
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best, best_value) = simplex.swap_remove(0);
    Ok(OptResult {
        best,
        best_value,
        evals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_shifted(x: &[f64]) -> f64 {
        x.iter().map(|xi| (xi - 1.0).powi(2)).sum()
    }

    #[test]
    fn quadratic_bowl_in_seven_dimensions() {
        let opts = SimplexOptions::svf_default(7);
        let out = nelder_mead(sphere_shifted, &[0.0; 7], &opts).unwrap();
        assert!(out.converged);
        for xi in &out.best {
            assert!((xi - 1.0).abs() < 1e-6, "best = {:?}", out.best);
        }
        assert!(out.evals <= opts.max_evals);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut opts = SimplexOptions::svf_default(2);
        opts.max_evals = 4000;
        let out = nelder_mead(f, &[-1.2, 1.0], &opts).unwrap();
        assert!((out.best[0] - 1.0).abs() < 1e-4 && (out.best[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn constant_function_converges() {
        let opts = SimplexOptions::svf_default(2);
        let out = nelder_mead(|_| 3.25, &[0.5, -0.5], &opts).unwrap();
        assert!(out.converged);
        assert_eq!(out.best_value, 3.25);
        assert!(out.evals < opts.max_evals);
    }

    #[test]
    fn counts_every_evaluation() {
        let mut count = 0u64;
        let out = nelder_mead(
            |x| {
                count += 1;
                x[0] * x[0]
            },
            &[2.0],
            &SimplexOptions::svf_default(1),
        )
        .unwrap();
        assert_eq!(out.evals, count);
    }

    #[test]
    fn aborts_on_non_finite_values() {
        let res = nelder_mead(
            |x| if x[0] > 2.02 { f64::NAN } else { -x[0] },
            &[2.0],
            &SimplexOptions::svf_default(1),
        );
        assert!(matches!(res, Err(Error::NonFiniteCost { .. })));
    }

    #[test]
    fn best_value_is_monotone() {
        // track the running best over a restarted sequence of evaluations
        let mut best_seen = f64::INFINITY;
        let mut monotone = true;
        let mut current_best = f64::INFINITY;
        let _ = nelder_mead(
            |x: &[f64]| {
                let v = sphere_shifted(x);
                if v < best_seen {
                    best_seen = v;
                }
                if best_seen > current_best {
                    monotone = false;
                }
                current_best = current_best.min(best_seen);
                v
            },
            &[0.0; 4],
            &SimplexOptions::svf_default(4),
        )
        .unwrap();
        assert!(monotone);
    }

    #[test]
    fn deterministic_result() {
        let opts = SimplexOptions::svf_default(3);
        let a = nelder_mead(sphere_shifted, &[0.2, -0.4, 3.0], &opts).unwrap();
        let b = nelder_mead(sphere_shifted, &[0.2, -0.4, 3.0], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_equivariant_minimum() {
        let opts = SimplexOptions::svf_default(3);
        for c in [0.1, 10.0] {
            let f = move |x: &[f64]| -> f64 { x.iter().map(|xi| (c * xi - 1.0).powi(2)).sum() };
            let out = nelder_mead(f, &[0.0; 3], &opts).unwrap();
            for xi in &out.best {
                assert!(
                    (xi * c - 1.0).abs() < 1e-5,
                    "c = {c}, best = {:?}",
                    out.best
                );
            }
        }
    }

    #[test]
    fn budget_is_respected() {
        let mut opts = SimplexOptions::svf_default(5);
        opts.max_evals = 20;
        let out = nelder_mead(sphere_shifted, &[10.0; 5], &opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.evals, 20);
    }
}
