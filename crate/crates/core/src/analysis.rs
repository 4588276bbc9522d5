//! Exact solutions, L1 error norms and (self-)convergence factors across the
//! resolution hierarchy.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolve::{Problem, ProblemKind, Trajectory};
use crate::rhs::Field;

/// Transported initial profile `u0(x - v t)` wrapped into the unit domain.
/// The Gaussian is not exactly periodic; its boundary tails (about 1.5e-5
/// for sigma = 0.15) sit far below the discretization errors under test.
pub fn exact_advection(problem: &Problem, x: f64, t: f64) -> f64 {
    let v = match problem.kind {
        ProblemKind::Advection { v } => v,
        _ => 1.0,
    };
    problem.gaussian(wrap_unit(x - v * t))
}

/// d'Alembert solution of the time-symmetric pulse on the unit circle:
/// half of the initial profile moving each way.
pub fn exact_wave(problem: &Problem, x: f64, t: f64) -> f64 {
    0.5 * (problem.gaussian(wrap_unit(x - t)) + problem.gaussian(wrap_unit(x + t)))
}

fn wrap_unit(x: f64) -> f64 {
    x - x.floor()
}

/// Discrete L1 norm `sum_i |e_i| dx` (the trapezoidal rule collapses to the
/// plain sum on a periodic grid).
pub fn l1_norm(err: &[f64], dx: f64) -> f64 {
    err.iter().map(|e| e.abs()).sum::<f64>() * dx
}

/// Injects a fine-grid vector onto the coarse grid that halves it `levels`
/// times: coarse point `i` coincides with fine point `i * 2^levels`.
pub fn inject(fine: &[f64], levels: u32) -> Vec<f64> {
    let stride = 1usize << levels;
    fine.iter().step_by(stride).copied().collect()
}

/// L1 errors per resolution and the ratio series between consecutive
/// resolutions, or the injected-difference norms of a self-convergence test.
///
/// Error series live on their own resolution's snapshot times. Each ratio
/// series is sampled on the snapshot times of its pair's coarser member
/// (every second fine snapshot aligns with a coarse one).
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub levels: Vec<u32>,
    /// Snapshot times per resolution.
    pub times: BTreeMap<u32, Vec<f64>>,
    /// L1 error against the exact solution, keyed by qubit count
    /// (empty for self-convergence reports).
    pub errors: BTreeMap<u32, Vec<f64>>,
    /// Injected-difference norms `(num, den) = (L1(u_n - u_{n+1}),
    /// L1(u_{n+1} - u_{n+2}))` keyed by the coarsest qubit count of the
    /// triple, on that resolution's times (self-convergence reports only).
    pub num_den: BTreeMap<u32, (Vec<f64>, Vec<f64>)>,
    /// Ratio series keyed by the consecutive pair, on the coarser member's
    /// times; entries are absent where the denominator drops below 1e-14.
    pub ratios: BTreeMap<(u32, u32), Vec<Option<f64>>>,
}

impl ConvergenceReport {
    /// Mean of the ratio series for `pair` over snapshot times in
    /// `[t0, t1]`, skipping undefined entries.
    pub fn window_mean_ratio(&self, pair: (u32, u32), t0: f64, t1: f64) -> Option<f64> {
        let series = self.ratios.get(&pair)?;
        let times = self.times.get(&pair.0)?;
        let values: Vec<f64> = times
            .iter()
            .zip(series)
            .filter(|(t, _)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12)
            .filter_map(|(_, r)| *r)
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// Checks that the hierarchy members share the Courant factor and returns
/// them sorted by qubit count, verifying consecutive levels.
fn aligned_levels(trajs: &BTreeMap<u32, Trajectory>) -> Result<Vec<u32>> {
    if trajs.len() < 2 {
        return Err(Error::Alignment(
            "a convergence hierarchy needs at least two resolutions".into(),
        ));
    }
    let levels: Vec<u32> = trajs.keys().copied().collect();
    for pair in levels.windows(2) {
        if pair[1] != pair[0] + 1 {
            return Err(Error::Alignment(format!(
                "resolutions {} and {} are not consecutive",
                pair[0], pair[1]
            )));
        }
    }
    let mut iter = trajs.values();
    let first = iter.next().expect("non-empty");
    for t in iter {
        if (t.domain.cfl - first.domain.cfl).abs() > 1e-12
            || (t.domain.t_final - first.domain.t_final).abs() > 1e-12
        {
            return Err(Error::Alignment(
                "hierarchy members must share CFL and final time".into(),
            ));
        }
    }
    Ok(levels)
}

/// L1 errors of `field` against `exact(x, t)` on every resolution, with the
/// consecutive-resolution ratio series evaluated at the coarsest run's
/// snapshot times (coarse step k aligns with fine step `2^d k`).
pub fn convergence_factors<F>(
    trajs: &BTreeMap<u32, Trajectory>,
    field: Field,
    exact: F,
) -> Result<ConvergenceReport>
where
    F: Fn(f64, f64) -> f64,
{
    let levels = aligned_levels(trajs)?;

    let mut times: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut errors: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (&n, traj) in trajs {
        let mut series = Vec::with_capacity(traj.snapshots.len());
        for (k, snap) in traj.snapshots.iter().enumerate() {
            let values = traj.field_at(k, field)?;
            let err: Vec<f64> = values
                .iter()
                .enumerate()
                .map(|(i, &u)| u - exact(traj.domain.point(i), snap.time))
                .collect();
            series.push(l1_norm(&err, traj.domain.dx));
        }
        times.insert(n, traj.snapshots.iter().map(|s| s.time).collect());
        errors.insert(n, series);
    }

    let mut ratios = BTreeMap::new();
    for pair in levels.windows(2) {
        let coarse = &errors[&pair[0]];
        let fine = &errors[&pair[1]];
        let series = coarse
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let f = fine[2 * k];
                if f > 1e-14 {
                    Some(c / f)
                } else {
                    None
                }
            })
            .collect();
        ratios.insert((pair[0], pair[1]), series);
    }

    Ok(ConvergenceReport {
        levels,
        times,
        errors,
        num_den: BTreeMap::new(),
        ratios,
    })
}

/// Self-convergence over a consecutive triple: per aligned time the L1 norms
/// of `u_n - u_{n+1}` (on grid n) and `u_{n+1} - u_{n+2}` (on grid n+1), and
/// their ratio `SC(t)`. Fine solutions are injected pointwise onto the
/// coarser grid before differencing.
pub fn self_convergence_factors(
    trajs: &BTreeMap<u32, Trajectory>,
    field: Field,
) -> Result<ConvergenceReport> {
    let levels = aligned_levels(trajs)?;
    if levels.len() < 3 {
        return Err(Error::Alignment(
            "a self-convergence test needs at least three resolutions".into(),
        ));
    }
    let times: BTreeMap<u32, Vec<f64>> = trajs
        .iter()
        .map(|(&n, t)| (n, t.snapshots.iter().map(|s| s.time).collect()))
        .collect();

    let mut num_den: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut ratios = BTreeMap::new();
    for triple in levels.windows(3) {
        let (n0, n1, n2) = (triple[0], triple[1], triple[2]);
        let (t0, t1, t2) = (&trajs[&n0], &trajs[&n1], &trajs[&n2]);
        let len = t0.snapshots.len();
        let mut nums = Vec::with_capacity(len);
        let mut dens = Vec::with_capacity(len);
        let mut series = Vec::with_capacity(len);
        for k in 0..len {
            let u0 = t0.field_at(k, field)?;
            let u1 = t1.field_at(k * 2, field)?;
            let u2 = t2.field_at(k * 4, field)?;
            let diff0: Vec<f64> = u0.iter().zip(inject(u1, 1)).map(|(a, b)| a - b).collect();
            let diff1: Vec<f64> = u1.iter().zip(inject(u2, 1)).map(|(a, b)| a - b).collect();
            let num = l1_norm(&diff0, t0.domain.dx);
            let den = l1_norm(&diff1, t1.domain.dx);
            series.push(if den > 1e-14 { Some(num / den) } else { None });
            nums.push(num);
            dens.push(den);
        }
        num_den.insert(n0, (nums, dens));
        ratios.insert((n0, n0 + 1), series);
    }

    Ok(ConvergenceReport {
        levels,
        times,
        errors: BTreeMap::new(),
        num_den,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::FieldSet;
    use crate::grid::build_domain;
    use proptest::prelude::*;

    #[test]
    fn l1_examples() {
        assert_eq!(l1_norm(&[1.0, 1.0, 1.0, 1.0], 0.25), 1.0);
        assert_eq!(l1_norm(&[0.0; 5], 0.1), 0.0);
        assert_eq!(l1_norm(&[1.0, -1.0, 0.0, 0.0], 0.5), 1.0);
    }

    #[test]
    fn advection_exact_wraps() {
        let p = Problem::advection(1.0);
        assert_eq!(exact_advection(&p, 0.25, 0.0), p.gaussian(0.25));
        // full crossing returns the profile
        assert!((exact_advection(&p, 0.25, 1.0) - p.gaussian(0.25)).abs() < 1e-15);
        // half crossing puts the peak at the boundary
        assert!((exact_advection(&p, 0.0, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wave_exact_superposition() {
        let p = Problem::wave();
        assert_eq!(exact_wave(&p, 0.3, 0.0), p.gaussian(0.3));
        // the two half pulses meet at the wrap point after half a crossing
        assert!((exact_wave(&p, 0.0, 0.5) - 1.0).abs() < 1e-12);
        // and restore the initial profile after a full crossing
        assert!((exact_wave(&p, 0.5, 1.0) - 1.0).abs() < 1e-12);
        // at quarter crossing the pulses are split and half height
        assert!((exact_wave(&p, 0.25, 0.25) - 0.5).abs() < 1e-4);
    }

    fn synthetic_trajectory(n: u32, order: f64, scale: f64) -> Trajectory {
        // u = exact + scale * dx^order * (smooth profile)
        let domain = build_domain(n, 0.0, 1.0, 0.5, 1.0).unwrap();
        let problem = Problem::advection(1.0);
        let mut traj = Trajectory::new(domain);
        for k in 0..=domain.n_steps {
            let t = k as f64 * domain.dt;
            let mut fs = FieldSet::new(t);
            let values: Vec<f64> = (0..domain.n)
                .map(|i| {
                    let x = domain.point(i);
                    exact_advection(&problem, x, t)
                        + scale * domain.dx.powf(order) * (1.3 + (std::f64::consts::TAU * x).sin())
                })
                .collect();
            fs.insert(Field::U, values).unwrap();
            traj.push_snapshot(&fs);
        }
        traj
    }

    #[test]
    fn synthetic_second_order_gives_ratio_four() {
        let problem = Problem::advection(1.0);
        let mut trajs = BTreeMap::new();
        for n in [4, 5, 6] {
            trajs.insert(n, synthetic_trajectory(n, 2.0, 1.0));
        }
        let report =
            convergence_factors(&trajs, Field::U, |x, t| exact_advection(&problem, x, t)).unwrap();
        for pair in [(4, 5), (5, 6)] {
            let mean = report.window_mean_ratio(pair, 0.0, 1.0).unwrap();
            assert!((mean - 4.0).abs() < 1e-9, "pair {pair:?}: {mean}");
        }
    }

    #[test]
    fn synthetic_self_convergence_gives_ratio_four() {
        let mut trajs = BTreeMap::new();
        for n in [4, 5, 6] {
            trajs.insert(n, synthetic_trajectory(n, 2.0, 1.0));
        }
        let report = self_convergence_factors(&trajs, Field::U).unwrap();
        let mean = report.window_mean_ratio((4, 5), 0.0, 1.0).unwrap();
        // num/den = (dx4^2 - dx5^2)/(dx5^2 - dx6^2) = 4 exactly
        assert!((mean - 4.0).abs() < 1e-9, "{mean}");
        let (nums, dens) = &report.num_den[&4];
        assert!(nums.iter().zip(dens).all(|(n, d)| n > d));
    }

    #[test]
    fn identical_trajectories_have_undefined_ratio() {
        let mut trajs = BTreeMap::new();
        for n in [4, 5, 6] {
            trajs.insert(n, synthetic_trajectory(n, 2.0, 0.0));
        }
        let report = self_convergence_factors(&trajs, Field::U).unwrap();
        assert!(report.ratios[&(4, 5)].iter().all(Option::is_none));
        assert!(report.window_mean_ratio((4, 5), 0.0, 1.0).is_none());
    }

    #[test]
    fn misaligned_hierarchy_is_rejected() {
        let mut trajs = BTreeMap::new();
        trajs.insert(4, synthetic_trajectory(4, 2.0, 1.0));
        trajs.insert(6, synthetic_trajectory(6, 2.0, 1.0));
        assert!(matches!(
            self_convergence_factors(&trajs, Field::U),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(
            convergence_factors(&trajs, Field::U, |_, _| 0.0),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn injection_idempotence() {
        let fine: Vec<f64> = (0..16).map(|i| (i as f64 * 0.39).cos()).collect();
        assert_eq!(inject(&fine, 0), fine);
        let coarse = inject(&fine, 1);
        assert_eq!(coarse.len(), 8);
        assert_eq!(coarse[3], fine[6]);
        assert_eq!(inject(&coarse, 0), coarse);
    }

    proptest! {
        #[test]
        fn l1_is_a_norm(a in proptest::collection::vec(-5.0f64..5.0, 8),
                        b in proptest::collection::vec(-5.0f64..5.0, 8),
                        c in -3.0f64..3.0) {
            let dx = 0.125;
            let na = l1_norm(&a, dx);
            prop_assert!(na >= 0.0);
            // homogeneity
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            prop_assert!((l1_norm(&scaled, dx) - c.abs() * na).abs() < 1e-12);
            // triangle inequality
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            prop_assert!(l1_norm(&sum, dx) <= na + l1_norm(&b, dx) + 1e-12);
        }
    }
}
