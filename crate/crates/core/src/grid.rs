//! Discrete periodic space-time domain shared by all solvers.

use crate::error::{Error, Result};

/// Largest supported qubit count; keeps dense length-`2^n` vectors affordable.
pub const MAX_QUBITS: u32 = 24;

/// Uniform periodic grid `x_i = x_min + i*dx` together with the time step
/// derived from the Courant factor, `dt = cfl * dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub n_qubits: u32,
    /// Number of spatial points, `N = 2^n_qubits`.
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub cfl: f64,
    pub dt: f64,
    pub t_final: f64,
    pub n_steps: usize,
}

/// Builds a [`Domain`], requiring that `dt` divides `t_final` exactly so that
/// resolution-doubled runs share snapshot times (coarse step k aligns with
/// fine step 2k).
pub fn build_domain(
    n_qubits: u32,
    x_min: f64,
    x_max: f64,
    cfl: f64,
    t_final: f64,
) -> Result<Domain> {
    if n_qubits < 1 {
        return Err(Error::Config("n_qubits must be at least 1".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(n_qubits));
    }
    if !finite_positive(x_max - x_min) {
        return Err(Error::Config(format!(
            "x_max = {x_max} must exceed x_min = {x_min}"
        )));
    }
    if !finite_positive(cfl) {
        return Err(Error::Config(format!("cfl = {cfl} must be positive")));
    }
    if !finite_positive(t_final) {
        return Err(Error::Config(format!(
            "t_final = {t_final} must be positive"
        )));
    }

    let n = 1usize << n_qubits;
    let dx = (x_max - x_min) / n as f64;
    let dt = cfl * dx;
    let n_steps = (t_final / dt).round() as usize;
    if n_steps == 0 || (n_steps as f64 * dt - t_final).abs() > 1e-12 * t_final.max(1.0) {
        return Err(Error::Config(format!(
            "t_final = {t_final} is not an integer multiple of dt = {dt}"
        )));
    }

    Ok(Domain {
        n_qubits,
        n,
        x_min,
        x_max,
        dx,
        cfl,
        dt,
        t_final,
        n_steps,
    })
}

impl Domain {
    /// Coordinate of grid point `i`.
    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// All grid coordinates.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// True for finite, strictly positive values (rejects NaN).
pub(crate) fn finite_positive(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

/// Periodic index arithmetic: `i mod N` mapped into `[0, N)`.
pub fn wrap_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    debug_assert!(n >= 1);
    (((i % n) + n) % n) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_resolution_table() {
        let d = build_domain(3, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(d.n, 8);
        assert_eq!(d.dx, 0.125);
        assert_eq!(d.dt, 0.0625);
        assert_eq!(d.n_steps, 16);

        let d = build_domain(6, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(d.n, 64);
        assert_eq!(d.dx, 1.0 / 64.0);
        assert_eq!(d.dt, 1.0 / 128.0);
        assert_eq!(d.n_steps, 128);
    }

    #[test]
    fn smallest_domain() {
        let d = build_domain(1, 0.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(d.n, 2);
        assert_eq!(d.dx, 1.0);
        assert_eq!(d.dt, 1.0);
        assert_eq!(d.n_steps, 1);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            build_domain(0, 0.0, 1.0, 0.5, 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_domain(25, 0.0, 1.0, 0.5, 1.0),
            Err(Error::Capacity(25))
        ));
        assert!(matches!(
            build_domain(3, 1.0, 0.0, 0.5, 1.0),
            Err(Error::Config(_))
        ));
        // dt = 0.3/8 does not divide t_final = 1
        assert!(matches!(
            build_domain(3, 0.0, 1.0, 0.3, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn accepts_near_exact_divisibility() {
        // cfl = 1/3 gives n_steps*dt == t_final only up to rounding
        let d = build_domain(6, 0.0, 1.0, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!(d.n_steps, 192);
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_index(8, 8), 0);
        assert_eq!(wrap_index(-1, 8), 7);
        assert_eq!(wrap_index(17, 8), 1);
    }

    #[test]
    fn grid_nesting() {
        let coarse = build_domain(4, 0.0, 1.0, 0.5, 1.0).unwrap();
        let fine = build_domain(5, 0.0, 1.0, 0.5, 1.0).unwrap();
        for i in 0..coarse.n {
            assert_eq!(coarse.point(i), fine.point(2 * i));
        }
    }

    #[test]
    fn wrap_periodicity() {
        for n in [1usize, 2, 8, 13] {
            for i in -30i64..30 {
                assert_eq!(wrap_index(i + n as i64, n), wrap_index(i, n));
                assert!(wrap_index(i, n) < n);
            }
        }
    }
}
