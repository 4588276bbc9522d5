//! Truncated-Fourier parameterization of real periodic fields.
//!
//! A field is represented by complex coefficients `c_p`, `p = -M..M`, with
//! Hermitian symmetry `c_{-p} = conj(c_p)` so that the reconstruction
//!
//! ```text
//! u_i = sum_p c_p exp(-i 2 pi p i / N)
//! ```
//!
//! is real. The symmetry leaves `2M+1` real degrees of freedom, which is the
//! flat vector the simplex optimizer works on.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Hermitian-symmetric truncated Fourier coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    m: usize,
    /// `coeffs[j]` holds `c_p` with `p = j - m`; length `2m+1`.
    coeffs: Vec<Complex64>,
}

impl ParamVector {
    /// Builds from raw coefficients `c_{-M}..c_M`, validating Hermitian
    /// symmetry and then mirroring the non-negative modes so the symmetry is
    /// bit-exact.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "coefficient count {} is not odd",
                coeffs.len()
            )));
        }
        let m = coeffs.len() / 2;
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for p in 0..=m {
            let diff = coeffs[m - p] - coeffs[m + p].conj();
            if diff.norm() > 1e-9 * scale {
                return Err(Error::Shape(format!(
                    "coefficients violate Hermitian symmetry at mode {p}"
                )));
            }
        }
        let mut out = Self::zeros(m);
        for p in 0..=m {
            out.store(p as i64, coeffs[m + p]);
        }
        Ok(out)
    }

    /// All-zero coefficients with cutoff `m`.
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * m + 1],
        }
    }

    /// Mode cutoff `M`.
    pub fn mode_cutoff(&self) -> usize {
        self.m
    }

    /// Number of real degrees of freedom, `2M+1`.
    pub fn real_dof(&self) -> usize {
        2 * self.m + 1
    }

    /// Coefficient `c_p`.
    pub fn coeff(&self, p: i64) -> Complex64 {
        self.coeffs[(p + self.m as i64) as usize]
    }

    /// Coefficient `c_p`, zero beyond the cutoff.
    pub fn coeff_or_zero(&self, p: i64) -> Complex64 {
        if p.unsigned_abs() as usize > self.m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeff(p)
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Squared coefficient norm `sum_p |c_p|^2`.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Physical 2-norm of the evaluated vector on `n` points. By Parseval this
    /// is `sqrt(N sum_p |c_p|^2)`; it plays the role of the normalization
    /// scale pulled out of each encoded state.
    pub fn norm(&self, n: usize) -> f64 {
        (n as f64 * self.coeff_norm_sq()).sqrt()
    }

    /// Reconstructs the field values `u_i = sum_p c_p e^{-i 2 pi p i/N}`.
    /// The Hermitian-folded sum is used, so the result is exactly real.
    pub fn evaluate(&self, n: usize) -> Result<Vec<f64>> {
        if 2 * self.m + 1 > n {
            return Err(Error::ModeOverflow {
                modes: 2 * self.m + 1,
                points: n,
            });
        }
        let c0 = self.coeff(0).re;
        let mut out = vec![c0; n];
        for p in 1..=self.m {
            let c = self.coeff(p as i64);
            for (i, u) in out.iter_mut().enumerate() {
                let theta = TAU * (p * i % n) as f64 / n as f64;
                *u += 2.0 * (c.re * theta.cos() + c.im * theta.sin());
            }
        }
        Ok(out)
    }

    /// Extracts the lowest `2M+1` modes of the discrete transform
    /// `F_k = (1/N) sum_i u_i e^{+i 2 pi k i/N}`: modes `0..=M` come from the
    /// first entries, modes `-M..=-1` from the last ones. For real samples the
    /// result is Hermitian-symmetric by construction.
    pub fn from_samples(u: &[f64], m: usize) -> Result<Self> {
        let n = u.len();
        if 2 * m + 1 > n {
            return Err(Error::ModeOverflow {
                modes: 2 * m + 1,
                points: n,
            });
        }
        let mut out = Self::zeros(m);
        for p in 0..=m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &ui) in u.iter().enumerate() {
                let theta = TAU * (p * i % n) as f64 / n as f64;
                acc += ui * Complex64::new(theta.cos(), theta.sin());
            }
            out.store(p as i64, acc / n as f64);
        }
        Ok(out)
    }

    /// Coefficient-space action of the cyclic shift: the returned parameters
    /// evaluate to `u_{i+s}`. Each mode picks up the phase `e^{-i 2 pi p s/N}`.
    pub fn shifted(&self, s: i64, n: usize) -> Self {
        let mut out = Self::zeros(self.m);
        for p in 0..=self.m as i64 {
            let theta = -TAU * (p * s) as f64 / n as f64;
            out.store(p, self.coeff(p) * Complex64::new(theta.cos(), theta.sin()));
        }
        out
    }

    /// Flattens to `[c_0, Re c_1, Im c_1, ..., Re c_M, Im c_M]`.
    pub fn pack_real(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.m + 1);
        v.push(self.coeff(0).re);
        for p in 1..=self.m as i64 {
            let c = self.coeff(p);
            v.push(c.re);
            v.push(c.im);
        }
        v
    }

    /// Inverse of [`ParamVector::pack_real`].
    pub fn unpack_real(values: &[f64], m: usize) -> Result<Self> {
        if values.len() != 2 * m + 1 {
            return Err(Error::Shape(format!(
                "expected {} real degrees of freedom, got {}",
                2 * m + 1,
                values.len()
            )));
        }
        let mut out = Self::zeros(m);
        out.store(0, Complex64::new(values[0], 0.0));
        for p in 1..=m {
            out.store(p as i64, Complex64::new(values[2 * p - 1], values[2 * p]));
        }
        Ok(out)
    }

    /// Stores `c_p` for `p >= 0`, mirroring the conjugate into `c_{-p}`.
    fn store(&mut self, p: i64, value: Complex64) {
        debug_assert!(p >= 0);
        let value = if p == 0 {
            Complex64::new(value.re, 0.0)
        } else {
            value
        };
        let m = self.m as i64;
        self.coeffs[(m + p) as usize] = value;
        self.coeffs[(m - p) as usize] = value.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(coeffs: &[(f64, f64)]) -> ParamVector {
        ParamVector::new(
            coeffs
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_mode() {
        let q = pv(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(q.evaluate(4).unwrap(), vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn cosine_mode() {
        // c_{-1} = c_1 = 1/2 -> cos(2 pi i/4)
        let q = pv(&[(0.5, 0.0), (0.0, 0.0), (0.5, 0.0)]);
        let u = q.evaluate(4).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0];
        for (a, b) in u.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{u:?}");
        }
    }

    #[test]
    fn sine_mode() {
        // c_1 = -i/2, c_{-1} = +i/2 -> -sin(2 pi i/4)
        let q = pv(&[(0.0, 0.5), (0.0, 0.0), (0.0, -0.5)]);
        let u = q.evaluate(4).unwrap();
        let expect = [0.0, -1.0, 0.0, 1.0];
        for (a, b) in u.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{u:?}");
        }
    }

    #[test]
    fn samples_of_cosine() {
        let q = ParamVector::from_samples(&[1.0, 0.0, -1.0, 0.0], 1).unwrap();
        assert!((q.coeff(0).norm()) < 1e-15);
        assert!((q.coeff(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((q.coeff(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn samples_of_constant() {
        let q = ParamVector::from_samples(&[2.5; 8], 3).unwrap();
        assert!((q.coeff(0) - Complex64::new(2.5, 0.0)).norm() < 1e-14);
        for p in 1..=3 {
            assert!(q.coeff(p).norm() < 1e-14);
        }
    }

    #[test]
    fn mode_overflow_rejected() {
        assert!(matches!(
            ParamVector::zeros(2).evaluate(4),
            Err(Error::ModeOverflow {
                modes: 5,
                points: 4
            })
        ));
        assert!(ParamVector::from_samples(&[0.0; 4], 2).is_err());
    }

    #[test]
    fn shift_moves_samples() {
        let q = pv(&[(0.5, 0.0), (0.0, 0.0), (0.5, 0.0)]); // (1,0,-1,0)
        let u = q.shifted(1, 4).evaluate(4).unwrap();
        let expect = [0.0, -1.0, 0.0, 1.0];
        for (a, b) in u.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pack_layout() {
        let q = pv(&[(1.0, -3.0), (2.0, 0.0), (1.0, 3.0)]);
        assert_eq!(q.pack_real(), vec![2.0, 1.0, 3.0]);
    }

    #[test]
    fn centered_difference_consistency() {
        // (u_{i+1} - u_{i-1})/(2 dx) from shifted parameters matches the
        // stencil applied to the evaluated samples.
        let n = 16;
        let dx = 1.0 / n as f64;
        let q = ParamVector::from_samples(
            &(0..n)
                .map(|i| (TAU * i as f64 / n as f64).sin() + 0.3)
                .collect::<Vec<_>>(),
            3,
        )
        .unwrap();
        let u = q.evaluate(n).unwrap();
        let plus = q.shifted(1, n).evaluate(n).unwrap();
        let minus = q.shifted(-1, n).evaluate(n).unwrap();
        for i in 0..n {
            let spectral = (plus[i] - minus[i]) / (2.0 * dx);
            let stencil = (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * dx);
            assert!((spectral - stencil).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn pack_unpack_round_trip(values in proptest::collection::vec(-10.0f64..10.0, 1..=9)) {
            prop_assume!(values.len() % 2 == 1);
            let m = values.len() / 2;
            let q = ParamVector::unpack_real(&values, m).unwrap();
            prop_assert_eq!(q.pack_real(), values);
        }

        #[test]
        fn band_limited_round_trip(values in proptest::collection::vec(-1.0f64..1.0, 7)) {
            // from_samples inverts evaluate for band-limited data
            let q = ParamVector::unpack_real(&values, 3).unwrap();
            let u = q.evaluate(16).unwrap();
            let r = ParamVector::from_samples(&u, 3).unwrap();
            for p in -3i64..=3 {
                prop_assert!((q.coeff(p) - r.coeff(p)).norm() < 1e-12);
            }
        }

        #[test]
        fn shift_composes(values in proptest::collection::vec(-1.0f64..1.0, 5),
                          s1 in -4i64..=4, s2 in -4i64..=4) {
            let q = ParamVector::unpack_real(&values, 2).unwrap();
            let a = q.shifted(s1, 8).shifted(s2, 8);
            let b = q.shifted(s1 + s2, 8);
            for p in -2i64..=2 {
                prop_assert!((a.coeff(p) - b.coeff(p)).norm() < 1e-12);
            }
        }

        #[test]
        fn evaluate_is_linear(a in proptest::collection::vec(-1.0f64..1.0, 5),
                              b in proptest::collection::vec(-1.0f64..1.0, 5),
                              s in -2.0f64..2.0) {
            let qa = ParamVector::unpack_real(&a, 2).unwrap();
            let qb = ParamVector::unpack_real(&b, 2).unwrap();
            let combined: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let qc = ParamVector::unpack_real(&combined, 2).unwrap();
            let ua = qa.evaluate(8).unwrap();
            let ub = qb.evaluate(8).unwrap();
            let uc = qc.evaluate(8).unwrap();
            for i in 0..8 {
                prop_assert!((uc[i] - (ua[i] + s * ub[i])).abs() < 1e-12);
            }
        }

        #[test]
        fn parseval(values in proptest::collection::vec(-1.0f64..1.0, 7)) {
            let q = ParamVector::unpack_real(&values, 3).unwrap();
            let u = q.evaluate(16).unwrap();
            let physical: f64 = u.iter().map(|x| x * x).sum();
            let spectral = 16.0 * q.coeff_norm_sq();
            prop_assert!((physical - spectral).abs() < 1e-9 * (1.0 + physical.abs()));
        }
    }
}
