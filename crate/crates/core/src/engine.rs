//! Inner-product primitives behind every cost function:
//! `Re <bra| D shift^s |ket>` with an optional diagonal field `D`.
//!
//! In SVF mode products are exact. In SEF mode each product is mapped to the
//! ancilla expectation of the corresponding circuit: the states (and the
//! diagonal field, when present) are normalized, the exact expectation
//! `sigma_z` in [-1, 1] is replaced by a binomial estimate from `T` simulated
//! shots, and the result is rescaled by the product of the norms.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use std::f64::consts::TAU;

use crate::ansatz::ParamVector;
use crate::error::{Error, Result};
use crate::grid::wrap_index;

/// Shot counts above this use a Gaussian approximation of the binomial;
/// sampling 1e12 Bernoulli trials per product is intractable and the
/// approximation error is negligible at that size.
const GAUSSIAN_SHOT_THRESHOLD: u64 = 10_000_000;

/// How every inner product is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    /// Exact state-vector products.
    Svf,
    /// Finite-shot sampling with `shots` measurements per product and a
    /// deterministic stream seeded from `seed`.
    Sef { shots: u64, seed: u64 },
}

/// One product `Re <bra| D shift^s |ket>` on `n` grid points.
#[derive(Debug, Clone, Copy)]
pub struct ProductRequest<'a> {
    pub bra: &'a ParamVector,
    pub ket: &'a ParamVector,
    pub shift: i64,
    pub diag: Option<&'a [f64]>,
    pub n: usize,
}

/// Physical-space evaluation `sum_i bra_i d_i ket_{i+s}` with periodic
/// wrapping; `d_i = 1` when no diagonal field is present.
pub fn product_exact(req: &ProductRequest) -> Result<f64> {
    if let Some(d) = req.diag {
        if d.len() != req.n {
            return Err(Error::Shape(format!(
                "diagonal field has {} entries on a {}-point grid",
                d.len(),
                req.n
            )));
        }
    }
    let bra = req.bra.evaluate(req.n)?;
    let ket = req.ket.evaluate(req.n)?;
    let mut acc = 0.0;
    for i in 0..req.n {
        let d = req.diag.map_or(1.0, |v| v[i]);
        acc += bra[i] * d * ket[wrap_index(i as i64 + req.shift, req.n)];
    }
    Ok(acc)
}

/// Coefficient-space shortcut for diagonal-free products: the shift is a
/// phase on each mode, so `Re <bra|shift^s|ket> = N Re sum_p conj(b_p) k_p
/// e^{-i 2 pi p s / N}`.
pub fn product_fast(bra: &ParamVector, ket: &ParamVector, shift: i64, n: usize) -> f64 {
    let m = bra.mode_cutoff().max(ket.mode_cutoff()) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in -m..=m {
        let theta = -TAU * (p * shift) as f64 / n as f64;
        acc += bra.coeff_or_zero(p).conj()
            * ket.coeff_or_zero(p)
            * Complex64::new(theta.cos(), theta.sin());
    }
    n as f64 * acc.re
}

/// Replaces an exact ancilla expectation by a `T`-shot binomial estimate:
/// draws `k ~ Binomial(T, (1 + sigma_z)/2)` and returns `2k/T - 1`.
pub fn sef_sample(sigma_z_exact: f64, shots: u64, rng: &mut ChaCha8Rng) -> Result<f64> {
    if shots < 1 {
        return Err(Error::Parameter("shot count must be at least 1".into()));
    }
    assert!(
        sigma_z_exact.abs() <= 1.0 + 1e-9,
        "ancilla expectation {sigma_z_exact} outside [-1, 1]"
    );
    let sigma_z = sigma_z_exact.clamp(-1.0, 1.0);
    if sigma_z == 1.0 || sigma_z == -1.0 {
        // zero-variance branch, no randomness to consume
        return Ok(sigma_z);
    }
    let p0 = 0.5 * (1.0 + sigma_z);
    let t = shots as f64;
    let k = if shots > GAUSSIAN_SHOT_THRESHOLD {
        let z: f64 = StandardNormal.sample(rng);
        (t * p0 + z * (t * p0 * (1.0 - p0)).sqrt())
            .round()
            .clamp(0.0, t)
    } else {
        Binomial::new(shots, p0)
            .map_err(|e| Error::Parameter(format!("binomial sampling: {e}")))?
            .sample(rng) as f64
    };
    Ok(2.0 * k / t - 1.0)
}

/// Stateful product evaluator owning the (optional) shot-noise stream. One
/// engine per evolution run; every sampled product advances the stream, so
/// runs with equal seeds are exactly reproducible.
#[derive(Debug, Clone)]
pub struct Engine {
    mode: EngineMode,
    rng: Option<ChaCha8Rng>,
}

impl Engine {
    pub fn new(mode: EngineMode) -> Self {
        let rng = match mode {
            EngineMode::Svf => None,
            EngineMode::Sef { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Self { mode, rng }
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    /// Evaluates one product under the engine mode. SVF dispatches to the
    /// coefficient-space product when no diagonal field is present and to the
    /// physical-space product otherwise; SEF samples the normalized
    /// expectation and rescales by the norms.
    pub fn product(&mut self, req: &ProductRequest) -> Result<f64> {
        let exact = match req.diag {
            None => product_fast(req.bra, req.ket, req.shift, req.n),
            Some(_) => product_exact(req)?,
        };
        let EngineMode::Sef { shots, .. } = self.mode else {
            return Ok(exact);
        };

        let mut scale = req.bra.norm(req.n) * req.ket.norm(req.n);
        if let Some(d) = req.diag {
            // the diagonal operator enters through the normalized field that
            // loads it, so its 2-norm is factored out like the state norms
            scale *= d.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        if !scale.is_finite() {
            return Err(Error::DegenerateState);
        }
        if scale == 0.0 {
            // a zero-norm factor multiplies any sampled expectation away
            return Ok(0.0);
        }

        let same_state =
            req.shift == 0 && req.diag.is_none() && req.bra.coeffs() == req.ket.coeffs();
        let sigma_z = if same_state { 1.0 } else { exact / scale };
        let rng = self.rng.as_mut().expect("SEF engine carries a stream");
        let estimate = sef_sample(sigma_z, shots, rng)?;
        Ok(scale * estimate)
    }
}
