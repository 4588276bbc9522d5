//! Symbolic right-hand sides as sums of (coefficient x optional diagonal
//! field x shift power) terms. The same spec drives the classical stencils
//! and the expansion of every cost function.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::wrap_index;

/// Names of the evolved fields across all problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    U,
    P,
    Q,
    Phi,
}

impl Field {
    pub fn as_str(&self) -> &'static str {
        match self {
            Field::U => "u",
            Field::P => "P",
            Field::Q => "Q",
            Field::Phi => "phi",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One term `coeff * diag_i * source_{i+shift}` of a semi-discrete right-hand
/// side. `diag`, when present, multiplies pointwise by the named field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsTerm {
    pub coeff: f64,
    pub shift: i64,
    pub source: Field,
    pub diag: Option<Field>,
}

/// Per-target collections of [`RhsTerm`]. Shift powers beyond +-2 are
/// rejected; the time-average expansion introduces at most squared shifts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RhsSpec {
    terms: BTreeMap<Field, Vec<RhsTerm>>,
}

impl RhsSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, target: Field, term: RhsTerm) -> Result<()> {
        if term.shift.abs() > 2 {
            return Err(Error::Config(format!(
                "shift {} out of the supported stencil range [-2, 2]",
                term.shift
            )));
        }
        self.terms.entry(target).or_default().push(term);
        Ok(())
    }

    /// Fields that have a right-hand side, in canonical order.
    pub fn targets(&self) -> impl Iterator<Item = Field> + '_ {
        self.terms.keys().copied()
    }

    pub fn terms(&self, target: Field) -> Result<&[RhsTerm]> {
        self.terms
            .get(&target)
            .map(Vec::as_slice)
            .ok_or(Error::MissingField(target))
    }
}

/// Centered-difference advection: `du/dt = -v du/dx`.
pub fn rhs_spec_advection(v: f64, dx: f64) -> RhsSpec {
    let mut spec = RhsSpec::new();
    for (coeff, shift) in [(-v / (2.0 * dx), 1), (v / (2.0 * dx), -1)] {
        spec.add_term(
            Field::U,
            RhsTerm {
                coeff,
                shift,
                source: Field::U,
                diag: None,
            },
        )
        .expect("shift within range");
    }
    spec
}

/// First-order wave system `dP/dt = dQ/dx`, `dQ/dt = dP/dx`, `dphi/dt = P`.
pub fn rhs_spec_wave(dx: f64) -> RhsSpec {
    let mut spec = RhsSpec::new();
    let half = 1.0 / (2.0 * dx);
    for (target, source) in [(Field::P, Field::Q), (Field::Q, Field::P)] {
        for (coeff, shift) in [(half, 1), (-half, -1)] {
            spec.add_term(
                target,
                RhsTerm {
                    coeff,
                    shift,
                    source,
                    diag: None,
                },
            )
            .expect("shift within range");
        }
    }
    spec.add_term(
        Field::Phi,
        RhsTerm {
            coeff: 1.0,
            shift: 0,
            source: Field::P,
            diag: None,
        },
    )
    .expect("shift within range");
    spec
}

/// Viscous Burgers `du/dt = -u du/dx + nu d2u/dx2`; the advective part
/// carries the field itself as a diagonal factor.
pub fn rhs_spec_burgers(nu: f64, dx: f64) -> RhsSpec {
    let mut spec = RhsSpec::new();
    let half = 1.0 / (2.0 * dx);
    let visc = nu / (dx * dx);
    let terms = [
        (-half, 1, Some(Field::U)),
        (half, -1, Some(Field::U)),
        (visc, 1, None),
        (-2.0 * visc, 0, None),
        (visc, -1, None),
    ];
    for (coeff, shift, diag) in terms {
        spec.add_term(
            Field::U,
            RhsTerm {
                coeff,
                shift,
                source: Field::U,
                diag,
            },
        )
        .expect("shift within range");
    }
    spec
}

/// Evaluates the right-hand side of `target` on periodic vectors:
/// `sum_k coeff_k * d_i * source_{i+shift_k}`.
pub fn apply_rhs(
    spec: &RhsSpec,
    fields: &BTreeMap<Field, Vec<f64>>,
    target: Field,
) -> Result<Vec<f64>> {
    let terms = spec.terms(target)?;
    let n = fields
        .values()
        .next()
        .map(Vec::len)
        .ok_or(Error::MissingField(target))?;
    for v in fields.values() {
        if v.len() != n {
            return Err(Error::Shape("field vectors differ in length".into()));
        }
    }
    let mut out = vec![0.0; n];
    for term in terms {
        let source = fields
            .get(&term.source)
            .ok_or(Error::MissingField(term.source))?;
        let diag = match term.diag {
            Some(f) => Some(fields.get(&f).ok_or(Error::MissingField(f))?),
            None => None,
        };
        for (i, o) in out.iter_mut().enumerate() {
            let d = diag.map_or(1.0, |v| v[i]);
            *o += term.coeff * d * source[wrap_index(i as i64 + term.shift, n)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields_of(pairs: &[(Field, Vec<f64>)]) -> BTreeMap<Field, Vec<f64>> {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn advection_coefficients() {
        let spec = rhs_spec_advection(1.0, 0.125);
        let terms = spec.terms(Field::U).unwrap();
        assert_eq!(terms[0].coeff, -4.0);
        assert_eq!(terms[0].shift, 1);
        assert_eq!(terms[1].coeff, 4.0);
        assert_eq!(terms[1].shift, -1);
    }

    #[test]
    fn advection_of_constant_vanishes() {
        let spec = rhs_spec_advection(2.0, 0.1);
        let f = fields_of(&[(Field::U, vec![3.0; 8])]);
        let r = apply_rhs(&spec, &f, Field::U).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn zero_velocity_gives_zero_rhs() {
        let spec = rhs_spec_advection(0.0, 0.1);
        let f = fields_of(&[(Field::U, vec![1.0, -2.0, 0.5, 4.0])]);
        let r = apply_rhs(&spec, &f, Field::U).unwrap();
        assert_eq!(r, vec![0.0; 4]);
    }

    #[test]
    fn wave_structure() {
        let dx = 0.25;
        let spec = rhs_spec_wave(dx);
        let q: Vec<f64> = vec![0.0, 1.0, 0.0, -1.0];
        let f = fields_of(&[
            (Field::P, vec![0.0; 4]),
            (Field::Q, q.clone()),
            (Field::Phi, vec![2.0; 4]),
        ]);
        // dphi/dt = P = 0 and dQ/dt = dP/dx = 0
        assert!(apply_rhs(&spec, &f, Field::Phi)
            .unwrap()
            .iter()
            .all(|x| *x == 0.0));
        assert!(apply_rhs(&spec, &f, Field::Q)
            .unwrap()
            .iter()
            .all(|x| *x == 0.0));
        // dP/dt equals the centered difference of Q
        let r = apply_rhs(&spec, &f, Field::P).unwrap();
        for i in 0..4 {
            let expect = (q[(i + 1) % 4] - q[(i + 3) % 4]) / (2.0 * dx);
            assert!((r[i] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn burgers_brute_force_oracle() {
        let dx = 1.0 / 16.0;
        let nu = 0.0125;
        let spec = rhs_spec_burgers(nu, dx);
        let u: Vec<f64> = (0..16)
            .map(|i| (-((i as f64 / 16.0 - 0.5) / 0.15).powi(2)).exp())
            .collect();
        let f = fields_of(&[(Field::U, u.clone())]);
        let r = apply_rhs(&spec, &f, Field::U).unwrap();
        for i in 0..16 {
            let ip = (i + 1) % 16;
            let im = (i + 15) % 16;
            let expect = -u[i] * (u[ip] - u[im]) / (2.0 * dx)
                + nu * (u[ip] - 2.0 * u[i] + u[im]) / (dx * dx);
            assert!((r[i] - expect).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn burgers_constant_is_steady() {
        let spec = rhs_spec_burgers(0.0125, 0.1);
        let f = fields_of(&[(Field::U, vec![0.7; 8])]);
        let r = apply_rhs(&spec, &f, Field::U).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn periodic_sum_conservation() {
        // pure difference stencils telescope to zero on a periodic grid
        let u: Vec<f64> = (0..32).map(|i| ((i * i) as f64).sin()).collect();
        for spec in [rhs_spec_advection(1.3, 0.05), rhs_spec_wave(0.05)] {
            let f = fields_of(&[
                (Field::U, u.clone()),
                (Field::P, u.clone()),
                (Field::Q, u.iter().map(|x| x * 0.5 + 0.1).collect()),
                (Field::Phi, vec![0.0; 32]),
            ]);
            for target in [Field::P, Field::Q] {
                if spec.terms(target).is_ok() {
                    let r = apply_rhs(&spec, &f, target).unwrap();
                    let norm: f64 = u.iter().map(|x| x.abs()).sum();
                    assert!(r.iter().sum::<f64>().abs() < 1e-12 * norm.max(1.0));
                }
            }
            if spec.terms(Field::U).is_ok() {
                let r = apply_rhs(&spec, &f, Field::U).unwrap();
                let norm: f64 = u.iter().map(|x| x.abs()).sum();
                assert!(r.iter().sum::<f64>().abs() < 1e-12 * norm.max(1.0));
            }
        }
    }

    #[test]
    fn apply_rhs_is_linear_without_diag() {
        let spec = rhs_spec_advection(1.7, 0.1);
        let a: Vec<f64> = (0..8).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let b: Vec<f64> = (0..8).map(|i| ((i * 5 % 11) as f64) * 0.3).collect();
        let c = 2.5;
        let combined: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let ra = apply_rhs(&spec, &fields_of(&[(Field::U, a)]), Field::U).unwrap();
        let rb = apply_rhs(&spec, &fields_of(&[(Field::U, b)]), Field::U).unwrap();
        let rc = apply_rhs(&spec, &fields_of(&[(Field::U, combined)]), Field::U).unwrap();
        for i in 0..8 {
            assert!((rc[i] - (ra[i] + c * rb[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_field_is_reported() {
        let spec = rhs_spec_wave(0.1);
        let f = fields_of(&[(Field::P, vec![0.0; 4])]);
        assert!(matches!(
            apply_rhs(&spec, &f, Field::P),
            Err(Error::MissingField(Field::Q))
        ));
    }

    #[test]
    fn oversized_shift_rejected() {
        let mut spec = RhsSpec::new();
        let err = spec.add_term(
            Field::U,
            RhsTerm {
                coeff: 1.0,
                shift: 3,
                source: Field::U,
                diag: None,
            },
        );
        assert!(err.is_err());
    }
}
