//! Cost functions for the variational time steps, assembled as weighted sums
//! of engine products `Re <bra| D shift^s |ket>`.
//!
//! Each builder expands its defining squared-norm residual into products of
//! the trial state with itself and with the frozen states, dropping the
//! trial-independent constant. The dropped constant is still computed
//! classically from the frozen vectors and exposed for diagnostics: the
//! identity `cf(trial) + constant = ||residual||^2` is the oracle every cost
//! function is tested against.

use std::collections::BTreeMap;

use crate::ansatz::ParamVector;
use crate::engine::{Engine, ProductRequest};
use crate::error::{Error, Result};
use crate::grid::{wrap_index, Domain};
use crate::rhs::{apply_rhs, Field, RhsSpec};

/// Which copy of a field a frozen state holds: the previous time level
/// (tilde) or the intermediate Euler stage (star).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Tilde,
    Star,
}

/// Either the trial state under optimization or a frozen state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum StateRef {
    Trial,
    Frozen(Field, Stage),
}

/// One dispatched product with its scalar weight.
#[derive(Debug, Clone, Copy)]
struct ProductTerm {
    coeff: f64,
    bra: StateRef,
    ket: StateRef,
    shift: i64,
    diag: Option<(Field, Stage)>,
}

/// A frozen state: parameters plus the cached physical vector.
#[derive(Debug, Clone)]
pub struct FrozenState {
    pub params: ParamVector,
    pub vector: Vec<f64>,
}

/// Everything a cost function closes over: the domain, the right-hand-side
/// spec, the Crank-Nicolson coupling `alpha` when applicable, and the frozen
/// states known before minimization.
#[derive(Debug, Clone)]
pub struct CostContext {
    domain: Domain,
    spec: RhsSpec,
    alpha: Option<f64>,
    frozen: BTreeMap<(Field, Stage), FrozenState>,
    modes: Option<usize>,
}

impl CostContext {
    pub fn new(domain: Domain, spec: RhsSpec) -> Self {
        Self {
            domain,
            spec,
            alpha: None,
            frozen: BTreeMap::new(),
            modes: None,
        }
    }

    /// Context for the specialized advection cost with `alpha = 0.25 v dt/dx`.
    pub fn with_alpha(domain: Domain, spec: RhsSpec, alpha: f64) -> Self {
        Self {
            alpha: Some(alpha),
            ..Self::new(domain, spec)
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn spec(&self) -> &RhsSpec {
        &self.spec
    }

    /// Caches `params` (and its evaluated vector) as the frozen copy of
    /// `field` at `stage`. All frozen states must share one mode cutoff.
    pub fn freeze(&mut self, field: Field, stage: Stage, params: ParamVector) -> Result<()> {
        let m = params.mode_cutoff();
        match self.modes {
            None => self.modes = Some(m),
            Some(expect) if expect != m => {
                return Err(Error::Shape(format!(
                    "frozen state for {field} has cutoff {m}, expected {expect}"
                )))
            }
            _ => {}
        }
        let vector = params.evaluate(self.domain.n)?;
        self.frozen
            .insert((field, stage), FrozenState { params, vector });
        Ok(())
    }

    pub fn frozen(&self, field: Field, stage: Stage) -> Result<&FrozenState> {
        self.frozen
            .get(&(field, stage))
            .ok_or(Error::MissingField(field))
    }

    /// Mode cutoff shared by the frozen states (and required of the trial).
    pub fn modes(&self) -> Result<usize> {
        self.modes
            .ok_or_else(|| Error::Config("no frozen states in context".into()))
    }

    /// Physical vectors of all frozen fields at `stage`, for the classical
    /// evaluation of the dropped constants.
    fn stage_vectors(&self, stage: Stage) -> BTreeMap<Field, Vec<f64>> {
        self.frozen
            .iter()
            .filter(|((_, s), _)| *s == stage)
            .map(|((f, _), state)| (*f, state.vector.clone()))
            .collect()
    }

    fn rhs_of_stage(&self, stage: Stage, target: Field) -> Result<Vec<f64>> {
        apply_rhs(&self.spec, &self.stage_vectors(stage), target)
    }
}

/// A built cost function: a deterministic sequence of weighted products plus
/// the classically-computed constant the expansion dropped.
pub struct CostFunction<'c> {
    ctx: &'c CostContext,
    target: Field,
    terms: Vec<ProductTerm>,
    constant: f64,
    modes: usize,
}

impl<'c> CostFunction<'c> {
    /// Value of the cost at `trial`, dispatching every product through the
    /// engine (exact in SVF, sampled in SEF).
    pub fn evaluate(&self, trial: &ParamVector, engine: &mut Engine) -> Result<f64> {
        if trial.mode_cutoff() != self.modes {
            return Err(Error::Shape(format!(
                "trial cutoff {} does not match context cutoff {}",
                trial.mode_cutoff(),
                self.modes
            )));
        }
        let n = self.ctx.domain.n;
        let mut total = 0.0;
        for term in &self.terms {
            let bra = self.resolve(term.bra, trial)?;
            let ket = self.resolve(term.ket, trial)?;
            let diag = match term.diag {
                Some((f, s)) => Some(self.ctx.frozen(f, s)?.vector.as_slice()),
                None => None,
            };
            let req = ProductRequest {
                bra,
                ket,
                shift: term.shift,
                diag,
                n,
            };
            total += term.coeff * engine.product(&req)?;
        }
        Ok(total)
    }

    /// Same as [`CostFunction::evaluate`] on a packed real parameter vector.
    pub fn evaluate_packed(&self, dofs: &[f64], engine: &mut Engine) -> Result<f64> {
        let trial = ParamVector::unpack_real(dofs, self.modes)?;
        self.evaluate(&trial, engine)
    }

    /// The trial-independent constant dropped from the squared residual;
    /// `evaluate(trial) + constant()` is the residual norm itself in SVF mode.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn target(&self) -> Field {
        self.target
    }

    /// Number of products dispatched per evaluation.
    pub fn product_count(&self) -> usize {
        self.terms.len()
    }

    fn resolve<'a>(&'a self, state: StateRef, trial: &'a ParamVector) -> Result<&'a ParamVector> {
        match state {
            StateRef::Trial => Ok(trial),
            StateRef::Frozen(f, s) => Ok(&self.ctx.frozen(f, s)?.params),
        }
    }
}

/// Specialized Crank-Nicolson advection cost
/// `(1+2a^2)<u|u> + (-2+4a^2)Re<u|~u> + 4a Re<u|(+ - -)|~u>
///  - 2a^2 Re<u|+^2|u> - 2a^2 Re<u|(+^2 + -^2)|~u>`.
pub fn cf_cn_advection(ctx: &CostContext) -> Result<CostFunction<'_>> {
    let alpha = ctx
        .alpha
        .ok_or_else(|| Error::Config("advection cost needs alpha bound in context".into()))?;
    let tilde = StateRef::Frozen(Field::U, Stage::Tilde);
    let state = ctx.frozen(Field::U, Stage::Tilde)?;
    let a2 = alpha * alpha;
    let terms = vec![
        term(1.0 + 2.0 * a2, StateRef::Trial, StateRef::Trial, 0),
        term(-2.0 + 4.0 * a2, StateRef::Trial, tilde, 0),
        term(4.0 * alpha, StateRef::Trial, tilde, 1),
        term(-4.0 * alpha, StateRef::Trial, tilde, -1),
        term(-2.0 * a2, StateRef::Trial, StateRef::Trial, 2),
        term(-2.0 * a2, StateRef::Trial, tilde, 2),
        term(-2.0 * a2, StateRef::Trial, tilde, -2),
    ];

    // dropped constant: ||(I - alpha(+ - -)) ~u||^2
    let n = ctx.domain.n;
    let u = &state.vector;
    let constant = (0..n)
        .map(|i| {
            let b =
                u[i] - alpha * (u[wrap_index(i as i64 + 1, n)] - u[wrap_index(i as i64 - 1, n)]);
            b * b
        })
        .sum();

    Ok(CostFunction {
        ctx,
        target: Field::U,
        terms,
        constant,
        modes: ctx.modes()?,
    })
}

/// Generic Crank-Nicolson cost for a linear single-field right-hand side
/// `R = sum_k g_k shift^{s_k}`:
/// `<u|u> - 2Re<~u|u> - dt Re{<Ru|u> + <R~u|u> - <~u|Ru>}` plus the
/// quadratic pieces `dt^2/4 <Ru|Ru>` and `dt^2/2 Re<R~u|Ru>`, expanded into
/// shift products and merged by equal offsets.
pub fn cf_cn_generic(ctx: &CostContext) -> Result<CostFunction<'_>> {
    let targets: Vec<Field> = ctx.spec.targets().collect();
    let [target] = targets[..] else {
        return Err(Error::Config(
            "generic Crank-Nicolson cost supports a single evolved field".into(),
        ));
    };
    let terms = ctx.spec.terms(target)?;
    for t in terms {
        if t.diag.is_some() {
            return Err(Error::UnsupportedNonlinearity);
        }
        if t.source != target {
            return Err(Error::Config(
                "generic Crank-Nicolson cost cannot couple different fields".into(),
            ));
        }
        if t.shift.abs() > 1 {
            return Err(Error::Config(
                "generic Crank-Nicolson expansion is limited to nearest-neighbour stencils".into(),
            ));
        }
    }
    let state = ctx.frozen(target, Stage::Tilde)?;
    let dt = ctx.domain.dt;
    let tilde = StateRef::Frozen(target, Stage::Tilde);

    let mut raw: Vec<ProductTerm> = vec![
        term(1.0, StateRef::Trial, StateRef::Trial, 0),
        term(-2.0, StateRef::Trial, tilde, 0),
    ];
    for k in terms {
        // -dt Re<Ru|u>, -dt Re<R~u|u>, +dt Re<~u|Ru>, all moved onto the ket
        raw.push(term(
            -dt * k.coeff,
            StateRef::Trial,
            StateRef::Trial,
            -k.shift,
        ));
        raw.push(term(-dt * k.coeff, StateRef::Trial, tilde, k.shift));
        raw.push(term(dt * k.coeff, StateRef::Trial, tilde, -k.shift));
    }
    for k in terms {
        for l in terms {
            let quarter = 0.25 * dt * dt * k.coeff * l.coeff;
            raw.push(term(
                quarter,
                StateRef::Trial,
                StateRef::Trial,
                l.shift - k.shift,
            ));
            raw.push(term(
                2.0 * quarter,
                StateRef::Trial,
                tilde,
                k.shift - l.shift,
            ));
        }
    }

    // merge identical offsets; for <u|shift^s|u> the sign of s is immaterial
    let mut merged: BTreeMap<(StateRef, StateRef, i64), f64> = BTreeMap::new();
    for t in raw {
        let shift = if t.bra == StateRef::Trial && t.ket == StateRef::Trial {
            t.shift.abs()
        } else {
            t.shift
        };
        *merged.entry((t.bra, t.ket, shift)).or_insert(0.0) += t.coeff;
    }
    let products: Vec<ProductTerm> = merged
        .into_iter()
        .filter(|(_, coeff)| *coeff != 0.0)
        .map(|((bra, ket, shift), coeff)| ProductTerm {
            coeff,
            bra,
            ket,
            shift,
            diag: None,
        })
        .collect();

    // dropped constant: ||~u + dt/2 R~u||^2
    let rhs = ctx.rhs_of_stage(Stage::Tilde, target)?;
    let constant = state
        .vector
        .iter()
        .zip(&rhs)
        .map(|(u, r)| {
            let b = u + 0.5 * dt * r;
            b * b
        })
        .sum();

    Ok(CostFunction {
        ctx,
        target,
        terms: products,
        constant,
        modes: ctx.modes()?,
    })
}

/// First Euler-stage cost `<u*|u*> - 2Re<u*|~u> - 2dt Re<u*|~rhs>` with the
/// right-hand side expanded over the frozen tilde states.
pub fn cf_rk2a(ctx: &CostContext, target: Field) -> Result<CostFunction<'_>> {
    let state = ctx.frozen(target, Stage::Tilde)?;
    let dt = ctx.domain.dt;
    let mut terms = vec![
        term(1.0, StateRef::Trial, StateRef::Trial, 0),
        term(
            -2.0,
            StateRef::Trial,
            StateRef::Frozen(target, Stage::Tilde),
            0,
        ),
    ];
    for k in ctx.spec.terms(target)? {
        terms.push(ProductTerm {
            coeff: -2.0 * dt * k.coeff,
            bra: StateRef::Trial,
            ket: StateRef::Frozen(k.source, Stage::Tilde),
            shift: k.shift,
            diag: k.diag.map(|f| (f, Stage::Tilde)),
        });
    }

    // dropped constant: ||~u + dt ~rhs||^2
    let rhs = ctx.rhs_of_stage(Stage::Tilde, target)?;
    let constant = state
        .vector
        .iter()
        .zip(&rhs)
        .map(|(u, r)| (u + dt * r).powi(2))
        .sum();

    Ok(CostFunction {
        ctx,
        target,
        terms,
        constant,
        modes: ctx.modes()?,
    })
}

/// Second Euler-stage cost
/// `<u|u> - Re{<u|~u> + <u|u*>} - dt Re<u|rhs*>` with the right-hand side
/// expanded over the frozen starred states (a diagonal factor binds to the
/// starred field).
pub fn cf_rk2b(ctx: &CostContext, target: Field) -> Result<CostFunction<'_>> {
    let tilde = ctx.frozen(target, Stage::Tilde)?;
    let star = ctx.frozen(target, Stage::Star)?;
    let dt = ctx.domain.dt;
    let mut terms = vec![
        term(1.0, StateRef::Trial, StateRef::Trial, 0),
        term(
            -1.0,
            StateRef::Trial,
            StateRef::Frozen(target, Stage::Tilde),
            0,
        ),
        term(
            -1.0,
            StateRef::Trial,
            StateRef::Frozen(target, Stage::Star),
            0,
        ),
    ];
    for k in ctx.spec.terms(target)? {
        terms.push(ProductTerm {
            coeff: -dt * k.coeff,
            bra: StateRef::Trial,
            ket: StateRef::Frozen(k.source, Stage::Star),
            shift: k.shift,
            diag: k.diag.map(|f| (f, Stage::Star)),
        });
    }

    // dropped constant: ||(~u + u* + dt rhs*)/2||^2
    let rhs = ctx.rhs_of_stage(Stage::Star, target)?;
    let constant = tilde
        .vector
        .iter()
        .zip(&star.vector)
        .zip(&rhs)
        .map(|((u0, us), r)| (0.5 * (u0 + us + dt * r)).powi(2))
        .sum();

    Ok(CostFunction {
        ctx,
        target,
        terms,
        constant,
        modes: ctx.modes()?,
    })
}

fn term(coeff: f64, bra: StateRef, ket: StateRef, shift: i64) -> ProductTerm {
    ProductTerm {
        coeff,
        bra,
        ket,
        shift,
        diag: None,
    }
}
