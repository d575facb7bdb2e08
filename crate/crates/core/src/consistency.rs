//! Classical compatibility residuals for multi-time dynamics.
//!
//! A family of Lagrangians `L_i(qdot_i, q_i; t1..tN)` admits a
//! path-independent action on the space of time variables exactly when the
//! cross-derivatives match: `dL_j/dt_i = dL_i/dt_j` for all `i != j`.
//! The Hamiltonian counterpart replaces the time partials with
//! `-dH_i/dt_j + dH_j/dt_i - {H_i, H_j}` where the braces are the Poisson
//! bracket over the full phase space. Both residuals are evaluated here by
//! central finite differences on caller-supplied black-box callables, and
//! the action itself can be integrated along sampled trajectories to test
//! path invariance directly.

use std::sync::Arc;

use thiserror::Error;

use crate::timepaths::{StaircasePath, TimePoint};

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `L_i(qdot_i, q_i, t)`.
pub type LagrangianFn = Arc<dyn Fn(f64, f64, &TimePoint) -> f64 + Send + Sync>;
/// `H_i(q, p, t)` over the full phase space.
pub type HamiltonianCallable = Arc<dyn Fn(&[f64], &[f64], &TimePoint) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum ConsistencyError {
    #[error("particle index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("residual indices must differ")]
    EqualIndices,
    #[error("state arrays must carry one entry per particle: got {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("callable returned a non-finite value")]
    NonFiniteValue,
    #[error("finite-difference step must be positive, got {0}")]
    BadFdStep(f64),
    #[error("trajectory needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("trajectory parameter must be strictly increasing")]
    NonMonotoneParameter,
    #[error("trajectory samples disagree in dimension")]
    InconsistentDimensions,
}

/// N Lagrangians, one per particle.
#[derive(Clone)]
pub struct LagrangianFamily {
    members: Vec<LagrangianFn>,
}

impl LagrangianFamily {
    pub fn new(members: Vec<LagrangianFn>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Evaluate member `i` (1-based).
    pub fn eval(&self, i: usize, qdot: f64, q: f64, t: &TimePoint) -> f64 {
        (self.members[i - 1])(qdot, q, t)
    }
}

/// N Hamiltonians over a shared 2N-dimensional phase space.
#[derive(Clone)]
pub struct HamiltonianFamily {
    members: Vec<HamiltonianCallable>,
}

impl HamiltonianFamily {
    pub fn new(members: Vec<HamiltonianCallable>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn eval(&self, i: usize, q: &[f64], p: &[f64], t: &TimePoint) -> f64 {
        (self.members[i - 1])(q, p, t)
    }
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<(), ConsistencyError> {
    if i == 0 || i > n {
        return Err(ConsistencyError::IndexOutOfRange(i, n));
    }
    if j == 0 || j > n {
        return Err(ConsistencyError::IndexOutOfRange(j, n));
    }
    if i == j {
        return Err(ConsistencyError::EqualIndices);
    }
    Ok(())
}

fn check_finite(v: f64) -> Result<f64, ConsistencyError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConsistencyError::NonFiniteValue)
    }
}

/// Cross-derivative residual `dL_j/dt_i - dL_i/dt_j` at a phase point.
///
/// Only explicit time dependence is differentiated: when a coupling like
/// `k q1 q2(t2)` is intended, the second coordinate must be supplied as a
/// function of `t2` inside the callable.
pub fn lagrangian_curvature(
    family: &LagrangianFamily,
    i: usize,
    j: usize,
    qdots: &[f64],
    qs: &[f64],
    t: &TimePoint,
    fd_step: f64,
) -> Result<f64, ConsistencyError> {
    let n = family.len();
    check_pair(i, j, n)?;
    if qdots.len() != n || qs.len() != n {
        return Err(ConsistencyError::StateLength { got: qdots.len().min(qs.len()), expected: n });
    }
    if fd_step.is_nan() || fd_step <= 0.0 {
        return Err(ConsistencyError::BadFdStep(fd_step));
    }
    let partial = |of: usize, wrt: usize| -> Result<f64, ConsistencyError> {
        let plus = check_finite(family.eval(
            of,
            qdots[of - 1],
            qs[of - 1],
            &t.advanced(wrt, fd_step),
        ))?;
        let minus = check_finite(family.eval(
            of,
            qdots[of - 1],
            qs[of - 1],
            &t.advanced(wrt, -fd_step),
        ))?;
        Ok((plus - minus) / (2.0 * fd_step))
    };
    Ok(partial(j, i)? - partial(i, j)?)
}

/// Poisson-bracket residual `-dH_i/dt_j + dH_j/dt_i - {H_i, H_j}`.
///
/// The bracket runs over every `(q_k, p_k)` pair; all derivatives are
/// central differences with step `fd_step`.
pub fn poisson_residual(
    family: &HamiltonianFamily,
    i: usize,
    j: usize,
    qs: &[f64],
    ps: &[f64],
    t: &TimePoint,
    fd_step: f64,
) -> Result<f64, ConsistencyError> {
    let n = family.len();
    check_pair(i, j, n)?;
    if qs.len() != ps.len() {
        return Err(ConsistencyError::StateLength { got: ps.len(), expected: qs.len() });
    }
    if fd_step.is_nan() || fd_step <= 0.0 {
        return Err(ConsistencyError::BadFdStep(fd_step));
    }

    let time_partial = |of: usize, wrt: usize| -> Result<f64, ConsistencyError> {
        let plus = check_finite(family.eval(of, qs, ps, &t.advanced(wrt, fd_step)))?;
        let minus = check_finite(family.eval(of, qs, ps, &t.advanced(wrt, -fd_step)))?;
        Ok((plus - minus) / (2.0 * fd_step))
    };
    let phase_partial = |of: usize, coord: usize, momentum: bool| -> Result<f64, ConsistencyError> {
        let mut qv = qs.to_vec();
        let mut pv = ps.to_vec();
        {
            let target = if momentum { &mut pv[coord] } else { &mut qv[coord] };
            *target += fd_step;
        }
        let plus = check_finite(family.eval(of, &qv, &pv, t))?;
        {
            let target = if momentum { &mut pv[coord] } else { &mut qv[coord] };
            *target -= 2.0 * fd_step;
        }
        let minus = check_finite(family.eval(of, &qv, &pv, t))?;
        Ok((plus - minus) / (2.0 * fd_step))
    };

    let mut bracket = 0.0;
    for k in 0..qs.len() {
        let dhi_dq = phase_partial(i, k, false)?;
        let dhj_dp = phase_partial(j, k, true)?;
        let dhi_dp = phase_partial(i, k, true)?;
        let dhj_dq = phase_partial(j, k, false)?;
        bracket += dhi_dq * dhj_dp - dhi_dp * dhj_dq;
    }
    Ok(-time_partial(i, j)? + time_partial(j, i)? - bracket)
}

/// One sample of a trajectory through configuration and time space.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub sigma: f64,
    pub q: Vec<f64>,
    pub t: TimePoint,
}

/// A trajectory sampled along a curve parameter `sigma`.
#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    samples: Vec<TrajectorySample>,
}

impl SampledTrajectory {
    pub fn new(samples: Vec<TrajectorySample>) -> Result<Self, ConsistencyError> {
        if samples.len() < 3 {
            return Err(ConsistencyError::TooFewSamples(samples.len()));
        }
        let dim = samples[0].q.len();
        for w in samples.windows(2) {
            if w[1].sigma <= w[0].sigma {
                return Err(ConsistencyError::NonMonotoneParameter);
            }
        }
        for s in &samples {
            if s.q.len() != dim || s.t.dim() != dim {
                return Err(ConsistencyError::InconsistentDimensions);
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples[0].q.len()
    }
}

/// Sample a staircase path in time together with per-axis coordinate
/// trajectories `q_i = coordinate[i](t_i)`, using `samples_per_leg`
/// subdivisions of every leg. Convenient input for
/// [`action_along_path`] when comparing two staircases that share their
/// per-axis motion.
pub fn staircase_trajectory(
    path: &StaircasePath,
    start: &TimePoint,
    coordinates: &[Arc<dyn Fn(f64) -> f64 + Send + Sync>],
    samples_per_leg: usize,
) -> Result<SampledTrajectory, ConsistencyError> {
    assert!(samples_per_leg >= 1);
    let dim = start.dim();
    if coordinates.len() != dim {
        return Err(ConsistencyError::StateLength { got: coordinates.len(), expected: dim });
    }
    let mut samples = Vec::new();
    let mut now = start.clone();
    let mut sigma = 0.0;
    let push = |samples: &mut Vec<TrajectorySample>, sigma: f64, t: &TimePoint| {
        let q = (0..dim).map(|a| coordinates[a](t.component(a + 1))).collect();
        samples.push(TrajectorySample { sigma, q, t: t.clone() });
    };
    push(&mut samples, sigma, &now);
    for step in path.steps() {
        for s in 1..=samples_per_leg {
            let frac = s as f64 / samples_per_leg as f64;
            let t = now.advanced(step.axis, step.dt * frac);
            push(&mut samples, sigma + frac, &t);
        }
        now = now.advanced(step.axis, step.dt);
        sigma += 1.0;
    }
    SampledTrajectory::new(samples)
}

/// Action integral `sum_i int L_i (dt_i/dsigma) dsigma` along a sampled
/// trajectory, by trapezoidal quadrature with centered-difference
/// derivatives of the samples (one-sided at the ends).
///
/// On legs where an axis stalls (`dt_i/dsigma = 0`) the corresponding term
/// carries zero weight and its velocity argument is taken as 0.
pub fn action_along_path(
    family: &LagrangianFamily,
    trajectory: &SampledTrajectory,
) -> Result<f64, ConsistencyError> {
    let dim = trajectory.dim();
    if family.len() != dim {
        return Err(ConsistencyError::StateLength { got: family.len(), expected: dim });
    }
    let samples = trajectory.samples();
    let m = samples.len();

    // Centered derivative of a scalar view over the sigma samples.
    let derivative = |k: usize, value: &dyn Fn(usize) -> f64| -> f64 {
        if k == 0 {
            (value(1) - value(0)) / (samples[1].sigma - samples[0].sigma)
        } else if k == m - 1 {
            (value(m - 1) - value(m - 2)) / (samples[m - 1].sigma - samples[m - 2].sigma)
        } else {
            (value(k + 1) - value(k - 1)) / (samples[k + 1].sigma - samples[k - 1].sigma)
        }
    };

    let mut integrand = Vec::with_capacity(m);
    for k in 0..m {
        let mut lambda = 0.0;
        for axis in 1..=dim {
            let dt_dsigma = derivative(k, &|idx| samples[idx].t.component(axis));
            if dt_dsigma == 0.0 {
                continue;
            }
            let dq_dsigma = derivative(k, &|idx| samples[idx].q[axis - 1]);
            let qdot = dq_dsigma / dt_dsigma;
            let l = check_finite(family.eval(
                axis,
                qdot,
                samples[k].q[axis - 1],
                &samples[k].t,
            ))?;
            lambda += l * dt_dsigma;
        }
        integrand.push(lambda);
    }

    let mut action = 0.0;
    for k in 0..(m - 1) {
        let dsigma = samples[k + 1].sigma - samples[k].sigma;
        action += 0.5 * (integrand[k] + integrand[k + 1]) * dsigma;
    }
    Ok(action)
}
