//! One runner per experiment kind: build the inputs from the parameter
//! block, call into the library, and emit measured values plus pass/fail
//! checks.

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde_json::Value;

use multitime::consistency::{
    action_along_path, lagrangian_curvature, poisson_residual, staircase_trajectory,
    HamiltonianCallable, HamiltonianFamily, LagrangianFamily, LagrangianFn, DEFAULT_FD_STEP,
};
use multitime::evolution::{
    evolve_path, interaction_phase_discrepancy, loop_check, AxisDynamics,
};
use multitime::expr::{Bindings, Expr};
use multitime::kernels::{
    compose, delta_limit_check, forced_kernel, free_kernel, KernelSpec, QuadratureSpec,
};
use multitime::pathint::{convergence_study, SlicingSpec};
use multitime::timepaths::{enumerate_staircases, AxisStep, StaircasePath, TimePoint};
use multitime::wavegrid::{
    gaussian_packet, l2_distance, product_state, save_wavefield2, SpatialGrid, WaveField2,
};
use multitime::wilson::{
    curvature, loop_holonomy_deviation, matrix_from_rows, stokes_check, MatrixHamiltonian,
};

use crate::config::*;
use crate::report::{complex_value, matrix_value, Check, Outcome};

/// A failed run: `(code, message)`; codes are stable machine-readable
/// slugs, messages are free text.
pub type RunError = (String, String);

fn config_error(message: impl Into<String>) -> RunError {
    ("config".to_string(), message.into())
}

fn numeric_error(source: impl std::fmt::Display) -> RunError {
    ("numeric-failure".to_string(), source.to_string())
}

fn parse_params<T: serde::de::DeserializeOwned>(params: Value) -> Result<T, RunError> {
    serde_json::from_value(params).map_err(|e| config_error(format!("bad params: {e}")))
}

/// Dispatch on the experiment tag. Configuration problems (including
/// malformed parameter blocks) come back as the `config` code so the
/// caller can exit with status 2.
pub fn run_experiment(kind: &str, params: Value) -> Result<Outcome, RunError> {
    match kind {
        "kernel-eval" => kernel_eval(parse_params(params)?),
        "compose-check" => compose_check(parse_params(params)?),
        "delta-limit" => delta_limit(parse_params(params)?),
        "staircase-invariance" => staircase_invariance(parse_params(params)?),
        "loop-check" => loop_check_experiment(parse_params(params)?),
        "interaction-discrepancy" => interaction_discrepancy(parse_params(params)?),
        "curvature" => curvature_experiment(parse_params(params)?),
        "holonomy" => holonomy(parse_params(params)?),
        "stokes" => stokes(parse_params(params)?),
        "lagrangian-residual" => lagrangian_residual(parse_params(params)?),
        "poisson-residual" => poisson_residual_experiment(parse_params(params)?),
        "action-invariance" => action_invariance(parse_params(params)?),
        "pathint-converge" => pathint_converge(parse_params(params)?),
        other => Err(config_error(format!("unknown experiment kind {other:?}"))),
    }
}

// --- shared builders -------------------------------------------------------

fn kernel_spec(cfg: &KernelCfg) -> KernelSpec {
    match cfg {
        KernelCfg::Free { mass } => KernelSpec::Free { mass: *mass },
        KernelCfg::ConstantForce { mass, force } => {
            KernelSpec::ConstantForce { mass: *mass, force: *force }
        }
    }
}

fn reference_kernel(cfg: &KernelCfg, q_f: f64, t_f: f64, q_i: f64, t_i: f64) -> Result<C64, RunError> {
    match cfg {
        KernelCfg::Free { mass } => free_kernel(q_f, t_f, q_i, t_i, *mass),
        KernelCfg::ConstantForce { mass, force } => {
            forced_kernel(q_f, t_f, q_i, t_i, *mass, *force)
        }
    }
    .map_err(numeric_error)
}

fn quadrature(cfg: &Option<QuadratureCfg>) -> QuadratureSpec {
    let mut quad = QuadratureSpec::default();
    if let Some(c) = cfg {
        if let Some(n) = c.n_points {
            quad.n_points = n;
        }
        if let Some(ladder) = &c.epsilon_ladder {
            quad.epsilon_ladder = ladder.clone();
        }
        if let Some(tol) = c.rel_tolerance {
            quad.rel_tolerance = tol;
        }
    }
    quad
}

fn dynamics(cfg: &DynamicsCfg) -> AxisDynamics {
    let mut dynamics = match cfg.coupling {
        Some(k) => AxisDynamics::bilinear_coupling(cfg.mass1, cfg.mass2, k),
        None => AxisDynamics::free(cfg.mass1, cfg.mass2),
    };
    if let Some(dt_max) = cfg.dt_max {
        dynamics = dynamics.with_dt_max(dt_max);
    }
    dynamics
}

fn initial_field(
    grid_cfg: &Option<GridCfg>,
    packets: &Option<[PacketCfg; 2]>,
) -> Result<WaveField2, RunError> {
    let grid_cfg = grid_cfg.clone().unwrap_or_default();
    let grid = SpatialGrid::centered(grid_cfg.extent, grid_cfg.points)
        .map_err(|e| config_error(e.to_string()))?;
    let defaults = [PacketCfg::default(), PacketCfg::default()];
    let packets = packets.as_ref().unwrap_or(&defaults);
    let psi1 = gaussian_packet(&grid, packets[0].center, packets[0].width, packets[0].momentum)
        .map_err(|e| config_error(e.to_string()))?;
    let psi2 = gaussian_packet(&grid, packets[1].center, packets[1].width, packets[1].momentum)
        .map_err(|e| config_error(e.to_string()))?;
    Ok(product_state(&psi1, &psi2))
}

fn parse_path(text: &str) -> Result<StaircasePath, RunError> {
    text.parse().map_err(|e: multitime::timepaths::PathError| config_error(e.to_string()))
}

fn pauli_matrix(which: &str) -> Result<Array2<C64>, RunError> {
    let entries = match which {
        "x" => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        "y" => vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        "z" => vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        other => return Err(config_error(format!("unknown pauli matrix {other:?}"))),
    };
    Ok(Array2::from_shape_vec((2, 2), entries).expect("2x2 shape"))
}

fn hamiltonians(cfgs: &[HamiltonianCfg]) -> Result<Vec<MatrixHamiltonian>, RunError> {
    cfgs.iter()
        .map(|cfg| match cfg {
            HamiltonianCfg::Constant { matrix } => {
                let m = matrix_from_rows(matrix).map_err(|e| config_error(e.to_string()))?;
                MatrixHamiltonian::constant(m).map_err(|e| config_error(e.to_string()))
            }
            HamiltonianCfg::LinearInTime { axis, matrix } => {
                let m = matrix_from_rows(matrix).map_err(|e| config_error(e.to_string()))?;
                let dim = m.nrows();
                let axis = *axis;
                Ok(MatrixHamiltonian::time_dependent(dim, move |t: &TimePoint| {
                    m.mapv(|v| v * t.component(axis))
                }))
            }
            HamiltonianCfg::Pauli { which, scale } => {
                let m = pauli_matrix(which)?.mapv(|v| v * *scale);
                MatrixHamiltonian::constant(m).map_err(|e| config_error(e.to_string()))
            }
        })
        .collect()
}

/// Build a Lagrangian family from expressions over `qdot_i`, `q_i`,
/// `t1..tN`; the other particles' coordinates are frozen at the supplied
/// evaluation state.
fn lagrangian_family(
    texts: &[String],
    frozen_qdot: Vec<f64>,
    frozen_q: Vec<f64>,
) -> Result<LagrangianFamily, RunError> {
    let n = texts.len();
    let mut members: Vec<LagrangianFn> = Vec::with_capacity(n);
    for (idx, text) in texts.iter().enumerate() {
        let expr: Expr = text
            .parse()
            .map_err(|e| config_error(format!("lagrangian {}: {e}", idx + 1)))?;
        let frozen_qdot = frozen_qdot.clone();
        let frozen_q = frozen_q.clone();
        members.push(Arc::new(move |qdot: f64, q: f64, t: &TimePoint| {
            let mut qdots = frozen_qdot.clone();
            let mut qs = frozen_q.clone();
            if idx < qdots.len() {
                qdots[idx] = qdot;
                qs[idx] = q;
            }
            expr.eval(&Bindings { q: &qs, p: &[], qdot: &qdots, t: t.components() })
                .unwrap_or(f64::NAN)
        }));
    }
    Ok(LagrangianFamily::new(members))
}

fn hamiltonian_family(texts: &[String]) -> Result<HamiltonianFamily, RunError> {
    let mut members: Vec<HamiltonianCallable> = Vec::with_capacity(texts.len());
    for (idx, text) in texts.iter().enumerate() {
        let expr: Expr = text
            .parse()
            .map_err(|e| config_error(format!("hamiltonian {}: {e}", idx + 1)))?;
        members.push(Arc::new(move |q: &[f64], p: &[f64], t: &TimePoint| {
            expr.eval(&Bindings { q, p, qdot: &[], t: t.components() }).unwrap_or(f64::NAN)
        }));
    }
    Ok(HamiltonianFamily::new(members))
}

fn dump_field(field: &WaveField2, cfg: &Option<FieldDumpCfg>) -> Result<(), RunError> {
    if let Some(dump) = cfg {
        save_wavefield2(field, Path::new(&dump.data), Path::new(&dump.header), dump.encoding)
            .map_err(|e| ("io".to_string(), e.to_string()))?;
    }
    Ok(())
}

fn results_map(entries: Vec<(&str, Value)>) -> Value {
    let mut map = serde_json::Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

// --- runners ---------------------------------------------------------------

fn kernel_eval(p: KernelEvalParams) -> Result<Outcome, RunError> {
    let value = reference_kernel(&p.kernel, p.q_f, p.t_f, p.q_i, p.t_i)?;
    let results = results_map(vec![
        ("value", complex_value(value)),
        ("magnitude", Value::from(value.norm())),
        ("phase", Value::from(value.arg())),
    ]);
    let checks = vec![Check::finite("kernel value is finite", value.norm())];
    Ok(Outcome { results, checks })
}

fn compose_check(p: ComposeCheckParams) -> Result<Outcome, RunError> {
    let spec = kernel_spec(&p.kernel);
    let quad = quadrature(&p.quadrature);
    let composed = compose(&spec, &spec, p.q_f, p.t_f, p.t_mid, p.q_i, p.t_i, &quad)
        .map_err(numeric_error)?;
    let reference = reference_kernel(&p.kernel, p.q_f, p.t_f, p.q_i, p.t_i)?;
    let rel_error = (composed - reference).norm() / reference.norm();
    let results = results_map(vec![
        ("composed", complex_value(composed)),
        ("reference", complex_value(reference)),
        ("rel_error", Value::from(rel_error)),
    ]);
    let checks = vec![Check::less(
        "composition matches the single-interval kernel",
        rel_error,
        p.tolerance,
    )];
    Ok(Outcome { results, checks })
}

fn delta_limit(p: DeltaLimitParams) -> Result<Outcome, RunError> {
    let spec = kernel_spec(&p.kernel);
    let f: Box<dyn Fn(f64) -> C64> = match p.test_function.as_str() {
        "gaussian" => Box::new(|q: f64| C64::new((-q * q).exp(), 0.0)),
        "one" => Box::new(|_| C64::new(1.0, 0.0)),
        "linear" => Box::new(|q: f64| C64::new(q, 0.0)),
        other => return Err(config_error(format!("unknown test function {other:?}"))),
    };
    let target = match p.test_function.as_str() {
        "gaussian" => (-p.q_eval * p.q_eval).exp(),
        "one" => 1.0,
        _ => p.q_eval,
    };
    let rows =
        delta_limit_check(&spec, f.as_ref(), p.q_eval, &p.dt_ladder).map_err(numeric_error)?;

    let mut row_values = Vec::new();
    let mut errors = Vec::new();
    for (dt, value) in &rows {
        errors.push((value.norm() - target.abs()).abs());
        row_values.push(results_map(vec![
            ("dt", Value::from(*dt)),
            ("value", complex_value(*value)),
            ("magnitude_error", Value::from(*errors.last().unwrap())),
        ]));
    }
    let inversions = errors.windows(2).filter(|w| w[1] >= w[0]).count();
    let final_error = *errors.last().unwrap();
    let results = results_map(vec![
        ("rows", Value::from(row_values)),
        ("final_error", Value::from(final_error)),
    ]);
    let checks = vec![
        Check::less("magnitude error decreases monotonically (inversions)", inversions as f64, 0.5),
        Check::less("final magnitude error", final_error, p.final_tolerance),
    ];
    Ok(Outcome { results, checks })
}

fn staircase_invariance(p: StaircaseInvarianceParams) -> Result<Outcome, RunError> {
    let field = initial_field(&p.grid, &p.packets)?;
    let dyn_ = dynamics(&p.dynamics);
    let paths = enumerate_staircases(p.steps_axis1, p.steps_axis2, p.duration_axis1, p.duration_axis2)
        .map_err(|e| config_error(e.to_string()))?;
    let finals: Vec<WaveField2> = paths
        .iter()
        .map(|path| evolve_path(&field, path, &dyn_))
        .collect::<Result<_, _>>()
        .map_err(numeric_error)?;
    let mut max_distance = 0.0f64;
    for i in 0..finals.len() {
        for j in (i + 1)..finals.len() {
            let d = l2_distance(&finals[i], &finals[j]).map_err(numeric_error)?;
            max_distance = max_distance.max(d);
        }
    }
    dump_field(&finals[0], &p.dump_field)?;
    let results = results_map(vec![
        ("path_count", Value::from(paths.len() as u64)),
        ("max_pairwise_l2", Value::from(max_distance)),
    ]);
    let checks =
        vec![Check::less("staircase orderings agree pairwise", max_distance, p.tolerance)];
    Ok(Outcome { results, checks })
}

fn loop_check_experiment(p: LoopCheckParams) -> Result<Outcome, RunError> {
    let field = initial_field(&p.grid, &p.packets)?;
    let dyn_ = dynamics(&p.dynamics);
    let path = parse_path(&p.path)?;
    let report = loop_check(&field, &path, &dyn_).map_err(numeric_error)?;
    dump_field(&report.final_field, &p.dump_field)?;
    let results = results_map(vec![
        ("l2_deviation", Value::from(report.l2_discrepancy)),
        ("aligned_deviation", Value::from(report.aligned_discrepancy)),
        ("phase", Value::from(report.phase)),
    ]);
    let checks = vec![match p.expect {
        Expectation::Trivial => {
            Check::less("loop returns the initial field", report.l2_discrepancy, p.tolerance)
        }
        Expectation::Nontrivial => {
            Check::greater("loop holonomy is nontrivial", report.l2_discrepancy, p.tolerance)
        }
    }];
    Ok(Outcome { results, checks })
}

fn interaction_discrepancy(p: InteractionDiscrepancyParams) -> Result<Outcome, RunError> {
    let closed_form = interaction_phase_discrepancy(
        p.coupling,
        p.mass,
        p.q1_initial,
        p.q1_final,
        p.q2_initial,
        p.q2_final,
        p.dt1,
    );
    // The corner kernels differ by the spectator-frozen force phase; the
    // free factors cancel in the ratio.
    let lower = forced_kernel(
        p.q1_final,
        p.dt1,
        p.q1_initial,
        0.0,
        p.mass,
        p.coupling * p.q2_initial,
    )
    .map_err(numeric_error)?;
    let upper = forced_kernel(
        p.q1_final,
        p.dt1,
        p.q1_initial,
        0.0,
        p.mass,
        p.coupling * p.q2_final,
    )
    .map_err(numeric_error)?;
    let kernel_measured = (upper / lower).arg();

    let mut checks = vec![Check::within(
        "kernel-route phase agrees with the closed form",
        kernel_measured,
        closed_form,
        1e-6,
    )];
    if let Some(expected) = p.expected {
        checks.push(Check::within("phase matches expected value", closed_form, expected, p.tolerance));
    }
    let results = results_map(vec![
        ("closed_form", Value::from(closed_form)),
        ("kernel_measured", Value::from(kernel_measured)),
    ]);
    Ok(Outcome { results, checks })
}

fn curvature_experiment(p: CurvatureParams) -> Result<Outcome, RunError> {
    let hams = hamiltonians(&p.hamiltonians)?;
    let at = TimePoint::new(p.at.clone());
    if at.dim() != hams.len() {
        return Err(config_error("`at` must carry one entry per hamiltonian"));
    }
    let fd = p.fd_step.unwrap_or(1e-5);
    let f = curvature(&hams, p.j, p.k, &at, fd).map_err(numeric_error)?;
    let norm = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut checks = vec![Check::finite("curvature is finite", norm)];
    if let Some(expected_rows) = &p.expected {
        let expected = matrix_from_rows(expected_rows).map_err(|e| config_error(e.to_string()))?;
        if expected.nrows() != f.nrows() {
            return Err(config_error("expected matrix dimension mismatch"));
        }
        let diff = (&f - &expected).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        checks.push(Check::less(
            "curvature matches expected matrix",
            diff,
            p.tolerance.unwrap_or(1e-8),
        ));
    }
    let results = results_map(vec![
        ("curvature", matrix_value(&f)),
        ("frobenius_norm", Value::from(norm)),
    ]);
    Ok(Outcome { results, checks })
}

fn holonomy(p: HolonomyParams) -> Result<Outcome, RunError> {
    let hams = hamiltonians(&p.hamiltonians)?;
    let path = parse_path(&p.path)?;
    let deviation =
        loop_holonomy_deviation(&hams, &path, p.substeps).map_err(numeric_error)?;
    let results = results_map(vec![("deviation", Value::from(deviation))]);
    let checks = vec![match p.expect {
        Expectation::Trivial => Check::less("loop holonomy is trivial", deviation, p.tolerance),
        Expectation::Nontrivial => {
            Check::greater("loop holonomy is nontrivial", deviation, p.tolerance)
        }
    }];
    Ok(Outcome { results, checks })
}

fn stokes(p: StokesParams) -> Result<Outcome, RunError> {
    let hams = hamiltonians(&p.hamiltonians)?;
    let (first, second) = match p.axis_first {
        1 => ((1, p.eps1), (2, p.eps2)),
        2 => ((2, p.eps2), (1, p.eps1)),
        other => return Err(config_error(format!("axis_first must be 1 or 2, got {other}"))),
    };
    let rect = StaircasePath::new(vec![
        AxisStep::new(first.0, first.1),
        AxisStep::new(second.0, second.1),
        AxisStep::new(first.0, -first.1),
        AxisStep::new(second.0, -second.1),
    ]);
    let check = stokes_check(&hams, &rect, p.substeps).map_err(numeric_error)?;
    let results = results_map(vec![
        ("lhs", matrix_value(&check.lhs)),
        ("rhs", matrix_value(&check.rhs)),
        ("residual", Value::from(check.residual)),
    ]);
    let checks = vec![Check::less(
        "holonomy log matches the curvature flux",
        check.residual,
        p.tolerance,
    )];
    Ok(Outcome { results, checks })
}

fn lagrangian_residual(p: LagrangianResidualParams) -> Result<Outcome, RunError> {
    let n = p.lagrangians.len();
    if p.qdot.len() != n || p.q.len() != n || p.t.len() != n {
        return Err(config_error("qdot, q, t must carry one entry per lagrangian"));
    }
    let family = lagrangian_family(&p.lagrangians, p.qdot.clone(), p.q.clone())?;
    let residual = lagrangian_curvature(
        &family,
        p.i,
        p.j,
        &p.qdot,
        &p.q,
        &TimePoint::new(p.t.clone()),
        p.fd_step.unwrap_or(DEFAULT_FD_STEP),
    )
    .map_err(numeric_error)?;
    let mut checks = vec![Check::finite("residual is finite", residual)];
    if let Some(expected) = p.expected {
        checks.push(Check::within(
            "residual matches expected value",
            residual,
            expected,
            p.tolerance.unwrap_or(1e-5),
        ));
    }
    let results = results_map(vec![("residual", Value::from(residual))]);
    Ok(Outcome { results, checks })
}

fn poisson_residual_experiment(p: PoissonResidualParams) -> Result<Outcome, RunError> {
    let n = p.hamiltonians.len();
    if p.q.len() != p.p.len() || p.t.len() != n {
        return Err(config_error("q and p must match, t must carry one entry per hamiltonian"));
    }
    let family = hamiltonian_family(&p.hamiltonians)?;
    let residual = poisson_residual(
        &family,
        p.i,
        p.j,
        &p.q,
        &p.p,
        &TimePoint::new(p.t.clone()),
        p.fd_step.unwrap_or(DEFAULT_FD_STEP),
    )
    .map_err(numeric_error)?;
    let mut checks = vec![Check::finite("residual is finite", residual)];
    if let Some(expected) = p.expected {
        checks.push(Check::within(
            "residual matches expected value",
            residual,
            expected,
            p.tolerance.unwrap_or(1e-5),
        ));
    }
    let results = results_map(vec![("residual", Value::from(residual))]);
    Ok(Outcome { results, checks })
}

fn action_invariance(p: ActionInvarianceParams) -> Result<Outcome, RunError> {
    let n = p.lagrangians.len();
    if p.velocities.len() != n {
        return Err(config_error("velocities must carry one entry per lagrangian"));
    }
    let family = lagrangian_family(&p.lagrangians, vec![0.0; n], vec![0.0; n])?;
    let coords: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>> = p
        .velocities
        .iter()
        .map(|&v| {
            let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |t| v * t);
            f
        })
        .collect();
    let path_a = parse_path(&p.path_a)?;
    let path_b = parse_path(&p.path_b)?;
    let start = TimePoint::origin(n);
    let traj_a = staircase_trajectory(&path_a, &start, &coords, p.samples_per_leg)
        .map_err(numeric_error)?;
    let traj_b = staircase_trajectory(&path_b, &start, &coords, p.samples_per_leg)
        .map_err(numeric_error)?;
    let action_a = action_along_path(&family, &traj_a).map_err(numeric_error)?;
    let action_b = action_along_path(&family, &traj_b).map_err(numeric_error)?;
    let results = results_map(vec![
        ("action_a", Value::from(action_a)),
        ("action_b", Value::from(action_b)),
        ("difference", Value::from(action_a - action_b)),
    ]);
    let checks = vec![Check::within(
        "actions agree across the two time paths",
        action_a,
        action_b,
        p.tolerance,
    )];
    Ok(Outcome { results, checks })
}

fn pathint_converge(p: PathintConvergeParams) -> Result<Outcome, RunError> {
    let potential: Box<dyn Fn(f64) -> f64> = match &p.potential {
        PotentialCfg::Zero => Box::new(|_| 0.0),
        PotentialCfg::Linear { force } => {
            let force = *force;
            Box::new(move |q: f64| -force * q)
        }
    };
    let reference = match (p.reference, &p.potential) {
        (ReferenceKind::ClosedForm, PotentialCfg::Zero) => {
            Some(free_kernel(p.q_f, p.t_f, p.q_i, p.t_i, p.mass).map_err(numeric_error)?)
        }
        (ReferenceKind::ClosedForm, PotentialCfg::Linear { force }) => Some(
            forced_kernel(p.q_f, p.t_f, p.q_i, p.t_i, p.mass, *force).map_err(numeric_error)?,
        ),
        (ReferenceKind::SelfReference, _) => None,
    };
    let rows = convergence_study(
        potential.as_ref(),
        p.mass,
        p.q_f,
        p.t_f,
        p.q_i,
        p.t_i,
        &p.n_list,
        reference,
        &SlicingSpec::new(1),
    )
    .map_err(numeric_error)?;

    let mut row_values = Vec::new();
    for row in &rows {
        row_values.push(results_map(vec![
            ("n_slices", Value::from(row.n_slices as u64)),
            ("value", complex_value(row.value)),
            ("abs_error", Value::from(row.abs_error)),
            ("rel_error", Value::from(row.rel_error)),
        ]));
    }
    let mut checks = Vec::new();
    if let Some(tolerance) = p.tolerance {
        let worst = rows.iter().map(|r| r.rel_error).fold(0.0f64, f64::max);
        checks.push(Check::less("all relative errors below tolerance", worst, tolerance));
    }
    if let Some([lo, hi]) = p.ratio_range {
        for w in rows.windows(2) {
            let ratio = w[0].rel_error / w[1].rel_error.max(f64::MIN_POSITIVE);
            checks.push(Check {
                name: format!("error ratio n={} -> n={}", w[0].n_slices, w[1].n_slices),
                measured: ratio,
                threshold: hi,
                comparison: format!("in[{lo}..{hi}]"),
                pass: ratio >= lo && ratio <= hi,
            });
        }
    }
    if checks.is_empty() {
        checks.push(Check::finite(
            "study completed",
            rows.last().map(|r| r.value.norm()).unwrap_or(0.0),
        ));
    }
    let results = results_map(vec![("rows", Value::from(row_values))]);
    Ok(Outcome { results, checks })
}
