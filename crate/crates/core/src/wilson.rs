//! Operator-level Wilson lines, loops, curvature, and the small-rectangle
//! Stokes comparison, for finite-dimensional Hermitian Hamiltonians.
//!
//! A family `H_1..H_N` of (possibly time-dependent) Hermitian matrices
//! plays the role of a connection `A_j = -H_j` on the N-dimensional space
//! of time variables. The ordered exponential along a staircase path,
//!
//! ```text
//! U = prod over traversed slices of exp(-i H_axis(t_mid) delta),
//! ```
//!
//! is the Wilson line; loops probe the holonomy, and the curvature
//!
//! ```text
//! F_jk = dH_j/dt_k - dH_k/dt_j - i [H_j, H_k]
//! ```
//!
//! measures the obstruction to path independence. Commuting constant
//! families are flat: every loop gives the identity.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{
    adjoint, expm, frobenius_norm, hermiticity_defect, identity, principal_log_unitary,
    unitarity_defect, LogFailure,
};
use crate::timepaths::{StaircasePath, TimePoint};

pub type HamiltonianFn = Arc<dyn Fn(&TimePoint) -> Array2<C64> + Send + Sync>;

/// Finite-difference step used for the curvature entering `stokes_check`.
const STOKES_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum WilsonError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("hamiltonians have mismatched dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not hermitian: defect {defect:.3e} exceeds 1e-12 * norm")]
    NotHermitian { defect: f64 },
    #[error("resulting matrix is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },
    #[error("path is not a loop: net displacement {0:?}")]
    NotALoop(Vec<f64>),
    #[error("path is not a rectangle [(j,a),(k,b),(j,-a),(k,-b)]")]
    NotARectangle,
    #[error("substeps must be at least 1")]
    NoSubsteps,
    #[error("curvature indices must differ and lie in 1..=N")]
    BadIndices,
    #[error("holonomy eigenvalue lies on the branch cut of the logarithm")]
    LogBranchCut,
    #[error("matrix json: {0}")]
    Json(String),
    #[error(transparent)]
    Path(#[from] crate::timepaths::PathError),
}

/// A Hermitian operator on a finite-dimensional space, either constant or
/// a function of the time point.
#[derive(Clone)]
pub enum MatrixHamiltonian {
    Constant(Array2<C64>),
    TimeDependent { dim: usize, f: HamiltonianFn },
}

fn check_hermitian(m: &Array2<C64>) -> Result<(), WilsonError> {
    if m.nrows() != m.ncols() {
        return Err(WilsonError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let defect = hermiticity_defect(m);
    if defect > 1e-12 * frobenius_norm(m) {
        return Err(WilsonError::NotHermitian { defect });
    }
    Ok(())
}

impl MatrixHamiltonian {
    /// A constant Hermitian matrix; hermiticity is checked once here.
    pub fn constant(m: Array2<C64>) -> Result<Self, WilsonError> {
        check_hermitian(&m)?;
        Ok(MatrixHamiltonian::Constant(m))
    }

    /// A time-dependent Hermitian matrix; hermiticity is checked at every
    /// evaluation.
    pub fn time_dependent(
        dim: usize,
        f: impl Fn(&TimePoint) -> Array2<C64> + Send + Sync + 'static,
    ) -> Self {
        MatrixHamiltonian::TimeDependent { dim, f: Arc::new(f) }
    }

    /// Parse a constant matrix from JSON: a row-major array of rows, each
    /// entry a `[re, im]` pair.
    pub fn constant_from_json(text: &str) -> Result<Self, WilsonError> {
        let rows: Vec<Vec<[f64; 2]>> =
            serde_json::from_str(text).map_err(|e| WilsonError::Json(e.to_string()))?;
        Self::constant(matrix_from_rows(&rows)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixHamiltonian::Constant(m) => m.nrows(),
            MatrixHamiltonian::TimeDependent { dim, .. } => *dim,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixHamiltonian::Constant(_))
    }

    /// Evaluate at a time point, enforcing the hermiticity invariant.
    pub fn eval(&self, at: &TimePoint) -> Result<Array2<C64>, WilsonError> {
        match self {
            MatrixHamiltonian::Constant(m) => Ok(m.clone()),
            MatrixHamiltonian::TimeDependent { dim, f } => {
                let m = f(at);
                if m.nrows() != *dim || m.ncols() != *dim {
                    return Err(WilsonError::DimensionMismatch(m.nrows(), *dim));
                }
                check_hermitian(&m)?;
                Ok(m)
            }
        }
    }
}

/// Convert row-major `[re, im]` pairs into a square matrix.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Array2<C64>, WilsonError> {
    let n = rows.len();
    for row in rows {
        if row.len() != n {
            return Err(WilsonError::NotSquare { rows: n, cols: row.len() });
        }
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// A matrix guaranteed unitary to within `1e-10` in Frobenius norm.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    m: Array2<C64>,
}

impl UnitaryMatrix {
    pub fn new(m: Array2<C64>) -> Result<Self, WilsonError> {
        let defect = unitarity_defect(&m);
        if defect > 1e-10 {
            return Err(WilsonError::NotUnitary { defect });
        }
        Ok(Self { m })
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_inner(self) -> Array2<C64> {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }

    /// Frobenius distance to the identity.
    pub fn deviation_from_identity(&self) -> f64 {
        frobenius_norm(&(&self.m - &identity(self.dim())))
    }

    pub fn dagger(&self) -> UnitaryMatrix {
        UnitaryMatrix { m: adjoint(&self.m) }
    }
}

fn common_dim(hams: &[MatrixHamiltonian]) -> Result<usize, WilsonError> {
    let dim = hams.first().map(|h| h.dim()).unwrap_or(0);
    for h in hams {
        if h.dim() != dim {
            return Err(WilsonError::DimensionMismatch(h.dim(), dim));
        }
    }
    Ok(dim)
}

/// Time-ordered exponential along a staircase path starting at the origin.
///
/// Each path step is subdivided into `substeps` slices; each slice
/// contributes `exp(-i H_axis(t_mid) delta)` evaluated at the slice
/// midpoint, with later slices multiplying on the left. For Hamiltonians
/// constant along the traversal the result is exact for any `substeps`.
pub fn ordered_exponential(
    hams: &[MatrixHamiltonian],
    path: &StaircasePath,
    substeps: usize,
) -> Result<UnitaryMatrix, WilsonError> {
    ordered_exponential_from(hams, &TimePoint::origin(hams.len()), path, substeps)
}

/// Same as [`ordered_exponential`], from an explicit starting time point.
pub fn ordered_exponential_from(
    hams: &[MatrixHamiltonian],
    start: &TimePoint,
    path: &StaircasePath,
    substeps: usize,
) -> Result<UnitaryMatrix, WilsonError> {
    if substeps == 0 {
        return Err(WilsonError::NoSubsteps);
    }
    let dim = common_dim(hams)?;
    path.validate_axes(hams.len())?;
    if start.dim() != hams.len() {
        return Err(WilsonError::DimensionMismatch(start.dim(), hams.len()));
    }
    let mut u = identity(dim);
    let mut now = start.clone();
    for step in path.steps() {
        let delta = step.dt / substeps as f64;
        for s in 0..substeps {
            let t_mid = now.advanced(step.axis, (s as f64 + 0.5) * delta);
            let h = hams[step.axis - 1].eval(&t_mid)?;
            let slice = expm(&h.mapv(|v| v * C64::new(0.0, -delta)));
            u = slice.dot(&u);
        }
        now = now.advanced(step.axis, step.dt);
    }
    UnitaryMatrix::new(u)
}

/// Curvature `F_jk = dH_j/dt_k - dH_k/dt_j - i [H_j, H_k]` at a time point.
///
/// Time partials of constant Hamiltonians are exactly zero; callable forms
/// are differentiated by central differences with step `fd_step`.
pub fn curvature(
    hams: &[MatrixHamiltonian],
    j: usize,
    k: usize,
    at: &TimePoint,
    fd_step: f64,
) -> Result<Array2<C64>, WilsonError> {
    if j == k || j == 0 || k == 0 || j > hams.len() || k > hams.len() {
        return Err(WilsonError::BadIndices);
    }
    let dim = common_dim(hams)?;
    let partial = |of: usize, wrt: usize| -> Result<Array2<C64>, WilsonError> {
        let ham = &hams[of - 1];
        if ham.is_constant() {
            return Ok(Array2::zeros((dim, dim)));
        }
        let plus = ham.eval(&at.advanced(wrt, fd_step))?;
        let minus = ham.eval(&at.advanced(wrt, -fd_step))?;
        Ok((&plus - &minus).mapv(|v| v / (2.0 * fd_step)))
    };
    let dhj_dtk = partial(j, k)?;
    let dhk_dtj = partial(k, j)?;
    let hj = hams[j - 1].eval(at)?;
    let hk = hams[k - 1].eval(at)?;
    let commutator = hj.dot(&hk) - hk.dot(&hj);
    Ok(&dhj_dtk - &dhk_dtj - &commutator.mapv(|v| v * C64::new(0.0, 1.0)))
}

/// Frobenius distance of a loop's ordered exponential from the identity.
pub fn loop_holonomy_deviation(
    hams: &[MatrixHamiltonian],
    loop_path: &StaircasePath,
    substeps: usize,
) -> Result<f64, WilsonError> {
    if !loop_path.is_loop() {
        return Err(WilsonError::NotALoop(loop_path.net_displacement()));
    }
    let u = ordered_exponential(hams, loop_path, substeps)?;
    Ok(u.deviation_from_identity())
}

/// Outcome of the small-rectangle Stokes comparison.
#[derive(Debug, Clone)]
pub struct StokesCheck {
    /// Principal logarithm of the loop holonomy.
    pub lhs: Array2<C64>,
    /// Curvature flux `-i F ab` through the rectangle, oriented to match
    /// the traversal.
    pub rhs: Array2<C64>,
    /// `||lhs - rhs||_F`; shrinks as the cube of the rectangle size.
    pub residual: f64,
}

/// Compare the holonomy logarithm of a small rectangle against the
/// curvature flux through it.
///
/// The path must be a rectangle `[(j,a), (k,b), (j,-a), (k,-b)]` anchored
/// at the origin. For that traversal the matching flux is
/// `-i F_kj(center) a b`; in particular the rectangle that steps along
/// axis k first pairs with `-i F_jk`.
pub fn stokes_check(
    hams: &[MatrixHamiltonian],
    rect: &StaircasePath,
    substeps: usize,
) -> Result<StokesCheck, WilsonError> {
    let steps = rect.steps();
    if steps.len() != 4 {
        return Err(WilsonError::NotARectangle);
    }
    let (j, a) = (steps[0].axis, steps[0].dt);
    let (k, b) = (steps[1].axis, steps[1].dt);
    if j == k || steps[2].axis != j || steps[3].axis != k || steps[2].dt != -a || steps[3].dt != -b
    {
        return Err(WilsonError::NotARectangle);
    }
    let u = ordered_exponential(hams, rect, substeps)?;
    let lhs = principal_log_unitary(u.as_array(), 1e-6).map_err(|e| match e {
        LogFailure::BranchCut => WilsonError::LogBranchCut,
    })?;
    let center = TimePoint::origin(hams.len())
        .advanced(j, a / 2.0)
        .advanced(k, b / 2.0);
    let f_kj = curvature(hams, k, j, &center, STOKES_FD_STEP)?;
    let rhs = f_kj.mapv(|v| v * C64::new(0.0, -a * b));
    let residual = frobenius_norm(&(&lhs - &rhs));
    Ok(StokesCheck { lhs, rhs, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timepaths::{enumerate_staircases, rect_loop, AxisStep};

    pub(crate) fn pauli(which: char) -> Array2<C64> {
        let (a, b, c, d) = match which {
            'x' => (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            'y' => (C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)),
            'z' => (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)),
            _ => panic!("unknown pauli"),
        };
        Array2::from_shape_vec((2, 2), vec![a, b, c, d]).unwrap()
    }

    fn diag(entries: &[f64]) -> Array2<C64> {
        let n = entries.len();
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn commuting_diagonal_loop_is_trivial() {
        let hams = vec![
            MatrixHamiltonian::constant(diag(&[0.3, -1.2, 0.8])).unwrap(),
            MatrixHamiltonian::constant(diag(&[1.1, 0.4, -0.6])).unwrap(),
        ];
        for loop_path in [rect_loop(1.0, 1.0), rect_loop(0.3, 2.0), rect_loop(-1.0, 0.7)] {
            let dev = loop_holonomy_deviation(&hams, &loop_path, 3).unwrap();
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn single_axis_constant_hamiltonian_is_exact() {
        let h = pauli('x').mapv(|v| v * 0.9) + pauli('z').mapv(|v| v * 0.4);
        let hams = vec![MatrixHamiltonian::constant(h.clone()).unwrap()];
        let path = StaircasePath::new(vec![AxisStep::new(1, 1.7)]);
        let expected = expm(&h.mapv(|v| v * C64::new(0.0, -1.7)));
        for substeps in [1, 2, 7] {
            let u = ordered_exponential(&hams, &path, substeps).unwrap();
            let err = frobenius_norm(&(u.as_array() - &expected));
            assert!(err < 1e-12, "substeps {substeps}: {err}");
        }
    }

    #[test]
    fn hamiltonian_constant_along_the_traversal_axis() {
        // H_1(t) = t_2 sigma_z is constant along any axis-1 line, so the
        // line from (0, t2) is exp(-i t2 sigma_z T).
        let hams = vec![
            MatrixHamiltonian::time_dependent(2, |t: &TimePoint| {
                pauli('z').mapv(|v| v * t.component(2))
            }),
            MatrixHamiltonian::constant(Array2::zeros((2, 2))).unwrap(),
        ];
        let t2 = 0.8;
        let duration = 1.3;
        let start = TimePoint::new(vec![0.0, t2]);
        let path = StaircasePath::new(vec![AxisStep::new(1, duration)]);
        let u = ordered_exponential_from(&hams, &start, &path, 4).unwrap();
        let expected = expm(&pauli('z').mapv(|v| v * C64::new(0.0, -t2 * duration)));
        assert!(frobenius_norm(&(u.as_array() - &expected)) < 1e-12);
    }

    #[test]
    fn curvature_of_identical_constant_hamiltonians_vanishes() {
        let h = pauli('x').mapv(|v| v * 0.7);
        let hams = vec![
            MatrixHamiltonian::constant(h.clone()).unwrap(),
            MatrixHamiltonian::constant(h).unwrap(),
        ];
        let f = curvature(&hams, 1, 2, &TimePoint::origin(2), 1e-5).unwrap();
        assert_eq!(frobenius_norm(&f), 0.0);
    }

    #[test]
    fn curvature_of_pauli_pair_is_twice_sigma_z() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let f = curvature(&hams, 1, 2, &TimePoint::origin(2), 1e-5).unwrap();
        let expected = pauli('z').mapv(|v| v * 2.0);
        assert!(frobenius_norm(&(&f - &expected)) < 1e-12);
    }

    #[test]
    fn curvature_of_linear_time_dependence_is_the_slope() {
        // H_1 = t_2 I, H_2 = 0: F_12 = dH_1/dt_2 = I up to fd error.
        let hams = vec![
            MatrixHamiltonian::time_dependent(2, |t: &TimePoint| {
                identity(2).mapv(|v| v * t.component(2))
            }),
            MatrixHamiltonian::constant(Array2::zeros((2, 2))).unwrap(),
        ];
        let f = curvature(&hams, 1, 2, &TimePoint::new(vec![0.4, 0.9]), 1e-5).unwrap();
        assert!(frobenius_norm(&(&f - &identity(2))) < 1e-8);
    }

    #[test]
    fn curvature_is_antisymmetric() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let f12 = curvature(&hams, 1, 2, &TimePoint::origin(2), 1e-5).unwrap();
        let f21 = curvature(&hams, 2, 1, &TimePoint::origin(2), 1e-5).unwrap();
        assert!(frobenius_norm(&(&f12 + &f21)) < 1e-12);
    }

    #[test]
    fn small_loop_deviation_matches_the_commutator_scale() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let eps = 0.1;
        let dev = loop_holonomy_deviation(&hams, &rect_loop(eps, eps), 1).unwrap();
        let expected = 2.0 * 2f64.sqrt() * eps * eps;
        assert!(
            (dev - expected).abs() < 0.1 * expected,
            "deviation {dev} vs leading order {expected}"
        );
    }

    #[test]
    fn degenerate_rectangle_has_no_holonomy() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let dev = loop_holonomy_deviation(&hams, &rect_loop(0.0, 0.5), 2).unwrap();
        assert!(dev < 1e-12);
    }

    #[test]
    fn holonomy_rejects_open_paths() {
        let hams = vec![MatrixHamiltonian::constant(pauli('x')).unwrap()];
        let path = StaircasePath::new(vec![AxisStep::new(1, 1.0)]);
        assert!(matches!(
            loop_holonomy_deviation(&hams, &path, 1),
            Err(WilsonError::NotALoop(_))
        ));
    }

    #[test]
    fn stokes_commuting_case_vanishes_on_both_sides() {
        let hams = vec![
            MatrixHamiltonian::constant(diag(&[0.5, -0.5])).unwrap(),
            MatrixHamiltonian::constant(diag(&[1.0, 2.0])).unwrap(),
        ];
        let rect = rect_loop(0.05, 0.05);
        let check = stokes_check(&hams, &rect, 2).unwrap();
        assert!(frobenius_norm(&check.lhs) < 1e-10);
        assert!(frobenius_norm(&check.rhs) < 1e-10);
        assert!(check.residual < 1e-10);
    }

    #[test]
    fn stokes_abelian_flux_matches_in_closed_form() {
        // H_1 = t_2 I, H_2 = 0, rectangle stepping along axis 2 first:
        // holonomy log = -i eps1 eps2 I = -i F_12 eps1 eps2.
        let hams = vec![
            MatrixHamiltonian::time_dependent(2, |t: &TimePoint| {
                identity(2).mapv(|v| v * t.component(2))
            }),
            MatrixHamiltonian::constant(Array2::zeros((2, 2))).unwrap(),
        ];
        let (eps1, eps2) = (0.08, 0.05);
        let rect = StaircasePath::new(vec![
            AxisStep::new(2, eps2),
            AxisStep::new(1, eps1),
            AxisStep::new(2, -eps2),
            AxisStep::new(1, -eps1),
        ]);
        let check = stokes_check(&hams, &rect, 8).unwrap();
        let expected = identity(2).mapv(|v| v * C64::new(0.0, -eps1 * eps2));
        assert!(frobenius_norm(&(&check.lhs - &expected)) < 1e-8, "lhs");
        assert!(frobenius_norm(&(&check.rhs - &expected)) < 1e-8, "rhs");
        assert!(check.residual < 1e-8);
    }

    #[test]
    fn stokes_residual_shrinks_cubically() {
        // residual ~ 4 eps^3 for the pauli pair: residual / eps^2 vanishes
        // as the rectangle shrinks and the log-log slope sits near 3.
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let sizes = [0.1, 0.05, 0.025];
        let mut residuals = Vec::new();
        for &eps in &sizes {
            let check = stokes_check(&hams, &rect_loop(eps, eps), 1).unwrap();
            residuals.push(check.residual);
        }
        let scaled: Vec<f64> =
            residuals.iter().zip(&sizes).map(|(r, e)| r / (e * e)).collect();
        assert!(scaled[0] > scaled[1] && scaled[1] > scaled[2], "{scaled:?}");
        let slope = log_log_slope(&sizes, &residuals);
        assert!(slope >= 2.5, "slope {slope}");
    }

    fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        cov / var
    }

    #[test]
    fn stokes_rejects_non_rectangles() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let path: StaircasePath = "1:+0.1,2:+0.1,1:-0.1".parse().unwrap();
        assert!(matches!(stokes_check(&hams, &path, 1), Err(WilsonError::NotARectangle)));
    }

    #[test]
    fn every_ordered_exponential_is_unitary_and_reversal_is_the_adjoint() {
        let hams = vec![
            MatrixHamiltonian::time_dependent(2, |t: &TimePoint| {
                pauli('x').mapv(|v| v * (1.0 + 0.5 * t.component(1))) + pauli('z')
            }),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let path: StaircasePath = "1:+0.4,2:+0.3,1:-0.2".parse().unwrap();
        let u = ordered_exponential(&hams, &path, 64).unwrap();
        assert!(u.unitarity_defect() < 1e-10);

        // Reversal retraces the same slice midpoints in opposite order,
        // so the product is the exact adjoint.
        let back = ordered_exponential_from(
            &hams,
            &TimePoint::new(vec![0.2, 0.3]),
            &path.reversed(),
            64,
        )
        .unwrap();
        let err = frobenius_norm(&(back.as_array() - &adjoint(u.as_array())));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn concatenation_multiplies_in_traversal_order() {
        let hams = vec![
            MatrixHamiltonian::constant(pauli('x')).unwrap(),
            MatrixHamiltonian::constant(pauli('y')).unwrap(),
        ];
        let first: StaircasePath = "1:+0.5".parse().unwrap();
        let second: StaircasePath = "2:+0.7".parse().unwrap();
        let u1 = ordered_exponential(&hams, &first, 3).unwrap();
        let u2 = ordered_exponential_from(
            &hams,
            &TimePoint::new(vec![0.5, 0.0]),
            &second,
            3,
        )
        .unwrap();
        let joined = ordered_exponential(&hams, &first.then(&second), 3).unwrap();
        let err = frobenius_norm(&(joined.as_array() - &u2.as_array().dot(u1.as_array())));
        assert!(err < 1e-13);
    }

    #[test]
    fn commuting_families_are_order_independent_up_to_four_axes() {
        // Four commuting (diagonal) Hamiltonians: every staircase with the
        // same net displacement produces the same line operator.
        let hams: Vec<MatrixHamiltonian> = (0..4)
            .map(|k| {
                let entries = [0.3 + k as f64, -0.7 * k as f64, 0.1 * k as f64 + 0.5];
                MatrixHamiltonian::constant(diag(&entries)).unwrap()
            })
            .collect();
        let durations = [0.4, -0.9, 0.35, 0.7];
        // All 24 orderings of one step per axis.
        let mut orderings = Vec::new();
        let mut axes = [1usize, 2, 3, 4];
        permutations(&mut axes, 0, &mut orderings);
        let reference = ordered_exponential(
            &hams,
            &StaircasePath::new(
                orderings[0].iter().map(|&a| AxisStep::new(a, durations[a - 1])).collect(),
            ),
            2,
        )
        .unwrap();
        for ordering in &orderings[1..] {
            let path = StaircasePath::new(
                ordering.iter().map(|&a| AxisStep::new(a, durations[a - 1])).collect(),
            );
            let u = ordered_exponential(&hams, &path, 2).unwrap();
            let err = frobenius_norm(&(u.as_array() - reference.as_array()));
            assert!(err < 1e-12, "{ordering:?}: {err}");
        }

        // Two-axis staircase refinements through the enumeration helper.
        let pair = &hams[..2];
        let mut finals = Vec::new();
        for path in enumerate_staircases(2, 2, 0.8, -0.5).unwrap() {
            finals.push(ordered_exponential(pair, &path, 2).unwrap());
        }
        for w in finals.windows(2) {
            let err = frobenius_norm(&(w[0].as_array() - w[1].as_array()));
            assert!(err < 1e-12);
        }
    }

    fn permutations(axes: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
        if k == 4 {
            out.push(*axes);
            return;
        }
        for i in k..4 {
            axes.swap(k, i);
            permutations(axes, k + 1, out);
            axes.swap(k, i);
        }
    }

    #[test]
    fn substep_refinement_converges_at_second_order() {
        // A Hamiltonian that genuinely varies along the traversal.
        let hams = vec![MatrixHamiltonian::time_dependent(2, |t: &TimePoint| {
            pauli('x').mapv(|v| v * t.component(1).sin()) + pauli('z').mapv(|v| v * t.component(1))
        })];
        let path = StaircasePath::new(vec![AxisStep::new(1, 1.0)]);
        let u = |s: usize| ordered_exponential(&hams, &path, s).unwrap();
        let e1 = frobenius_norm(&(u(4).as_array() - u(8).as_array()));
        let e2 = frobenius_norm(&(u(8).as_array() - u(16).as_array()));
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "midpoint-rule ratio {ratio}");
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = Array2::from_shape_vec(
            (2, 2),
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            MatrixHamiltonian::constant(m),
            Err(WilsonError::NotHermitian { .. })
        ));
    }

    #[test]
    fn matrices_parse_from_json_pairs() {
        let h = MatrixHamiltonian::constant_from_json(
            "[[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]]",
        )
        .unwrap();
        let expected = pauli('y');
        match &h {
            MatrixHamiltonian::Constant(m) => {
                assert!(frobenius_norm(&(m - &expected)) < 1e-15)
            }
            _ => unreachable!(),
        }
        assert!(MatrixHamiltonian::constant_from_json("[[1, 2]]").is_err());
    }
}
