//! Paths, loops, and staircase enumeration on the space of time variables.
//!
//! A system of N particles with one time variable each evolves over an
//! N-dimensional space of times. Evolution is carried out along *staircase
//! paths*: ordered sequences of moves, each along a single time axis. Loops
//! are paths whose net displacement vanishes on every axis.
//!
//! Axes are numbered starting from 1.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Hard cap on `enumerate_staircases` (the count grows combinatorially).
pub const MAX_ENUMERATION_STEPS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("axis index {0} out of range (axes are numbered 1..=N)")]
    AxisOutOfRange(usize),
    #[error("staircase enumeration capped at {MAX_ENUMERATION_STEPS} total steps, got {0}")]
    EnumerationTooLarge(usize),
    #[error("cannot parse path segment {0:?}, expected `axis:signed_duration`")]
    Parse(String),
    #[error("non-finite duration in path")]
    NonFiniteDuration,
}

/// A point in the N-dimensional space of time variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint {
    components: Vec<f64>,
}

impl TimePoint {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    /// The origin of an N-dimensional time space.
    pub fn origin(n_axes: usize) -> Self {
        Self { components: vec![0.0; n_axes] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Component along a 1-based axis.
    pub fn component(&self, axis: usize) -> f64 {
        self.components[axis - 1]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// A copy displaced by `dt` along a 1-based axis.
    pub fn advanced(&self, axis: usize, dt: f64) -> Self {
        let mut out = self.clone();
        out.components[axis - 1] += dt;
        out
    }
}

/// One staircase move: a signed duration along a single time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStep {
    /// 1-based axis index.
    pub axis: usize,
    /// Signed duration; negative values traverse the axis backwards.
    pub dt: f64,
}

impl AxisStep {
    pub fn new(axis: usize, dt: f64) -> Self {
        Self { axis, dt }
    }
}

/// An ordered sequence of axis steps in the space of time variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StaircasePath {
    steps: Vec<AxisStep>,
}

impl StaircasePath {
    pub fn new(steps: Vec<AxisStep>) -> Self {
        Self { steps }
    }

    pub fn empty() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[AxisStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest axis index referenced by the path (0 for an empty path).
    pub fn max_axis(&self) -> usize {
        self.steps.iter().map(|s| s.axis).max().unwrap_or(0)
    }

    /// Per-axis sum of signed durations. The result has one entry per axis
    /// up to `max_axis()`; an empty path yields an empty (all-zero) vector.
    pub fn net_displacement(&self) -> Vec<f64> {
        let mut net = vec![0.0; self.max_axis()];
        for step in &self.steps {
            net[step.axis - 1] += step.dt;
        }
        net
    }

    /// Like [`net_displacement`](Self::net_displacement) but padded (or
    /// checked) against a fixed number of axes.
    pub fn net_displacement_n(&self, n_axes: usize) -> Result<Vec<f64>, PathError> {
        if self.max_axis() > n_axes {
            return Err(PathError::AxisOutOfRange(self.max_axis()));
        }
        let mut net = vec![0.0; n_axes];
        for step in &self.steps {
            net[step.axis - 1] += step.dt;
        }
        Ok(net)
    }

    /// True iff every component of the net displacement is exactly zero.
    ///
    /// The comparison is exact: durations are caller-specified values and a
    /// loop is expected to be built from exactly cancelling steps.
    pub fn is_loop(&self) -> bool {
        self.net_displacement().iter().all(|&d| d == 0.0)
    }

    /// The same path traversed backwards (steps reversed, durations negated).
    pub fn reversed(&self) -> Self {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| AxisStep::new(s.axis, -s.dt))
            .collect();
        Self { steps }
    }

    /// Concatenation: `self` followed by `other`.
    pub fn then(&self, other: &StaircasePath) -> Self {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Self { steps }
    }

    pub fn validate_axes(&self, n_axes: usize) -> Result<(), PathError> {
        for step in &self.steps {
            if step.axis == 0 || step.axis > n_axes {
                return Err(PathError::AxisOutOfRange(step.axis));
            }
            if !step.dt.is_finite() {
                return Err(PathError::NonFiniteDuration);
            }
        }
        Ok(())
    }
}

/// The rectangle `[(1,dt1), (2,dt2), (1,-dt1), (2,-dt2)]`.
pub fn rect_loop(dt1: f64, dt2: f64) -> StaircasePath {
    StaircasePath::new(vec![
        AxisStep::new(1, dt1),
        AxisStep::new(2, dt2),
        AxisStep::new(1, -dt1),
        AxisStep::new(2, -dt2),
    ])
}

/// All interleavings of `n1` axis-1 steps (each of duration `dt1/n1`) and
/// `n2` axis-2 steps (each `dt2/n2`), in lexicographic order with axis 1
/// ordered before axis 2. The count is the binomial coefficient
/// C(n1+n2, n1).
pub fn enumerate_staircases(
    n1: usize,
    n2: usize,
    dt1: f64,
    dt2: f64,
) -> Result<Vec<StaircasePath>, PathError> {
    if n1 + n2 > MAX_ENUMERATION_STEPS {
        return Err(PathError::EnumerationTooLarge(n1 + n2));
    }
    let step1 = if n1 > 0 { dt1 / n1 as f64 } else { 0.0 };
    let step2 = if n2 > 0 { dt2 / n2 as f64 } else { 0.0 };
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n1 + n2);
    build_interleavings(n1, n2, step1, step2, &mut current, &mut out);
    Ok(out)
}

fn build_interleavings(
    remaining1: usize,
    remaining2: usize,
    step1: f64,
    step2: f64,
    current: &mut Vec<AxisStep>,
    out: &mut Vec<StaircasePath>,
) {
    if remaining1 == 0 && remaining2 == 0 {
        out.push(StaircasePath::new(current.clone()));
        return;
    }
    // Taking the axis-1 branch first keeps the output lexicographic.
    if remaining1 > 0 {
        current.push(AxisStep::new(1, step1));
        build_interleavings(remaining1 - 1, remaining2, step1, step2, current, out);
        current.pop();
    }
    if remaining2 > 0 {
        current.push(AxisStep::new(2, step2));
        build_interleavings(remaining1, remaining2 - 1, step1, step2, current, out);
        current.pop();
    }
}

impl fmt::Display for StaircasePath {
    /// Compact text form, e.g. `1:+0.5,2:+0.5,1:-0.5,2:-0.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for step in &self.steps {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}:{:+}", step.axis, step.dt)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for StaircasePath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, PathError> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Ok(StaircasePath::empty());
        }
        let mut steps = Vec::new();
        for segment in trimmed.split(',') {
            let seg = segment.trim();
            let (axis_str, dt_str) = seg
                .split_once(':')
                .ok_or_else(|| PathError::Parse(seg.to_string()))?;
            let axis: usize = axis_str
                .trim()
                .parse()
                .map_err(|_| PathError::Parse(seg.to_string()))?;
            if axis == 0 {
                return Err(PathError::AxisOutOfRange(0));
            }
            let dt: f64 = dt_str
                .trim()
                .parse()
                .map_err(|_| PathError::Parse(seg.to_string()))?;
            if !dt.is_finite() {
                return Err(PathError::NonFiniteDuration);
            }
            steps.push(AxisStep::new(axis, dt));
        }
        Ok(StaircasePath::new(steps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        let mut acc: usize = 1;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    #[test]
    fn net_displacement_examples() {
        assert!(StaircasePath::empty().net_displacement().is_empty());
        let p = StaircasePath::new(vec![AxisStep::new(1, 2.0), AxisStep::new(1, -2.0)]);
        assert_eq!(p.net_displacement(), vec![0.0]);
        let p = StaircasePath::new(vec![
            AxisStep::new(1, 1.0),
            AxisStep::new(2, 3.0),
            AxisStep::new(1, 1.0),
        ]);
        assert_eq!(p.net_displacement(), vec![2.0, 3.0]);
    }

    #[test]
    fn is_loop_examples() {
        assert!(rect_loop(0.7, 1.3).is_loop());
        assert!(!StaircasePath::new(vec![AxisStep::new(1, 0.5)]).is_loop());
        // The empty path is a degenerate loop.
        assert!(StaircasePath::empty().is_loop());
    }

    #[test]
    fn rect_loop_shape() {
        let r = rect_loop(0.25, 0.5);
        assert_eq!(r.len(), 4);
        assert!(r.is_loop());
        assert_eq!(r.net_displacement(), vec![0.0, 0.0]);
        // Degenerate rectangle: zero enclosed area, still a loop.
        assert!(rect_loop(0.0, 1.0).is_loop());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_staircases(1, 1, 1.0, 1.0).unwrap().len(), 2);
        assert_eq!(enumerate_staircases(2, 2, 1.0, 1.0).unwrap().len(), 6);
        assert_eq!(enumerate_staircases(0, 5, 1.0, 1.0).unwrap().len(), 1);
        assert_eq!(enumerate_staircases(3, 2, 1.0, 1.0).unwrap().len(), binomial(5, 2));
        assert!(matches!(
            enumerate_staircases(7, 6, 1.0, 1.0),
            Err(PathError::EnumerationTooLarge(13))
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_shares_displacement() {
        let paths = enumerate_staircases(2, 1, 1.0, 0.5).unwrap();
        let axes: Vec<Vec<usize>> = paths
            .iter()
            .map(|p| p.steps().iter().map(|s| s.axis).collect())
            .collect();
        assert_eq!(axes, vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
        let net = paths[0].net_displacement();
        for p in &paths {
            assert_eq!(p.net_displacement(), net);
        }
    }

    #[test]
    fn parse_round_trip() {
        let text = "1:+0.5,2:+0.5,1:-0.5,2:-0.5";
        let path: StaircasePath = text.parse().unwrap();
        assert_eq!(path, rect_loop(0.5, 0.5));
        assert_eq!(path.to_string(), text);
        assert!("nonsense".parse::<StaircasePath>().is_err());
        assert!("0:+1".parse::<StaircasePath>().is_err());
    }

    #[test]
    fn time_point_advance() {
        let t = TimePoint::origin(3).advanced(2, 0.5);
        assert_eq!(t.component(2), 0.5);
        assert_eq!(t.component(1), 0.0);
        assert_eq!(t.dim(), 3);
    }

    proptest! {
        #[test]
        fn reverse_after_path_is_loop(
            // Dyadic durations: exact cancellation is part of the loop
            // contract, so the generator sticks to exactly representable
            // sums (multiples of 1/64 with bounded magnitude).
            steps in proptest::collection::vec((1usize..=3, -640i32..640), 0..8)
        ) {
            let path = StaircasePath::new(
                steps
                    .into_iter()
                    .map(|(a, num)| AxisStep::new(a, f64::from(num) / 64.0))
                    .collect(),
            );
            let loop_path = path.then(&path.reversed());
            prop_assert!(loop_path.is_loop());
        }

        #[test]
        fn display_parse_round_trip(
            steps in proptest::collection::vec((1usize..=4, -5.0f64..5.0), 0..6)
        ) {
            let path = StaircasePath::new(
                steps.into_iter().map(|(a, dt)| AxisStep::new(a, dt)).collect(),
            );
            let parsed: StaircasePath = path.to_string().parse().unwrap();
            prop_assert_eq!(parsed, path);
        }
    }
}
