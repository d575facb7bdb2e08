//! Spatial discretization: periodic grids, one- and two-particle wave
//! fields, norms, inner products, and phase-aligned comparison.
//!
//! Grids are uniform and periodic; spectral propagation in [`crate::evolution`]
//! relies on the periodicity, and the Gaussian-packet constructors enforce
//! that the packet support stays away from the wrap-around boundary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs n >= 8 points with n a power of two, got {0}")]
    BadPointCount(usize),
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("grid origin must be finite, got {0}")]
    BadOrigin(f64),
    #[error("packet width {width} is below the resolvable minimum 2*dq = {min}")]
    PacketTooNarrow { width: f64, min: f64 },
    #[error("packet tail mass {mass:.3e} at the grid boundary exceeds 1e-10")]
    PacketOutsideGrid { mass: f64 },
    #[error("wave fields live on different grids")]
    GridMismatch,
    #[error("field values must be finite")]
    NonFiniteField,
    #[error("value array length {got} does not match the grid ({expected})")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("fields are orthogonal; the aligning phase is undefined (distance {distance})")]
    OrthogonalFields { distance: f64 },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field file: {0}")]
    Format(String),
}

/// A uniform periodic grid of `n` points starting at `q_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    q_min: f64,
    dq: f64,
    n: usize,
}

impl SpatialGrid {
    pub fn new(q_min: f64, dq: f64, n: usize) -> Result<Self, GridError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::BadPointCount(n));
        }
        if dq.is_nan() || dq <= 0.0 || !dq.is_finite() || !(dq * n as f64).is_finite() {
            return Err(GridError::BadSpacing(dq));
        }
        if !q_min.is_finite() {
            return Err(GridError::BadOrigin(q_min));
        }
        Ok(Self { q_min, dq, n })
    }

    /// Grid of `n` points covering `[-extent/2, extent/2)`.
    pub fn centered(extent: f64, n: usize) -> Result<Self, GridError> {
        Self::new(-extent / 2.0, extent / n as f64, n)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.dq * self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.q_min + k as f64 * self.dq
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.point(k))
    }
}

/// Complex amplitudes sampled on a single spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField1 {
    grid: SpatialGrid,
    values: Array1<C64>,
}

impl WaveField1 {
    pub fn from_values(grid: SpatialGrid, values: Array1<C64>) -> Result<Self, GridError> {
        if values.len() != grid.n() {
            return Err(GridError::ShapeMismatch { got: values.len(), expected: grid.n() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFiniteField);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array1<C64> {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Position expectation value of `|psi|^2`.
    pub fn mean_position(&self) -> f64 {
        let dq = self.grid.dq();
        let total: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| self.grid.point(k) * v.norm_sqr())
            .sum::<f64>()
            * dq;
        total / self.norm_sq()
    }
}

/// A normalized Gaussian packet `exp(-(q-center)^2/(4 width^2) + i momentum q)`.
///
/// `width` is the position standard deviation of the density.
pub fn gaussian_packet(
    grid: &SpatialGrid,
    center: f64,
    width: f64,
    momentum: f64,
) -> Result<WaveField1, GridError> {
    if width < 2.0 * grid.dq() {
        return Err(GridError::PacketTooNarrow { width, min: 2.0 * grid.dq() });
    }
    let mut values = Array1::zeros(grid.n());
    for (k, v) in values.iter_mut().enumerate() {
        let q = grid.point(k);
        let envelope = (-(q - center).powi(2) / (4.0 * width * width)).exp();
        *v = C64::from_polar(envelope, momentum * q);
    }
    let norm_sq: f64 = values.iter().map(|v: &C64| v.norm_sqr()).sum::<f64>() * grid.dq();
    if norm_sq <= 0.0 {
        return Err(GridError::PacketOutsideGrid { mass: 1.0 });
    }
    // Tail mass at the wrap-around boundary: the outermost cell on each side.
    let boundary = (values[0].norm_sqr() + values[grid.n() - 1].norm_sqr()) * grid.dq();
    let tail = boundary / norm_sq;
    if tail >= 1e-10 {
        return Err(GridError::PacketOutsideGrid { mass: tail });
    }
    let scale = 1.0 / norm_sq.sqrt();
    values.mapv_inplace(|v| v * scale);
    WaveField1::from_values(*grid, values)
}

/// Two-particle amplitudes on the tensor product of two grids, first axis
/// indexed by the first particle's coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField2 {
    grid1: SpatialGrid,
    grid2: SpatialGrid,
    values: Array2<C64>,
}

impl WaveField2 {
    pub fn from_values(
        grid1: SpatialGrid,
        grid2: SpatialGrid,
        values: Array2<C64>,
    ) -> Result<Self, GridError> {
        if values.nrows() != grid1.n() {
            return Err(GridError::ShapeMismatch { got: values.nrows(), expected: grid1.n() });
        }
        if values.ncols() != grid2.n() {
            return Err(GridError::ShapeMismatch { got: values.ncols(), expected: grid2.n() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFiniteField);
        }
        Ok(Self { grid1, grid2, values })
    }

    pub fn grid1(&self) -> &SpatialGrid {
        &self.grid1
    }

    pub fn grid2(&self) -> &SpatialGrid {
        &self.grid2
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut Array2<C64> {
        &mut self.values
    }

    pub fn cell(&self) -> f64 {
        self.grid1.dq() * self.grid2.dq()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Density marginal over the other coordinate: `axis` 1 integrates out
    /// q2 and returns a function of q1, and vice versa.
    pub fn density_marginal(&self, axis: usize) -> Array1<f64> {
        match axis {
            1 => {
                let mut out = Array1::zeros(self.grid1.n());
                for (i1, row) in self.values.outer_iter().enumerate() {
                    out[i1] = row.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid2.dq();
                }
                out
            }
            2 => {
                let mut out = Array1::zeros(self.grid2.n());
                for row in self.values.outer_iter() {
                    for (i2, v) in row.iter().enumerate() {
                        out[i2] += v.norm_sqr() * self.grid1.dq();
                    }
                }
                out
            }
            _ => panic!("axis must be 1 or 2"),
        }
    }
}

/// Separable two-particle state `psi1(q1) psi2(q2)`.
pub fn product_state(psi1: &WaveField1, psi2: &WaveField1) -> WaveField2 {
    let n1 = psi1.grid().n();
    let n2 = psi2.grid().n();
    let mut values = Array2::zeros((n1, n2));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            values[(i1, i2)] = psi1.values()[i1] * psi2.values()[i2];
        }
    }
    WaveField2 { grid1: *psi1.grid(), grid2: *psi2.grid(), values }
}

fn check_same_grids(a: &WaveField2, b: &WaveField2) -> Result<(), GridError> {
    if a.grid1 != b.grid1 || a.grid2 != b.grid2 {
        return Err(GridError::GridMismatch);
    }
    Ok(())
}

/// `sqrt(sum |a-b|^2 dq1 dq2)`.
pub fn l2_distance(a: &WaveField2, b: &WaveField2) -> Result<f64, GridError> {
    check_same_grids(a, b)?;
    let sum: f64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((sum * a.cell()).sqrt())
}

/// `<a, b> = sum conj(a) b dq1 dq2`.
pub fn inner_product(a: &WaveField2, b: &WaveField2) -> Result<C64, GridError> {
    check_same_grids(a, b)?;
    let sum: C64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.cell())
}

/// Result of comparing two fields up to a global phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAlignment {
    /// The phase that minimizes `l2_distance(a, e^{i phase} b)`, which is
    /// `-arg<a,b>`, reported in `(-pi, pi]`.
    pub phase: f64,
    /// The minimized distance.
    pub distance: f64,
}

/// Distance between `a` and `b` minimized over a global phase on `b`.
///
/// When the fields are orthogonal the phase is undefined and the call
/// reports [`GridError::OrthogonalFields`] carrying the (unaligned)
/// distance.
pub fn phase_aligned_distance(a: &WaveField2, b: &WaveField2) -> Result<PhaseAlignment, GridError> {
    check_same_grids(a, b)?;
    let overlap = inner_product(a, b)?;
    let na2 = a.norm_sq();
    let nb2 = b.norm_sq();
    let scale = (na2 * nb2).sqrt();
    if overlap.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        let distance = l2_distance(a, b)?;
        return Err(GridError::OrthogonalFields { distance });
    }
    let phase = -overlap.arg();
    let distance = (na2 + nb2 - 2.0 * overlap.norm()).max(0.0).sqrt();
    Ok(PhaseAlignment { phase, distance })
}

// --- serialization ------------------------------------------------------
//
// A field dump is a data file plus a JSON header describing the grid:
// `{"format":"wavefield2","encoding":"csv"|"binary","axes":[{"q_min":..,
// "dq":..,"n":..},..]}`. CSV data holds one `re,im` pair per line and the
// binary layout is little-endian f64 pairs; both run in q1-index-major
// order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldEncoding {
    Csv,
    Binary,
}

#[derive(Debug, Serialize, Deserialize)]
struct AxisHeader {
    q_min: f64,
    dq: f64,
    n: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldHeader {
    format: String,
    encoding: FieldEncoding,
    axes: Vec<AxisHeader>,
}

/// Write a two-particle field as a data file plus JSON header.
pub fn save_wavefield2(
    field: &WaveField2,
    data_path: &Path,
    header_path: &Path,
    encoding: FieldEncoding,
) -> Result<(), GridError> {
    let header = FieldHeader {
        format: "wavefield2".to_string(),
        encoding,
        axes: vec![
            AxisHeader { q_min: field.grid1.q_min(), dq: field.grid1.dq(), n: field.grid1.n() },
            AxisHeader { q_min: field.grid2.q_min(), dq: field.grid2.dq(), n: field.grid2.n() },
        ],
    };
    let header_json = serde_json::to_string_pretty(&header)
        .map_err(|e| GridError::Format(e.to_string()))?;
    std::fs::write(header_path, header_json)?;

    let mut out = BufWriter::new(File::create(data_path)?);
    match encoding {
        FieldEncoding::Csv => {
            for v in field.values.iter() {
                writeln!(out, "{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        FieldEncoding::Binary => {
            for v in field.values.iter() {
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Write a one-particle field; same layout with a single axis entry.
pub fn save_wavefield1(
    field: &WaveField1,
    data_path: &Path,
    header_path: &Path,
    encoding: FieldEncoding,
) -> Result<(), GridError> {
    let header = FieldHeader {
        format: "wavefield1".to_string(),
        encoding,
        axes: vec![AxisHeader {
            q_min: field.grid.q_min(),
            dq: field.grid.dq(),
            n: field.grid.n(),
        }],
    };
    let header_json = serde_json::to_string_pretty(&header)
        .map_err(|e| GridError::Format(e.to_string()))?;
    std::fs::write(header_path, header_json)?;
    let mut out = BufWriter::new(File::create(data_path)?);
    match encoding {
        FieldEncoding::Csv => {
            for v in field.values.iter() {
                writeln!(out, "{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        FieldEncoding::Binary => {
            for v in field.values.iter() {
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Read a field written by [`save_wavefield1`].
pub fn load_wavefield1(data_path: &Path, header_path: &Path) -> Result<WaveField1, GridError> {
    let header_text = std::fs::read_to_string(header_path)?;
    let header: FieldHeader =
        serde_json::from_str(&header_text).map_err(|e| GridError::Format(e.to_string()))?;
    if header.format != "wavefield1" || header.axes.len() != 1 {
        return Err(GridError::Format(format!("unexpected header format {:?}", header.format)));
    }
    let grid = SpatialGrid::new(header.axes[0].q_min, header.axes[0].dq, header.axes[0].n)?;
    let flat = read_complex_payload(data_path, header.encoding, grid.n())?;
    WaveField1::from_values(grid, Array1::from_vec(flat))
}

fn read_complex_payload(
    data_path: &Path,
    encoding: FieldEncoding,
    total: usize,
) -> Result<Vec<C64>, GridError> {
    let mut flat = Vec::with_capacity(total);
    match encoding {
        FieldEncoding::Csv => {
            let reader = BufReader::new(File::open(data_path)?);
            for line in reader.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let (re_s, im_s) = line
                    .split_once(',')
                    .ok_or_else(|| GridError::Format(format!("bad csv line {line:?}")))?;
                let re: f64 = re_s
                    .trim()
                    .parse()
                    .map_err(|_| GridError::Format(format!("bad float {re_s:?}")))?;
                let im: f64 = im_s
                    .trim()
                    .parse()
                    .map_err(|_| GridError::Format(format!("bad float {im_s:?}")))?;
                flat.push(C64::new(re, im));
            }
        }
        FieldEncoding::Binary => {
            let mut bytes = Vec::new();
            File::open(data_path)?.read_to_end(&mut bytes)?;
            if bytes.len() != total * 16 {
                return Err(GridError::Format(format!(
                    "binary payload holds {} bytes, expected {}",
                    bytes.len(),
                    total * 16
                )));
            }
            for chunk in bytes.chunks_exact(16) {
                let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
                flat.push(C64::new(re, im));
            }
        }
    }
    if flat.len() != total {
        return Err(GridError::Format(format!(
            "data holds {} samples, expected {}",
            flat.len(),
            total
        )));
    }
    Ok(flat)
}

/// Read a field written by [`save_wavefield2`].
pub fn load_wavefield2(data_path: &Path, header_path: &Path) -> Result<WaveField2, GridError> {
    let header_text = std::fs::read_to_string(header_path)?;
    let header: FieldHeader =
        serde_json::from_str(&header_text).map_err(|e| GridError::Format(e.to_string()))?;
    if header.format != "wavefield2" || header.axes.len() != 2 {
        return Err(GridError::Format(format!("unexpected header format {:?}", header.format)));
    }
    let grid1 = SpatialGrid::new(header.axes[0].q_min, header.axes[0].dq, header.axes[0].n)?;
    let grid2 = SpatialGrid::new(header.axes[1].q_min, header.axes[1].dq, header.axes[1].n)?;
    let flat = read_complex_payload(data_path, header.encoding, grid1.n() * grid2.n())?;
    let values = Array2::from_shape_vec((grid1.n(), grid2.n()), flat)
        .map_err(|e| GridError::Format(e.to_string()))?;
    WaveField2::from_values(grid1, grid2, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_grid() -> SpatialGrid {
        SpatialGrid::centered(40.0, 256).unwrap()
    }

    #[test]
    fn grid_construction_rules() {
        assert!(SpatialGrid::new(-10.0, 0.1, 256).is_ok());
        assert!(matches!(SpatialGrid::new(0.0, 0.1, 7), Err(GridError::BadPointCount(7))));
        assert!(matches!(SpatialGrid::new(0.0, 0.1, 100), Err(GridError::BadPointCount(100))));
        assert!(matches!(SpatialGrid::new(0.0, -0.1, 64), Err(GridError::BadSpacing(_))));
        let g = test_grid();
        assert_eq!(g.n(), 256);
        assert!((g.q_min() + 20.0).abs() < 1e-15);
        assert!((g.extent() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_packet_is_normalized_and_centered() {
        let grid = test_grid();
        let psi = gaussian_packet(&grid, 0.0, 1.0, 0.0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(psi.mean_position().abs() <= grid.dq());

        // Even symmetry of the modulus about the center.
        let n = grid.n();
        for k in 1..n / 2 {
            let a = psi.values()[n / 2 + k].norm();
            let b = psi.values()[n / 2 - k].norm();
            assert!((a - b).abs() < 1e-12, "k={k}");
        }

        let boosted = gaussian_packet(&grid, 2.5, 1.0, 0.7).unwrap();
        assert!((boosted.norm() - 1.0).abs() < 1e-12);
        assert!((boosted.mean_position() - 2.5).abs() <= grid.dq());
    }

    #[test]
    fn gaussian_packet_rejects_bad_support() {
        let grid = test_grid();
        assert!(matches!(
            gaussian_packet(&grid, 0.0, 0.1, 0.0),
            Err(GridError::PacketTooNarrow { .. })
        ));
        assert!(matches!(
            gaussian_packet(&grid, 19.0, 1.0, 0.0),
            Err(GridError::PacketOutsideGrid { .. })
        ));
    }

    #[test]
    fn product_state_separates() {
        let grid = test_grid();
        let psi1 = gaussian_packet(&grid, -1.0, 1.0, 0.3).unwrap();
        let psi2 = gaussian_packet(&grid, 2.0, 1.5, 0.0).unwrap();
        let phi = product_state(&psi1, &psi2);
        assert!((phi.norm() - 1.0).abs() < 1e-10);

        // Marginal over q2 recovers |psi1|^2.
        let marg = phi.density_marginal(1);
        for (k, m) in marg.iter().enumerate() {
            let expected = psi1.values()[k].norm_sqr();
            assert!((m - expected).abs() < 1e-10, "k={k}");
        }

        // Swapping the inputs transposes the array exactly.
        let swapped = product_state(&psi2, &psi1);
        for i1 in 0..grid.n() {
            for i2 in 0..grid.n() {
                assert_eq!(phi.values()[(i1, i2)], swapped.values()[(i2, i1)]);
            }
        }
    }

    #[test]
    fn l2_distance_basics() {
        let grid = test_grid();
        let psi1 = gaussian_packet(&grid, 0.0, 1.0, 0.0).unwrap();
        let psi2 = gaussian_packet(&grid, 1.0, 1.2, 0.4).unwrap();
        let a = product_state(&psi1, &psi2);
        assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);

        let mut negated = a.clone();
        negated.values_mut().mapv_inplace(|v| -v);
        let d = l2_distance(&a, &negated).unwrap();
        assert!((d - 2.0 * a.norm()).abs() < 1e-12);
    }

    #[test]
    fn l2_triangle_inequality() {
        let grid = SpatialGrid::centered(40.0, 64).unwrap();
        // Three fixed pseudo-random fields.
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut make = |scale: f64| {
            let values = Array2::from_shape_fn((64, 64), |_| C64::new(next() * scale, next() * scale));
            WaveField2::from_values(grid, grid, values).unwrap()
        };
        let a = make(1.0);
        let b = make(0.7);
        let c = make(1.3);
        let dab = l2_distance(&a, &b).unwrap();
        let dbc = l2_distance(&b, &c).unwrap();
        let dac = l2_distance(&a, &c).unwrap();
        assert!(dac <= dab + dbc + 1e-12);
    }

    #[test]
    fn phase_alignment_recovers_a_pure_phase() {
        let grid = test_grid();
        let psi1 = gaussian_packet(&grid, 0.0, 1.0, 0.2).unwrap();
        let psi2 = gaussian_packet(&grid, 0.5, 1.0, 0.0).unwrap();
        let a = product_state(&psi1, &psi2);
        let mut b = a.clone();
        let rot = C64::from_polar(1.0, 0.7);
        b.values_mut().mapv_inplace(|v| v * rot);

        let alignment = phase_aligned_distance(&a, &b).unwrap();
        assert!((alignment.phase + 0.7).abs() < 1e-12);
        assert!(alignment.distance < 1e-12);

        let same = phase_aligned_distance(&a, &a).unwrap();
        assert!(same.phase.abs() < 1e-14);
        assert!(same.distance < 1e-14);
    }

    #[test]
    fn phase_alignment_reports_orthogonal_fields() {
        let grid = test_grid();
        let psi = gaussian_packet(&grid, 0.0, 1.0, 0.0).unwrap();
        let a = product_state(&psi, &psi);
        // Explicit orthogonalization of an offset packet against `a`.
        let shifted = gaussian_packet(&grid, 1.5, 1.0, 0.3).unwrap();
        let mut b = product_state(&shifted, &psi);
        let overlap = inner_product(&a, &b).unwrap();
        let a_values = a.values().clone();
        b.values_mut().zip_mut_with(&a_values, |bv, av| *bv -= overlap * av);
        match phase_aligned_distance(&a, &b) {
            Err(GridError::OrthogonalFields { distance }) => assert!(distance > 0.5),
            other => panic!("expected orthogonal-fields condition, got {other:?}"),
        }
    }

    #[test]
    fn serialization_round_trips() {
        let grid = SpatialGrid::centered(24.0, 64).unwrap();
        let psi1 = gaussian_packet(&grid, 0.3, 1.0, 0.1).unwrap();
        let psi2 = gaussian_packet(&grid, -0.5, 1.5, -0.2).unwrap();
        let field = product_state(&psi1, &psi2);

        let dir = tempfile::tempdir().unwrap();
        for encoding in [FieldEncoding::Binary, FieldEncoding::Csv] {
            let data = dir.path().join(format!("field-{encoding:?}.dat"));
            let header = dir.path().join(format!("field-{encoding:?}.json"));
            save_wavefield2(&field, &data, &header, encoding).unwrap();
            let loaded = load_wavefield2(&data, &header).unwrap();
            assert_eq!(loaded.grid1(), field.grid1());
            let max_err = field
                .values()
                .iter()
                .zip(loaded.values().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            match encoding {
                // Binary is bit-exact; CSV keeps 17 significant digits.
                FieldEncoding::Binary => assert_eq!(max_err, 0.0),
                FieldEncoding::Csv => assert!(max_err < 1e-16),
            }
        }
    }

    #[test]
    fn single_particle_serialization_round_trips() {
        let grid = SpatialGrid::centered(24.0, 64).unwrap();
        let psi = gaussian_packet(&grid, 0.3, 1.0, -0.4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("psi.bin");
        let header = dir.path().join("psi.json");
        save_wavefield1(&psi, &data, &header, FieldEncoding::Binary).unwrap();
        let loaded = load_wavefield1(&data, &header).unwrap();
        assert_eq!(loaded, psi);
    }
}
