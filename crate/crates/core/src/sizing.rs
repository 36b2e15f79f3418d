//! Closed-form model sizes for the proposed mobility model and three
//! baselines (time-space network, modified time-space network, and sliding
//! window), evaluated in exact integer arithmetic.
//!
//! The baseline continuous-variable counts are not available in closed form
//! and are reported as `None`.

use std::io::Write;

use thiserror::Error;

use crate::scenario::TravelTimeMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub model: &'static str,
    pub nodes: u64,
    pub mers: u64,
    pub spans: u64,
    pub binary: u64,
    pub continuous: Option<u64>,
    pub constraints: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SizingError {
    #[error("N, M and D must all be at least 1")]
    Parameters,
    #[error("travel-time matrix is {got}x{got} but N = {expected}")]
    Dimension { got: usize, expected: u64 },
    #[error("{model}: {what} formula evaluates to {value}, below zero")]
    Negative { model: &'static str, what: &'static str, value: i128 },
}

pub const PROPOSED: &str = "proposed";
pub const TSN: &str = "tsn";
pub const MODIFIED_TSN: &str = "modified-tsn";
pub const SWBM: &str = "swbm";

fn check(n: u64, m: u64, d: u64) -> Result<(), SizingError> {
    if n == 0 || m == 0 || d == 0 {
        return Err(SizingError::Parameters);
    }
    Ok(())
}

fn check_matrix(n: u64, t: &TravelTimeMatrix) -> Result<(), SizingError> {
    if t.len() as u64 != n {
        return Err(SizingError::Dimension {
            got: t.len(),
            expected: n,
        });
    }
    Ok(())
}

fn nonneg(model: &'static str, what: &'static str, value: i128) -> Result<u64, SizingError> {
    u64::try_from(value).map_err(|_| SizingError::Negative { model, what, value })
}

/// `M(D+1)(2N+1)` binaries, `2M(D+1)` continuous, `MD(5N+6) + 7M` constraints.
pub fn size_proposed(n: u64, m: u64, d: u64) -> Result<SizeReport, SizingError> {
    check(n, m, d)?;
    Ok(SizeReport {
        model: PROPOSED,
        nodes: n,
        mers: m,
        spans: d,
        binary: m * (d + 1) * (2 * n + 1),
        continuous: Some(2 * m * (d + 1)),
        constraints: m * d * (5 * n + 6) + 7 * m,
    })
}

/// Virtual nodes of the time-space network: upper-triangle travel-time sum
/// minus `N(N-1)/2`.
pub fn virtual_nodes(t: &TravelTimeMatrix) -> i128 {
    let n = t.len() as i128;
    i128::from(t.upper_triangle_total()) - n * (n - 1) / 2
}

/// `DM(N² + 2Nv)` binaries, `DM(N² + 3Nv + 1) - M(N² - N + 2Nv)` constraints.
pub fn size_tsn(n: u64, m: u64, d: u64, t: &TravelTimeMatrix) -> Result<SizeReport, SizingError> {
    check(n, m, d)?;
    check_matrix(n, t)?;
    let (ni, mi, di) = (i128::from(n), i128::from(m), i128::from(d));
    let nv = virtual_nodes(t);
    let binary = di * mi * (ni * ni + 2 * nv);
    let constraints = di * mi * (ni * ni + 3 * nv + 1) - mi * (ni * ni - ni + 2 * nv);
    Ok(SizeReport {
        model: TSN,
        nodes: n,
        mers: m,
        spans: d,
        binary: nonneg(TSN, "binary", binary)?,
        continuous: None,
        constraints: nonneg(TSN, "constraint", constraints)?,
    })
}

/// `M[N²(D+1) - ΣT - N]` binaries, `MD(N+1)` constraints.
pub fn size_modified_tsn(n: u64, m: u64, d: u64, t: &TravelTimeMatrix) -> Result<SizeReport, SizingError> {
    check(n, m, d)?;
    check_matrix(n, t)?;
    let (ni, mi, di) = (i128::from(n), i128::from(m), i128::from(d));
    let binary = mi * (ni * ni * (di + 1) - i128::from(t.total()) - ni);
    Ok(SizeReport {
        model: MODIFIED_TSN,
        nodes: n,
        mers: m,
        spans: d,
        binary: nonneg(MODIFIED_TSN, "binary", binary)?,
        continuous: None,
        constraints: m * d * (n + 1),
    })
}

/// `M(D+1)(N+1)` binaries, `M[(2D+1)ΣT - ΣT² + 4D + 4] / 2` constraints.
pub fn size_swbm(n: u64, m: u64, d: u64, t: &TravelTimeMatrix) -> Result<SizeReport, SizingError> {
    check(n, m, d)?;
    check_matrix(n, t)?;
    let (mi, di) = (i128::from(m), i128::from(d));
    // (2D+1)ΣT - ΣT² = 2DΣT + Σ T(1-T) is always even
    let twice = mi * ((2 * di + 1) * i128::from(t.total()) - i128::from(t.total_squares()) + 4 * di + 4);
    Ok(SizeReport {
        model: SWBM,
        nodes: n,
        mers: m,
        spans: d,
        binary: m * (d + 1) * (n + 1),
        continuous: None,
        constraints: nonneg(SWBM, "constraint", twice / 2)?,
    })
}

/// The smallest sliding-window constraint count, reached when every
/// off-diagonal travel time is one span: `M[D(N² - N) + 2D + 2]`.
pub fn swbm_minimum_constraints(n: u64, m: u64, d: u64) -> u64 {
    m * (d * (n * n - n) + 2 * d + 2)
}

/// All four reports, proposed model first.
pub fn size_all(n: u64, m: u64, d: u64, t: &TravelTimeMatrix) -> Result<Vec<SizeReport>, SizingError> {
    Ok(vec![
        size_proposed(n, m, d)?,
        size_tsn(n, m, d, t)?,
        size_modified_tsn(n, m, d, t)?,
        size_swbm(n, m, d, t)?,
    ])
}

/// Writes `model,N,M,D,binary,continuous,constraints` rows; unknown
/// continuous counts are empty cells.
pub fn write_sizes_csv<W: Write>(reports: &[SizeReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "N", "M", "D", "binary", "continuous", "constraints"])?;
    for r in reports {
        w.write_record([
            r.model.to_string(),
            r.nodes.to_string(),
            r.mers.to_string(),
            r.spans.to_string(),
            r.binary.to_string(),
            r.continuous.map(|c| c.to_string()).unwrap_or_default(),
            r.constraints.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Travel-time matrix with every off-diagonal entry equal to `value`.
pub fn uniform_travel_times(n: usize, value: u32) -> TravelTimeMatrix {
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|k| if i == k { 0 } else { value }).collect())
        .collect();
    TravelTimeMatrix::from_rows(&rows).expect("uniform matrix is valid")
}
