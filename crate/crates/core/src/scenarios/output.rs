//! CSV writers for connection tables and trajectories.

use std::io::Write;

use serde::Serialize;

use crate::connection::ConnectionComparison;
use crate::evolution::TrajectoryPoint;

#[derive(Serialize)]
struct ConnectionRow {
    t: f64,
    entry: &'static str,
    analytic_re: f64,
    analytic_im: f64,
    numeric_re: f64,
    numeric_im: f64,
    abs_error: f64,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    re_upper: f64,
    im_upper: f64,
    re_lower: f64,
    im_lower: f64,
    norm: f64,
    #[serde(rename = "instantaneous_E_plus")]
    e_plus: f64,
    #[serde(rename = "instantaneous_E_minus")]
    e_minus: f64,
}

pub fn write_connection_csv<W: Write>(rows: &[ConnectionComparison], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(ConnectionRow {
            t: r.t,
            entry: r.entry,
            analytic_re: r.analytic.re,
            analytic_im: r.analytic.im,
            numeric_re: r.numeric.re,
            numeric_im: r.numeric.im,
            abs_error: r.abs_error,
        })?;
    }
    w.flush()
}

/// One row per recorded step; the state is in the fixed basis.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(TrajectoryRow {
            t: p.t,
            re_upper: p.state.upper.re,
            im_upper: p.state.upper.im,
            re_lower: p.state.lower.re,
            im_lower: p.state.lower.im,
            norm: p.state.norm(),
            e_plus: p.e_plus,
            e_minus: p.e_minus,
        })?;
    }
    w.flush()
}
