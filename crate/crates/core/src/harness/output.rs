//! Versioned CSV/JSONL writers. Every file opens with
//! `# poisson-nav v1 <schema>`.

use std::io::{self, Write};

use serde::Serialize;

use crate::nav::PathSample;
use crate::ratefn::{CgfGrid, RateValue, SegmentCgfEstimate};
use crate::renewal::{EstimateWithCI, SegmentRecord, TailCurve};

pub const SCHEMA_VERSION: &str = "v1";

pub fn header<W: Write>(w: &mut W, schema: &str) -> io::Result<()> {
    writeln!(w, "# poisson-nav {SCHEMA_VERSION} {schema}")
}

/// Floats as shortest round-trip decimals, infinities as `inf`/`-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

#[derive(Serialize)]
struct TrajectoryLine<'a> {
    path_id: u64,
    seed: u64,
    lambda: f64,
    theta: f64,
    steps: Vec<[f64; 2]>,
    renewals: &'a [usize],
}

/// One JSON object per path; `steps` lists the waypoints `V_1, …, V_n`.
pub fn write_trajectory_jsonl<W: Write>(w: &mut W, path: &PathSample) -> io::Result<()> {
    let line = TrajectoryLine {
        path_id: path.path_id,
        seed: path.seed,
        lambda: path.params.lambda,
        theta: path.params.theta,
        steps: path.waypoints().iter().map(|p| [p.x, p.y]).collect(),
        renewals: &path.renewal_indices,
    };
    serde_json::to_writer(&mut *w, &line)?;
    writeln!(w)
}

pub const TRAJECTORY_CSV_COLUMNS: &str = "path_id,step,x,y,renewal";

pub fn write_trajectory_csv<W: Write>(w: &mut W, path: &PathSample) -> io::Result<()> {
    for (i, (v, s)) in path.waypoints().iter().zip(&path.steps).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            path.path_id,
            i + 1,
            fmt_f64(v.x),
            fmt_f64(v.y),
            u8::from(s.history_empty_after)
        )?;
    }
    Ok(())
}

pub const SUMMARY_COLUMNS: &str = "path_id,n_steps,final_x,final_y,n_renewals";

pub fn write_summary_row<W: Write>(w: &mut W, path: &PathSample) -> io::Result<()> {
    let v = path.final_point();
    writeln!(
        w,
        "{},{},{},{},{}",
        path.path_id,
        path.len(),
        fmt_f64(v.x),
        fmt_f64(v.y),
        path.renewal_indices.len()
    )
}

pub fn write_segments_csv<W: Write>(w: &mut W, segs: &[SegmentRecord]) -> io::Result<()> {
    header(w, "segments")?;
    writeln!(w, "path_id,idx,Xp,Yp,gap")?;
    // one segment per stream: the stream index is the path id
    for (i, s) in segs.iter().enumerate() {
        writeln!(w, "{i},1,{},{},{}", fmt_f64(s.xp), fmt_f64(s.yp), s.gap)?;
    }
    Ok(())
}

pub fn write_estimate_csv<W: Write>(w: &mut W, name: &str, e: &EstimateWithCI, reference: Option<f64>) -> io::Result<()> {
    header(w, "estimate")?;
    writeln!(w, "quantity,value,stderr,ci_low,ci_high,n,seed,reference")?;
    writeln!(
        w,
        "{name},{},{},{},{},{},{},{}",
        fmt_f64(e.value),
        fmt_f64(e.stderr),
        fmt_f64(e.ci_low),
        fmt_f64(e.ci_high),
        e.n,
        e.seed,
        reference.map(fmt_f64).unwrap_or_default()
    )
}

pub fn write_tail_csv<W: Write>(w: &mut W, tail: &TailCurve) -> io::Result<()> {
    header(w, "tail")?;
    writeln!(w, "n,survival,ci_low,ci_high")?;
    for i in 0..tail.levels.len() {
        writeln!(
            w,
            "{},{},{},{}",
            tail.levels[i],
            fmt_f64(tail.survival[i]),
            fmt_f64(tail.ci_low[i]),
            fmt_f64(tail.ci_high[i])
        )?;
    }
    Ok(())
}

/// Rate table: `x, value, witness_1..witness_k, converged`.
pub fn write_rate_csv<W: Write>(w: &mut W, x_name: &str, witness_names: &[&str], rows: &[(f64, RateValue)]) -> io::Result<()> {
    header(w, "rate")?;
    write!(w, "{x_name},value")?;
    for n in witness_names {
        write!(w, ",{n}")?;
    }
    writeln!(w, ",converged")?;
    for (x, r) in rows {
        write!(w, "{},{}", fmt_f64(*x), fmt_f64(r.value))?;
        for k in 0..witness_names.len() {
            match r.witness.get(k) {
                Some(v) => write!(w, ",{}", fmt_f64(*v))?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w, ",{}", r.converged)?;
    }
    Ok(())
}

pub fn write_cgf_csv<W: Write>(w: &mut W, grid: &CgfGrid, mc: Option<&[SegmentCgfEstimate]>) -> io::Result<()> {
    header(w, "cgf")?;
    match mc {
        None => writeln!(w, "gamma1,gamma2,value,finite")?,
        Some(_) => writeln!(w, "gamma1,gamma2,value,finite,mc_value,mc_stderr,mc_unstable")?,
    }
    for (i, g) in grid.gamma.iter().enumerate() {
        write!(
            w,
            "{},{},{},{}",
            fmt_f64(g[0]),
            fmt_f64(g[1]),
            fmt_f64(grid.values[i]),
            grid.finite_mask[i]
        )?;
        if let Some(m) = mc {
            let e = &m[i];
            write!(w, ",{},{},{}", fmt_f64(e.estimate.value), fmt_f64(e.estimate.stderr), e.unstable)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
