//! Delimited-text export of trajectories, spectra and scaling curves.
//!
//! Numbers are written with 17 significant digits so they parse back to the
//! same `f64`.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{FractalEstimate, Spectrum};
use crate::integrate::{StepStats, Termination, Trajectory};
use crate::model::PhaseState;

pub const TRAJECTORY_HEADER: &str = "zeta,N,M,P,Q";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (z, s) in traj.zetas.iter().zip(&traj.states) {
        writeln!(w, "{},{},{},{},{}", num(*z), num(s.n), num(s.m), num(s.p), num(s.q))?;
    }
    Ok(())
}

/// Reads `(zetas, states)` back from [`write_trajectory_csv`] output.
pub fn read_trajectory_csv<R: BufRead>(r: R) -> io::Result<(Vec<f64>, Vec<PhaseState>)> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == TRAJECTORY_HEADER => {}
        _ => return Err(bad(format!("expected header `{TRAJECTORY_HEADER}`"))),
    }
    let mut zetas = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        if vals.len() != 5 {
            return Err(bad(format!("row {}: expected 5 fields, got {}", i + 1, vals.len())));
        }
        zetas.push(vals[0]);
        states.push(PhaseState::new(vals[1], vals[2], vals[3], vals[4]));
    }
    Ok((zetas, states))
}

/// Sidecar document for a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub termination: Termination,
    pub stats: StepStats,
    pub sample_interval: f64,
    pub samples: usize,
}

impl TrajectoryMetadata {
    pub fn of(traj: &Trajectory) -> Self {
        Self {
            termination: traj.termination,
            stats: traj.stats,
            sample_interval: traj.sample_interval,
            samples: traj.len(),
        }
    }
}

pub fn write_spectrum_csv<W: Write>(mut w: W, spec: &Spectrum) -> io::Result<()> {
    writeln!(w, "frequency,power")?;
    for (f, p) in spec.frequencies.iter().zip(&spec.power) {
        writeln!(w, "{},{}", num(*f), num(*p))?;
    }
    Ok(())
}

pub fn write_acf_csv<W: Write>(mut w: W, acf: &[f64], dzeta: f64) -> io::Result<()> {
    writeln!(w, "lag,zeta_lag,acf")?;
    for (k, r) in acf.iter().enumerate() {
        writeln!(w, "{k},{},{}", num(k as f64 * dzeta), num(*r))?;
    }
    Ok(())
}

pub fn write_scaling_csv<W: Write>(mut w: W, est: &FractalEstimate) -> io::Result<()> {
    writeln!(w, "log_n,log_R,local_slope")?;
    for ((n, r), s) in est.log_n.iter().zip(&est.log_r).zip(&est.local_slopes) {
        writeln!(w, "{},{},{}", num(*n), num(*r), num(*s))?;
    }
    Ok(())
}
