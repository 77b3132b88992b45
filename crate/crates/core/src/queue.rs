//! Exact discrete-event realization of the RS(G,p)/G/1 queue.
//!
//! The server is FCFS, non-idling and starts empty; job `k` occupies it for
//! `V_k / c_n` time units. All metric paths are built from the event list.

use std::path::Path;

use crate::dist::{ArrivalModel, DistributionSpec};
use crate::error::{Error, Result};
use crate::kmt::CoupledSample;
use crate::paths::{reflect, GridPath};

/// Relative slack used when comparing `Σ V_i` against `c_n·t`, so that a
/// departure time `S_k / c_n` recovers `k` despite rounding.
pub const RENEWAL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct QueueInputs {
    pub n: usize,
    pub p: f64,
    pub arrivals: ArrivalModel,
    pub service: DistributionSpec,
    /// Server efficiency: work completed per unit time.
    pub c_n: f64,
}

impl QueueInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::param(format!("join probability {} outside (0, 1]", self.p)));
        }
        if !(self.c_n > 0.0) || !self.c_n.is_finite() {
            return Err(Error::param(format!("server efficiency {} must be positive", self.c_n)));
        }
        Ok(())
    }
}

/// All performance-metric paths of one replication.
#[derive(Clone, Debug)]
pub struct QueueTrace {
    /// `A_n`, accepted arrivals.
    pub arrivals: GridPath,
    /// `W_n`, cumulative offered work.
    pub workload: GridPath,
    /// `Q_n`, number in system.
    pub queue: GridPath,
    /// `D_n`, cumulative busy time.
    pub busy: GridPath,
    /// `I_n = t − D_n`.
    pub idle: GridPath,
    /// `t ↦ M_n(D_n(t))`, completed jobs.
    pub completions: GridPath,
    pub emptying_time: f64,
    pub horizon: f64,
    pub c_n: f64,
}

/// `A_n(t) = Σ_{i ≤ n G_n(t)} ζ_(i)`: a unit jump at the epoch of every
/// accepted customer. Simultaneous arrivals share one knot.
pub fn arrivals_path(sample: &CoupledSample) -> GridPath {
    let epochs: Vec<f64> = sample
        .arrival_order()
        .into_iter()
        .filter(|&i| sample.zeta[i])
        .map(|i| sample.arrivals[i])
        .collect();
    counting_path(&epochs)
}

/// Step path counting sorted event times.
fn counting_path(times: &[f64]) -> GridPath {
    let mut knots = vec![0.0];
    let mut values = vec![0.0];
    for (k, &t) in times.iter().enumerate() {
        let c = (k + 1) as f64;
        if t == *knots.last().unwrap() {
            *values.last_mut().unwrap() = c;
        } else {
            knots.push(t);
            values.push(c);
        }
    }
    GridPath::step(knots, values).expect("event times are sorted")
}

/// `W_n(t) = Σ_{i ≤ A_n(t)} V_i`, with `V` consumed in arrival order.
pub fn workload_path(a: &GridPath, service: &[f64]) -> Result<GridPath> {
    let mut prefix = Vec::with_capacity(service.len() + 1);
    prefix.push(0.0);
    for v in service {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mut values = Vec::with_capacity(a.len());
    for &c in a.values() {
        if !(c >= 0.0) || c.fract() != 0.0 {
            return Err(Error::param(format!("arrival count {c} is not a non-negative integer")));
        }
        let k = c as usize;
        if k >= prefix.len() {
            return Err(Error::param(format!(
                "{k} arrivals but only {} service times",
                service.len()
            )));
        }
        values.push(prefix[k]);
    }
    GridPath::step(a.knots().to_vec(), values)?.with_domain_end(a.domain_end())
}

/// `M_n(t) = sup {0 <= m <= n : Σ_{i ≤ m} V_i <= c_n t}`, comparing with a
/// relative slack of [`RENEWAL_SLACK`].
pub fn truncated_renewal(service: &[f64], c_n: f64, t: f64) -> usize {
    let budget = c_n * t;
    let budget = budget + RENEWAL_SLACK * budget.abs();
    let mut s = 0.0;
    for (m, v) in service.iter().enumerate() {
        s += v;
        if s > budget {
            return m;
        }
    }
    service.len()
}

/// Same as [`truncated_renewal`] on precomputed prefix sums (`prefix[0] = 0`).
pub fn truncated_renewal_prefix(prefix: &[f64], c_n: f64, t: f64) -> usize {
    let budget = c_n * t;
    let budget = budget + RENEWAL_SLACK * budget.abs();
    prefix.partition_point(|&s| s <= budget).saturating_sub(1)
}

/// Runs the FCFS server over the sample.
pub fn simulate(inputs: &QueueInputs, sample: &CoupledSample) -> Result<QueueTrace> {
    inputs.validate()?;
    if sample.n != inputs.n || sample.arrivals.len() != inputs.n || sample.zeta.len() != inputs.n {
        return Err(Error::param(format!(
            "sample built for n = {} but inputs have n = {}",
            sample.n, inputs.n
        )));
    }
    if sample.service.len() != inputs.n {
        return Err(Error::param("sample has the wrong number of service times"));
    }
    if sample.p != inputs.p {
        return Err(Error::param(format!(
            "sample built for p = {} but inputs have p = {}",
            sample.p, inputs.p
        )));
    }
    if sample.service.iter().any(|&v| !(v >= 0.0)) || sample.arrivals.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::param("epochs and service times must be non-negative"));
    }
    let c = inputs.c_n;
    let a = arrivals_path(sample);
    let accepted: Vec<f64> = sample
        .arrival_order()
        .into_iter()
        .filter(|&i| sample.zeta[i])
        .map(|i| sample.arrivals[i])
        .collect();
    let mut prefix = Vec::with_capacity(inputs.n + 1);
    prefix.push(0.0);
    for v in &sample.service {
        prefix.push(prefix.last().unwrap() + v);
    }
    let total_work = *prefix.last().unwrap();
    let max_t = sample.arrivals.iter().copied().fold(0.0, f64::max);
    let horizon = max_t + total_work / c + 1.0;

    // Lindley recursion with busy-period bookkeeping so that the busy time at
    // the k-th departure is exactly S_k / c
    let mut departures = Vec::with_capacity(accepted.len());
    let mut busy_knots = vec![0.0];
    let mut busy_vals = vec![0.0];
    let mut push_busy = |t: f64, v: f64| {
        if t == *busy_knots.last().unwrap() {
            *busy_vals.last_mut().unwrap() = v;
        } else {
            busy_knots.push(t);
            busy_vals.push(v);
        }
    };
    let mut period_start = f64::NEG_INFINITY;
    let mut period_base = 0.0;
    let mut last_dep = f64::NEG_INFINITY;
    for (k, &t) in accepted.iter().enumerate() {
        if t > last_dep {
            period_start = t;
            period_base = prefix[k];
            push_busy(t, prefix[k] / c);
        }
        let dep = period_start + (prefix[k + 1] - period_base) / c;
        push_busy(dep, prefix[k + 1] / c);
        departures.push(dep);
        last_dep = dep;
    }
    let emptying_time = departures.last().copied().unwrap_or(0.0);
    let final_busy = prefix[accepted.len()] / c;
    push_busy(horizon, final_busy);
    let busy = GridPath::linear(busy_knots.clone(), busy_vals.clone())?;
    let idle_vals: Vec<f64> = busy_knots
        .iter()
        .zip(&busy_vals)
        .map(|(t, d)| (t - d).max(0.0))
        .collect();
    let idle = GridPath::linear(busy_knots, idle_vals)?;

    let completions = counting_path(&departures).with_domain_end(horizon)?;
    let mut events: Vec<(f64, f64)> = accepted
        .iter()
        .map(|&t| (t, 1.0))
        .chain(departures.iter().map(|&t| (t, -1.0)))
        .collect();
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut q_knots = vec![0.0];
    let mut q_vals = vec![0.0];
    let mut level = 0.0;
    for (t, d) in events {
        level += d;
        if t == *q_knots.last().unwrap() {
            *q_vals.last_mut().unwrap() = level;
        } else {
            q_knots.push(t);
            q_vals.push(level);
        }
    }
    let queue = GridPath::step(q_knots, q_vals)?.with_domain_end(horizon)?;
    let a = a.with_domain_end(horizon)?;
    let workload = workload_path(&a, &sample.service)?;
    Ok(QueueTrace {
        arrivals: a,
        workload,
        queue,
        busy,
        idle,
        completions,
        emptying_time,
        horizon,
        c_n: c,
    })
}

/// `φ(W_n − c_n·id)`, the unfinished work.
pub fn remaining_workload(trace: &QueueTrace, c_n: f64) -> GridPath {
    reflect(&trace.workload.add_affine(-c_n, 0.0))
}

impl QueueTrace {
    /// Unfinished work from the event engine: offered work minus `c_n·D_n`.
    pub fn unfinished_work(&self, t: f64) -> f64 {
        (self.workload.eval(t) - self.c_n * self.busy.eval(t)).max(0.0)
    }

    pub fn max_queue(&self) -> f64 {
        self.queue.values().iter().copied().fold(0.0, f64::max)
    }

    /// Summary row: `n,p,c_n,max_q,emptying_time,total_idle`, where the idle
    /// time is measured up to the emptying time.
    pub fn summary_row(&self, n: usize, p: f64) -> String {
        format!(
            "{},{},{},{},{},{}",
            n,
            p,
            self.c_n,
            self.max_queue(),
            self.emptying_time,
            self.idle.eval(self.emptying_time)
        )
    }

    pub const SUMMARY_HEADER: &'static str = "n,p,c_n,max_q,emptying_time,total_idle";

    /// Writes one CSV per path into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, path) in [
            ("arrivals", &self.arrivals),
            ("workload", &self.workload),
            ("queue", &self.queue),
            ("busy", &self.busy),
            ("idle", &self.idle),
            ("completions", &self.completions),
        ] {
            let file = dir.join(format!("{name}.csv"));
            std::fs::write(&file, path.to_csv()).map_err(|e| Error::io(&file, e))?;
        }
        Ok(())
    }
}
