use std::fmt::Write as _;

use crate::error::{Error, Result};

/// How a path was built. Step paths are flat between knots; linear paths
/// interpolate and may also jump at knots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interp {
    Step,
    Linear,
}

impl Interp {
    fn tag(self) -> &'static str {
        match self {
            Interp::Step => "step",
            Interp::Linear => "linear",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    knots: Vec<f64>,
    values: Vec<f64>,
    left: Vec<f64>,
    mode: Interp,
    domain_end: f64,
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.is_empty() {
        return Err(Error::param("path needs at least one knot"));
    }
    if !(knots[0] >= 0.0) {
        return Err(Error::param(format!("first knot {} is negative", knots[0])));
    }
    for w in knots.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::param(format!(
                "knots not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

impl GridPath {
    /// Right-continuous step path.
    pub fn step(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        if values.len() != knots.len() {
            return Err(Error::param("values and knots differ in length"));
        }
        let mut left = Vec::with_capacity(values.len());
        left.push(values[0]);
        left.extend_from_slice(&values[..values.len() - 1]);
        let domain_end = *knots.last().unwrap();
        Ok(Self {
            knots,
            values,
            left,
            mode: Interp::Step,
            domain_end,
        })
    }

    /// Continuous piecewise-linear path.
    pub fn linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        if values.len() != knots.len() {
            return Err(Error::param("values and knots differ in length"));
        }
        let domain_end = *knots.last().unwrap();
        Ok(Self {
            left: values.clone(),
            knots,
            values,
            mode: Interp::Linear,
            domain_end,
        })
    }

    /// Piecewise-linear path with jumps: `left[i]` is the limit from the left
    /// at `knots[i]`.
    pub fn linear_with_jumps(knots: Vec<f64>, values: Vec<f64>, mut left: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        if values.len() != knots.len() || left.len() != knots.len() {
            return Err(Error::param("values, left limits and knots differ in length"));
        }
        left[0] = values[0];
        let domain_end = *knots.last().unwrap();
        Ok(Self {
            knots,
            values,
            left,
            mode: Interp::Linear,
            domain_end,
        })
    }

    /// Extends the nominal domain. The path stays constant past its last knot.
    pub fn with_domain_end(mut self, end: f64) -> Result<Self> {
        if end < *self.knots.last().unwrap() {
            return Err(Error::param("domain end precedes the last knot"));
        }
        self.domain_end = end;
        Ok(self)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_limits(&self) -> &[f64] {
        &self.left
    }

    pub fn mode(&self) -> Interp {
        self.mode
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Index of the last knot `<= t`, if any.
    fn locate(&self, t: f64) -> Option<usize> {
        let i = self.knots.partition_point(|&k| k <= t);
        i.checked_sub(1)
    }

    /// Value at `t` (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => self.left[0],
            Some(i) if i + 1 == self.knots.len() => self.values[i],
            Some(i) => {
                let (k0, k1) = (self.knots[i], self.knots[i + 1]);
                let (v0, v1) = (self.values[i], self.left[i + 1]);
                if v0 == v1 {
                    v0
                } else {
                    v0 + (v1 - v0) * ((t - k0) / (k1 - k0))
                }
            }
        }
    }

    /// Limit from the left at `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|&k| k < t);
        if i < self.knots.len() && self.knots[i] == t {
            return self.left[i];
        }
        self.eval(t)
    }

    /// Multiplies every value by `c`.
    pub fn scale(&self, c: f64) -> GridPath {
        GridPath {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            left: self.left.iter().map(|v| v * c).collect(),
            mode: self.mode,
            domain_end: self.domain_end,
        }
    }

    /// Applies `f` to every right value and left limit. Only meaningful for
    /// affine or otherwise segment-preserving maps.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> GridPath {
        GridPath {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            left: self.left.iter().map(|&v| f(v)).collect(),
            mode: self.mode,
            domain_end: self.domain_end,
        }
    }

    /// `t ↦ self(t) + slope·t + intercept` on `[first knot, domain_end]`.
    /// The domain end is inserted as a knot so the drift is carried to it.
    pub fn add_affine(&self, slope: f64, intercept: f64) -> GridPath {
        let mut knots = self.knots.clone();
        let mut values = self.values.clone();
        let mut left = self.left.clone();
        if self.domain_end > *knots.last().unwrap() {
            let last = *values.last().unwrap();
            knots.push(self.domain_end);
            values.push(last);
            left.push(last);
        }
        for i in 0..knots.len() {
            let d = slope * knots[i] + intercept;
            values[i] += d;
            left[i] += d;
        }
        let mode = if slope == 0.0 { self.mode } else { Interp::Linear };
        GridPath {
            knots,
            values,
            left,
            mode,
            domain_end: self.domain_end,
        }
    }

    /// `ca·a + cb·b`, exact on the merged knot set.
    pub fn combine(a: &GridPath, b: &GridPath, ca: f64, cb: f64) -> GridPath {
        let mut knots = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.knots.get(i), b.knots.get(j)) {
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(&x), Some(&y)) if y < x => {
                    j += 1;
                    y
                }
                (Some(&x), Some(_)) => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            knots.push(next);
        }
        let mut values = Vec::with_capacity(knots.len());
        let mut left = Vec::with_capacity(knots.len());
        for &t in &knots {
            values.push(ca * a.eval(t) + cb * b.eval(t));
            left.push(ca * a.eval_left(t) + cb * b.eval_left(t));
        }
        left[0] = values[0];
        let mode = if a.mode == Interp::Step && b.mode == Interp::Step {
            Interp::Step
        } else {
            Interp::Linear
        };
        GridPath {
            knots,
            values,
            left,
            mode,
            domain_end: a.domain_end.max(b.domain_end),
        }
    }

    /// Writes `(t, value, mode)` rows. A jump knot gets two rows with the
    /// same `t`: the left limit first, then the value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value,mode\n");
        let tag = self.mode.tag();
        for i in 0..self.len() {
            if i > 0 && self.left[i] != self.values[i] && self.mode == Interp::Linear {
                let _ = writeln!(out, "{},{},{}", self.knots[i], self.left[i], tag);
            }
            let _ = writeln!(out, "{},{},{}", self.knots[i], self.values[i], tag);
        }
        out
    }

    /// Parses the format written by [`GridPath::to_csv`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<(f64, f64)> = Vec::new();
        let mut mode = None;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("expected 3 fields, got {}", rec.len())));
            }
            let t: f64 = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad time {:?}", &rec[0])))?;
            let v: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad value {:?}", &rec[1])))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite value {v}")));
            }
            let m = match &rec[2] {
                "step" => Interp::Step,
                "linear" => Interp::Linear,
                other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
            };
            if *mode.get_or_insert(m) != m {
                return Err(Error::Parse("mixed modes in one path".into()));
            }
            rows.push((t, v));
        }
        let mode = mode.ok_or_else(|| Error::Parse("empty path".into()))?;
        let mut knots = Vec::new();
        let mut values = Vec::new();
        let mut left = Vec::new();
        let mut i = 0;
        while i < rows.len() {
            let (t, v) = rows[i];
            if i + 1 < rows.len() && rows[i + 1].0 == t && mode == Interp::Linear {
                if i + 2 < rows.len() && rows[i + 2].0 == t {
                    return Err(Error::Parse(format!("more than two rows at t={t}")));
                }
                knots.push(t);
                left.push(v);
                values.push(rows[i + 1].1);
                i += 2;
            } else {
                knots.push(t);
                left.push(v);
                values.push(v);
                i += 1;
            }
        }
        let path = match mode {
            Interp::Step => GridPath::step(knots, values),
            Interp::Linear => GridPath::linear_with_jumps(knots, values, left),
        };
        path.map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Running infimum `t ↦ inf_{u ≤ t} f(u)`.
///
/// Where a falling linear segment crosses the current minimum a knot is
/// inserted at the crossing, so the result is exact between knots as well.
pub fn running_infimum(p: &GridPath) -> GridPath {
    let n = p.len();
    let mut knots = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut m = p.values[0].min(p.left[0]);
    knots.push(p.knots[0]);
    values.push(m);
    left.push(m);
    for i in 1..n {
        let (k0, k1) = (p.knots[i - 1], p.knots[i]);
        let (v0, w) = (p.values[i - 1], p.left[i]);
        if w < m && v0 > m {
            let t = k0 + (k1 - k0) * ((v0 - m) / (v0 - w));
            if t > k0 && t < k1 {
                knots.push(t);
                values.push(m);
                left.push(m);
            }
        }
        let before = m.min(w);
        m = before.min(p.values[i]);
        knots.push(k1);
        left.push(before);
        values.push(m);
    }
    GridPath {
        knots,
        values,
        left,
        mode: p.mode,
        domain_end: p.domain_end,
    }
}

/// Skorokhod reflection `φ(f) = f − inf_{u ≤ ·} f(u)`.
pub fn reflect(p: &GridPath) -> GridPath {
    let inf = running_infimum(p);
    let mut out = GridPath::combine(p, &inf, 1.0, -1.0);
    for v in out.values.iter_mut().chain(out.left.iter_mut()) {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out.mode = p.mode;
    out
}

/// `sup |p1 − p2|` over the overlap of the two domains.
///
/// The difference of two paths is itself piecewise linear on the merged
/// knots, so checking right values and left limits at every knot is exact;
/// a δ-spaced grid is evaluated as well. When a path stands in for a
/// continuous process sampled at its knots, the result is exact for that
/// representation and a lower bound for the underlying process.
pub fn sup_distance(p1: &GridPath, p2: &GridPath, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::param("resolution must be positive"));
    }
    let lo = p1.knots[0].max(p2.knots[0]);
    let hi = p1.domain_end.min(p2.domain_end);
    if lo > hi {
        return Err(Error::param(format!(
            "domains [{}, {}] and [{}, {}] do not overlap",
            p1.knots[0], p1.domain_end, p2.knots[0], p2.domain_end
        )));
    }
    let diff = GridPath::combine(p1, p2, 1.0, -1.0);
    let mut best = (diff.eval(lo)).abs().max(diff.eval(hi).abs());
    if hi > lo {
        best = best.max(diff.eval_left(hi).abs());
    }
    for i in 0..diff.len() {
        let t = diff.knots[i];
        if t > lo && t <= hi {
            best = best.max(diff.left[i].abs());
        }
        if t >= lo && t < hi {
            best = best.max(diff.values[i].abs());
        }
    }
    let steps = ((hi - lo) / delta).floor() as usize;
    for k in 0..=steps.min(10_000_000) {
        best = best.max(diff.eval(lo + k as f64 * delta).abs());
    }
    Ok(best)
}
