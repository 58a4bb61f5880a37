//! Integrable potentials on `[0, pi]`.
//!
//! Every kind supports exact integration over a subinterval, which is all the
//! propagator ever asks for: cells see the average of `q`, never a point
//! value, so `x^p` with `-1 < p < 0` is handled without touching the
//! singularity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when snapping user-supplied table endpoints onto `0` and `pi`.
const ENDPOINT_SNAP: f64 = 1e-12;

const KINDS: [&str; 6] = ["zero", "constant", "cosine", "step", "power", "table"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialKind {
    Zero,
    /// `q(x) = c`
    Constant { c: f64 },
    /// `q(x) = a cos(f x)`
    Cosine { a: f64, f: f64 },
    /// `q(x) = v` on `[l, r]`, zero elsewhere.
    Step { v: f64, l: f64, r: f64 },
    /// `q(x) = a x^p`, `p > -1`.
    Power { a: f64, p: f64 },
    /// Piecewise-linear interpolant through `(x, q)` breakpoints.
    Table { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    l1_norm: f64,
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        let kind = validate(kind)?;
        let l1_norm = l1_norm(&kind);
        if !l1_norm.is_finite() {
            return Err(Error::InvalidParameter("L1 norm is not finite".into()));
        }
        Ok(Potential { kind, l1_norm })
    }

    pub fn zero() -> Self {
        Potential { kind: PotentialKind::Zero, l1_norm: 0.0 }
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(PotentialKind::Constant { c })
    }

    pub fn cosine(a: f64, f: f64) -> Result<Self> {
        Self::new(PotentialKind::Cosine { a, f })
    }

    pub fn step(v: f64, l: f64, r: f64) -> Result<Self> {
        Self::new(PotentialKind::Step { v, l, r })
    }

    pub fn power(a: f64, p: f64) -> Result<Self> {
        Self::new(PotentialKind::Power { a, p })
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(PotentialKind::Table { points })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// `int_0^pi |q|`
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// True when `q` is unbounded at `x = 0` (power kind with a negative exponent).
    pub fn singular_at_origin(&self) -> bool {
        matches!(self.kind, PotentialKind::Power { a, p } if p < 0.0 && a != 0.0)
    }

    /// Short human-readable label, e.g. `cosine(a=1,f=2)`.
    pub fn label(&self) -> String {
        match &self.kind {
            PotentialKind::Zero => "zero".into(),
            PotentialKind::Constant { c } => format!("constant(c={c})"),
            PotentialKind::Cosine { a, f } => format!("cosine(a={a},f={f})"),
            PotentialKind::Step { v, l, r } => format!("step(v={v},l={l},r={r})"),
            PotentialKind::Power { a, p } => format!("power(a={a},p={p})"),
            PotentialKind::Table { points } => format!("table({} points)", points.len()),
        }
    }

    /// Point value. Infinite at a power singularity; oracles only.
    pub fn value_at(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant { c } => *c,
            PotentialKind::Cosine { a, f } => a * (f * x).cos(),
            PotentialKind::Step { v, l, r } => {
                if x >= *l && x <= *r {
                    *v
                } else {
                    0.0
                }
            }
            PotentialKind::Power { a, p } => a * x.powf(*p),
            PotentialKind::Table { points } => {
                let i = points.partition_point(|pt| pt[0] <= x).clamp(1, points.len() - 1);
                lerp(points[i - 1], points[i], x)
            }
        }
    }

    /// `int_a^b q` for `0 <= a <= b <= pi`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant { c } => c * (b - a),
            PotentialKind::Cosine { a: amp, f } => {
                let w = b - a;
                if *f == 0.0 {
                    amp * w
                } else {
                    // sin(fb) - sin(fa) in product form, stable for narrow cells
                    2.0 * amp * (f * 0.5 * (a + b)).cos() * (f * 0.5 * w).sin() / f
                }
            }
            PotentialKind::Step { v, l, r } => {
                let lo = a.max(*l);
                let hi = b.min(*r);
                if hi > lo {
                    v * (hi - lo)
                } else {
                    0.0
                }
            }
            PotentialKind::Power { a: amp, p } => {
                let e = p + 1.0;
                let diff = if a > 0.0 {
                    a.powf(e) * (e * ((b - a) / a).ln_1p()).exp_m1()
                } else {
                    b.powf(e)
                };
                amp * diff / e
            }
            PotentialKind::Table { points } => {
                let mut sum = 0.0;
                for seg in points.windows(2) {
                    let (p0, p1) = (seg[0], seg[1]);
                    let lo = a.max(p0[0]);
                    let hi = b.min(p1[0]);
                    if hi > lo {
                        sum += 0.5 * (hi - lo) * (lerp(p0, p1, lo) + lerp(p0, p1, hi));
                    }
                }
                sum
            }
        }
    }
}

/// Parse a JSON potential document, e.g. `{"kind": "power", "a": 1, "p": -0.5}`.
pub fn parse_potential(doc: &str) -> Result<Potential> {
    let value: serde_json::Value =
        serde_json::from_str(doc).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Parse("missing string field `kind`".into()))?;
    if !KINDS.contains(&kind) {
        return Err(Error::UnknownKind(kind.to_string()));
    }
    let kind: PotentialKind =
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    Potential::new(kind)
}

/// Average of `q` over `[a, b]`.
pub fn eval_cell_average(q: &Potential, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::EmptyInterval { a, b });
    }
    if a < 0.0 || b > PI {
        return Err(Error::DomainMismatch(format!("[{a}, {b}] is not inside [0, pi]")));
    }
    Ok(q.integral(a, b) / (b - a))
}

fn lerp(p0: [f64; 2], p1: [f64; 2], x: f64) -> f64 {
    let w = p1[0] - p0[0];
    let s = ((x - p0[0]) / w).clamp(0.0, 1.0);
    p0[1] + s * (p1[1] - p0[1])
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn validate(kind: PotentialKind) -> Result<PotentialKind> {
    match &kind {
        PotentialKind::Zero => {}
        PotentialKind::Constant { c } => finite("c", *c)?,
        PotentialKind::Cosine { a, f } => {
            finite("a", *a)?;
            finite("f", *f)?;
        }
        PotentialKind::Step { v, l, r } => {
            finite("v", *v)?;
            finite("l", *l)?;
            finite("r", *r)?;
            if !(*l >= 0.0 && l < r && *r <= PI) {
                return Err(Error::DomainMismatch(format!(
                    "step support [{l}, {r}] must satisfy 0 <= l < r <= pi"
                )));
            }
        }
        PotentialKind::Power { a, p } => {
            finite("a", *a)?;
            finite("p", *p)?;
            if *p <= -1.0 {
                return Err(Error::NonIntegrableExponent(*p));
            }
        }
        PotentialKind::Table { points } => {
            if points.len() < 2 {
                return Err(Error::InvalidParameter("table needs at least two points".into()));
            }
            for pt in points {
                finite("table x", pt[0])?;
                finite("table q", pt[1])?;
            }
            if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                return Err(Error::NonMonotoneTable);
            }
            let first = points[0][0];
            let last = points[points.len() - 1][0];
            if first.abs() > ENDPOINT_SNAP || (last - PI).abs() > ENDPOINT_SNAP {
                return Err(Error::DomainMismatch(format!(
                    "table must span [0, pi], got [{first}, {last}]"
                )));
            }
            let mut points = points.clone();
            let n = points.len();
            points[0][0] = 0.0;
            points[n - 1][0] = PI;
            return Ok(PotentialKind::Table { points });
        }
    }
    Ok(kind)
}

/// `int_0^U |cos u| du` for `U >= 0`.
fn abs_cos_integral(u: f64) -> f64 {
    let periods = (u / PI).floor();
    let r = u - periods * PI;
    let partial = if r <= 0.5 * PI { r.sin() } else { 2.0 - r.sin() };
    2.0 * periods + partial
}

fn l1_norm(kind: &PotentialKind) -> f64 {
    match kind {
        PotentialKind::Zero => 0.0,
        PotentialKind::Constant { c } => c.abs() * PI,
        PotentialKind::Cosine { a, f } => {
            if *f == 0.0 {
                a.abs() * PI
            } else {
                a.abs() / f.abs() * abs_cos_integral(f.abs() * PI)
            }
        }
        PotentialKind::Step { v, l, r } => v.abs() * (r - l),
        PotentialKind::Power { a, p } => a.abs() * PI.powf(p + 1.0) / (p + 1.0),
        PotentialKind::Table { points } => points
            .windows(2)
            .map(|w| {
                let h = w[1][0] - w[0][0];
                let (q0, q1) = (w[0][1], w[1][1]);
                if q0 * q1 >= 0.0 {
                    0.5 * h * (q0.abs() + q1.abs())
                } else {
                    0.5 * h * (q0 * q0 + q1 * q1) / (q0.abs() + q1.abs())
                }
            })
            .sum(),
    }
}
