use std::str::FromStr;

use nads_core::dressed::snapshot_series;
use nads_core::overlap::transition_probability;
use nads_core::tdse::evolve;
use nads_core::{InitialState, NadsError, NadsOverlaps};
use rayon::prelude::*;
use serde_json::Value;

use crate::scenario::{Scenario, ScenarioError};
use crate::table::{Row, Table};

fn header(s: &Scenario) -> Value {
    serde_json::to_value(s.resolved()).expect("scenario serializes")
}

/// Dressed-state quantities, overlaps and P at every grid point.
pub fn snapshot_table(s: &Scenario) -> Result<Table, NadsError> {
    let series = snapshot_series(&s.system, &s.field, &s.time_grid())?;
    let overlaps = NadsOverlaps::new(&series);
    let mut t = Table::new("snapshot", header(s));
    t.column("t").column("Omega").column("delta");
    for name in [
        "delta_tilde",
        "omega_tilde",
        "cos_half",
        "sin_half",
        "omega_G",
        "omega_E",
    ] {
        t.complex_column(name);
    }
    t.column("gg").column("ee").complex_column("eg").column("P");
    for (k, snap) in series.snapshots.iter().enumerate() {
        t.push_row(
            Row::new()
                .num(snap.t)
                .num(snap.omega)
                .num(snap.delta)
                .complex(snap.delta_tilde)
                .complex(snap.omega_tilde)
                .complex(snap.cos_half)
                .complex(snap.sin_half)
                .complex(snap.omega_g_tilde)
                .complex(snap.omega_e_tilde)
                .num(overlaps.gg(k)?)
                .num(overlaps.ee(k)?)
                .complex(overlaps.eg(k)?)
                .num(transition_probability(snap)),
        );
    }
    Ok(t)
}

/// Bare amplitudes from the reference integrator. With `compare`, adds
/// |c_e/c_g| (|c_g/c_e| for an excited start) from the integrator and from
/// the dressed-state reconstruction.
pub fn evolve_table(s: &Scenario, compare: bool) -> Result<Table, NadsError> {
    let grid = s.time_grid();
    let init = s.integrator.init;
    let tr = evolve(&s.system, &s.field, &grid, init, s.integrator.frame, s.tolerance())?;
    let mut t = Table::new(if compare { "evolve --compare" } else { "evolve" }, header(s));
    t.meta.push(("substeps".into(), tr.substeps.to_string()));
    t.column("t").complex_column("c_g").complex_column("c_e").column("norm");
    let series = if compare {
        t.column("ratio_tdse").column("ratio_nads");
        Some(snapshot_series(&s.system, &s.field, &grid)?)
    } else {
        None
    };
    let overlaps = series.as_ref().map(NadsOverlaps::new);
    for k in 0..grid.len() {
        let mut row = Row::new()
            .num(grid.t(k))
            .complex(tr.c_g[k])
            .complex(tr.c_e[k])
            .num(tr.norm[k]);
        if let Some(o) = &overlaps {
            let tdse = match init {
                InitialState::Ground => tr.c_e[k] / tr.c_g[k],
                InitialState::Excited => tr.c_g[k] / tr.c_e[k],
            };
            row = row.num(tdse.norm()).num(o.reconstruct(k, init)?.ratio.norm());
        }
        t.push_row(row);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Dotted scenario path, e.g. `field.envelope.tau`.
    pub path: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / n;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }

    fn pointer(&self) -> String {
        format!("/{}", self.path.replace('.', "/"))
    }
}

fn axis_error(spec: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: format!("--axis {spec}"),
        reason: reason.into(),
    }
}

impl FromStr for Axis {
    type Err = ScenarioError;

    /// `path:min:max:count[:log]`
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = spec.split(':').collect();
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(&"linear") => false,
            Some(other) => return Err(axis_error(spec, format!("unknown spacing `{other}`"))),
        };
        if !(4..=5).contains(&parts.len()) {
            return Err(axis_error(spec, "expected path:min:max:count[:log]"));
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| axis_error(spec, format!("{what} `{s}` is not a finite number")))
        };
        let (min, max) = (num(parts[1], "min")?, num(parts[2], "max")?);
        let count: usize = parts[3]
            .parse()
            .map_err(|_| axis_error(spec, format!("count `{}` is not an integer", parts[3])))?;
        if count < 2 {
            return Err(axis_error(spec, "count must be >= 2"));
        }
        if log && !(min > 0.0 && max > 0.0) {
            return Err(axis_error(spec, "log spacing needs min, max > 0"));
        }
        Ok(Axis {
            path: parts[0].to_string(),
            min,
            max,
            count,
            log,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    /// max over the grid of P
    MaxP,
    /// P at the last grid point
    FinalP,
    /// |c_e|² at the last grid point
    FinalPe,
    /// |c_g|² + |c_e|² at the last grid point
    FinalNorm,
    /// max over the grid of |⟨Ẽ|G̃⟩|
    MaxAbsEg,
}

impl Reduce {
    pub const ALL: [(&'static str, Reduce); 5] = [
        ("maxP", Reduce::MaxP),
        ("finalP", Reduce::FinalP),
        ("finalPe", Reduce::FinalPe),
        ("finalNorm", Reduce::FinalNorm),
        ("maxAbsEg", Reduce::MaxAbsEg),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, r)| *r == self).expect("listed").0
    }

    pub fn apply(self, s: &Scenario) -> Result<f64, NadsError> {
        let grid = s.time_grid();
        match self {
            Reduce::MaxP | Reduce::FinalP | Reduce::MaxAbsEg => {
                let series = snapshot_series(&s.system, &s.field, &grid)?;
                match self {
                    Reduce::MaxP => Ok(series.snapshots.iter().map(transition_probability).fold(0.0, f64::max)),
                    Reduce::FinalP => Ok(transition_probability(&series.snapshots[series.len() - 1])),
                    _ => {
                        let o = NadsOverlaps::new(&series);
                        (0..series.len()).try_fold(0.0f64, |m, k| Ok(m.max(o.eg(k)?.norm())))
                    }
                }
            }
            Reduce::FinalPe | Reduce::FinalNorm => {
                let tr = evolve(
                    &s.system,
                    &s.field,
                    &grid,
                    s.integrator.init,
                    s.integrator.frame,
                    s.tolerance(),
                )?;
                let n = grid.len() - 1;
                Ok(if self == Reduce::FinalPe {
                    tr.population_e(n)
                } else {
                    tr.norm[n]
                })
            }
        }
    }
}

impl FromStr for Reduce {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, r)| *r).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
            ScenarioError::Validation {
                field: "--reduce".into(),
                reason: format!("unknown reduction `{s}`, expected one of {}", names.join(", ")),
            }
        })
    }
}

/// Worker count for sweeps: `NADS_WORKERS` when set, else one per core.
pub fn worker_count() -> usize {
    std::env::var("NADS_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Writes `x` at a dotted path, creating the final key if the parent exists.
fn set_path(root: &mut Value, path: &str, x: f64) {
    let (parent, key) = match path.rsplit_once('.') {
        Some((p, k)) => (format!("/{}", p.replace('.', "/")), k),
        None => (String::new(), path),
    };
    if let Some(Value::Object(map)) = root.pointer_mut(&parent) {
        map.insert(key.to_string(), Value::from(x));
    }
}

/// Every combination of axis values, first axis slowest.
fn points(axes: &[Axis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        let values = axis.values();
        acc.into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

/// One row per grid point of the axes, in axis-major order. Per-point
/// failures land in the `error` column; axis problems fail the whole sweep
/// before anything runs.
pub fn sweep_table(base: &Scenario, axes: &[Axis], reduce: Reduce, workers: usize) -> Result<Table, ScenarioError> {
    if !(1..=2).contains(&axes.len()) {
        return Err(ScenarioError::Validation {
            field: "--axis".into(),
            reason: format!("need 1 or 2 axes, got {}", axes.len()),
        });
    }
    let resolved = header(base);
    for axis in axes {
        if !matches!(resolved.pointer(&axis.pointer()), Some(Value::Number(_))) {
            return Err(ScenarioError::Validation {
                field: format!("--axis {}", axis.path),
                reason: "path does not name a numeric scenario parameter".into(),
            });
        }
    }
    let raw = serde_json::to_value(base).expect("scenario serializes");
    let run = |point: &Vec<f64>| -> Result<f64, String> {
        let mut v = raw.clone();
        for (axis, &x) in axes.iter().zip(point) {
            set_path(&mut v, &axis.path, x);
        }
        let s = crate::scenario::parse(&v.to_string()).map_err(|e| e.to_string())?;
        s.check().map_err(|e| e.to_string())?;
        reduce.apply(&s).map_err(|e| e.to_string())
    };
    let pts = points(axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<f64, String>> = pool.install(|| pts.par_iter().map(run).collect());

    let mut t = Table::new("sweep", resolved);
    for axis in axes {
        let spacing = if axis.log { "log" } else { "linear" };
        t.meta.push((
            "axis".into(),
            format!("{} {} {} {} {spacing}", axis.path, axis.min, axis.max, axis.count),
        ));
        t.column(&axis.path);
    }
    t.meta.push(("reduce".into(), reduce.name().into()));
    t.column(reduce.name()).column("error");
    for (point, result) in pts.iter().zip(results) {
        let row = point.iter().fold(Row::new(), |r, &x| r.num(x));
        t.push_row(match result {
            Ok(v) => row.num(v).text(""),
            Err(e) => row.num(f64::NAN).text(e),
        });
    }
    Ok(t)
}
