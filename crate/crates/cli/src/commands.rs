use instanton_core::moments::moment_auto;
use instanton_core::schrodinger::benchmark_point;
use instanton_core::spectrum::gas_sum_auto;
use instanton_core::triangle::{parse_ratio, verify_relations};
use instanton_core::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, Cell, Table};

/// Relative tolerance for `B` against `K exp(-S_inst)` when all three are given.
const CONSISTENCY_TOLERANCE: f64 = 1e-12;

pub fn run(command: &Command) -> CliResult<Artifact> {
    match command {
        Command::Moments(a) => moments(a),
        Command::TriangleVerify(a) => triangle_verify(a),
        Command::Sum(a) => sum(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Scaling(a) => scaling(a),
    }
}

fn require<T: Copy>(value: Option<T>, name: &str, command: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::missing(name, command))
}

fn well_parameters(w: &WellArgs, time: f64, command: &str) -> CliResult<WellParameters> {
    let omega0 = require(w.omega0, "omega0", command)?;
    let omega1 = require(w.omega1, "omega1", command)?;
    let params = match (w.coupling, w.prefactor, w.action) {
        (Some(b), None, None) => WellParameters::new(omega0, omega1, b, time)?,
        (b, Some(k), Some(s)) => {
            let p = WellParameters::from_instanton(omega0, omega1, k, s, time)?;
            if let Some(b) = b {
                let derived = p.b()?;
                let scale = b.abs().max(derived.abs());
                if (b - derived).abs() > CONSISTENCY_TOLERANCE * scale {
                    return Err(CliError::usage(
                        "inconsistent_parameters",
                        format!("B = {b} disagrees with K exp(-S_inst) = {derived}"),
                        Some("B"),
                    ));
                }
            }
            p
        }
        (_, Some(_), None) => return Err(CliError::missing("S-inst", command)),
        (_, None, Some(_)) => return Err(CliError::missing("K", command)),
        (None, None, None) => {
            return Err(CliError::usage(
                "missing_parameter",
                format!("`{command}` requires --B or the pair --K, --S-inst"),
                Some("B"),
            ))
        }
    };
    Ok(params)
}

fn grid(g: &GridArgs) -> CliResult<GridSpec> {
    let d = GridSpec::default();
    Ok(GridSpec::new(
        g.x_min.unwrap_or(d.x_min),
        g.x_max.unwrap_or(d.x_max),
        g.points.unwrap_or(d.points),
    )?)
}

fn moments(a: &MomentsArgs) -> CliResult<Artifact> {
    const CMD: &str = "moments";
    let time = require(a.time, "T", CMD)?;
    let n = require(a.n, "n", CMD)?;
    let m = require(a.m, "m", CMD)?;
    let params = well_parameters(&a.wells, time, CMD)?;
    let keys: Vec<MomentKey> = if a.table {
        (0..=n).flat_map(|i| (0..=m).map(move |j| MomentKey::new(i, j))).collect()
    } else {
        vec![MomentKey::new(n, m)]
    };
    let methods = match a.method {
        MomentMethod::All => vec![MomentMethod::Closed, MomentMethod::Recursive, MomentMethod::Quadrature],
        other => vec![other],
    };
    let recursive = if methods.contains(&MomentMethod::Recursive) {
        Some(moment_recursive(n, m, &params)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &key in &keys {
        for &method in &methods {
            let value = match method {
                MomentMethod::Closed => moment_closed(key, &params)?,
                MomentMethod::Quadrature => moment_quadrature(key, &params)?,
                MomentMethod::Auto => moment_auto(key, &params)?,
                MomentMethod::Recursive => *recursive
                    .as_ref()
                    .and_then(|t| t.get(key.n, key.m))
                    .expect("table covers every requested key"),
                MomentMethod::All => unreachable!("expanded above"),
            };
            rows.push((key, value));
        }
    }
    let headers = ["n", "m", "method", "stripped", "full"];
    let (mut csv, mut table) = (Table::new(&headers), Table::new(&headers));
    for t in [&mut csv, &mut table] {
        for (key, v) in &rows {
            t.push(vec![key.n.into(), key.m.into(), v.method.as_str().into(), v.stripped.into(), v.full.into()]);
        }
    }
    let values: Vec<Value> = rows
        .iter()
        .map(|(key, v)| {
            let mut obj = serde_json::to_value(v).expect("serializable");
            obj["n"] = json!(key.n);
            obj["m"] = json!(key.m);
            obj
        })
        .collect();
    Ok(Artifact {
        json: json!({ "parameters": params, "values": values }),
        csv,
        table,
    })
}

fn triangle_verify(a: &TriangleArgs) -> CliResult<Artifact> {
    const CMD: &str = "triangle-verify";
    let depth = require(a.depth, "depth", CMD)?;
    let text = a.ratio.as_deref().ok_or_else(|| CliError::missing("ratio", CMD))?;
    let ratio = parse_ratio(text)?;
    let report = verify_relations(&build_triangle(depth, ratio)?);
    let headers = ["family", "checked", "failures"];
    let (mut csv, mut table) = (Table::new(&headers), Table::new(&headers));
    for t in [&mut csv, &mut table] {
        for c in std::iter::once(&report.closed_form).chain(&report.families) {
            t.push(vec![c.family.into(), c.checked.into(), c.failures.into()]);
        }
    }
    table.footer.push(format!("depth {}, ratio {}", report.depth, report.ratio));
    table.footer.push(report.summary());
    let mut json = serde_json::to_value(&report).expect("serializable");
    json["summary"] = json!(report.summary());
    Ok(Artifact { json, csv, table })
}

fn sum(a: &SumArgs) -> CliResult<Artifact> {
    const CMD: &str = "sum";
    let time = require(a.time, "T", CMD)?;
    let params = well_parameters(&a.wells, time, CMD)?;
    let closed = gas_sum_closed(&params)?;
    let partial = match a.terms {
        Some(n) => gas_sum_partial(&params, n)?,
        None => gas_sum_auto(&params)?,
    };
    let difference = (partial.sum - closed.value).abs() / closed.value.abs().max(f64::MIN_POSITIVE);
    let mut csv = Table::new(&["i", "term", "partial_sum", "closed"]);
    let mut running = 0.0;
    for (i, &t) in partial.terms.iter().enumerate() {
        running += t;
        csv.push(vec![i.into(), t.into(), running.into(), closed.value.into()]);
    }
    let table = Table::key_value(vec![
        ("closed", closed.value.into()),
        ("partial_sum", partial.sum.into()),
        ("terms", partial.terms.len().into()),
        ("relative_difference", difference.into()),
        ("decoupled", closed.decoupled.into()),
    ]);
    let json = json!({
        "parameters": params,
        "closed": closed,
        "partial": partial,
        "relative_difference": sig(difference),
    });
    Ok(Artifact { json, csv, table })
}

fn spectrum(a: &SpectrumArgs) -> CliResult<Artifact> {
    const CMD: &str = "spectrum";
    if let Some(gap) = a.gap {
        let omega0 = require(a.wells.omega0, "omega0", CMD)?;
        let omega1 = require(a.wells.omega1, "omega1", CMD)?;
        let c = extract_coupling(gap, omega0, omega1)?;
        let rows = || {
            vec![
                ("coupling", Cell::from(c.coupling)),
                ("asymmetry_dominated", c.asymmetry_dominated.into()),
            ]
        };
        return Ok(Artifact {
            json: serde_json::to_value(c).expect("serializable"),
            csv: Table::key_value(rows()),
            table: Table::key_value(rows()),
        });
    }
    // the levels do not depend on T
    let params = well_parameters(&a.wells, 1.0, CMD)?;
    let s = match a.method {
        SpectrumMethod::Instanton => energies(&params)?,
        SpectrumMethod::Hamiltonian => truncated_hamiltonian(params.omega0, params.omega1, params.b()?)?,
    };
    let rows = || {
        vec![
            ("e_plus", Cell::from(s.e_plus)),
            ("e_minus", s.e_minus.into()),
            ("gap", s.gap.into()),
            ("amplitude_coefficient", s.amplitude_coefficient.into()),
        ]
    };
    Ok(Artifact {
        json: serde_json::to_value(s).expect("serializable"),
        csv: Table::key_value(rows()),
        table: Table::key_value(rows()),
    })
}

fn record_cells(r: &BenchmarkRecord) -> Vec<Cell> {
    vec![
        r.lambda.into(),
        r.s_inst.into(),
        r.omega0.into(),
        r.omega1.into(),
        r.gap_numeric.into(),
        r.b_prime.into(),
        r.refinement_error.into(),
        r.passes_regime_guard().into(),
    ]
}

const RECORD_HEADERS: [&str; 8] = [
    "lambda",
    "s_inst",
    "omega0",
    "omega1",
    "gap_numeric",
    "b_prime",
    "refinement_error",
    "regime_guard",
];

fn record_json(r: &BenchmarkRecord) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    v["regime_guard"] = json!(r.passes_regime_guard());
    v
}

fn benchmark(a: &BenchmarkArgs) -> CliResult<Artifact> {
    const CMD: &str = "benchmark";
    let lambda = require(a.lambda, "lambda", CMD)?;
    let b = require(a.b, "b", CMD)?;
    let grid = grid(&a.grid)?;
    let r = benchmark_point(b, lambda, grid)?;
    let (mut csv, mut table) = (Table::new(&RECORD_HEADERS), Table::new(&RECORD_HEADERS));
    csv.push(record_cells(&r));
    table.push(record_cells(&r));
    let json = json!({ "b": sig(b), "grid": grid, "record": record_json(&r) });
    Ok(Artifact { json, csv, table })
}

fn scaling(a: &ScalingArgs) -> CliResult<Artifact> {
    const CMD: &str = "scaling";
    let b = require(a.b, "b", CMD)?;
    let lambdas = a.lambdas.clone().ok_or_else(|| CliError::missing("lambdas", CMD))?;
    let grid = grid(&a.grid)?;
    let study = scaling_study(b, &lambdas, a.k_hint, grid)?;
    let (mut csv, mut table) = (Table::new(&RECORD_HEADERS), Table::new(&RECORD_HEADERS));
    for r in &study.records {
        csv.push(record_cells(r));
        table.push(record_cells(r));
    }
    table.footer.push(format!(
        "ln B' = {} + ({}) S_inst over {} points",
        instanton_core::format::sig6(study.intercept),
        instanton_core::format::sig6(study.slope),
        study.residuals.len()
    ));
    let mut json = serde_json::to_value(&study).expect("serializable");
    json["records"] = Value::Array(study.records.iter().map(record_json).collect());
    json["grid"] = serde_json::to_value(grid).expect("serializable");
    Ok(Artifact { json, csv, table })
}

fn sig(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(serde_json::Number::from_string_unchecked(instanton_core::format::sig17(x)))
}
