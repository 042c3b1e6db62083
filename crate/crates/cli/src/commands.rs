use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use tfconc::compactness::{duality_check, kaq_membership, kaq_tail_bound};
use tfconc::frames::gram_matrix;
use tfconc::frames::{
    default_test_functions, obstruction_report, section_sweep, tail_sum, ObstructionParams,
};
use tfconc::grid::l2_distance;
use tfconc::io::{load_samples_csv, read_gram_csv, save_samples_csv, write_gram_csv};
use tfconc::moments::concentration_reports;
use tfconc::separation::{
    coherence_counts, covering_number_bound, greedy_half_net, greedy_separated_subset,
    growth_certificate, max_separated_subset_exhaustive, Gram,
};
use tfconc::systems::{
    build_perturbed_exact, enumerate_exact_g0, enumerate_gabor_full, envelopes, gabor_atom,
    materialize, reconstruct_e, GaborIndex, SystemKind, SystemSpec,
};
use tfconc::verify::{run_verify, VerifyOptions, VerifyReport};
use tfconc::{make_grid, tail_mass, Error, Execution, Grid, Result, SampledFunction};

use crate::args::{
    AnalyzeArgs, CompactnessArgs, ConstructArgs, FrameBoundsArgs, GlobalArgs, SeparateArgs,
    SystemArgs, TailSumArgs, VerifyArgs,
};
use crate::output::Report;

/// Largest system for which the exhaustive separated-subset search is run.
const EXHAUSTIVE_REPORT_LIMIT: usize = 12;

/// Samples of a system together with the spec they came from, if any.
pub struct LoadedSystem {
    pub spec: Option<SystemSpec>,
    pub elements: Vec<SampledFunction>,
}

impl LoadedSystem {
    fn label(&self, i: usize) -> Value {
        match &self.spec {
            Some(s) if !s.indices.is_empty() => json!(s.indices[i]),
            _ => Value::Null,
        }
    }
}

fn to_map<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("values serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn grid_of(global: &GlobalArgs) -> Result<Grid> {
    make_grid(global.grid_extent, global.grid_points)
}

fn parse_spec(text: &str) -> Result<SystemSpec> {
    let value: Value = serde_json::from_str(text)?;
    let inner = match value.get("spec") {
        Some(spec) if value.get("kind").is_none() => spec.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

/// Applies `--count` and fills in the canonical indices of Gabor kinds.
fn adjust_spec(mut spec: SystemSpec, count: Option<usize>) -> Result<SystemSpec> {
    let count = count.unwrap_or(spec.count);
    match spec.kind {
        SystemKind::GaborFull | SystemKind::GaborExactG0 => {
            if count != spec.count || spec.indices.is_empty() {
                let fresh = if spec.kind == SystemKind::GaborFull {
                    enumerate_gabor_full(count)
                } else {
                    enumerate_exact_g0(count)
                };
                spec.count = fresh.count;
                spec.indices = fresh.indices;
            }
        }
        SystemKind::PerturbedExact => {
            if count > spec.alphas.len() {
                return Err(invalid(format!(
                    "count {count} exceeds the {} alphas in the spec",
                    spec.alphas.len()
                )));
            }
            spec.alphas.truncate(count);
            spec.count = count;
        }
        SystemKind::Explicit => {
            return Err(invalid(
                "explicit systems must be given as a sample directory",
            ));
        }
    }
    Ok(spec)
}

fn load_directory(dir: &Path, count: Option<usize>) -> Result<LoadedSystem> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if let Some(c) = count {
        if c > paths.len() {
            return Err(invalid(format!(
                "count {c} exceeds the {} sample files",
                paths.len()
            )));
        }
        paths.truncate(c);
    }
    let elements = paths
        .iter()
        .map(|p| load_samples_csv(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedSystem {
        spec: None,
        elements,
    })
}

pub fn load_system(
    path: &Path,
    count: Option<usize>,
    grid: Grid,
    exec: Execution,
) -> Result<LoadedSystem> {
    let loaded = if path.is_dir() {
        load_directory(path, count)?
    } else {
        let spec = adjust_spec(parse_spec(&fs::read_to_string(path)?)?, count)?;
        let elements = materialize(&spec, grid, exec)?;
        LoadedSystem {
            spec: Some(spec),
            elements,
        }
    };
    if loaded.elements.is_empty() {
        return Err(invalid(format!(
            "{} describes an empty system",
            path.display()
        )));
    }
    Ok(loaded)
}

fn load_from(args: &SystemArgs, global: &GlobalArgs, exec: Execution) -> Result<LoadedSystem> {
    load_system(&args.system, args.count, grid_of(global)?, exec)
}

pub fn analyze(args: &AnalyzeArgs, global: &GlobalArgs, exec: Execution) -> Result<Report> {
    let system = load_from(&args.source, global, exec)?;
    let reports = concentration_reports(&system.elements, global.p, global.q, exec)?;
    let freq_means: Vec<f64> = reports.iter().map(|r| r.freq_mean).collect();
    let growth = growth_certificate(&freq_means)?;
    let rows: Vec<Map<String, Value>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = Map::new();
            row.insert("element".into(), json!(i));
            row.insert("index".into(), system.label(i));
            row.extend(to_map(r));
            row
        })
        .collect();
    Ok(Report {
        result: json!({
            "count": reports.len(),
            "spec": system.spec,
            "elements": rows,
            "growth_certificate": growth,
        }),
        rows,
    })
}

pub fn construct_exact(
    args: &ConstructArgs,
    global: &GlobalArgs,
    exec: Execution,
) -> Result<Report> {
    let grid = grid_of(global)?;
    let system = build_perturbed_exact(grid, args.count, args.epsilon, global.p, global.q, exec)?;
    let env = envelopes(&system.elements)?;
    let mut reconstruct_max_error: f64 = 0.0;
    for n in 1..=args.count {
        let recovered = reconstruct_e(&system, n)?;
        let expected = gabor_atom(grid, system.base_indices[n])?;
        reconstruct_max_error = reconstruct_max_error.max(l2_distance(&recovered, &expected)?);
    }
    let rows: Vec<Map<String, Value>> = (0..args.count)
        .map(|i| {
            let mut row = Map::new();
            row.insert("n".into(), json!(i + 1));
            row.insert("alpha".into(), json!(system.spec.alphas[i]));
            row.insert("alpha_cap".into(), json!(0.5f64.powi(i as i32 + 1)));
            row.insert("base_index".into(), json!(system.base_indices[i + 1]));
            row.insert("normalizer".into(), json!(system.normalizers[i]));
            row.extend(to_map(&system.bounds[i]));
            row.insert("all_ok".into(), json!(system.bounds[i].all_ok()));
            row
        })
        .collect();
    let all_bounds_pass = system.bounds.iter().all(|b| b.all_ok());
    if let Some(dir) = &args.dump_samples {
        fs::create_dir_all(dir)?;
        for (i, f) in system.elements.iter().enumerate() {
            save_samples_csv(f, &dir.join(format!("f_{:03}.csv", i + 1)))?;
        }
        let mut spec_text = serde_json::to_string_pretty(&system.spec)?;
        spec_text.push('\n');
        fs::write(dir.join("spec.json"), spec_text)?;
    }
    if !all_bounds_pass {
        let (n, _) = system
            .bounds
            .iter()
            .enumerate()
            .find(|(_, b)| !b.all_ok())
            .expect("some bound fails");
        return Err(Error::ConstructionFailure {
            element: n + 1,
            condition: "bound recheck".into(),
            iterations: system.bounds[n].halvings,
        });
    }
    Ok(Report {
        result: json!({
            "spec": system.spec,
            "elements": rows,
            "envelopes": {
                "time_norm": env.time_envelope_norm,
                "freq_norm": env.freq_envelope_norm,
            },
            "reconstruct_max_error": reconstruct_max_error,
            "all_bounds_pass": all_bounds_pass,
        }),
        rows,
    })
}

pub fn separate(args: &SeparateArgs, global: &GlobalArgs, exec: Execution) -> Result<Report> {
    let (gram, system): (Gram, Option<LoadedSystem>) = match (&args.system, &args.gram) {
        (Some(path), _) => {
            let system = load_system(path, args.count, grid_of(global)?, exec)?;
            (gram_matrix(&system.elements, exec)?, Some(system))
        }
        (None, Some(path)) => {
            let mut gram = read_gram_csv(fs::File::open(path)?)?;
            if let Some(c) = args.count {
                if c > gram.nrows() {
                    return Err(invalid(format!(
                        "count {c} exceeds Gram size {}",
                        gram.nrows()
                    )));
                }
                gram = gram.view((0, 0), (c, c)).into_owned();
            }
            (gram, None)
        }
        (None, None) => return Err(invalid("either --system or --gram is required")),
    };
    if gram.nrows() == 0 {
        return Err(invalid("empty Gram matrix"));
    }
    if let Some(path) = &args.gram_out {
        write_gram_csv(&gram, fs::File::create(path)?)?;
    }
    let counts = coherence_counts(&gram, exec)?;
    let d = args
        .d
        .unwrap_or_else(|| (counts.iter().copied().max().unwrap_or(0) + 1) as f64);
    let separation = greedy_separated_subset(&gram, d)?;
    let exhaustive = if gram.nrows() <= EXHAUSTIVE_REPORT_LIMIT {
        Some(max_separated_subset_exhaustive(&gram)?)
    } else {
        None
    };
    let half_net = match &system {
        Some(s) => {
            let net = greedy_half_net(&s.elements)?;
            let bound = covering_number_bound(net.len(), d)?;
            json!({ "indices": net, "size": net.len(), "covering_number_bound": bound })
        }
        None => Value::Null,
    };
    let rows: Vec<Map<String, Value>> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut row = Map::new();
            row.insert("element".into(), json!(i));
            row.insert(
                "index".into(),
                system.as_ref().map_or(Value::Null, |s| s.label(i)),
            );
            row.insert("coherence_count".into(), json!(c));
            row.insert("selected".into(), json!(separation.selected.contains(&i)));
            row
        })
        .collect();
    Ok(Report {
        result: json!({
            "size": gram.nrows(),
            "coherence_counts": counts,
            "separation": separation,
            "exhaustive_optimum": exhaustive.as_ref().map(|e| json!({ "indices": e, "size": e.len() })),
            "half_net": half_net,
        }),
        rows,
    })
}

pub fn compactness(args: &CompactnessArgs, global: &GlobalArgs, exec: Execution) -> Result<Report> {
    let system = load_from(&args.source, global, exec)?;
    let grid = *system.elements[0].grid();
    let shifts: Vec<f64> = args
        .shift_steps
        .iter()
        .map(|&k| k as f64 * grid.spacing())
        .collect();
    let report = duality_check(&system.elements, &shifts, &args.radii, exec)?;
    let reports = concentration_reports(&system.elements, global.p, global.q, exec)?;
    let members: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| kaq_membership(r, args.bound))
        .map(|(i, _)| i)
        .collect();
    let mut tail_rows = Vec::new();
    for &r in &args.radii {
        if r <= 2.0 * args.bound || r > grid.extent() / 2.0 {
            continue;
        }
        let bound = kaq_tail_bound(args.bound, global.p, r)?;
        let observed = members
            .iter()
            .map(|&i| tail_mass(&system.elements[i], r))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        tail_rows.push(json!({
            "radius": r,
            "bound": bound,
            "max_member_tail": observed,
            "holds": observed <= bound,
        }));
    }
    let rows: Vec<Map<String, Value>> = report.rows.iter().map(to_map).collect();
    Ok(Report {
        result: json!({
            "duality": report,
            "kaq": {
                "bound": args.bound,
                "members": members,
                "tail_bounds": tail_rows,
            },
        }),
        rows,
    })
}

fn default_sections(len: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = std::iter::successors(Some(1usize), |s| Some(s * 2))
        .take_while(|&s| s < len)
        .collect();
    sizes.push(len);
    sizes
}

pub fn frame_bounds(
    args: &FrameBoundsArgs,
    global: &GlobalArgs,
    exec: Execution,
) -> Result<Report> {
    let system = load_from(&args.source, global, exec)?;
    let grid = *system.elements[0].grid();
    let sections = if args.sections.is_empty() {
        default_sections(system.elements.len())
    } else {
        args.sections.clone()
    };
    let sweep = section_sweep(&system.elements, &sections, exec)?;
    // (1,1) lies outside G₀ and serves as a probe for missing directions
    let atoms = [GaborIndex::new(1, 1), GaborIndex::new(0, 0)];
    let tests = default_test_functions(&system.elements, args.tests, &atoms, grid, global.seed)?;
    let params = ObstructionParams {
        p: global.p,
        q: global.q,
        r: args.r,
        s: args.s,
        bound: args.bound,
    };
    let obstruction = obstruction_report(&system.elements, &params, Some(&tests), exec)?;
    let rows: Vec<Map<String, Value>> = sweep.iter().map(to_map).collect();
    Ok(Report {
        result: json!({
            "section_sweep": sweep,
            "obstruction": obstruction,
        }),
        rows,
    })
}

pub fn tail_sum_cmd(args: &TailSumArgs, global: &GlobalArgs) -> Result<Report> {
    let mut ns = vec![args.n];
    ns.extend(args.sweep.iter().copied());
    let rows: Vec<Map<String, Value>> = ns
        .iter()
        .map(|&n| {
            let value = tail_sum(n, args.a, args.c, global.p, global.q, args.r, args.n_max)?;
            let mut row = Map::new();
            row.insert("N".into(), json!(n));
            row.insert("value".into(), json!(value));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r["value"].as_f64().unwrap_or(f64::NAN))
        .collect();
    // over the --sweep values only, which must be increasing
    let (sweep_n, sweep_v) = (&ns[1..], &values[1..]);
    let sweep_decreasing =
        sweep_n.windows(2).all(|w| w[0] < w[1]) && sweep_v.windows(2).all(|w| w[1] < w[0]);
    Ok(Report {
        result: json!({
            "value": values[0],
            "rows": rows,
            "sweep_decreasing": sweep_decreasing,
        }),
        rows,
    })
}

pub fn verify(
    args: &VerifyArgs,
    global: &GlobalArgs,
    exec: Execution,
) -> Result<(VerifyReport, Report)> {
    let opts = VerifyOptions {
        grid: grid_of(global)?,
        seed: global.seed,
        exec,
        corrupt_fft_phase: args.corrupt_fft_phase,
    };
    let outcome = run_verify(&opts);
    let rows: Vec<Map<String, Value>> = outcome.checks.iter().map(to_map).collect();
    let report = Report {
        result: json!({
            "passed": outcome.passed(),
            "tolerances": outcome.tolerances,
            "checks": outcome.checks,
        }),
        rows,
    };
    Ok((outcome, report))
}
