use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use due_core::certify::{
    compact_certificate, constructed_diagnostic, nil_certificate, parabolic_diagnostic, CompactGrid, DueRow,
};
use due_core::compactgroup::{QuotientSpec, Spin};
use due_core::equiloops::{
    find_zero_config, project_loop_to_quotient, shift_path, synthesize_loop, verify_equidistribution,
    EquidistributedLoop, FunctionSpaceBasis, LoopManifest, PathOptions, ZeroSearchOptions,
};
use due_core::nilconstruct::{build_construction, check_rho, eta_exponential_sum, EtaParams, NilGrid};
use due_core::nilfourier::pseudo_poly_basis;
use due_core::nilgroup::NilStructure;
use serde_json::{json, Value};

use crate::output::{fmt_f, sha256_hex, Outcome, Table};
use crate::{CliError, GridSpec, MapKind, Quotient, Structure};

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn parse_spins(s: &str) -> Result<Vec<Spin>, CliError> {
    let spins = s
        .split(',')
        .map(|x| Spin::parse(x.trim()))
        .collect::<due_core::Result<Vec<_>>>()?;
    if spins.is_empty() {
        return Err(CliError::usage("no spins given"));
    }
    Ok(spins)
}

pub fn verify_eta(q0: u64, grid: usize, tol: f64, delta: f64) -> Result<Outcome, CliError> {
    if q0 == 0 || grid == 0 {
        return Err(CliError::usage("q0 and grid must be positive"));
    }
    if !(0.0..0.25).contains(&delta) {
        return Err(CliError::usage("delta must lie in [0, 1/4)"));
    }
    let params = EtaParams::new_unchecked(q0, delta);
    let mut table = Table::new(&["m", "max_abs_sum"]);
    let mut worst = 0.0f64;
    let mut per_m = Vec::new();
    for m in (1 - q0 as i64)..(q0 as i64) {
        if m == 0 {
            continue;
        }
        let w = (0..grid)
            .map(|i| eta_exponential_sum(m, i as f64 / grid as f64, &params).norm())
            .fold(0.0, f64::max);
        worst = worst.max(w);
        table.push(vec![m.to_string(), fmt_f(w)]);
        per_m.push(json!({ "m": m, "max_abs_sum": w }));
    }
    let rho = check_rho(delta, 1000);
    let rho_ok = rho.flat_margins && rho.monotone && rho.max_symmetry_defect < 1e-12;
    let note = if q0 == 1 {
        Some("the range 0 < |m| < q0 is empty; cancellation holds vacuously")
    } else {
        None
    };
    let passed = worst < tol && rho_ok;
    Ok(Outcome {
        command: "verify-eta",
        parameters: json!({ "q0": q0, "grid": grid, "delta": delta }),
        seed: None,
        tolerances: json!({ "sum": tol }),
        summary: json!({ "max_abs_sum": worst, "rho_ok": rho_ok }),
        report: json!({ "max_abs_sum": worst, "per_m": per_m, "rho": rho, "note": note }),
        table,
        extra_files: Vec::new(),
        passed,
    })
}

pub fn nil_construct(
    n: usize,
    q0: u64,
    p: i64,
    grid: GridSpec,
    tol: f64,
    structure: Structure,
) -> Result<Outcome, CliError> {
    let s = match structure {
        Structure::Heisenberg => NilStructure::heisenberg3(),
        Structure::Abelian2 => NilStructure::abelian(2),
        Structure::Abelian3 => NilStructure::abelian(3),
    };
    let cons = build_construction(&s, n, q0)?;
    let g = NilGrid { nt: grid.0, nx: grid.1 };
    let cert = nil_certificate(&cons, p, g, tol)?;
    let d = cons.depth();
    let mut header: Vec<String> = vec!["element".into(), "has_theta".into()];
    header.extend((0..=d).map(|k| format!("level_{k}")));
    header.extend(["full_sum", "coboundary_residual", "budget", "passed"].map(String::from));
    let mut table = Table { header, rows: Vec::new() };
    for r in &cert.rows {
        let mut row = vec![r.label.clone(), r.has_theta.to_string()];
        row.extend(r.level_defects.iter().map(|x| fmt_f(*x)));
        row.extend([fmt_f(r.max_full_sum), fmt_f(r.coboundary_residual), fmt_f(r.budget), r.passed.to_string()]);
        table.push(row);
    }
    Ok(Outcome {
        command: "nil-construct",
        parameters: json!({
            "structure": format!("{structure:?}").to_lowercase(),
            "n": n, "q0": q0, "p": p, "grid": grid.to_string(),
        }),
        seed: None,
        tolerances: json!({ "plain": 1e-8, "theta": 1e-6, "full_sum": tol, "coboundary": tol }),
        summary: json!({
            "qbar": cons.qbar(),
            "max_defect_plain": cert.max_defect_plain,
            "max_defect_theta": cert.max_defect_theta,
            "max_full_sum": cert.max_full_sum,
            "max_coboundary_residual": cert.max_coboundary_residual,
        }),
        passed: cert.passed,
        report: to_value(&cert),
        table,
        extra_files: Vec::new(),
    })
}

pub struct BuildLoopArgs {
    pub spins: String,
    pub m: usize,
    pub seed: u64,
    pub grid: usize,
    pub translates: usize,
    pub tol: f64,
    pub quotient: Quotient,
    pub require_surjective: bool,
    pub samples: usize,
}

pub fn build_loop(a: &BuildLoopArgs) -> Result<Outcome, CliError> {
    let spins = parse_spins(&a.spins)?;
    if a.grid == 0 || a.samples == 0 {
        return Err(CliError::usage("grid and samples must be positive"));
    }
    let basis = FunctionSpaceBasis::from_spins(&spins)?;
    let opts = ZeroSearchOptions { require_surjective: a.require_surjective, ..Default::default() };
    let zero = find_zero_config(&basis, a.m, a.seed, &opts)?;
    let start = zero.config.nearest_neighbor_order();
    let path = shift_path(&basis, &start, &PathOptions::default())?;
    let lp = synthesize_loop(&basis, path, 0.1, Some(a.seed));
    let rep = verify_equidistribution(&lp, &basis, a.translates, a.grid, a.seed, a.tol);
    let quotient = match a.quotient {
        Quotient::None => None,
        Quotient::Sphere => {
            let band = spins.iter().copied().max().expect("non-empty");
            Some(project_loop_to_quotient(|t| lp.theta(t), lp.m, &basis, QuotientSpec::sphere(band), a.grid, a.tol))
        }
    };
    let passed = rep.passed && quotient.as_ref().is_none_or(|q| q.passed);

    let mut csv = Table::new(&["t", "w", "x", "y", "z"]);
    for (t, g) in lp.samples(a.samples) {
        let mut row = vec![format!("{t:.8}")];
        row.extend(g.0.iter().map(|c| format!("{c:.15e}")));
        csv.push(row);
    }
    let manifest = lp.manifest();
    let mut table = Table::new(&["check", "value", "passed"]);
    table.push(vec!["zero_residual".into(), fmt_f(zero.residual), (zero.residual < 1e-9).to_string()]);
    table.push(vec!["max_defect".into(), fmt_f(rep.max_defect), (rep.max_defect < a.tol).to_string()]);
    table.push(vec![
        "max_translated_defect".into(),
        fmt_f(rep.max_translated_defect),
        (rep.max_translated_defect < a.tol).to_string(),
    ]);
    if let Some(q) = &quotient {
        table.push(vec!["quotient_defect".into(), fmt_f(q.max_defect), q.passed.to_string()]);
    }
    Ok(Outcome {
        command: "build-loop",
        parameters: json!({
            "spins": spins.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "m": a.m, "grid": a.grid, "translates": a.translates,
            "quotient": format!("{:?}", a.quotient).to_lowercase(),
            "require_surjective": a.require_surjective, "samples": a.samples,
        }),
        seed: Some(a.seed),
        tolerances: json!({ "defect": a.tol, "zero": opts.tol }),
        summary: json!({
            "m": lp.m,
            "surjective": zero.surjective,
            "path_nodes": lp.path.nodes.len(),
            "max_defect": rep.max_defect,
            "max_translated_defect": rep.max_translated_defect,
            "quotient_defect": quotient.as_ref().map(|q| q.max_defect),
        }),
        report: json!({
            "zero": {
                "m": zero.m, "residual": zero.residual, "sigma_min": zero.sigma_min,
                "surjective": zero.surjective, "iterations": zero.iterations, "attempts": zero.attempts,
            },
            "path": { "nodes": lp.path.nodes.len(), "max_defect": lp.path.max_defect },
            "equidistribution": rep,
            "quotient": quotient,
        }),
        table,
        extra_files: vec![
            ("loop.csv".into(), csv.to_csv()?),
            ("loop.json".into(), serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
        ],
        passed,
    })
}

pub struct CompactArgs {
    pub spins: String,
    pub n: usize,
    pub q0: u64,
    pub p: i64,
    pub loop_path: Option<PathBuf>,
    pub m: usize,
    pub seed: u64,
    pub trivial_loop: bool,
    pub grid: GridSpec,
    pub tol: f64,
}

pub fn compact(a: &CompactArgs) -> Result<Outcome, CliError> {
    let mut loop_hash = None;
    let (spins, theta): (Vec<Spin>, Option<Arc<EquidistributedLoop>>) = if a.trivial_loop {
        (parse_spins(&a.spins)?, None)
    } else if let Some(path) = &a.loop_path {
        let text = fs::read_to_string(path).map_err(CliError::io)?;
        loop_hash = Some(sha256_hex(text.as_bytes()));
        let man: LoopManifest =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad loop manifest: {e}")))?;
        let lp = EquidistributedLoop::from_manifest(&man)?;
        (lp.basis.spins().to_vec(), Some(Arc::new(lp)))
    } else {
        let spins = parse_spins(&a.spins)?;
        let basis = FunctionSpaceBasis::from_spins(&spins)?;
        let zero = find_zero_config(&basis, a.m, a.seed, &ZeroSearchOptions::default())?;
        let path = shift_path(&basis, &zero.config.nearest_neighbor_order(), &PathOptions::default())?;
        (spins, Some(Arc::new(synthesize_loop(&basis, path, 0.1, Some(a.seed)))))
    };
    let m = theta.as_ref().map_or(a.m, |l| l.m);
    let gamma = theta.as_ref().map(|l| l.as_group_loop());
    let grid = CompactGrid { nt: a.grid.0, ng: a.grid.1, seed: a.seed };
    let cert = compact_certificate(gamma.as_ref(), m, &spins, a.n, a.q0, a.p, grid, a.tol)?;
    let mut table = Table::new(&["function", "max_full_sum", "coboundary_residual", "passed"]);
    for r in &cert.rows {
        table.push(vec![r.label.clone(), fmt_f(r.max_full_sum), fmt_f(r.coboundary_residual), r.passed.to_string()]);
    }
    Ok(Outcome {
        command: "compact-certificate",
        parameters: json!({
            "spins": spins.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "n": a.n, "q0": a.q0, "p": a.p, "m": m, "grid": a.grid.to_string(),
            "trivial_loop": a.trivial_loop, "loop_sha256": loop_hash,
        }),
        seed: Some(a.seed),
        tolerances: json!({ "full_sum": a.tol, "coboundary": a.tol }),
        summary: json!({
            "qbar": cert.qbar,
            "max_full_sum": cert.max_full_sum,
            "max_coboundary_residual": cert.max_coboundary_residual,
        }),
        passed: cert.passed,
        report: to_value(&cert),
        table,
        extra_files: Vec::new(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn due_diagnostic(
    map: MapKind,
    phi: &str,
    truncations: Option<Vec<usize>>,
    alpha: f64,
    n: usize,
    q0: u64,
    p: i64,
    grid: GridSpec,
) -> Result<Outcome, CliError> {
    let (rows, phi_label, truncs): (Vec<DueRow>, String, Vec<usize>) = match map {
        MapKind::Parabolic => {
            let truncs = truncations.unwrap_or_else(|| vec![10, 20, 30, 40]);
            if truncs.iter().any(|&t| t < 2) {
                return Err(CliError::usage("parabolic truncations must be at least 2 modes"));
            }
            let zero = match phi {
                "zero" => true,
                "default" | "exp-y" => false,
                other => return Err(CliError::usage(format!("unknown phi {other:?} for the parabolic map"))),
            };
            let label = if zero { "zero" } else { "exp-y" };
            (parabolic_diagnostic(alpha, &truncs, zero), label.into(), truncs)
        }
        MapKind::Constructed => {
            let truncs = truncations.unwrap_or_else(|| vec![1, 2]);
            let cons = build_construction(&NilStructure::heisenberg3(), n, q0)?;
            let element = match phi {
                "zero" => None,
                "default" => Some(0),
                other => Some(
                    other
                        .parse::<usize>()
                        .map_err(|_| CliError::usage(format!("phi must be `zero` or an index, got {other:?}")))?,
                ),
            };
            let label = match element {
                None => "zero".to_string(),
                Some(i) => pseudo_poly_basis(&cons.structure, n)?
                    .get(i)
                    .map(|e| e.label.clone())
                    .unwrap_or_else(|| i.to_string()),
            };
            let rows = constructed_diagnostic(&cons, p, element, &truncs, NilGrid { nt: grid.0, nx: grid.1 })?;
            (rows, label, truncs)
        }
    };
    let mut table = Table::new(&["case", "truncation", "basis_size", "grid_points", "rank", "sup", "rms", "warning"]);
    for r in &rows {
        table.push(vec![
            r.case.clone(),
            r.truncation.to_string(),
            r.basis_size.to_string(),
            r.grid_points.to_string(),
            r.rank.to_string(),
            fmt_f(r.sup),
            fmt_f(r.rms),
            r.warning.clone().unwrap_or_default(),
        ]);
    }
    let max_sup = rows.iter().map(|r| r.sup).fold(0.0, f64::max);
    let min_rms = rows.iter().map(|r| r.rms).fold(f64::INFINITY, f64::min);
    let mut parameters = json!({
        "map": format!("{map:?}").to_lowercase(), "phi": phi_label, "truncations": truncs,
    });
    match map {
        MapKind::Parabolic => parameters["alpha"] = json!(alpha),
        MapKind::Constructed => {
            parameters["n"] = json!(n);
            parameters["q0"] = json!(q0);
            parameters["p"] = json!(p);
            parameters["grid"] = json!(grid.to_string());
        }
    }
    Ok(Outcome {
        command: "due-diagnostic",
        parameters,
        seed: None,
        tolerances: json!({}),
        summary: json!({ "max_sup": max_sup, "min_rms": min_rms }),
        report: json!({ "rows": rows }),
        table,
        extra_files: Vec::new(),
        passed: true,
    })
}
