mod config;

use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use galband::catalog::{closed_form_edges, midband_states, schrodinger_residual, QesState};
use galband::gal::{eval_potential, period_grid};
use galband::heun::{gal_to_heun, heun_residual_detail, HeunParameters};
use galband::spectral::{classify_potential, default_scan_points, discriminant, fmt15};
use galband::susy::{conjecture_suite, edge_window, identify_gal, isospectrality_report_with, partner_profile, PARTNER_GRID};
use galband::verify::{format_row, run_suite, VerifyOptions};
use galband::{GalSpec, C64};

use config::{ConfigError, Flags, Format, Settings};

#[derive(Parser)]
#[command(name = "galband", version, about = "Band structure and exact states of GAL potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample V(x) over one period
    Eval(Flags),
    /// Band edges, gaps and the discriminant curve
    Bands(Flags),
    /// Closed-form or mid-band states with residuals
    Catalog(Flags),
    /// Superpotentials, partner potentials and isospectrality
    Susy(Flags),
    /// Heun parameters and residuals of every state
    Heun(Flags),
    /// Run the acceptance criteria
    Verify(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (name, flags) = match &cli.command {
        Command::Eval(f) => ("eval", f),
        Command::Bands(f) => ("bands", f),
        Command::Catalog(f) => ("catalog", f),
        Command::Susy(f) => ("susy", f),
        Command::Heun(f) => ("heun", f),
        Command::Verify(f) => ("verify", f),
    };
    let settings = match config::resolve(name, flags) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match name {
        "eval" => eval(&settings),
        "bands" => bands(&settings),
        "catalog" => catalog(&settings),
        "susy" => susy(&settings),
        "heun" => heun(&settings),
        _ => verify(&settings),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn init_threads() -> std::result::Result<(), ConfigError> {
    let Ok(raw) = std::env::var("GALBAND_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ConfigError::new("GALBAND_THREADS", format!("`{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("GALBAND_THREADS", e.to_string()))
}

fn emit(s: &Settings, text: &str) -> Result<()> {
    match &s.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Quotes a CSV field when it holds a comma or quote.
fn field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn energy_range(s: &Settings, specs: &[GalSpec]) -> Result<(f64, f64)> {
    match (s.emin, s.emax) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        (lo, hi) => {
            let (wlo, whi) = edge_window(specs)
                .map_err(|_| ConfigError::new("emin", "no exact energies to infer a range; give emin and emax"))?;
            let (lo, hi) = (lo.unwrap_or(wlo), hi.unwrap_or(whi));
            if hi <= lo {
                return Err(ConfigError::new("emax", format!("energy range [{lo}, {hi}] is empty")).into());
            }
            Ok((lo, hi))
        }
    }
}

fn scan_points(s: &Settings, lo: f64, hi: f64) -> usize {
    s.scan_points.unwrap_or_else(|| default_scan_points(lo, hi))
}

/// The states a subcommand works on, optionally narrowed to `--state`.
fn states(s: &Settings) -> Result<Vec<(usize, QesState)>> {
    let all = match &s.midband {
        Some(mb) => {
            let n = (mb.split.0 + mb.split.1) as usize;
            midband_states(mb.case, mb.t, n, mb.split, mb.level, s.spec.m)?
        }
        None => closed_form_edges(&s.spec)?,
    };
    let indexed: Vec<(usize, QesState)> = all.into_iter().enumerate().collect();
    match s.state {
        None => Ok(indexed),
        Some(k) if k < indexed.len() => Ok(vec![indexed[k].clone()]),
        Some(k) => Err(ConfigError::new("state", format!("index {k} out of range (have {})", indexed.len())).into()),
    }
}

fn eval(s: &Settings) -> Result<ExitCode> {
    let mut out = String::from("x,ReV,ImV\n");
    let mut rows = Vec::new();
    for x in period_grid(&s.spec, s.points) {
        let v = eval_potential(&s.spec, x)?;
        writeln!(out, "{},{},{}", fmt15(x), fmt15(v.re), fmt15(v.im))?;
        rows.push((x, v));
    }
    match s.format {
        Format::Csv => emit(s, &out)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Sample {
                x: f64,
                v: C64,
            }
            let samples: Vec<Sample> = rows.into_iter().map(|(x, v)| Sample { x, v }).collect();
            emit(s, &to_json(&serde_json::json!({ "spec": s.spec, "samples": samples }))?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bands(s: &Settings) -> Result<ExitCode> {
    let (lo, hi) = energy_range(s, &[s.spec])?;
    let bs = classify_potential(&s.spec.line(), lo, hi, scan_points(s, lo, hi))?;
    let curve = galband::spectral::discriminant_curve(&s.spec.line(), lo, hi, s.curve_points)?;
    eprintln!(
        "{} edges, {} gaps, {} touching points in [{lo}, {hi}]{}",
        bs.edges.len(),
        bs.gap_count,
        bs.touching.len(),
        if bs.broken_pt { "; PT symmetry broken" } else { "" }
    );
    match s.format {
        Format::Csv => {
            let mut rows: Vec<(f64, C64, u8)> = curve.iter().map(|c| (c.energy, c.delta, 0)).collect();
            for &e in &bs.edges {
                rows.push((e, discriminant(&s.spec, e)?.delta, 1));
            }
            rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let mut out = String::from("E,ReDelta,ImDelta,is_edge\n");
            for (e, d, edge) in rows {
                writeln!(out, "{},{},{},{edge}", fmt15(e), fmt15(d.re), fmt15(d.im))?;
            }
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&serde_json::json!({ "structure": bs, "curve": curve }))?)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CatalogRow {
    index: usize,
    state: QesState,
    residual: f64,
    pass: bool,
}

fn catalog(s: &Settings) -> Result<ExitCode> {
    let grid = period_grid(&s.spec, s.points);
    let rows: Vec<CatalogRow> = states(s)?
        .into_iter()
        .map(|(index, st)| {
            let residual = schrodinger_residual(&st, &s.spec, &grid);
            CatalogRow { index, pass: residual < s.tol, residual, state: st }
        })
        .collect();
    match s.format {
        Format::Csv => {
            let mut out = String::from("index,ReE,ImE,period_class,residual,pass,provenance\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.index,
                    fmt15(r.state.energy.re),
                    fmt15(r.state.energy.im),
                    field(&r.state.period_class.to_string()),
                    fmt15(r.residual),
                    r.pass,
                    field(&r.state.provenance)
                )?;
            }
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&serde_json::json!({ "spec": s.spec, "states": rows }))?)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SusyRow {
    index: usize,
    energy: C64,
    provenance: String,
    factorization_residual: f64,
    partner_identity_residual: f64,
    identified: Option<[f64; 4]>,
    fit_residual: Option<f64>,
    edges_original: Vec<f64>,
    edges_partner_shifted: Vec<f64>,
    max_discrepancy: Option<f64>,
    note: Option<String>,
}

fn susy(s: &Settings) -> Result<ExitCode> {
    if s.conjectures {
        return conjectures(s);
    }
    let (lo, hi) = energy_range(s, &[s.spec])?;
    let scan = scan_points(s, lo, hi).min(2000);
    let grid = period_grid(&s.spec, s.points.max(PARTNER_GRID));
    let picked = states(s)?;
    if let (Some(_), Format::Csv, [(_, st)]) = (s.state, s.format, picked.as_slice()) {
        // one state: the partner profile itself
        let p = partner_profile(st, &s.spec, &grid)?;
        let mut out = String::from("x,ReVplus,ImVplus,ReW,ImW,ReV,ImV\n");
        for i in 0..p.grid.len() {
            let (v, w, o) = (p.values[i], p.superpotential[i], p.original[i]);
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt15(p.grid[i]),
                fmt15(v.re),
                fmt15(v.im),
                fmt15(w.re),
                fmt15(w.im),
                fmt15(o.re),
                fmt15(o.im)
            )?;
        }
        emit(s, &out)?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut rows = Vec::new();
    for (index, st) in picked {
        let mut row = SusyRow {
            index,
            energy: st.energy,
            provenance: st.provenance.clone(),
            factorization_residual: f64::NAN,
            partner_identity_residual: f64::NAN,
            identified: None,
            fit_residual: None,
            edges_original: Vec::new(),
            edges_partner_shifted: Vec::new(),
            max_discrepancy: None,
            note: None,
        };
        match partner_profile(&st, &s.spec, &grid) {
            Err(e) => row.note = Some(e.to_string()),
            Ok(p) => {
                row.factorization_residual = p.factorization_residual();
                row.partner_identity_residual = p.partner_identity_residual();
                if let Some((spec, r)) = identify_gal(&p, s.spec.m, s.spec.beta) {
                    row.identified = Some(spec.bracket());
                    row.fit_residual = Some(r);
                }
                match isospectrality_report_with(&s.spec, &st, lo, hi, scan, grid.len()) {
                    Ok(r) => {
                        row.edges_partner_shifted = r.edges_partner.iter().map(|e| e + st.energy.re).collect();
                        row.edges_original = r.edges_original;
                        row.max_discrepancy = Some(r.max_discrepancy);
                    }
                    Err(e) => row.note = Some(e.to_string()),
                }
            }
        }
        rows.push(row);
    }
    match s.format {
        Format::Csv => {
            let mut out = String::from(
                "index,ReE,ImE,factorization_residual,partner_identity_residual,identified,fit_residual,edges,max_discrepancy,note\n",
            );
            for r in &rows {
                let opt = |v: Option<f64>| v.map(fmt15).unwrap_or_default();
                let ident = r.identified.map(|b| b.map(fmt15).join(";")).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.index,
                    fmt15(r.energy.re),
                    fmt15(r.energy.im),
                    fmt15(r.factorization_residual),
                    fmt15(r.partner_identity_residual),
                    ident,
                    opt(r.fit_residual),
                    r.edges_original.len(),
                    opt(r.max_discrepancy),
                    field(r.note.as_deref().unwrap_or(""))
                )?;
            }
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&serde_json::json!({ "spec": s.spec, "partners": rows }))?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn conjectures(s: &Settings) -> Result<ExitCode> {
    let scan = s.scan_points.unwrap_or(800);
    let reports = conjecture_suite(&[s.spec.m.value()], scan)?;
    match s.format {
        Format::Csv => {
            let mut out = String::from("label,m,left,right,edges,max_discrepancy,agree\n");
            for r in &reports {
                let br = |b: [f64; 4]| format!("[{},{},{},{}]", b[0], b[1], b[2], b[3]);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    field(&r.label),
                    r.m,
                    field(&br(r.left)),
                    field(&br(r.right)),
                    r.edges_left.len(),
                    fmt15(r.max_discrepancy),
                    r.agree
                )?;
            }
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&reports)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct HeunRow {
    index: usize,
    energy: C64,
    representation: [f64; 4],
    parameters: HeunParameters,
    constraint_residual: f64,
    residual: f64,
    skipped: usize,
    pass: bool,
}

fn heun(s: &Settings) -> Result<ExitCode> {
    let mut rows = Vec::new();
    for (index, st) in states(s)? {
        let rep = st.representation(&s.spec)?;
        let hp = gal_to_heun(&rep, st.energy);
        let r = heun_residual_detail(&hp, &st, &rep, &period_grid(&rep, s.points))?;
        rows.push(HeunRow {
            index,
            energy: st.energy,
            representation: rep.params(),
            constraint_residual: hp.constraint_residual(),
            parameters: hp,
            residual: r.residual,
            skipped: r.skipped,
            pass: r.residual < s.tol,
        });
    }
    match s.format {
        Format::Csv => {
            let mut out = String::from(
                "index,ReE,ImE,a,b,f,g,alpha,beta,gamma,delta,epsilon,Req,Imq,c,constraint,residual,skipped,pass\n",
            );
            for r in &rows {
                let p = &r.parameters;
                let [a, b, f, g] = r.representation;
                writeln!(
                    out,
                    "{},{},{},{a},{b},{f},{g},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.index,
                    fmt15(r.energy.re),
                    fmt15(r.energy.im),
                    fmt15(p.alpha.re),
                    fmt15(p.beta.re),
                    fmt15(p.gamma.re),
                    fmt15(p.delta.re),
                    fmt15(p.epsilon.re),
                    fmt15(p.q.re),
                    fmt15(p.q.im),
                    fmt15(p.c.re),
                    fmt15(r.constraint_residual),
                    fmt15(r.residual),
                    r.skipped,
                    r.pass
                )?;
            }
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&serde_json::json!({ "spec": s.spec, "states": rows }))?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(s: &Settings) -> Result<ExitCode> {
    let opts = VerifyOptions { m: s.spec.m.value(), seed: s.seed };
    let results = run_suite(&s.suite, &opts);
    let failed = results.iter().filter(|r| !r.passed).count();
    match s.format {
        Format::Csv => {
            let mut out = String::new();
            for r in &results {
                writeln!(out, "{}", format_row(r))?;
            }
            writeln!(out, "{} of {} criteria passed", results.len() - failed, results.len())?;
            emit(s, &out)?;
        }
        Format::Json => emit(s, &to_json(&results)?)?,
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
