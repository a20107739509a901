//! Command-line pipeline for causal evolutions of atomic measures.
//!
//! Subcommands:
//! - `check-causal`  — decide ⪯-monotonicity of an evolution, with up-set
//!   margins and infeasibility certificates.
//! - `build-sigma`   — run the dyadic curve-measure construction at one or
//!   more levels and report marginal exactness plus the Wasserstein trend.
//! - `verify-field`  — build the field for a test-function battery and
//!   check the continuity / clock / Leibniz / causality residual schedule
//!   across refinement levels.
//! - `transform`     — move a curve measure between observer frames and
//!   report the invariant-current discrepancies and worldline invariance.
//! - `demo`          — run the two built-in pipelines end to end.
//!
//! Exit codes: 0 pass, 1 property failure, 2 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use worldline::curve_measures::{
    dyadic_construct_sigma, wasserstein_curve_distance, CurveMeasure,
};
use worldline::field::{
    causality_residual, chain_rule_residual, clock_normalization_residual, continuity_residual,
    lambda_derivative_residual, tol_continuity, tol_second_order, FieldContext, ProductMap,
};
use worldline::json::{
    from_json_str, to_json_string, EvolutionDoc, FrameDoc, ModelDoc, SigmaDoc,
};
use worldline::measures::{
    causal_coupling_feasible, k_family_up_to, upset_characterization_check, ArithMode, Evolution,
};
use worldline::observers::{deparametrize, observable_battery, transform_sigma, ObserverFrame};
use worldline::rational;
use worldline::spacetime::{SpacetimeModel, TemporalFunction};
use worldline::test_functions::{BumpFunction, CausalTestFunction};
use worldline::{fixtures, Error};

#[derive(Parser)]
#[command(name = "worldline", version, about = "Causal measure evolutions at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that an evolution file is causal (adjacent-pair couplings plus
    /// up-set margins); writes causal_report.csv.
    CheckCausal {
        /// Evolution JSON document.
        #[arg(long)]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Largest subset size in the up-set family.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Arithmetic for feasibility: rational | float.
        #[arg(long, default_value = "rational")]
        arith: String,
        /// Seed recorded in reports (all batteries here are deterministic).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the dyadic construction for levels 1..=LEVELS; writes the curve
    /// measures and sigma_diagnostics.csv.
    BuildSigma {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify the field residual schedule for a curve measure; writes
    /// field_report.csv across refinement levels.
    VerifyField {
        /// Curve-measure JSON document.
        #[arg(long)]
        input: PathBuf,
        /// Model: minkowski | cylinder | flrw:EPS or inline JSON.
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: PathBuf,
        /// Number of coarsening levels (stride doubling per level).
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Transform a curve measure into other observer frames and report the
    /// invariant-current discrepancies; writes transform_report.csv and
    /// transform_summary.csv.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: String,
        /// Comma-separated frames, e.g. canonical,boost:0.3,boost:0.6.
        #[arg(long, default_value = "canonical,boost:0.3,boost:0.6")]
        frames: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a built-in pipeline end to end: example1 | example2.
    Demo {
        which: String,
        #[arg(long)]
        out: PathBuf,
        /// Grid step for example1 (ignored by example2, whose grid is tied
        /// to the lattice).
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidEvent(_) | Error::InvalidFrame(_) => 2,
        _ => 1,
    }
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::CheckCausal { input, out, kmax, arith, seed } => {
            cmd_check_causal(&input, &out, kmax, parse_arith(&arith)?, seed)
        }
        Command::BuildSigma { input, out, levels, seed } => {
            cmd_build_sigma(&input, &out, levels, seed)
        }
        Command::VerifyField { input, model, out, levels, seed } => {
            cmd_verify_field(&input, &parse_model(&model)?, &out, levels, seed)
        }
        Command::Transform { input, model, frames, out, levels, seed } => {
            cmd_transform(&input, &parse_model(&model)?, &frames, &out, levels, seed)
        }
        Command::Demo { which, out, dt, seed } => cmd_demo(&which, &out, dt, seed),
    }
}

fn parse_arith(s: &str) -> Result<ArithMode, Error> {
    match s {
        "rational" => Ok(ArithMode::Rational),
        "float" => Ok(ArithMode::Float),
        other => Err(Error::Parse(format!("unknown arithmetic mode {other:?}"))),
    }
}

fn parse_model(s: &str) -> Result<SpacetimeModel, Error> {
    match s {
        "minkowski" => return Ok(SpacetimeModel::Minkowski),
        "cylinder" => return Ok(SpacetimeModel::Cylinder),
        _ => {}
    }
    if let Some(eps) = s.strip_prefix("flrw:") {
        let eps: f64 = eps
            .parse()
            .map_err(|_| Error::Parse(format!("bad FLRW eps in {s:?}")))?;
        return Ok(SpacetimeModel::Flrw { eps });
    }
    let doc: ModelDoc = from_json_str(s)?;
    doc.to_model()
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Parse(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

fn load_evolution(path: &Path) -> Result<(SpacetimeModel, Evolution), Error> {
    let doc: EvolutionDoc = from_json_str(&read_to_string(path)?)?;
    doc.to_evolution()
}

fn load_sigma(path: &Path, model: &SpacetimeModel) -> Result<CurveMeasure, Error> {
    let doc: SigmaDoc = from_json_str(&read_to_string(path)?)?;
    doc.to_sigma(model)
}

fn fmt_events(events: &[worldline::spacetime::Event]) -> String {
    events
        .iter()
        .map(|p| format!("{}:{}", p.t, p.x))
        .collect::<Vec<_>>()
        .join(";")
}

// ---------------------------------------------------------------------------
// check-causal

fn cmd_check_causal(
    input: &Path,
    out: &Path,
    kmax: usize,
    arith: ArithMode,
    seed: u64,
) -> Result<ExitCode, Error> {
    let (model, ev) = load_evolution(input)?;
    let mut csv = String::from("schema,seed,pair,t_from,t_to,feasible,worst_margin,certificate\n");
    let mut causal = true;
    let mut first_certificate: Option<String> = None;
    for k in 0..ev.len() - 1 {
        let mu = &ev.slices()[k];
        let nu = &ev.slices()[k + 1];
        let feasible = causal_coupling_feasible(&model, mu, nu, arith)?;
        let family = k_family_up_to(mu, kmax);
        let (upset_ok, margin) = upset_characterization_check(&model, mu, nu, &family)?;
        let mut certificate = String::new();
        if !feasible {
            causal = false;
            if let Err(Error::Infeasible { certificate: cert, .. }) =
                worldline::measures::find_causal_coupling(&model, mu, nu)
            {
                certificate = fmt_events(&cert);
                first_certificate.get_or_insert_with(|| certificate.clone());
            }
        }
        let _ = writeln!(
            csv,
            "1,{seed},{k},{},{},{},{margin},{certificate}",
            mu.time(),
            nu.time(),
            feasible && upset_ok
        );
        if !upset_ok {
            causal = false;
        }
    }
    write_out(out, "causal_report.csv", &csv)?;
    if causal {
        println!("causal: every adjacent pair admits a causal coupling");
        Ok(ExitCode::SUCCESS)
    } else {
        match first_certificate {
            Some(cert) => println!("NOT causal; blocking set: {cert}"),
            None => println!("NOT causal (up-set margin violated)"),
        }
        Ok(ExitCode::from(1))
    }
}

// ---------------------------------------------------------------------------
// build-sigma

fn cmd_build_sigma(input: &Path, out: &Path, levels: u32, seed: u64) -> Result<ExitCode, Error> {
    let (model, ev) = load_evolution(input)?;
    let mut sigmas = Vec::new();
    for level in 1..=levels.max(1) {
        let sigma = dyadic_construct_sigma(&model, &ev, level)?;
        write_out(
            out,
            &format!("sigma_level{level}.json"),
            &to_json_string(&SigmaDoc::from_sigma(&sigma))?,
        )?;
        sigmas.push((level, sigma));
    }
    let mut csv = String::from("schema,seed,level,atoms,marginals_exact,wasserstein_to_next\n");
    for (i, (level, sigma)) in sigmas.iter().enumerate() {
        // Marginal exactness at this level's dyadic times is a checked
        // postcondition of the construction; re-verify across the whole grid
        // family here for the report.
        let mut exact = true;
        let pieces = 1usize << level;
        let (a, b) = ev.interval();
        for i in 0..=pieces {
            let t = a + (b - a) * i as f64 / pieces as f64;
            let k = ev.grid_index(t)?;
            exact &= sigma.pushforward_at_index(k)?.atoms() == ev.slices()[k].atoms();
        }
        let wnext = match sigmas.get(i + 1) {
            Some((_, next)) => {
                let w = wasserstein_curve_distance(&model, sigma, next, ev.interval())?;
                format!("{w}")
            }
            None => String::new(),
        };
        let _ = writeln!(
            csv,
            "1,{seed},{level},{},{exact},{wnext}",
            sigma.atoms().len()
        );
    }
    write_out(out, "sigma_diagnostics.csv", &csv)?;
    println!("built {} level(s)", sigmas.len());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify-field

/// Bumps riding the mass-weighted mean trajectory of the evolution.
fn battery_bumps(model: &SpacetimeModel, ev: &Evolution, count: usize) -> Vec<BumpFunction> {
    let (lo, hi) = ev.interval();
    let span = hi - lo;
    let max_step = ev
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let radius_t = (span / 6.0).min(1.0).max(3.0 * max_step);
    let periodic = matches!(model, SpacetimeModel::Cylinder);
    let radius_x = 0.8;
    (0..count)
        .filter_map(|i| {
            let margin = 2.0 * max_step + radius_t;
            let t = lo + margin + (span - 2.0 * margin) * (i as f64 + 0.5) / count as f64;
            let k = ev
                .times()
                .iter()
                .position(|&g| g >= t)
                .unwrap_or(ev.len() - 1);
            let slice = &ev.slices()[k];
            let x = if periodic {
                let (s, c) = slice.atoms().iter().fold((0.0, 0.0), |(s, c), (p, w)| {
                    let wf = rational::to_f64(w);
                    (s + wf * p.x.sin(), c + wf * p.x.cos())
                });
                model.wrap_x(s.atan2(c))
            } else {
                slice
                    .atoms()
                    .iter()
                    .map(|(p, w)| rational::to_f64(w) * p.x)
                    .sum()
            };
            BumpFunction::new((t, x), (radius_t, radius_x), periodic).ok()
        })
        .collect()
}

struct ResidualRow {
    phi_id: String,
    kind: String,
    dt: f64,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn field_rows(
    model: &SpacetimeModel,
    sigma: &CurveMeasure,
    rows: &mut Vec<ResidualRow>,
) -> Result<(), Error> {
    let ev = sigma.induced_evolution()?;
    let ctx = FieldContext::new(sigma, &ev)?;
    let dt = ev
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let bumps = battery_bumps(model, &ev, 5);
    if bumps.is_empty() {
        return Err(Error::TestFunction(
            "window too short for an interior test battery".into(),
        ));
    }
    let causal_fns = CausalTestFunction::battery(model, ev.interval());
    for (i, phi) in bumps.iter().enumerate() {
        let phi_id = format!("bump_{i}");
        let c = continuity_residual(&ctx, phi)?;
        let tol = tol_continuity(dt, phi);
        rows.push(ResidualRow {
            phi_id: phi_id.clone(),
            kind: "continuity".into(),
            dt,
            value: c,
            tolerance: tol,
            pass: c <= tol,
        });
        let clock = clock_normalization_residual(&ctx, phi, &TemporalFunction::Canonical)?;
        let tol = tol_second_order(dt);
        rows.push(ResidualRow {
            phi_id: phi_id.clone(),
            kind: "clock".into(),
            dt,
            value: clock,
            tolerance: tol,
            pass: clock <= tol,
        });
        let partner = &bumps[(i + 1) % bumps.len()];
        let leibniz = chain_rule_residual(&ctx, &ProductMap, &[*phi, *partner])?;
        rows.push(ResidualRow {
            phi_id: phi_id.clone(),
            kind: "leibniz".into(),
            dt,
            value: leibniz,
            tolerance: tol,
            pass: leibniz <= tol,
        });
        let lambda = lambda_derivative_residual(&ctx, phi)?;
        let tol = tol_continuity(dt, phi);
        rows.push(ResidualRow {
            phi_id: phi_id.clone(),
            kind: "lambda_derivative".into(),
            dt,
            value: lambda,
            tolerance: tol,
            pass: lambda <= tol,
        });
        for f in &causal_fns {
            let worst = causality_residual(&ctx, model, f, phi)?;
            let tol = tol_continuity(dt, phi);
            rows.push(ResidualRow {
                phi_id: phi_id.clone(),
                kind: format!("causality_{}", f.id()),
                dt,
                value: worst,
                tolerance: tol,
                pass: worst >= -tol,
            });
        }
    }
    Ok(())
}

fn cmd_verify_field(
    input: &Path,
    model: &SpacetimeModel,
    out: &Path,
    levels: u32,
    seed: u64,
) -> Result<ExitCode, Error> {
    let sigma = load_sigma(input, model)?;
    let mut rows = Vec::new();
    let mut current = sigma;
    field_rows(model, &current, &mut rows)?;
    for _ in 1..levels.max(1) {
        let steps = current.times().len() - 1;
        if steps % 2 != 0 {
            break;
        }
        current = current.subsample(model, 2)?;
        if current.times().len() < 8 {
            break;
        }
        field_rows(model, &current, &mut rows)?;
    }
    let mut csv = String::from("schema,seed,phi_id,residual_kind,dt,value,tolerance,pass\n");
    let mut worst: Option<&ResidualRow> = None;
    for row in &rows {
        let _ = writeln!(
            csv,
            "1,{seed},{},{},{},{},{},{}",
            row.phi_id, row.kind, row.dt, row.value, row.tolerance, row.pass
        );
        if !row.pass && worst.is_none_or(|w| row.value.abs() > w.value.abs()) {
            worst = Some(row);
        }
    }
    write_out(out, "field_report.csv", &csv)?;
    match worst {
        None => {
            println!("all residuals within schedule ({} rows)", rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(row) => {
            println!(
                "residual breach: {} {} = {} (tolerance {})",
                row.phi_id, row.kind, row.value, row.tolerance
            );
            Ok(ExitCode::from(1))
        }
    }
}

// ---------------------------------------------------------------------------
// transform

fn parse_frames(s: &str) -> Result<Vec<TemporalFunction>, Error> {
    s.split(',').map(FrameDoc::parse_compact).collect()
}

fn cmd_transform(
    input: &Path,
    model: &SpacetimeModel,
    frames: &str,
    out: &Path,
    levels: u32,
    seed: u64,
) -> Result<ExitCode, Error> {
    let clocks = parse_frames(frames)?;
    for clock in &clocks {
        clock.validate_for(model)?;
    }
    let sigma0 = load_sigma(input, model)?;
    let mut report = String::from("schema,seed,frame,psi_id,phi_id,dt,pairing_a,pairing_b,discrepancy\n");
    let mut summary = String::from(
        "schema,seed,frame,dt,worst_discrepancy,clock_residual,worldline_deviation\n",
    );
    let psis = observable_battery(model);
    let mut current = sigma0;
    for level in 0..levels.max(1) {
        if level > 0 {
            let steps = current.times().len() - 1;
            if steps % 2 != 0 || steps / 2 < 8 {
                break;
            }
            current = current.subsample(model, 2)?;
        }
        let ev_a = current.induced_evolution()?;
        let ctx_a = FieldContext::new(&current, &ev_a)?;
        let dt = ev_a
            .times()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        let phis = battery_bumps(model, &ev_a, 3);
        let worldlines_a = deparametrize(model, &current, 65)?;
        for clock in &clocks {
            let frame_name = frame_label(clock);
            let steps = current.times().len() - 1;
            let frame = ObserverFrame::covering(model, &current, *clock, steps)?;
            let moved = transform_sigma(model, &current, &frame)?;
            let ev_b = moved.induced_evolution()?;
            let ctx_b = FieldContext::new(&moved, &ev_b)?;
            let mut worst = 0.0f64;
            for psi in &psis {
                for (j, phi) in phis.iter().enumerate() {
                    let a = worldline::observers::current_pairing(&ctx_a, psi, phi)?;
                    let b = worldline::observers::current_pairing(&ctx_b, psi, phi)?;
                    let rel = (a - b).abs() / (a.abs() + b.abs() + 1e-12);
                    worst = worst.max(rel);
                    let _ = writeln!(
                        report,
                        "1,{seed},{frame_name},{},bump_{j},{dt},{a},{b},{rel}",
                        psi.id
                    );
                }
            }
            // Clock normalization in the target frame.
            let span = ev_b.interval();
            let clock_phi = BumpFunction::new(
                (0.5 * (span.0 + span.1), mean_x(&ev_b)),
                (
                    ((span.1 - span.0) / 6.0).min(1.0),
                    if matches!(model, SpacetimeModel::Cylinder) { 0.8 } else { 0.9 },
                ),
                matches!(model, SpacetimeModel::Cylinder),
            )?;
            let clock_res = clock_normalization_residual(&ctx_b, &clock_phi, clock)?;
            let worldlines_b = deparametrize(model, &moved, 65)?;
            let deviation = worldlines_a
                .max_deviation(&worldlines_b)
                .map(|d| format!("{d}"))
                .unwrap_or_else(|| "structure_mismatch".into());
            let _ = writeln!(
                summary,
                "1,{seed},{frame_name},{dt},{worst},{clock_res},{deviation}"
            );
        }
    }
    write_out(out, "transform_report.csv", &report)?;
    write_out(out, "transform_summary.csv", &summary)?;
    println!("transform reports written");
    Ok(ExitCode::SUCCESS)
}

fn frame_label(clock: &TemporalFunction) -> String {
    match clock {
        TemporalFunction::Canonical => "canonical".into(),
        TemporalFunction::Boost { v } => format!("boost_{v}"),
        TemporalFunction::Sheared { lambda } => format!("sheared_{lambda}"),
    }
}

fn mean_x(ev: &Evolution) -> f64 {
    let mid = &ev.slices()[ev.len() / 2];
    mid.atoms()
        .iter()
        .map(|(p, w)| rational::to_f64(w) * p.x)
        .sum()
}

// ---------------------------------------------------------------------------
// demo

fn cmd_demo(which: &str, out: &Path, dt: f64, seed: u64) -> Result<ExitCode, Error> {
    match which {
        "example1" => demo_example1(out, dt, seed),
        "example2" => demo_example2(out, seed),
        other => Err(Error::Parse(format!(
            "unknown demo {other:?} (expected example1 | example2)"
        ))),
    }
}

/// Dirac worldline on Minkowski: check, construct, verify, transform.
fn demo_example1(out: &Path, dt: f64, seed: u64) -> Result<ExitCode, Error> {
    let model = SpacetimeModel::Minkowski;
    // Step count rounded to a multiple of 8 so the level-3 dyadic times all
    // land on the grid.
    let steps = (((worldline::spacetime::TAU / dt) / 8.0).round() as usize).max(1) * 8;
    let ev = fixtures::sine_dirac_evolution(steps);
    write_out(
        out,
        "evolution.json",
        &to_json_string(&EvolutionDoc::from_evolution(&model, &ev))?,
    )?;
    let ev_path = out.join("evolution.json");
    let code = cmd_check_causal(&ev_path, out, 2, ArithMode::Rational, seed)?;
    if code != ExitCode::SUCCESS {
        return Ok(code);
    }
    cmd_build_sigma(&ev_path, out, 3, seed)?;
    let sigma_path = out.join("sigma_level3.json");
    let code = cmd_verify_field(&sigma_path, &model, out, 2, seed)?;
    if code != ExitCode::SUCCESS {
        return Ok(code);
    }
    cmd_transform(
        &sigma_path,
        &model,
        "canonical,boost:0.3,boost:0.6",
        out,
        2,
        seed,
    )
}

/// Rotating dust on the cylinder: one evolution, three curve measures.
fn demo_example2(out: &Path, seed: u64) -> Result<ExitCode, Error> {
    let model = SpacetimeModel::Cylinder;
    let (atoms, steps) = (64usize, 32usize);
    let ev = fixtures::cylinder_constant_evolution(atoms, steps);
    write_out(
        out,
        "evolution.json",
        &to_json_string(&EvolutionDoc::from_evolution(&model, &ev))?,
    )?;
    let mut nonuniq = String::from("schema,seed,drift,sigma_file,marginals_exact,distinct_from_drift0\n");
    let mut sigma_docs = Vec::new();
    for slots in 0..=2usize {
        let drift = fixtures::cylinder_drift(atoms, steps, slots);
        let sigma = fixtures::cylinder_rotating_sigma(atoms, steps, slots)?;
        let mut exact = true;
        for k in 0..=steps {
            exact &= sigma.pushforward_at_index(k)?.atoms() == ev.slices()[k].atoms();
        }
        if !exact {
            println!("marginal mismatch at drift {drift}");
            return Ok(ExitCode::from(1));
        }
        let name = format!("sigma_drift{slots}.json");
        let doc = to_json_string(&SigmaDoc::from_sigma(&sigma))?;
        write_out(out, &name, &doc)?;
        let distinct = sigma_docs.first().map(|first| &doc != first).unwrap_or(false);
        let _ = writeln!(nonuniq, "1,{seed},{drift},{name},{exact},{distinct}");
        sigma_docs.push(doc);

        let code = cmd_verify_field(&out.join(&name), &model, &out.join(format!("drift{slots}")), 1, seed)?;
        if code != ExitCode::SUCCESS {
            return Ok(code);
        }
    }
    write_out(out, "nonuniqueness_report.csv", &nonuniq)?;
    println!("example2 pipeline complete: one evolution, three distinct curve measures");
    Ok(ExitCode::SUCCESS)
}
