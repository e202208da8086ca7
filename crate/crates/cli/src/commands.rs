//! Subcommand implementations. Each returns the process exit code; errors
//! bubble to main where they map onto the exit-code contract.

use std::path::Path;

use serde::Serialize;

use combsteer_core::comb::{pixel_labels, simulate_cm};
use combsteer_core::io::{
    digest_file, load_cm, load_model, save_cm, write_report, InputDigest, CM_SCHEMA, MODEL_SCHEMA,
};
use combsteer_core::steering::{
    audit_monogamy, classify_direction, loss_scan as run_loss_scan, monte_carlo_uncertainty,
    steering, steering_spectrum, sweep_configs, MonogamyConfig, MonogamyRelation, MonogamyReport,
    SpectrumOptions, SteeringSpectrumReport,
};
use combsteer_core::{
    Bipartition, CovarianceMatrix, EnumerationMode, Error, Result, Tolerances, UncertaintyEstimate,
};

/// Steering value with its unit. dB here is a display scale for the
/// quantifier (10 log10 e per nat), not a squeezing level.
fn fmt_value(nats: f64, db: bool) -> String {
    if db {
        format!("{:.6} dB", nats * 10.0 / std::f64::consts::LN_10)
    } else {
        format!("{nats:.6} nats")
    }
}

/// "a,b -> c" rendering for report rows, mirroring Bipartition::describe.
fn describe_split(steering: &[usize], steered: &[usize], labels: Option<&[String]>) -> String {
    let side = |modes: &[usize]| {
        modes
            .iter()
            .map(|&m| match labels {
                Some(l) if m < l.len() => l[m].clone(),
                _ => m.to_string(),
            })
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{} -> {}", side(steering), side(steered))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Digests recorded in a report envelope: the analyzed file, then the
/// tolerance override when one was in force.
fn report_inputs(file: &Path, config: Option<&Path>) -> Result<Vec<InputDigest>> {
    let mut inputs = vec![digest_file(file)?];
    if let Some(c) = config {
        inputs.push(digest_file(c)?);
    }
    Ok(inputs)
}

fn check_pixel_override(pixels: Option<usize>) -> Result<()> {
    match pixels {
        Some(p) if ![4, 8, 16].contains(&p) => Err(Error::BadArgument(format!(
            "--pixels must be 4, 8, or 16, got {p}"
        ))),
        _ => Ok(()),
    }
}

fn parse_modes(cm: &CovarianceMatrix, spec: &str) -> Result<Vec<usize>> {
    let tokens: Vec<String> = spec
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(Error::BadArgument(format!("empty mode group in {spec:?}")));
    }
    cm.resolve_all(&tokens)
}

pub fn validate(file: &Path, tol: &Tolerances) -> Result<i32> {
    let text = std::fs::read_to_string(file).map_err(|e| io_error(file, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: file.display().to_string(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let schema = value.get("schema").and_then(|v| v.as_str()).unwrap_or("");

    if schema == CM_SCHEMA {
        // load_cm rejects unphysical matrices with the verdict text, which
        // main prints; reaching this point means the state passed.
        let cm = load_cm(file, tol)?;
        match cm.labels() {
            Some(l) => println!("covariance matrix: {} modes ({})", cm.n_modes(), l.join(" ")),
            None => println!("covariance matrix: {} modes, unlabeled", cm.n_modes()),
        }
        println!("{}", cm.validate(tol));
        Ok(0)
    } else if schema == MODEL_SCHEMA {
        let model = load_model(file)?;
        println!(
            "comb model: {} eigenmodes, {} pixels, efficiency {}",
            model.eigenmodes.len(),
            model.n_pixels,
            model.efficiency
        );
        let cm = simulate_cm(&model, tol)?;
        println!("simulated state: {}", cm.validate(tol));
        Ok(0)
    } else {
        Err(Error::BadFile {
            path: file.display().to_string(),
            msg: format!("unrecognized schema {schema:?} (expected {CM_SCHEMA:?} or {MODEL_SCHEMA:?})"),
        })
    }
}

pub fn steer(
    file: &Path,
    from: &[String],
    to: &[String],
    both_directions: bool,
    db: bool,
    tol: &Tolerances,
) -> Result<i32> {
    let cm = load_cm(file, tol)?;
    let partition = Bipartition::new(cm.resolve_all(from)?, cm.resolve_all(to)?)?;
    let forward = steering(&cm, &partition, tol)?;
    println!(
        "G({}) = {}",
        partition.describe(cm.labels()),
        fmt_value(forward.value, db)
    );
    if both_directions {
        let reverse = steering(&cm, &partition.flipped(), tol)?;
        println!(
            "G({}) = {}",
            reverse.partition.describe(cm.labels()),
            fmt_value(reverse.value, db)
        );
        let direction = classify_direction(forward.value, reverse.value, tol)?;
        println!("direction: {direction}");
    }
    Ok(0)
}

fn print_spectrum_summary(report: &SteeringSpectrumReport, top: usize) {
    let labels = report.labels.as_deref();
    println!(
        "enumeration: {} over {} modes -> {} partitions",
        report.mode,
        report.n_modes,
        report.partitions.len()
    );
    println!(
        "steerable: {}   errors: {}",
        report.steerable_count, report.error_count
    );
    if let Some((idx, value)) = report.max_value() {
        let p = &report.partitions[idx];
        println!(
            "max G = {} at {}",
            fmt_value(value, false),
            describe_split(&p.steering, &p.steered, labels)
        );
    }

    if top > 0 {
        let mut order: Vec<usize> = (0..report.partitions.len())
            .filter(|&i| report.partitions[i].value.is_some())
            .collect();
        // Ties broken by enumeration index so output never depends on jobs.
        order.sort_by(|&a, &b| {
            let va = report.partitions[a].value.unwrap();
            let vb = report.partitions[b].value.unwrap();
            vb.total_cmp(&va).then(a.cmp(&b))
        });
        println!("strongest {}:", top.min(order.len()));
        for &i in order.iter().take(top) {
            let p = &report.partitions[i];
            println!(
                "  {}  {}",
                fmt_value(p.value.unwrap(), false),
                describe_split(&p.steering, &p.steered, labels)
            );
        }
    }

    if !report.groups.is_empty() {
        println!("split sizes (steering|steered: median / max, count):");
        for g in &report.groups {
            println!(
                "  {}|{}: {:.6} / {:.6}  ({})",
                g.steering_size, g.steered_size, g.stats.median, g.stats.max, g.stats.count
            );
        }
    }
}

pub fn spectrum(
    file: &Path,
    mode: EnumerationMode,
    max_partitions: Option<u64>,
    top: usize,
    out: Option<&Path>,
    config: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    let cm = load_cm(file, tol)?;
    let mut opts = SpectrumOptions::new(mode);
    opts.cap = max_partitions;
    let report = steering_spectrum(&cm, &opts, tol)?;
    print_spectrum_summary(&report, top);
    if let Some(path) = out {
        write_report(path, "steering-spectrum", report_inputs(file, config)?, &report)?;
        println!("report: {}", path.display());
    }
    Ok(0)
}

pub fn loss_scan(
    file: &Path,
    remove: &[String],
    mode: EnumerationMode,
    out: Option<&Path>,
    config: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    let cm = load_cm(file, tol)?;
    let report = run_loss_scan(&cm, remove, &SpectrumOptions::new(mode), tol)?;
    println!("removal sequence: {}", report.removal_sequence.join(", "));
    for (k, step) in report.steps.iter().enumerate() {
        println!(
            "step {}: removed [{}]  {} modes, {}/{} steerable, max G = {}",
            k + 1,
            step.removed.join(" "),
            step.remaining_modes,
            step.steerable_count,
            step.partitions.len(),
            fmt_value(step.max_value, false)
        );
    }
    if let Some(path) = out {
        write_report(path, "loss-scan", report_inputs(file, config)?, &report)?;
        println!("report: {}", path.display());
    }
    Ok(0)
}

pub struct MonogamyArgs<'a> {
    pub relation: MonogamyRelation,
    pub groups: Option<&'a str>,
    pub steered: Option<&'a str>,
    pub sweep: bool,
    pub steered_size: usize,
    pub cap: usize,
}

#[derive(Serialize)]
struct MonogamyPayload {
    relation: MonogamyRelation,
    reports: Vec<MonogamyReport>,
}

pub fn monogamy(
    file: &Path,
    args: &MonogamyArgs,
    out: Option<&Path>,
    config: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    let cm = load_cm(file, tol)?;
    let configs: Vec<MonogamyConfig> = if args.sweep {
        sweep_configs(cm.n_modes(), args.relation, args.steered_size, args.cap)
    } else {
        let (groups, steered) = match (args.groups, args.steered) {
            (Some(g), Some(s)) => (g, s),
            _ => {
                return Err(Error::BadArgument(
                    "provide --groups and --steered, or --sweep".into(),
                ))
            }
        };
        let steering_groups = groups
            .split(';')
            .map(|g| parse_modes(&cm, g))
            .collect::<Result<Vec<_>>>()?;
        vec![MonogamyConfig {
            steering_groups,
            steered: parse_modes(&cm, steered)?,
        }]
    };
    if configs.is_empty() {
        return Err(Error::BadArgument(format!(
            "no admissible {} configurations on {} modes",
            args.relation,
            cm.n_modes()
        )));
    }

    let mut reports = Vec::with_capacity(configs.len());
    let mut violations = 0usize;
    for cfg in &configs {
        let report = audit_monogamy(&cm, args.relation, cfg, tol)?;
        if !report.satisfied {
            violations += 1;
        }
        // Sweeps only spell out the violations; a clean line per satisfied
        // configuration would drown them.
        if !args.sweep || !report.satisfied {
            println!(
                "{}  {}: lhs = {:.6}  rhs = {:.6}  margin = {:+.6}",
                if report.satisfied { "SATISFIED" } else { "VIOLATED " },
                cfg.describe(cm.labels()),
                report.lhs,
                report.rhs,
                report.margin
            );
        }
        reports.push(report);
    }
    println!(
        "{}: {} of {} configurations violated",
        args.relation,
        violations,
        reports.len()
    );

    if let Some(path) = out {
        let payload = MonogamyPayload {
            relation: args.relation,
            reports,
        };
        write_report(path, "monogamy-audit", report_inputs(file, config)?, &payload)?;
        println!("report: {}", path.display());
    }
    Ok(0)
}

pub fn simulate(
    model_path: &Path,
    pixels: Option<usize>,
    out: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    check_pixel_override(pixels)?;
    let mut model = load_model(model_path)?;
    if let Some(p) = pixels {
        model.n_pixels = p;
    }
    let cm = simulate_cm(&model, tol)?;
    println!(
        "model: {} eigenmodes at {} pixels",
        model.eigenmodes.len(),
        model.n_pixels
    );
    println!("state: {}", cm.validate(tol));
    if let Some(labels) = cm.labels() {
        println!("labels: {}", labels.join(" "));
    }
    if let Some(path) = out {
        let provenance = format!(
            "simulated from {} at {} pixels",
            model_path.display(),
            model.n_pixels
        );
        save_cm(&cm, Some(&provenance), path)?;
        println!("saved: {}", path.display());
    }
    Ok(0)
}

pub struct McArgs<'a> {
    pub from: &'a [String],
    pub to: &'a [String],
    pub noise_db: &'a [f64],
    pub samples: usize,
    pub seed: u64,
    pub pixels: Option<usize>,
}

#[derive(Serialize)]
struct McPayload {
    partition: Bipartition,
    noise_db: Vec<f64>,
    requested_samples: usize,
    estimate: UncertaintyEstimate,
}

pub fn mc(
    model_path: &Path,
    args: &McArgs,
    out: Option<&Path>,
    config: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    check_pixel_override(args.pixels)?;
    let mut model = load_model(model_path)?;
    if let Some(p) = args.pixels {
        model.n_pixels = p;
    }
    // The unperturbed state resolves the party labels and proves the model
    // simulates cleanly before any sampling starts.
    let cm = simulate_cm(&model, tol)?;
    let partition = Bipartition::new(cm.resolve_all(args.from)?, cm.resolve_all(args.to)?)?;
    let estimate = monte_carlo_uncertainty(
        &model,
        &partition,
        args.noise_db,
        args.samples,
        args.seed,
        tol,
    )?;
    println!(
        "G({}) under squeezing noise s.d. {:?} dB:",
        partition.describe(cm.labels()),
        args.noise_db
    );
    println!(
        "  mean = {:.6} nats   std = {:.6}   accepted = {}   rejected = {}   seed = {}",
        estimate.mean,
        estimate.std,
        estimate.n_samples,
        estimate.n_unphysical_rejected,
        estimate.seed
    );
    if let Some(path) = out {
        let payload = McPayload {
            partition,
            noise_db: args.noise_db.to_vec(),
            requested_samples: args.samples,
            estimate,
        };
        write_report(path, "monte-carlo", report_inputs(model_path, config)?, &payload)?;
        println!("report: {}", path.display());
    }
    Ok(0)
}

pub fn coarsen(
    file: &Path,
    to_pixels: Option<usize>,
    merge: Option<&str>,
    out: Option<&Path>,
    tol: &Tolerances,
) -> Result<i32> {
    let cm = load_cm(file, tol)?;

    let (groups, labels) = match (to_pixels, merge) {
        (Some(target), None) => uniform_merge_groups(&cm, target)?,
        (None, Some(spec)) => explicit_merge_groups(&cm, spec)?,
        _ => {
            return Err(Error::BadArgument(
                "provide exactly one of --to-pixels or --merge".into(),
            ))
        }
    };

    let map = combsteer_core::ModeMap::merge_groups(&groups, cm.n_modes())?;
    let merged = cm.apply_mode_map(&map, Some(labels))?;
    println!(
        "merged {} modes -> {}: {}",
        cm.n_modes(),
        merged.n_modes(),
        merged.labels().map(|l| l.join(" ")).unwrap_or_default()
    );
    println!("state: {}", merged.validate(tol));
    if let Some(path) = out {
        let provenance = format!(
            "coarsened from {} ({} -> {} modes)",
            file.display(),
            cm.n_modes(),
            merged.n_modes()
        );
        save_cm(&merged, Some(&provenance), path)?;
        println!("saved: {}", path.display());
    }
    Ok(0)
}

/// Consecutive-chunk merge onto a standard resolution. Requires the state
/// to carry exactly the standard labels of its own resolution, so a
/// reordered or hand-labeled state cannot be silently mis-merged.
fn uniform_merge_groups(
    cm: &CovarianceMatrix,
    target: usize,
) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    let n = cm.n_modes();
    if ![4, 8].contains(&target) || n <= target || n % target != 0 {
        return Err(Error::BadArgument(format!(
            "cannot coarsen {n} modes to {target} pixels (target must be 4 or 8 and divide the mode count)"
        )));
    }
    let expected = pixel_labels(n)?;
    match cm.labels() {
        Some(l) if l == expected.as_slice() => {}
        _ => {
            return Err(Error::BadArgument(format!(
                "state does not carry the standard {n}-pixel labels; use --merge"
            )))
        }
    }
    let factor = n / target;
    let groups = (0..target)
        .map(|g| (g * factor..(g + 1) * factor).collect())
        .collect();
    Ok((groups, pixel_labels(target)?))
}

/// Parse "a1+a2,b1,b2": comma-separated output modes, '+' joining the
/// input modes merged into each. Singletons keep their label.
fn explicit_merge_groups(
    cm: &CovarianceMatrix,
    spec: &str,
) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for group_spec in spec.split(',') {
        let tokens: Vec<String> = group_spec
            .split('+')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::BadArgument(format!(
                "empty merge group in {spec:?}"
            )));
        }
        groups.push(cm.resolve_all(&tokens)?);
        labels.push(tokens.join("+"));
    }
    Ok((groups, labels))
}
