use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use stagesvm_core::dataset::{load_dataset, read_csv, write_dataset};
use stagesvm_core::harness::{
    learning_curve, random_search, run_loo, run_repeated_holdout, EvaluationReport, Protocol,
    SearchSpace,
};
use stagesvm_core::metrics::{render_report, ReportFormat};
use stagesvm_core::multiclass::{train_multiclass, HyperParams, MulticlassModel};
use stagesvm_core::util::write_atomic;
use stagesvm_core::{Dataset, Error};

use crate::args::{CurveArgs, EvaluateArgs, IngestArgs, PredictArgs, ProtocolArg, TrainArgs};
use crate::config::{
    resolve_common, resolve_fractions, resolve_protocol, resolve_search, FileConfig, Resolved,
};
use crate::CliError;

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::runtime("thread_pool", e.to_string()))?;
    Ok(pool.install(f))
}

fn load(settings: &Resolved) -> Result<Dataset, CliError> {
    let path = settings
        .manifest
        .as_ref()
        .ok_or_else(|| CliError::usage("--manifest is required (flag or config)"))?;
    let ds = load_dataset(path)?;
    match &settings.schema {
        Some(schema) => Ok(Dataset::new(
            ds.records().to_vec(),
            ds.dim(),
            schema.clone(),
            ds.provenance(),
        )?),
        None => Ok(ds),
    }
}

fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Wall-clock details kept apart from the deterministic outputs.
struct RunLog {
    started: f64,
    clock: Instant,
    lines: Vec<String>,
}

impl RunLog {
    fn start(command: &str) -> Self {
        let args: Vec<String> = std::env::args().collect();
        RunLog {
            started: unix_seconds(),
            clock: Instant::now(),
            lines: vec![
                format!("command: {command}"),
                format!("argv: {}", args.join(" ")),
            ],
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn write(self, dir: &Path) -> Result<(), CliError> {
        let mut text = format!("started_unix: {:.3}\n", self.started);
        for line in &self.lines {
            text.push_str(line);
            text.push('\n');
        }
        let _ = writeln!(text, "finished_unix: {:.3}", unix_seconds());
        let _ = writeln!(
            text,
            "elapsed_seconds: {:.3}",
            self.clock.elapsed().as_secs_f64()
        );
        write_atomic(&dir.join("run.log"), text.as_bytes())?;
        Ok(())
    }
}

pub fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let settings = resolve_common(&args.common, &file);
    let ds = read_csv(&args.csv, settings.schema.clone())?;
    write_dataset(&ds, &args.out_manifest)?;
    println!(
        "wrote {} (n={}, d={}, classes={})",
        args.out_manifest.display(),
        ds.len(),
        ds.dim(),
        ds.schema().join(",")
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let settings = resolve_common(&args.common, &file);
    let mut space = resolve_search(&args.search, &file.search)?;
    if let Some(c) = args.c {
        space.c = (c, c);
    }
    if let Some(g) = args.gamma {
        space.gamma = (g, g);
    }
    space
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let ds = load(&settings)?;
    ds.require_all_classes("training set")?;

    let seed = settings.seed;
    let model = in_pool(settings.jobs, || -> Result<MulticlassModel, Error> {
        let hp = match (args.c, args.gamma) {
            (Some(c), Some(gamma)) => HyperParams::new(c, gamma)?,
            _ => random_search(&ds, &space, seed)?.hyper_params,
        };
        train_multiclass(&ds, hp, seed)
    })??;
    model.save(&settings.out)?;
    let hp = model.hyper_params();
    println!(
        "wrote {} (C={}, gamma={}, classes={})",
        settings.out.display(),
        hp.c,
        hp.gamma,
        model.schema().join(",")
    );
    if !model.all_converged() {
        let failed: Vec<&str> = model
            .schema()
            .iter()
            .zip(model.binary_models())
            .filter(|(_, m)| !m.converged())
            .map(|(c, _)| c.as_str())
            .collect();
        return Err(CliError::runtime(
            "not_converged",
            format!(
                "solver hit its iteration cap for class(es) {}",
                failed.join(",")
            ),
        ));
    }
    Ok(())
}

fn protocol_line(report: &EvaluationReport) -> String {
    match report.protocol {
        Protocol::LeaveOneOut => format!("leave-one-out ({} folds)", report.units.len()),
        Protocol::HoldOut {
            repetitions,
            train_fraction,
        } => format!(
            "repeated hold-out ({repetitions} repetitions, train fraction {train_fraction})"
        ),
    }
}

fn summary_text(report: &EvaluationReport, source: &Path) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "protocol: {}", protocol_line(report));
    let _ = writeln!(text, "seed: {}", report.master_seed);
    let _ = writeln!(
        text,
        "dataset: {} (n={}, d={}, classes={})",
        source.display(),
        report.dataset.n,
        report.dataset.d,
        report.dataset.schema.join(",")
    );
    let _ = writeln!(
        text,
        "search: C in [{}, {}], gamma in [{}, {}], budget {}, patience {}",
        report.search.c.0,
        report.search.c.1,
        report.search.gamma.0,
        report.search.gamma.1,
        report.search.budget,
        report.search.patience
    );
    text.push('\n');
    text.push_str(&render_report(&report.aggregate, ReportFormat::Table));
    text
}

fn unconverged_units(report: &EvaluationReport) -> Vec<usize> {
    report
        .units
        .iter()
        .filter(|u| !u.converged)
        .map(|u| u.unit)
        .collect()
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let settings = resolve_common(&args.common, &file);
    let space = resolve_search(&args.search, &file.search)?;
    let (protocol, repetitions, train_fraction) =
        resolve_protocol(args.protocol, args.repetitions, args.train_fraction, &file);
    let ds = load(&settings)?;
    let mut log = RunLog::start("evaluate");

    let seed = settings.seed;
    let report = in_pool(settings.jobs, || match protocol {
        ProtocolArg::Loo => run_loo(&ds, &space, seed),
        ProtocolArg::Holdout => {
            run_repeated_holdout(&ds, repetitions, train_fraction, &space, seed)
        }
    })??;

    let out = &settings.out;
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    let source = settings.manifest.clone().unwrap_or_default();
    let summary = summary_text(&report, &source);
    write_atomic(&out.join("report.txt"), summary.as_bytes())?;
    print!("{summary}");

    let stale = unconverged_units(&report);
    log.note(format!("units: {}", report.units.len()));
    log.note(format!("unconverged_units: {stale:?}"));
    log.write(out)?;
    if !stale.is_empty() {
        return Err(CliError::runtime(
            "not_converged",
            format!(
                "{} unit(s) trained a model that hit the iteration cap: {stale:?}",
                stale.len()
            ),
        ));
    }
    Ok(())
}

pub fn learning_curve_cmd(args: CurveArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let settings = resolve_common(&args.common, &file);
    let space: SearchSpace = resolve_search(&args.search, &file.search)?;
    let fractions = resolve_fractions(args.fractions.as_deref(), &file)?;
    let ds = load(&settings)?;
    let mut log = RunLog::start("learning-curve");

    let seed = settings.seed;
    let curve = in_pool(settings.jobs, || {
        learning_curve(&ds, &fractions, &space, seed)
    })??;
    let out = &settings.out;
    write_atomic(&out.join("curve.csv"), curve.to_csv().as_bytes())?;
    write_atomic(&out.join("curve.json"), curve.to_json().as_bytes())?;
    print!("{}", curve.to_csv());
    log.note(format!("points: {}", curve.points.len()));
    log.write(out)?;
    Ok(())
}

pub fn predict(args: PredictArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let settings = resolve_common(&args.common, &file);
    let model = MulticlassModel::load(&args.model)?;
    let ds = load(&settings)?;
    if ds.dim() != model.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_dim(),
            actual: ds.dim(),
        }
        .into());
    }
    let predictions = in_pool(settings.jobs, || model.predict_batch(&ds))??;

    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    let io_err = |e: csv::Error| CliError::runtime("io", e.to_string());
    let mut header = vec!["id".to_string(), "predicted_label".to_string()];
    header.extend(model.schema().iter().cloned());
    w.write_record(&header).map_err(io_err)?;
    for p in predictions {
        let mut row = vec![p.id, p.label];
        row.extend(p.decision_values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| CliError::runtime("io", e.to_string()))?;
    Ok(())
}
