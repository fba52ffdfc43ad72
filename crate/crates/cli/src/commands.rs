use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use scmstream::analysis::{acf, ljung_box, mmd_heatmap};
use scmstream::config::{sidecar_path, AnalysisOptions, EvaluationOptions, RunConfig};
use scmstream::csvio::{read_table_path, table_instances, write_stream, Table};
use scmstream::eval::{drift_response, event_windows, learner_by_name, prequential_run, write_drift_summary};
use scmstream::generator::{Instance, Sidecar, StreamGenerator};
use scmstream::graph::Task;
use scmstream::{presets, DriftSchedule, Error};

use crate::{AnalyzeArgs, EvaluateArgs, GenerateArgs, Mode, PresetAction, Source};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

const CONFIG_ERROR: u8 = 2;
const IO_ERROR: u8 = 3;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io() { IO_ERROR } else { CONFIG_ERROR },
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: IO_ERROR,
        message: format!("{}: {e}", path.display()),
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: CONFIG_ERROR,
        message: message.into(),
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn read_config(path: &Path) -> Result<RunConfig<f64>, Failure> {
    RunConfig::from_json(&read_text(path)?).map_err(|e| config_failure(format!("{}: {e}", path.display())))
}

fn load(source: &Source) -> Result<RunConfig<f64>, Failure> {
    let mut rc = match (&source.config, &source.preset) {
        (Some(path), _) => read_config(path)?,
        (None, Some(name)) => RunConfig::for_preset(name, None)?,
        (None, None) => return Err(config_failure("either --config or --preset is required")),
    };
    if let Some(name) = &source.preset {
        presets::summary(name)?;
        rc.preset = Some(name.clone());
        rc.generator = None;
    }
    if source.seed.is_some() {
        rc.seed = source.seed;
    }
    Ok(rc)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn finish(mut w: impl Write, path: Option<&Path>) -> Outcome {
    w.flush()
        .map_err(|e| io_failure(path.unwrap_or(Path::new("<stdout>")), e))
}

pub fn generate(a: GenerateArgs) -> Outcome {
    let rc = load(&a.source)?;
    let seed = rc.require_seed()?;
    let mut generator = StreamGenerator::new(rc.resolve_generator()?, seed)?;
    let data = a.out.or(rc.output.data);
    let sidecar = generator.sidecar();
    let mut out = sink(data.as_deref())?;
    write_stream(&mut out, &mut generator)?;
    finish(out, data.as_deref())?;
    if let Some(path) = rc.output.sidecar.or_else(|| data.as_deref().map(sidecar_path)) {
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &sidecar).map_err(|e| io_failure(&path, e))?;
        writeln!(w).map_err(|e| io_failure(&path, e))?;
        finish(w, Some(&path))?;
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<Table<f64>, Failure> {
    read_table_path(path).map_err(|e| match e {
        Error::Io(io) => io_failure(path, io),
        other => config_failure(format!("{}: {other}", path.display())),
    })
}

fn columns(table: &Table<f64>) -> Result<Vec<Vec<f64>>, Failure> {
    Ok((0..table.columns.len())
        .map(|j| table.column_imputed(j))
        .collect::<scmstream::Result<_>>()?)
}

pub fn analyze(a: AnalyzeArgs) -> Outcome {
    let (opts, config_seed) = match &a.config {
        Some(path) => {
            let rc = read_config(path)?;
            (rc.analysis, rc.seed)
        }
        None => (AnalysisOptions::default(), None),
    };
    let lags = a.lags.unwrap_or(opts.lags);
    let batch_size = a.batch_size.unwrap_or(opts.batch_size);
    let seed = a.seed.or(config_seed).unwrap_or(0);
    let table = read_input(&a.input)?;
    if table.n_rows() < 2 {
        return Err(config_failure(format!("{}: at least two rows are needed", a.input.display())));
    }
    let mut out = sink(a.out.as_deref())?;
    match a.mode {
        Mode::Acf => {
            let results = columns(&table)?
                .iter()
                .map(|c| acf(c, lags))
                .collect::<scmstream::Result<Vec<_>>>()?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(std::iter::once("lag").chain(table.columns.iter().map(String::as_str)))
                .map_err(Error::from)?;
            for k in 0..=lags {
                let mut row = vec![k.to_string()];
                row.extend(results.iter().map(|r| r.correlations[k].to_string()));
                w.write_record(&row).map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
        }
        Mode::Ljungbox => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["column", "q", "lags", "p_value", "reject_0.05", "reject_0.01", "reject_0.001"])
                .map_err(Error::from)?;
            for (name, c) in table.columns.iter().zip(columns(&table)?) {
                let lb = ljung_box(&c, lags)?;
                let mut row = vec![name.clone(), lb.q.to_string(), lb.lags.to_string(), lb.p_value.to_string()];
                row.extend(lb.reject_at.iter().map(|(_, r)| if *r { "Y" } else { "N" }.to_string()));
                w.write_record(&row).map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
        }
        Mode::Mmd => {
            let mut rows = table.matrix_imputed()?;
            if !opts.include_label || a.no_label {
                for r in rows.iter_mut() {
                    r.pop();
                }
            }
            let h = mmd_heatmap(&rows, batch_size, seed)?;
            let n = h.n_batches();
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(std::iter::once("batch".to_string()).chain((0..n).map(|j| j.to_string())))
                .map_err(Error::from)?;
            for (i, r) in h.values.iter().enumerate() {
                w.write_record(std::iter::once(i.to_string()).chain(r.iter().map(|v| v.to_string())))
                    .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            drop(w);
            if let Some(path) = &a.out {
                let grid_path = with_suffix(path, ".grid.csv");
                let mut g = csv::Writer::from_writer(create(&grid_path)?);
                g.write_record(["row", "col", "start_row", "start_col", "mmd2"]).map_err(Error::from)?;
                for i in 0..n {
                    for j in 0..n {
                        g.write_record([
                            i.to_string(),
                            j.to_string(),
                            (i * batch_size).to_string(),
                            (j * batch_size).to_string(),
                            h.values[i][j].to_string(),
                        ])
                        .map_err(Error::from)?;
                    }
                }
                g.flush().map_err(|e| io_failure(&grid_path, e))?;
            }
        }
    }
    finish(out, a.out.as_deref())
}

struct Prepared {
    rows: Vec<Instance<f64>>,
    task: Task,
    schedule: Option<DriftSchedule<f64>>,
    options: EvaluationOptions,
    seed: u64,
    curve_path: Option<PathBuf>,
}

fn learner_task(name: &str) -> Result<Task, Failure> {
    Ok(learner_by_name::<f64>(name)?.task())
}

fn prepare_csv(a: &EvaluateArgs, input: &Path) -> Result<Prepared, Failure> {
    let rc = a.source.config.as_deref().map(read_config).transpose()?;
    let table = read_input(input)?;
    let side = sidecar_path(input);
    let sidecar: Option<Sidecar<f64>> = if side.exists() {
        Some(serde_json::from_str(&read_text(&side)?).map_err(|e| config_failure(format!("{}: {e}", side.display())))?)
    } else {
        None
    };
    let learner = a
        .learner
        .clone()
        .or_else(|| rc.as_ref().and_then(|rc| rc.evaluation.learner.clone()));
    let task = match (&learner, &sidecar) {
        (Some(name), _) => learner_task(name)?,
        (None, Some(s)) if s.classes.is_some() => Task::Classification,
        (None, Some(_)) => Task::Regression,
        (None, None) => {
            let label = table.columns.len().saturating_sub(1);
            let integral = table
                .rows
                .iter()
                .all(|r| r.get(label).copied().flatten().is_some_and(|v| v >= 0.0 && v.fract() == 0.0));
            if integral {
                Task::Classification
            } else {
                Task::Regression
            }
        }
    };
    let rows = table_instances(&table, task == Task::Classification)?;
    Ok(Prepared {
        rows,
        task,
        schedule: sidecar.as_ref().map(|s| s.schedule.clone()),
        options: rc.as_ref().map(|rc| rc.evaluation.clone()).unwrap_or_default(),
        seed: a
            .source
            .seed
            .or(rc.as_ref().and_then(|rc| rc.seed))
            .or(sidecar.as_ref().map(|s| s.seed))
            .unwrap_or(0),
        curve_path: rc.and_then(|rc| rc.output.report),
    })
}

fn prepare_generated(a: &EvaluateArgs) -> Result<Prepared, Failure> {
    let rc = load(&a.source)?;
    let seed = rc.require_seed()?;
    let generator = StreamGenerator::new(rc.resolve_generator()?, seed)?;
    let task = generator.task();
    let schedule = generator.schedule().clone();
    let rows = generator.collect::<scmstream::Result<Vec<_>>>()?;
    Ok(Prepared {
        rows,
        task,
        schedule: Some(schedule),
        options: rc.evaluation,
        seed,
        curve_path: rc.output.report,
    })
}

pub fn evaluate(a: EvaluateArgs) -> Outcome {
    let mut p = match &a.input {
        Some(input) => prepare_csv(&a, input)?,
        None => prepare_generated(&a)?,
    };
    if let Some(l) = &a.learner {
        p.options.learner = Some(l.clone());
    }
    if let Some(w) = a.window {
        p.options.window = w;
    }
    if let Some(d) = a.delay {
        p.options.delay = d;
    }
    if let Some(f) = a.label_fraction {
        p.options.label_fraction = f;
    }
    let name = p.options.learner.clone().unwrap_or_else(|| {
        match p.task {
            Task::Classification => "logistic",
            Task::Regression => "sgd-regressor",
        }
        .to_string()
    });
    let mut learner = learner_by_name::<f64>(&name)?;
    if learner.task() != p.task {
        return Err(config_failure(format!("learner `{name}` does not fit a {:?} stream", p.task)));
    }
    let len = p.rows.len() as u64;
    let curve = prequential_run(p.rows, learner.as_mut(), &p.options.prequential(p.seed))?;
    let curve_path = a.out.or(p.curve_path);
    let mut out = sink(curve_path.as_deref())?;
    curve.write_csv(&mut out)?;
    finish(&mut out, curve_path.as_deref())?;

    let Some(schedule) = p.schedule.filter(|s| !s.events.is_empty()) else {
        return Ok(());
    };
    let summary = match drift_response(&curve, &event_windows(&schedule, len), p.options.window) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("warning: no drift summary: {e}");
            return Ok(());
        }
    };
    match &curve_path {
        Some(path) => {
            let summary_path = with_suffix(path, ".drift.csv");
            let mut w = create(&summary_path)?;
            write_drift_summary(&mut w, &summary)?;
            finish(w, Some(&summary_path))
        }
        None => {
            writeln!(out).map_err(Error::from)?;
            writeln!(out, "# drift response").map_err(Error::from)?;
            write_drift_summary(&mut out, &summary)?;
            finish(out, None)
        }
    }
}

pub fn preset(action: PresetAction) -> Outcome {
    let mut out = io::stdout().lock();
    match action {
        PresetAction::List => {
            for name in presets::NAMES {
                writeln!(out, "{name}\t{}", presets::summary(name)?).map_err(Error::from)?;
            }
        }
        PresetAction::Describe { name } => {
            write!(out, "{}", presets::describe(&name)?).map_err(Error::from)?;
        }
    }
    finish(out, None)
}
