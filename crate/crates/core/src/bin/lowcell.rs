use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use lowcell::config::RunConfig;
use lowcell::tasks::run_cached;
use lowcell::Error;

/// Lowest two-sided cell of an affine Hecke algebra with unequal parameters.
#[derive(Parser, Debug)]
#[command(name = "lowcell", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Task to run, overriding the configured list (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    task: Vec<String>,
    /// Ball radius, overriding the configuration.
    #[arg(long)]
    radius: Option<u32>,
    /// Directory for one `<task>.json` report per task.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Emit a human-readable summary instead of JSON.
    #[arg(long)]
    table: bool,
    /// Properties for `verify`, e.g. `P1,P4,P15` or `all`.
    #[arg(long)]
    props: Option<String>,
    /// Random sample size for `verify` instead of an exhaustive sweep.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// List every γ triple in the `basedring` report.
    #[arg(long)]
    check_gamma: bool,
    /// Specialization values of the Γ-coordinates, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Torus points: coordinates comma separated, points separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    torus: Option<String>,
    /// `Q` or a prime.
    #[arg(long)]
    field: Option<String>,
    /// Result cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn split(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn apply(cli: &Cli, cfg: &mut RunConfig) {
    if !cli.task.is_empty() {
        cfg.tasks = cli.task.clone();
    }
    if let Some(r) = cli.radius {
        cfg.radius = r;
    }
    if let Some(p) = &cli.props {
        cfg.verify.props = Some(p.clone());
    }
    if cli.samples.is_some() {
        cfg.verify.samples = cli.samples;
    }
    if cli.seed.is_some() {
        cfg.verify.seed = cli.seed;
        cfg.basedring.seed = cli.seed;
    }
    if cli.check_gamma {
        cfg.basedring.check_gamma = Some(true);
    }
    if let Some(q) = &cli.q {
        cfg.spectra.q = Some(vec![split(q)]);
    }
    if let Some(t) = &cli.torus {
        cfg.spectra.torus = Some(t.split(';').map(split).collect());
    }
    if let Some(f) = &cli.field {
        cfg.spectra.field = Some(f.clone());
    }
    if let Some(c) = &cli.cache {
        cfg.cache = Some(c.display().to_string());
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
}

fn summary(task: &str, passed: bool, v: &Value) -> String {
    let mut s = format!("== {task}: {}\n", if passed { "pass" } else { "FAIL" });
    match v {
        Value::Array(rows) => {
            for r in rows {
                let name = r.get("property").and_then(Value::as_str).unwrap_or("?");
                let status = r.pointer("/verdict/status").and_then(Value::as_str).unwrap_or("?");
                let checked = r.get("checked").and_then(Value::as_u64).unwrap_or(0);
                s += &format!("{name:<6} {status:<8} {checked:>10}  {}\n", r.get("statement").and_then(Value::as_str).unwrap_or(""));
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                let mut t = x.to_string();
                if t.len() > 100 {
                    t.truncate(97);
                    t += "...";
                }
                s += &format!("{k:<24} {t}\n");
            }
        }
        other => s += &format!("{other}\n"),
    }
    s
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let mut cfg = RunConfig::from_file(&cli.config.display().to_string())?;
    apply(cli, &mut cfg);
    cfg.validate()?;
    if cfg.tasks.is_empty() {
        return Err(Error::Config("tasks: nothing to run".into()));
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    let cache = cfg.cache.as_ref().map(PathBuf::from);
    let mut all = true;
    let mut results = serde_json::Map::new();
    for task in &cfg.tasks {
        let (out, _) = run_cached(&cfg, task, cache.as_deref())?;
        all &= out.passed;
        results.insert(task.clone(), serde_json::json!({"passed": out.passed, "result": out.value}));
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        for (task, v) in &results {
            let p = PathBuf::from(dir).join(format!("{task}.json"));
            std::fs::write(p, serde_json::to_string_pretty(v).expect("serializes") + "\n")?;
        }
    }
    if cli.table {
        for (task, v) in &results {
            print!("{}", summary(task, v["passed"].as_bool().unwrap_or(false), &v["result"]));
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&Value::Object(results)).expect("serializes"));
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lowcell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
