//! Command-line runner.
//!
//! ```text
//! varmass run <config-file> [--override key=value]... [--seed N] [--workers N] [--out DIR]
//! varmass validate <config-file>
//! varmass audit [--seed N]
//! ```
//!
//! Exit codes: 0 success, 2 invariant violation, 3 configuration error.
//! Output directory defaults to the config's `out` key or `$VARMASS_OUT`.

mod config;
mod scenarios;

use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;
use varmass_core::Error;

fn version_string() -> String {
    // prefer the repository description when available
    let git = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output();
    if let Ok(out) = git {
        if out.status.success() {
            if let Ok(s) = String::from_utf8(out.stdout) {
                let s = s.trim();
                if !s.is_empty() {
                    return s.to_string();
                }
            }
        }
    }
    format!("varmass {}", env!("CARGO_PKG_VERSION"))
}

fn classify(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::Io(_) | Error::Unsupported(_) => 3,
        _ => 2,
    }
}

fn run() -> Result<(), (u8, String)> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return Err((3, "usage: varmass <run|validate|audit> ...".into()));
    }
    match args[0].as_str() {
        "run" => cmd_run(&args[1..]),
        "validate" => cmd_validate(&args[1..]),
        "audit" => cmd_audit(&args[1..]),
        other => Err((3, format!("unknown subcommand '{other}'"))),
    }
}

fn parse_common(
    args: &[String],
) -> Result<(Option<String>, Vec<(String, String)>, Option<u64>, Option<usize>, Option<String>), (u8, String)>
{
    let mut file = None;
    let mut overrides = Vec::new();
    let mut seed = None;
    let mut workers = None;
    let mut out = None;
    let mut it = args.iter().peekable();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--override" => {
                let kv = it
                    .next()
                    .ok_or((3u8, "--override needs key=value".to_string()))?;
                let (k, v) = kv
                    .split_once('=')
                    .ok_or((3u8, format!("bad override '{kv}'")))?;
                overrides.push((k.trim().to_string(), v.trim().to_string()));
            }
            "--seed" => {
                let v = it.next().ok_or((3u8, "--seed needs a value".to_string()))?;
                seed = Some(v.parse().map_err(|_| (3u8, format!("bad seed '{v}'")))?);
            }
            "--workers" => {
                let v = it
                    .next()
                    .ok_or((3u8, "--workers needs a value".to_string()))?;
                workers = Some(v.parse().map_err(|_| (3u8, format!("bad workers '{v}'")))?);
            }
            "--out" => {
                let v = it.next().ok_or((3u8, "--out needs a value".to_string()))?;
                out = Some(v.clone());
            }
            other if !other.starts_with("--") && file.is_none() => {
                file = Some(other.to_string());
            }
            other => return Err((3, format!("unexpected argument '{other}'"))),
        }
    }
    Ok((file, overrides, seed, workers, out))
}

fn load_config(args: &[String]) -> Result<RunConfig, (u8, String)> {
    let (file, overrides, seed, workers, out) = parse_common(args)?;
    let path = file.ok_or((3u8, "missing config file".to_string()))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| (3u8, format!("cannot read '{path}': {e}")))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| (3u8, e.to_string()))?;
    for (k, v) in overrides {
        cfg.apply(&k, &v).map_err(|e| (3u8, e.to_string()))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    } else if let Ok(env_out) = std::env::var("VARMASS_OUT") {
        if cfg.out_dir == "out" {
            cfg.out_dir = env_out;
        }
    }
    Ok(cfg)
}

fn cmd_run(args: &[String]) -> Result<(), (u8, String)> {
    let cfg = load_config(args)?;
    let started = std::time::Instant::now();
    let body = || -> varmass_core::Result<scenarios::RunOutput> { scenarios::run_scenario(&cfg) };
    let output = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| (3u8, format!("worker pool: {e}")))?;
        pool.install(body)
    } else {
        body()
    }
    .map_err(|e| (classify(&e), e.to_string()))?;

    let out_dir = PathBuf::from(&cfg.out_dir);
    scenarios::write_outputs(&out_dir, &output).map_err(|e| (3u8, e.to_string()))?;
    let manifest = cfg.manifest(&version_string(), started.elapsed().as_secs_f64());
    std::fs::write(out_dir.join("manifest.txt"), manifest)
        .map_err(|e| (3u8, e.to_string()))?;
    println!("scenario {} complete", cfg.scenario.name());
    for line in &output.summary {
        println!("  {line}");
    }
    for (name, _) in &output.files {
        println!("  wrote {}", out_dir.join(name).display());
    }
    println!("  wrote {}", out_dir.join("manifest.txt").display());
    Ok(())
}

fn cmd_validate(args: &[String]) -> Result<(), (u8, String)> {
    let cfg = load_config(args)?;
    let report = config::validate(&cfg);
    println!("configuration for scenario '{}':", cfg.scenario.name());
    for (what, status) in &report.lines {
        println!("  {what}: {status}");
    }
    if report.rejected {
        return Err((3, "validation rejected the configuration".into()));
    }
    Ok(())
}

fn cmd_audit(args: &[String]) -> Result<(), (u8, String)> {
    let (_file, _ovr, seed, workers, _out) = parse_common(args)?;
    let seed = seed.unwrap_or(1);
    let body = || scenarios::audit_all(seed);
    let results = if let Some(w) = workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| (3u8, format!("worker pool: {e}")))?;
        pool.install(body)
    } else {
        body()
    };
    let mut failed = false;
    for (name, ok, detail) in results {
        println!(
            "audit {}: {} {}",
            name,
            if ok { "PASS" } else { "FAIL" },
            detail
        );
        if !ok {
            failed = true;
        }
    }
    if failed {
        return Err((2, "audit failures".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
