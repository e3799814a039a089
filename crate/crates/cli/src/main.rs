mod args;
mod config;
mod repl;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use statepat::engine::{format_trace, Executable};
use statepat::patterns::Pattern;
use statepat::text::{parse_model, parse_query, parse_query_file, serialize_model};
use statepat::verifier::{check_on, default_state_limit, explore, replay, EnvPolicy, VerifyError};
use statepat::{validate_model, Model, Query};

use args::{Cli, Command, EnvArg, PatternArg, PatternArgs};
use config::Config;

/// Process exit codes.
mod exit {
    pub const OK: u8 = 0;
    pub const QUERY_FAILS: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const INVALID: u8 = 3;
    pub const PATTERN: u8 = 4;
    pub const RESOURCE: u8 = 5;
    pub const SERVE: u8 = 6;
    pub const IO: u8 = 7;
}

/// A message for stderr and the exit code to end with.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(exit::IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| fail(exit::IO, format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| fail(exit::IO, format!("{}: {e}", path.display())))
}

/// Reads, parses and validates a model file.
fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    let m = parse_model(&text).map_err(|e| fail(exit::PARSE, format!("{}:{e}", path.display())))?;
    let diags = validate_model(&m);
    if !diags.is_empty() {
        let mut msg = format!("{}: {} problem(s)", path.display(), diags.len());
        for d in &diags {
            let _ = write!(msg, "\n  {d}");
        }
        return Err(fail(exit::INVALID, msg));
    }
    Ok(m)
}

struct Resolved {
    pattern: Option<Pattern>,
    order: Option<Vec<String>>,
}

fn resolve_pattern(flags: &PatternArgs, cfg: &Config) -> Resolved {
    let pattern = flags.pattern.or(cfg.pattern).map(|p| match p {
        PatternArg::Twc => Pattern::Twc,
        PatternArg::Ceo => Pattern::Ceo,
        PatternArg::Both => Pattern::Both,
    });
    let order = flags
        .order
        .clone()
        .or_else(|| cfg.order.as_ref().map(|o| o.iter().map(|i| i.to_arg()).collect()));
    Resolved { pattern, order }
}

fn transform(m: Model, r: &Resolved) -> Result<Model, Failure> {
    match r.pattern {
        Some(p) => p.apply(&m, r.order.as_deref()).map_err(|e| fail(exit::PATTERN, e.to_string())),
        None if r.order.is_some() => Err(fail(exit::PARSE, "--order needs --pattern ceo or --pattern both")),
        None => Ok(m),
    }
}

fn executable(m: Model) -> Result<Executable, Failure> {
    Executable::new(m).map_err(|e| fail(exit::INVALID, e.to_string()))
}

fn cmd_check(path: &Path) -> Outcome {
    let m = load_model(path)?;
    println!(
        "{}: ok ({} charts, {} events, {} variables)",
        path.display(),
        m.charts.len(),
        m.events().count(),
        m.interface.variables.len()
    );
    Ok(exit::OK)
}

/// Counts transitions whose guard or actions differ between `before` and
/// the same chart in `after`.
fn rewrite_summary(before: &Model, after: &Model) -> String {
    let (mut guards, mut actions) = (0, 0);
    for c in &before.charts {
        let Some(d) = after.chart(&c.name) else { continue };
        for (t, u) in c.transitions.iter().zip(&d.transitions) {
            guards += usize::from(t.guard != u.guard || t.trigger != u.trigger);
            actions += t.actions.iter().zip(&u.actions).filter(|(a, b)| a != b).count();
        }
    }
    format!(
        "charts {} -> {}, guards rewritten: {guards}, actions rewritten: {actions}",
        before.charts.len(),
        after.charts.len()
    )
}

fn cmd_transform(path: &Path, flags: &PatternArgs, out: Option<PathBuf>, cfg: &Config) -> Outcome {
    let r = resolve_pattern(flags, cfg);
    if r.pattern.is_none() {
        return Err(fail(exit::PARSE, "transform needs --pattern twc|ceo|both"));
    }
    let m = load_model(path)?;
    let t = transform(m.clone(), &r)?;
    let text = serialize_model(&t);
    match out.or_else(|| cfg.out.clone()) {
        Some(p) => write(&p, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{}: {}", path.display(), rewrite_summary(&m, &t));
    Ok(exit::OK)
}

/// Collects formulas from inline arguments and `.q` files.
fn collect_queries(items: &[String]) -> Result<Vec<(String, Query)>, Failure> {
    let mut out = Vec::new();
    for item in items {
        let path = Path::new(item);
        if path.is_file() {
            let text = read(path)?;
            let qs = parse_query_file(&text).map_err(|e| fail(exit::PARSE, format!("{item}:{e}")))?;
            if qs.is_empty() {
                eprintln!("warning: {item} contains no queries");
            }
            out.extend(qs);
        } else {
            let q = parse_query(item).map_err(|e| fail(exit::PARSE, format!("query `{item}`: {e}")))?;
            out.push((item.clone(), q));
        }
    }
    Ok(out)
}

fn policy(arg: Option<EnvArg>) -> EnvPolicy {
    match arg {
        None | Some(EnvArg::OneOrNone) => EnvPolicy::OneOrNone,
        Some(EnvArg::Subset) => EnvPolicy::Subset,
        Some(EnvArg::Closed) => EnvPolicy::Closed,
    }
}

struct VerifyOpts {
    env: EnvPolicy,
    limit: usize,
    trace_dir: PathBuf,
    verbose: bool,
}

fn cmd_verify(path: &Path, queries: &[String], r: &Resolved, opts: &VerifyOpts) -> Outcome {
    let m = transform(load_model(path)?, r)?;
    let queries = collect_queries(queries)?;
    if queries.is_empty() {
        eprintln!("warning: no queries given");
        return Ok(exit::OK);
    }
    let exec = executable(m)?;
    for (text, q) in &queries {
        statepat::model::check_predicate(exec.model(), &q.pred)
            .map_err(|e| fail(exit::INVALID, format!("query `{text}`: {e}")))?;
    }
    let g = explore(&exec, opts.env, opts.limit).map_err(|e| match e {
        VerifyError::StateLimit { .. } => fail(exit::RESOURCE, format!("{e}; raise --limit or STATEPAT_STATE_LIMIT")),
        other => fail(exit::INVALID, other.to_string()),
    })?;
    if opts.verbose {
        eprintln!(
            "explored {} states, {} transitions, depth {}, frontier peak {}, env {}",
            g.state_count(),
            g.transition_count(),
            g.depth(),
            g.frontier_peak(),
            opts.env
        );
    }
    let mut code = exit::OK;
    for (i, (text, q)) in queries.iter().enumerate() {
        let res = check_on(&exec, &g, q).map_err(|e| fail(exit::INVALID, e.to_string()))?;
        let trace_len = res.trace.as_ref().map_or(0, |t| t.len());
        println!(
            "{text} : {} states={} trace_len={trace_len}",
            if res.holds { "HOLDS" } else { "FAILS" },
            res.stats.states
        );
        if !res.holds {
            code = exit::QUERY_FAILS;
        }
        if let Some(t) = &res.trace {
            let (steps, _) = replay(&exec, t).map_err(|e| fail(exit::INVALID, e.to_string()))?;
            let kind = if res.holds { "witness" } else { "counterexample" };
            let body = format!("# query: {text}\n# {kind}, {} step(s)\n{}", t.len(), format_trace(&exec, &steps));
            let file = opts.trace_dir.join(format!("query{}.trace", i + 1));
            write(&file, &body)?;
            if opts.verbose {
                eprintln!("{kind} written to {}", file.display());
            }
        }
    }
    Ok(code)
}

fn cmd_serve(model: Option<&Path>, port: u32, verbose: bool) -> Outcome {
    let port = u16::try_from(port)
        .ok()
        .filter(|&p| p != 0)
        .ok_or_else(|| fail(exit::SERVE, format!("port {port} is out of range 1..=65535")))?;
    let preload = match model {
        Some(p) => {
            load_model(p)?;
            Some(read(p)?)
        }
        None => None,
    };
    let config = statepat_service::ServiceConfig { preload, ..Default::default() };
    let rt = tokio::runtime::Runtime::new().map_err(|e| fail(exit::SERVE, e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .map_err(|e| fail(exit::SERVE, format!("cannot listen on port {port}: {e}")))?;
        if verbose {
            eprintln!("listening on http://127.0.0.1:{port}");
        }
        statepat_service::serve(listener, config).await.map_err(|e| fail(exit::SERVE, e.to_string()))?;
        Ok(exit::OK)
    })
}

fn run(cli: Cli) -> Outcome {
    let cfg = config::load(cli.config.as_deref()).map_err(|e| fail(exit::PARSE, e))?;
    match cli.command {
        Command::Check { model } => cmd_check(&model),
        Command::Transform { model, pattern, out } => cmd_transform(&model, &pattern, out, &cfg),
        Command::Verify { model, queries, pattern, env, limit, trace_dir } => {
            let opts = VerifyOpts {
                env: policy(env.or(cfg.env)),
                limit: limit.or(cfg.limit).unwrap_or_else(default_state_limit),
                trace_dir: trace_dir.or_else(|| cfg.trace_dir.clone()).unwrap_or_else(|| "traces".into()),
                verbose: cli.verbose,
            };
            cmd_verify(&model, &queries, &resolve_pattern(&pattern, &cfg), &opts)
        }
        Command::Simulate { model, pattern, script, out } => {
            let exec = executable(transform(load_model(&model)?, &resolve_pattern(&pattern, &cfg))?)?;
            let script = script.or_else(|| cfg.script.clone());
            let out = out.or_else(|| cfg.out.clone());
            repl::simulate(Arc::new(exec), script.as_deref(), out.as_deref()).map_err(|e| fail(exit::IO, e))
        }
        Command::Serve { model, port } => cmd_serve(model.as_deref(), port.or(cfg.port).unwrap_or(8080), cli.verbose),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
