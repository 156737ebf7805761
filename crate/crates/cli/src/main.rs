use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use telesim_core::dsl::{circuit_env, parse_circuit_bytes, parse_expr, serialize, Circuit};
use telesim_core::opalg::{ParamEnv, ParamValue};
use telesim_core::protocols::{lookup, registry, Overrides, DEFAULT_MODE_COUNT};
use telesim_core::report::{self, Format};

/// Heisenberg-picture simulator for teleportation filters and mirrors.
#[derive(Parser)]
#[command(name = "telesim", version)]
struct Cli {
    /// Value substituted for `infinity` parameters.
    #[arg(long, global = true, env = "TELESIM_LIMIT_SCALE")]
    limit_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(clap::Args)]
struct Emit {
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a circuit file and print its outputs and analyses.
    Run {
        file: PathBuf,
        /// Parameter binding `NAME=VALUE`; VALUE is an expression or `infinity`.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Run every check on a circuit file; exits 1 if any fails.
    Verify {
        file: PathBuf,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Registered protocol builders.
    Protocols {
        #[command(subcommand)]
        command: ProtocolsCommand,
    },
    /// Limits of every output as the named parameters go to infinity.
    Limits {
        file: PathBuf,
        /// Parameter sent to infinity; repeatable.
        #[arg(long = "param", value_name = "NAME", required = true)]
        params: Vec<String>,
        /// Other parameter bindings.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        emit: Emit,
    },
}

#[derive(Subcommand)]
enum ProtocolsCommand {
    /// Names, options and parameters of every builder.
    List,
    /// Print the circuit text of a builder.
    Build {
        name: String,
        /// `NAME=VALUE` for parameters, `OPTION=CHOICE` for options, `n=INT` for the mode count.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Usage or input errors, reported with exit code 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn split_binding(s: &str) -> Result<(&str, &str)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected NAME=VALUE, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        bail!("empty parameter name in `{s}`");
    }
    Ok((k, v.trim()))
}

fn param_value(v: &str) -> Result<ParamValue> {
    if v == "infinity" {
        return Ok(ParamValue::Infinity);
    }
    let e = parse_expr(v).map_err(|e| anyhow!("bad value `{v}`: {e}"))?;
    Ok(ParamValue::Value(e))
}

fn load(file: &Path) -> Result<Circuit> {
    let bytes = std::fs::read(file).with_context(|| format!("cannot read {}", file.display()))?;
    parse_circuit_bytes(&bytes).map_err(|e| anyhow!("{}: {e}", file.display()))
}

fn env_for(circuit: &Circuit, bindings: &[String], limit_scale: Option<f64>) -> Result<ParamEnv> {
    let declared = circuit_env(circuit, &ParamEnv::new())?;
    let mut env = ParamEnv::new();
    if let Some(l) = limit_scale {
        if !(l.is_finite() && l > 0.0) {
            bail!("limit scale must be a positive number, got {l}");
        }
        env.set_limit_scale(l);
    }
    for b in bindings {
        let (k, v) = split_binding(b)?;
        if !declared.contains(k) {
            bail!("circuit has no parameter `{k}`");
        }
        env.set_value(k, param_value(v)?);
    }
    Ok(env)
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn list() -> String {
    let mut s = String::new();
    for p in registry() {
        s.push_str(&format!("{}\n    {}\n", p.name, p.summary));
        for o in p.options {
            s.push_str(&format!(
                "    option {} = {}\n",
                o.name,
                o.choices.join(" | ")
            ));
        }
        if p.counted {
            s.push_str(&format!(
                "    n = {DEFAULT_MODE_COUNT} (mode count, at least 2)\n"
            ));
        }
        for (k, v) in p.params() {
            s.push_str(&format!("    param {k} = {v}\n"));
        }
    }
    s
}

fn build(name: &str, bindings: &[String]) -> Result<String> {
    let info = lookup(name)
        .ok_or_else(|| anyhow!("unknown protocol `{name}`; see `telesim protocols list`"))?;
    let mut choices = Vec::new();
    let mut n = DEFAULT_MODE_COUNT;
    let mut ov = Overrides::new();
    for b in bindings {
        let (k, v) = split_binding(b)?;
        if info.options.iter().any(|o| o.name == k) {
            choices.push((k, v));
        } else if info.counted && k == "n" {
            n = v
                .parse()
                .map_err(|_| anyhow!("n must be an integer, got `{v}`"))?;
            if n > 64 {
                bail!("n must be at most 64");
            }
        } else {
            ov = ov.set_value(k, param_value(v)?);
        }
    }
    let opts = info.opts(&choices, n).map_err(|e| anyhow!(e))?;
    let c = info.circuit(&opts, ov).map_err(|e| anyhow!(e))?;
    Ok(serialize(&c))
}

fn run(cli: Cli) -> Result<bool, Usage> {
    let ls = cli.limit_scale;
    match cli.command {
        Command::Run { file, params, emit } => {
            let c = load(&file)?;
            let env = env_for(&c, &params, ls)?;
            let doc = report::analyze(&c, &env, false)?;
            write_out(&doc.render(emit.format.into()), emit.out.as_deref())?;
            Ok(true)
        }
        Command::Verify { file, params, emit } => {
            let c = load(&file)?;
            let env = env_for(&c, &params, ls)?;
            let doc = report::analyze(&c, &env, true)?;
            write_out(&doc.render(emit.format.into()), emit.out.as_deref())?;
            for f in doc.failures() {
                eprintln!("check failed: {f}");
            }
            Ok(doc.passed())
        }
        Command::Limits {
            file,
            params,
            set,
            emit,
        } => {
            let c = load(&file)?;
            let env = env_for(&c, &set, ls)?;
            let doc = report::limits(&c, &env, &params)?;
            write_out(&doc.render(emit.format.into()), emit.out.as_deref())?;
            Ok(doc.passed())
        }
        Command::Protocols { command } => {
            match command {
                ProtocolsCommand::List => write_out(&list(), None)?,
                ProtocolsCommand::Build { name, params, out } => {
                    write_out(&build(&name, &params)?, out.as_deref())?
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
