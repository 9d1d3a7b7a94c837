use std::io::BufRead;
use std::path::{Path, PathBuf};

use super::commands::{self, PropertyRef};
use super::{CliError, CliResult, Context, Exit, LoadedSpec};
use crate::bridge::write_atomic;
use crate::lang::{print_asm, print_formula, FormulaStyle, Logic};

const HELP: &str = "commands:
  check                               check every property
  props                               list properties
  formalize ctl|ltl <requirement>     add a property from a requirement
  elicit [count]                      list important properties
  explain-prop <index|formula>        explain a property
  explain-scenario <file.avalla>      explain a scenario
  run-scenario <file.avalla>          run a scenario
  export-cex <index> <out> [--witness]
  emit-smv <out>
  :save [path]                        write the specification with added properties
  :quit";

fn split_first(s: &str) -> (&str, &str) {
    let s = s.trim();
    match s.split_once(char::is_whitespace) {
        Some((a, b)) => (a, b.trim()),
        None => (s, ""),
    }
}

fn one_arg(rest: &str, what: &str) -> Result<PathBuf, CliError> {
    if rest.is_empty() {
        Err(CliError::usage(format!("missing {what}")))
    } else {
        Ok(PathBuf::from(rest))
    }
}

fn number(text: &str, what: &str) -> Result<usize, CliError> {
    text.parse().map_err(|_| CliError::usage(format!("{what} must be a number, got '{text}'")))
}

struct Session {
    loaded: LoadedSpec,
    dirty: bool,
}

impl Session {
    fn line(&mut self, ctx: &mut Context<'_>, line: &str) -> Result<Option<Exit>, CliError> {
        let (cmd, rest) = split_first(line);
        let l = &self.loaded;
        match cmd {
            "" => {}
            "help" | ":help" => ctx.say(HELP),
            ":quit" | ":q" | "quit" | "exit" => {
                if self.dirty {
                    ctx.warn("warning: unsaved properties discarded");
                }
                return Ok(Some(Exit::Success));
            }
            "props" => {
                if l.spec.properties.is_empty() {
                    ctx.say("no properties");
                }
                let lines: Vec<String> = l
                    .spec
                    .properties
                    .iter()
                    .enumerate()
                    .map(|(i, p)| format!("[{}] {} {}", i + 1, p.logic, print_formula(&p.formula, FormulaStyle::Uppercase)))
                    .collect();
                for s in lines {
                    ctx.say(s);
                }
            }
            "check" => {
                commands::check(ctx, l)?;
            }
            "formalize" => {
                let (logic, req) = split_first(rest);
                let logic = match logic.to_ascii_lowercase().as_str() {
                    "ctl" => Logic::Ctl,
                    "ltl" => Logic::Ltl,
                    _ => return Err(CliError::usage("usage: formalize ctl|ltl <requirement>")),
                };
                let (_, enriched) = commands::formalize(ctx, l, req, logic, None)?;
                if let Some(spec) = enriched {
                    if spec != l.spec {
                        self.dirty = true;
                        self.loaded = LoadedSpec { path: l.path.clone(), source: print_asm(&spec), spec };
                    }
                }
            }
            "elicit" => {
                let n = if rest.is_empty() { 3 } else { number(rest, "count")? };
                commands::elicit(ctx, l, n)?;
            }
            "explain-prop" => {
                let target = match rest.parse::<usize>() {
                    Ok(i) => PropertyRef::Index(i),
                    Err(_) if rest.is_empty() => return Err(CliError::usage("missing property index or formula")),
                    Err(_) => PropertyRef::Text(rest.to_string(), None),
                };
                commands::explain_prop(ctx, l, target)?;
            }
            "explain-scenario" => {
                commands::explain_scenario(ctx, l, &one_arg(rest, "scenario file")?)?;
            }
            "run-scenario" => {
                commands::run_scenario(ctx, l, &one_arg(rest, "scenario file")?)?;
            }
            "export-cex" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let witness = parts.contains(&"--witness");
                let args: Vec<&str> = parts.into_iter().filter(|p| *p != "--witness").collect();
                let [index, out] = args[..] else {
                    return Err(CliError::usage("usage: export-cex <index> <out> [--witness]"));
                };
                commands::export_cex(ctx, l, number(index, "index")?, Path::new(out), witness)?;
            }
            "emit-smv" => {
                commands::emit_smv(ctx, l, &one_arg(rest, "output file")?)?;
            }
            ":save" => {
                let path = if rest.is_empty() { l.path.clone() } else { PathBuf::from(rest) };
                write_atomic(&path, &print_asm(&l.spec))
                    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
                ctx.say(format!("saved {}", path.display()));
                self.dirty = false;
            }
            other => return Err(CliError::usage(format!("unknown command '{other}'; type help"))),
        }
        Ok(None)
    }
}

/// Reads commands until `:quit` or end of input. Errors are reported and
/// the session continues.
pub fn run(ctx: &mut Context<'_>, loaded: LoadedSpec, input: &mut dyn BufRead) -> CliResult {
    let mut session = Session { loaded, dirty: false };
    ctx.say(format!("loaded {} ({}); type help for commands", session.loaded.spec.name, session.loaded.path.display()));
    let mut buf = String::new();
    loop {
        let _ = write!(ctx.out, "asmprop> ");
        let _ = ctx.out.flush();
        buf.clear();
        match input.read_line(&mut buf) {
            Ok(0) => {
                ctx.say("");
                if session.dirty {
                    ctx.warn("warning: unsaved properties discarded");
                }
                return Ok(Exit::Success);
            }
            Ok(_) => {}
            Err(e) => return Err(CliError::usage(format!("cannot read input: {e}"))),
        }
        match session.line(ctx, &buf) {
            Ok(Some(exit)) => return Ok(exit),
            Ok(None) => {}
            Err(e) => ctx.warn(format!("error: {}", e.message)),
        }
    }
}
