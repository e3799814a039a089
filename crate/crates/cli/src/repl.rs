//! `simulate`: a small command loop over an engine session.
//!
//! Commands are separated by newlines or `;`. Everything after `#` is a
//! comment.

use std::io::{BufRead, IsTerminal, Write};
use std::path::Path;
use std::sync::Arc;

use statepat::engine::{format_step, Executable, Session};

const HELP: &str = "commands: step [k] | raise <event> | state | vars | queue | help | quit";

enum Flow {
    Continue,
    Quit,
}

struct Repl {
    session: Session,
    trace: String,
}

impl Repl {
    fn exec(&self) -> &Executable {
        self.session.executable()
    }

    fn command(&mut self, line: &str, out: &mut impl Write) -> std::io::Result<Flow> {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["quit" | "exit"] => return Ok(Flow::Quit),
            ["help"] => writeln!(out, "{HELP}")?,
            ["step"] => self.step(1, out)?,
            ["step", k] => match k.parse::<u64>() {
                Ok(k) => self.step(k, out)?,
                Err(_) => eprintln!("error: `{k}` is not a step count"),
            },
            ["raise", event] => {
                if let Err(e) = self.session.inject_event(event) {
                    eprintln!("error: {e}");
                }
            }
            ["state"] => {
                let s = self.session.state();
                let charts: Vec<String> = (0..self.exec().chart_count())
                    .map(|c| format!("{}={}", self.exec().model().charts[c].name, self.exec().active_state_name(s, c)))
                    .collect();
                writeln!(out, "clock={} {}", s.clock, charts.join(" "))?;
            }
            ["vars"] => {
                let s = self.session.state();
                let vars: Vec<String> = self
                    .exec()
                    .model()
                    .interface
                    .variables
                    .iter()
                    .zip(&s.vars)
                    .map(|(d, v)| format!("{}={v}", d.name))
                    .collect();
                writeln!(out, "{}", vars.join(" "))?;
            }
            ["queue"] => {
                let rt = &self.session.state().pattern;
                let m = self.exec().model();
                let items: Vec<String> = rt
                    .events()
                    .iter()
                    .zip(rt.senders())
                    .map(|(&e, s)| format!("{}@{s}", m.event_name(e).unwrap_or("?")))
                    .collect();
                writeln!(out, "queue=[{}] exe={} token={}", items.join(","), rt.exe(), rt.token())?;
            }
            _ => eprintln!("error: unknown command `{line}` ({HELP})"),
        }
        Ok(Flow::Continue)
    }

    fn step(&mut self, k: u64, out: &mut impl Write) -> std::io::Result<()> {
        for _ in 0..k {
            match self.session.step() {
                Ok(t) => {
                    let text = format_step(self.session.executable(), &t);
                    out.write_all(text.as_bytes())?;
                    self.trace.push_str(&text);
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Runs commands from `script`, or from stdin when it is `None`, and writes
/// the accumulated step trace to `out` if given.
pub fn simulate(exec: Arc<Executable>, script: Option<&Path>, out: Option<&Path>) -> Result<u8, String> {
    let mut repl = Repl { session: Session::new(exec), trace: String::new() };
    let stdout = std::io::stdout();
    let mut sink = stdout.lock();
    let io = |e: std::io::Error| e.to_string();
    match script {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            'lines: for line in text.lines() {
                for cmd in line.split('#').next().unwrap_or("").split(';') {
                    if let Flow::Quit = repl.command(cmd.trim(), &mut sink).map_err(io)? {
                        break 'lines;
                    }
                }
            }
        }
        None => {
            let stdin = std::io::stdin();
            let interactive = stdin.is_terminal();
            if interactive {
                eprintln!("{HELP}");
            }
            'input: loop {
                if interactive {
                    eprint!("> ");
                }
                let mut line = String::new();
                if stdin.lock().read_line(&mut line).map_err(io)? == 0 {
                    break;
                }
                for cmd in line.split('#').next().unwrap_or("").split(';') {
                    if let Flow::Quit = repl.command(cmd.trim(), &mut sink).map_err(io)? {
                        break 'input;
                    }
                }
                sink.flush().map_err(io)?;
            }
        }
    }
    if let Some(path) = out {
        std::fs::write(path, &repl.trace).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(0)
}
