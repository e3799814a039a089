use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_statepat"))
}

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/models")
}

fn laser() -> PathBuf {
    models().join("laser.scm")
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap_or(-1),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(bin().arg("check").arg(laser())).0, 0);
    let bad = dir.path().join("bad.scm");
    std::fs::write(&bad, "model M\nchart A priority\n").unwrap();
    let (code, _, err) = run(bin().arg("check").arg(&bad));
    assert_eq!(code, 2, "{err}");
    assert!(err.contains(":2:"), "{err}");
    std::fs::write(&bad, "model M\nchart A priority 1\n  initial X\n  state X\n  transition X -> Y\n").unwrap();
    let (code, _, err) = run(bin().arg("check").arg(&bad));
    assert_eq!(code, 3);
    assert!(err.contains("`Y` is not declared"), "{err}");
    assert_eq!(run(bin().arg("check").arg(dir.path().join("missing.scm"))).0, 7);
}

#[test]
fn transform_writes_a_parseable_model_and_rejects_reapplication() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("both.scm");
    let (code, _, err) = run(bin().args(["transform"]).arg(laser()).args(["--pattern", "both", "--order", "2,1", "--out"]).arg(&out));
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("guards rewritten"), "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("order 3, 2"), "{text}");
    let m = statepat::parse_model(&text).unwrap();
    assert!(m.patterns.twc && m.patterns.ceo);
    assert_eq!(run(bin().arg("check").arg(&out)).0, 0);
    assert_eq!(run(bin().arg("transform").arg(&out).args(["--pattern", "twc"])).0, 4);
    assert_eq!(run(bin().arg("transform").arg(&out).args(["--pattern", "ceo"])).0, 4);
    // Deterministic output on stdout.
    let a = run(bin().arg("transform").arg(laser()).args(["--pattern", "twc"]));
    let b = run(bin().arg("transform").arg(laser()).args(["--pattern", "twc"]));
    assert_eq!(a.1, b.1);
    assert_eq!(run(bin().arg("transform").arg(laser()).args(["--pattern", "ceo", "--order", "1,9"])).0, 4);
}

#[test]
fn verify_reports_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("tr");
    let (code, out, _) = run(bin().arg("verify").arg(laser()).arg(models().join("laser.q")).arg("--trace-dir").arg(&traces));
    assert_eq!(code, 1);
    assert_eq!(
        out,
        "A[] !(Laser.On && Ventilator.On) : FAILS states=14 trace_len=7\nA[] SpO >= 95 : HOLDS states=14 trace_len=0\n"
    );
    let trace = std::fs::read_to_string(traces.join("query1.trace")).unwrap();
    assert!(trace.starts_with("# query: A[] !(Laser.On && Ventilator.On)\n# counterexample"));
    assert!(!traces.join("query2.trace").exists());

    let (code, out, _) = run(bin().arg("verify").arg(laser()).arg(models().join("laser.q")).args(["--pattern", "both"]).arg("--trace-dir").arg(&traces));
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("HOLDS").count(), 2);
}

#[test]
fn verify_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.q");
    std::fs::write(&empty, "# nothing here\n").unwrap();
    let (code, _, err) = run(bin().arg("verify").arg(laser()).arg(&empty).current_dir(dir.path()));
    assert_eq!(code, 0);
    assert!(err.contains("warning"), "{err}");
    let (code, _, _) = run(bin().arg("verify").arg(laser()).arg("A[] (((").current_dir(dir.path()));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().arg("verify").arg(laser()).arg("A[] Pump.On").current_dir(dir.path()));
    assert_eq!(code, 3);
    let (code, _, err) = run(bin().arg("verify").arg(laser()).arg("A[] SpO >= 0").args(["--limit", "2"]).current_dir(dir.path()));
    assert_eq!(code, 5, "{err}");
    let (code, _, _) = run(bin()
        .arg("verify")
        .arg(laser())
        .arg("A[] SpO >= 0")
        .env("STATEPAT_STATE_LIMIT", "2")
        .current_dir(dir.path()));
    assert_eq!(code, 5);
    // Initial state plus the one where the ventilator timer has saturated.
    let (code, out, _) = run(bin().arg("verify").arg(laser()).arg("A[] Laser.Off").args(["--env", "closed"]).current_dir(dir.path()));
    assert_eq!((code, out.contains("HOLDS states=2 ")), (0, true), "{out}");
    let (code, _, _) = run(bin().arg("verify").arg(laser()).arg("A[] Laser.Off").args(["--order", "1,2"]).current_dir(dir.path()));
    assert_eq!(code, 2, "--order without a ceo pattern is a usage error");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("statepat.toml"), "pattern = \"both\"\norder = [2, 1]\nenv = \"subset\"\n").unwrap();
    let (code, out, _) = run(bin().arg("verify").arg(laser()).arg("A[] Laser.Off imply Ventilator.On").current_dir(dir.path()));
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = run(bin().arg("verify").arg(laser()).arg("A[] !(Laser.On && Ventilator.On)").args(["--pattern", "twc"]).current_dir(dir.path()));
    // The flag overrides the pattern, but the config's order still applies and twc takes none.
    assert_eq!(code, 4);
    std::fs::write(dir.path().join("statepat.toml"), "colour = 1\n").unwrap();
    assert_eq!(run(bin().arg("check").arg(laser()).current_dir(dir.path())).0, 2);
}

#[test]
fn simulate_script_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("run.txt");
    std::fs::write(&script, "raise startLaser; step 3\nstate\nvars\nraise nope\nfrobnicate\nstep\nquit\nstep 100\n").unwrap();
    let sim = |out: &Path| run(bin().arg("simulate").arg(laser()).args(["--pattern", "both", "--script"]).arg(&script).arg("--out").arg(out));
    let (code, stdout, stderr) = sim(&dir.path().join("a.trace"));
    assert_eq!(code, 0);
    assert!(stderr.contains("unknown event `nope`"), "{stderr}");
    assert!(stderr.contains("unknown command `frobnicate`"), "{stderr}");
    assert!(stdout.contains("clock=3 Manager=Slot1 Laser=On Ventilator=Off"), "{stdout}");
    assert!(stdout.contains("SpO=98"), "{stdout}");
    sim(&dir.path().join("b.trace"));
    let a = std::fs::read(dir.path().join("a.trace")).unwrap();
    let b = std::fs::read(dir.path().join("b.trace")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().matches(" env=").count(), 4, "quit stops the script");
}

#[test]
fn simulate_reads_stdin() {
    let mut child = bin().arg("simulate").arg(laser()).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(b"step\nstate\n").unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    // A fresh session with no events stutters.
    assert!(text.contains("clock=1 Laser=Off Ventilator=On"), "{text}");
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut buf = String::new();
    s.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn serve_answers_health_and_rejects_bad_ports() {
    assert_eq!(run(bin().args(["serve", "--port", "99999"])).0, 6);
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    assert_eq!(run(bin().args(["serve", "--port", &port])).0, 6);
    drop(taken);

    let port = free_port();
    let mut child = bin().arg("serve").arg(laser()).args(["--port", &port.to_string()]).spawn().unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let mut reply = None;
    while Instant::now() < deadline {
        if let Some(r) = http_get(port, "/healthz") {
            reply = Some(r);
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let reply = reply.expect("server answered");
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.ends_with("ok"), "{reply}");
}
