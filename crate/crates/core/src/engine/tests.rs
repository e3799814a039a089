use super::*;
use crate::patterns::{apply_both, apply_ceo, apply_twc};
use crate::text::parse_model;

const LASER: &str = include_str!("../../models/laser.scm");
const TWC_TOY: &str = include_str!("../../models/twc_toy.scm");
const CEO_TOY: &str = include_str!("../../models/ceo_toy.scm");

fn exec(src: &str) -> Executable {
    Executable::new(parse_model(src).unwrap()).unwrap()
}

fn names(e: &Executable, s: &RuntimeState) -> Vec<String> {
    (0..e.chart_count()).map(|c| e.active_state_name(s, c).to_string()).collect()
}

#[test]
fn raised_event_reaches_lower_priority_chart_in_the_same_cycle() {
    let e = exec(LASER);
    let mut s = Session::new(Arc::new(e));
    s.inject_event("startLaser").unwrap();
    s.step().unwrap();
    assert_eq!(names(s.executable(), s.state()), ["On", "Off"]);
}

#[test]
fn raised_event_is_lost_for_higher_priority_chart() {
    let e = exec(TWC_TOY);
    let mut s = e.init_session();
    for _ in 0..3 {
        e.timed_step_in_place(&mut s, &[], false).unwrap();
    }
    assert_eq!(names(&e, &s), ["B1", "B2"]);
}

#[test]
fn twc_delivers_upward_in_a_logic_cycle() {
    let e = Executable::new(apply_twc(&parse_model(TWC_TOY).unwrap()).unwrap()).unwrap();
    assert_eq!(e.schedule(), (3, 1));
    let (s, t) = e.timed_step(&e.init_session(), &[]).unwrap();
    assert_eq!(names(&e, &s), ["Run", "C1", "B2"]);
    assert_eq!(t.cycles.len(), 3);
    assert_eq!(t.cycles[1].phase, Phase::Logic(1));
    // S1 takes B1 -> C1 in the first logic cycle.
    assert_eq!(t.cycles[1].charts[1].fired, Some(1));
}

#[test]
fn assignments_saturate_to_the_declared_range() {
    let src = "model M\nvar x: int[0..3] = 2\nchart A priority 1\n  initial X\n  state X\n  transition X -> X do x = x * 10\n";
    let e = exec(src);
    let (s, _) = e.timed_step(&e.init_session(), &[]).unwrap();
    assert_eq!(s.vars, [3]);
    let src = src.replace("x * 10", "x - 100");
    let e = exec(&src);
    let (s, _) = e.timed_step(&e.init_session(), &[]).unwrap();
    assert_eq!(s.vars, [0]);
}

#[test]
fn after_fires_once_the_timer_reaches_its_duration() {
    let src = "model M\nvar n: int[0..9] = 0\nchart A priority 1\n  initial X\n  state X\n  transition X -> X after 2s do n = n + 1\n";
    let e = exec(src);
    let mut s = e.init_session();
    let mut seen = Vec::new();
    for _ in 0..6 {
        e.timed_step_in_place(&mut s, &[], false).unwrap();
        seen.push(s.vars[0]);
    }
    // The self-loop re-enters X and restarts the timer.
    assert_eq!(seen, [0, 0, 1, 1, 2, 2]);
    assert_eq!(s.clock, 6);
}

#[test]
fn timers_saturate_at_the_largest_duration() {
    let e = exec(LASER);
    let mut s = e.init_session();
    for _ in 0..10 {
        e.timed_step_in_place(&mut s, &[], false).unwrap();
    }
    assert!(s.timers.iter().all(|&t| t <= 1));
}

#[test]
fn clock_is_not_part_of_the_state_key() {
    let e = exec(CEO_TOY);
    let a = e.init_session();
    let mut b = a.clone();
    b.clock = 99;
    assert_eq!(a.key(), b.key());
    assert_ne!(a, b);
}

#[test]
fn ceo_order_decides_which_chart_wins() {
    let m = parse_model(CEO_TOY).unwrap();
    for (order, x, y) in [(["S1", "S2"], 1, 0), (["S2", "S1"], 0, 1)] {
        let order: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        let e = Executable::new(apply_ceo(&m, Some(&order)).unwrap()).unwrap();
        assert_eq!(e.schedule(), (1, 2));
        let (s, t) = e.timed_step(&e.init_session(), &[]).unwrap();
        assert_eq!(s.vars, [x, y]);
        assert_eq!(t.cycles.iter().map(|c| c.slot).collect::<Vec<_>>(), [Some(1), Some(2)]);
    }
}

#[test]
fn env_events_only_reach_normal_cycles() {
    let m = apply_both(&parse_model(LASER).unwrap(), None).unwrap();
    let e = Executable::new(m).unwrap();
    assert_eq!(e.schedule(), (3, 2));
    assert_eq!(e.queue_capacity(), 6);
    let start = e.in_event_index("startLaser").unwrap();
    let (s, t) = e.timed_step(&e.init_session(), &[start]).unwrap();
    assert_eq!(t.cycles.len(), 6);
    assert_eq!(names(&e, &s), ["Slot1", "On", "Off"]);
}

#[test]
fn inject_rejects_unknown_and_internal_events() {
    let mut s = Session::new(Arc::new(exec(LASER)));
    assert_eq!(s.inject_event("nope"), Err(EngineError::UnknownEvent("nope".into())));
    assert_eq!(s.inject_event("deactivateVen"), Err(EngineError::NotAnInEvent("deactivateVen".into())));
    s.inject_event("startLaser").unwrap();
    s.inject_event("startLaser").unwrap();
    assert_eq!(s.pending().collect::<Vec<_>>(), ["startLaser"]);
    let t = s.step().unwrap();
    assert_eq!(t.env.len(), 1);
    assert_eq!(s.pending().count(), 0);
}

#[test]
fn invalid_models_are_rejected() {
    let src = "model M\nchart A priority 1\n  initial X\n  state X\n  transition X -> Y\n";
    assert!(matches!(Executable::new(parse_model(src).unwrap()), Err(EngineError::InvalidModel(_))));
}

#[test]
fn trace_dump_format() {
    let e = exec(LASER);
    let start = e.in_event_index("startLaser").unwrap();
    let (_, t) = e.timed_step(&e.init_session(), &[start]).unwrap();
    assert_eq!(
        format_step(&e, &t),
        "step=1 env=[startLaser]\n\
         step=1 cycle=normal chart=Laser fired=Off->On raised=[deactivateVen] vars={SpO=100}\n\
         step=1 cycle=normal chart=Ventilator fired=On->Off raised=[] vars={SpO=100}\n"
    );
    let m = apply_both(&parse_model(LASER).unwrap(), None).unwrap();
    let e = Executable::new(m).unwrap();
    let (_, t) = e.timed_step(&e.init_session(), &[0]).unwrap();
    let dump = format_step(&e, &t);
    assert!(dump.contains("cycle=normal/1 chart=Laser fired=Off->On raised=[deactivateVen]"), "{dump}");
    assert!(dump.contains("cycle=logic:2/2 chart=Manager fired=Slot2->Slot1"), "{dump}");
    assert_eq!(dump.lines().count(), 1 + 6 * 3);
}

#[test]
fn stepping_is_deterministic() {
    let e = Arc::new(Executable::new(apply_both(&parse_model(LASER).unwrap(), None).unwrap()).unwrap());
    let run = || {
        let mut s = Session::new(e.clone());
        let mut out = String::new();
        for k in 0..12 {
            if k % 5 == 0 {
                s.inject_event("startLaser").unwrap();
            }
            out += &format_step(&e, &s.step().unwrap());
        }
        out
    };
    assert_eq!(run(), run());
}
