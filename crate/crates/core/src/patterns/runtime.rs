//! Runtime state and functions behind the `TWC` and `CEO` interfaces.
//!
//! Each function is a direct transcription of its WHILE program; the field
//! names map onto the program variables as follows:
//!
//! | field      | program | meaning                                   |
//! |------------|---------|-------------------------------------------|
//! | `events`   | `E[]`   | queued event IDs                          |
//! | `senders`  | `S[]`   | sender chart ID of each queued event      |
//! | `len()`    | `n`     | queue length                              |
//! | `exe`      | `exe`   | current cycle is a normal cycle           |
//! | `token`    | `t`     | execution token, 1-based                  |
//! | `order`    | `O[]`   | chart IDs in configured execution order   |

use serde::Serialize;

/// Precondition violation of a runtime function. The Manager chart never
/// triggers these when driving the runtime.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("initEventQueue requires cycleNum < stNum and stNum > 1, got cycleNum={cycle_num}, stNum={st_num}")]
    InitEventQueue { st_num: i64, cycle_num: i64 },
    #[error("push requires event > 0 and sender > 0, got event={event}, sender={sender}")]
    PushArguments { event: i64, sender: i64 },
    #[error("event queue overflow: capacity {capacity} reached")]
    QueueOverflow { capacity: usize },
    #[error("updateExeInfo requires t > 0 and stNum > 0, got t={token}, stNum={st_num}")]
    UpdateExeInfo { token: i64, st_num: i64 },
    #[error("run requires t > 0 and st > 0, got t={token}, st={st}")]
    Run { token: i64, st: i64 },
    #[error("execution token {token} is outside the configured order of length {len}")]
    TokenOutOfRange { token: i64, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PatternRuntime {
    events: Vec<i64>,
    senders: Vec<i64>,
    #[serde(skip)]
    capacity: usize,
    exe: bool,
    token: i64,
    order: Vec<i64>,
}

impl Default for PatternRuntime {
    fn default() -> Self {
        PatternRuntime::new(0, Vec::new())
    }
}

impl PatternRuntime {
    /// Empty queue of the given capacity, `exe = true`, and the token parked
    /// on the last slot so the first `updateExeInfo` hands it to `order[0]`.
    pub fn new(capacity: usize, order: Vec<i64>) -> Self {
        let token = order.len().max(1) as i64;
        PatternRuntime {
            events: Vec::with_capacity(capacity),
            senders: Vec::with_capacity(capacity),
            capacity,
            exe: true,
            token,
            order,
        }
    }

    /// Builds a runtime from raw parts, e.g. to set up a particular program
    /// state in tests.
    pub fn from_parts(
        events: Vec<i64>,
        senders: Vec<i64>,
        capacity: usize,
        exe: bool,
        token: i64,
        order: Vec<i64>,
    ) -> Self {
        assert_eq!(events.len(), senders.len(), "E and S must have equal length");
        PatternRuntime { events, senders, capacity, exe, token, order }
    }

    pub fn events(&self) -> &[i64] {
        &self.events
    }

    pub fn senders(&self) -> &[i64] {
        &self.senders
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn exe(&self) -> bool {
        self.exe
    }

    pub fn token(&self) -> i64 {
        self.token
    }

    pub fn order(&self) -> &[i64] {
        &self.order
    }

    /// `initEventQueue`: sets `exe` from the cycle number, clears the queue on
    /// normal cycles and returns the next cycle number, wrapping after
    /// `st_num - 1`.
    pub fn init_event_queue(&mut self, st_num: i64, cycle_num: i64) -> Result<i64, ContractError> {
        if !(cycle_num < st_num && st_num > 1) {
            return Err(ContractError::InitEventQueue { st_num, cycle_num });
        }
        let mut c = cycle_num;
        if c == 0 {
            self.exe = true;
            self.events.clear();
            self.senders.clear();
        } else {
            self.exe = false;
        }
        let a = c;
        if c == st_num - 1 {
            c = 0;
        } else {
            c = a + 1;
        }
        Ok(c)
    }

    /// `push`: appends `event` and its `sender` to the queue.
    pub fn push(&mut self, event: i64, sender: i64) -> Result<(), ContractError> {
        if !(event > 0 && sender > 0) {
            return Err(ContractError::PushArguments { event, sender });
        }
        if self.events.len() >= self.capacity {
            return Err(ContractError::QueueOverflow { capacity: self.capacity });
        }
        self.events.push(event);
        self.senders.push(sender);
        Ok(())
    }

    /// `pop`: whether `event` is deliverable to `receiver` in the current
    /// cycle. In normal cycles only events from higher-priority senders
    /// (smaller IDs) qualify, in logic cycles only those from lower-priority
    /// senders. Never modifies the queue.
    pub fn pop(&self, event: i64, receiver: i64) -> bool {
        self.pop_witness(event, receiver).0
    }

    /// `pop` together with the program's index variable `v`: the last queue
    /// position that matched, or 0 when none did. Exposed so the postcondition
    /// can be checked verbatim.
    pub fn pop_witness(&self, e: i64, r: i64) -> (bool, usize) {
        let (big_e, big_s, n) = (&self.events, &self.senders, self.events.len());
        let mut x = false;
        let mut i = 0;
        let mut v = 0;
        while i < n {
            if big_e[i] == e && ((self.exe && r > big_s[i]) || (!self.exe && r < big_s[i])) {
                v = i;
                x = true;
            }
            i += 1;
        }
        (x, v)
    }

    /// `isNormalExe`.
    pub fn is_normal_exe(&self) -> bool {
        self.exe
    }

    /// `updateExeInfo`: advances the token cyclically over `1..=st_num` and
    /// returns it.
    pub fn update_exe_info(&mut self, st_num: i64) -> Result<i64, ContractError> {
        let t = self.token;
        if !(t > 0 && st_num > 0) {
            return Err(ContractError::UpdateExeInfo { token: t, st_num });
        }
        let a = if t == st_num { 1 } else { t + 1 };
        self.token = a;
        Ok(a)
    }

    /// `run`: whether chart `st` holds the current token, i.e. `O[t-1] = st`.
    pub fn run(&self, st: i64) -> Result<bool, ContractError> {
        let t = self.token;
        if !(t > 0 && st > 0) {
            return Err(ContractError::Run { token: t, st });
        }
        let slot = self
            .order
            .get(t as usize - 1)
            .ok_or(ContractError::TokenOutOfRange { token: t, len: self.order.len() })?;
        Ok(*slot == st)
    }

    /// 1-based position of chart `st` in the configured order, 0 if absent.
    /// Composed models use it as the chart's communication priority.
    pub fn rank(&self, st: i64) -> i64 {
        self.order.iter().position(|&o| o == st).map_or(0, |p| p as i64 + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_queue(events: &[i64], senders: &[i64], exe: bool) -> PatternRuntime {
        PatternRuntime::from_parts(events.to_vec(), senders.to_vec(), 8, exe, 1, vec![1])
    }

    #[test]
    fn init_event_queue_normal_cycle() {
        let mut rt = with_queue(&[4, 5], &[1, 2], false);
        assert_eq!(rt.init_event_queue(3, 0), Ok(1));
        assert!(rt.exe());
        assert_eq!(rt.len(), 0);
    }

    #[test]
    fn init_event_queue_last_logic_cycle_wraps() {
        let mut rt = with_queue(&[4], &[1], true);
        assert_eq!(rt.init_event_queue(3, 2), Ok(0));
        assert!(!rt.exe());
        assert_eq!(rt.len(), 1, "logic cycles keep the queue");
        assert_eq!(rt.init_event_queue(2, 1), Ok(0));
        assert!(!rt.exe());
    }

    #[test]
    fn init_event_queue_rejects_bad_preconditions() {
        let mut rt = PatternRuntime::default();
        assert!(rt.init_event_queue(1, 0).is_err());
        assert!(rt.init_event_queue(3, 3).is_err());
    }

    #[test]
    fn push_appends() {
        let mut rt = PatternRuntime::new(4, vec![]);
        rt.push(5, 2).unwrap();
        assert_eq!((rt.events(), rt.senders()), (&[5][..], &[2][..]));
        rt.push(3, 1).unwrap();
        assert_eq!(rt.len(), 2);
        assert_eq!((rt.events()[1], rt.senders()[1]), (3, 1));
    }

    #[test]
    fn push_keeps_duplicates() {
        let mut rt = PatternRuntime::new(4, vec![]);
        rt.push(7, 2).unwrap();
        rt.push(7, 2).unwrap();
        assert_eq!(rt.events(), &[7, 7]);
    }

    #[test]
    fn push_overflow_and_bad_arguments() {
        let mut rt = PatternRuntime::new(1, vec![]);
        assert!(matches!(rt.push(0, 1), Err(ContractError::PushArguments { .. })));
        rt.push(1, 1).unwrap();
        assert_eq!(rt.push(1, 1), Err(ContractError::QueueOverflow { capacity: 1 }));
    }

    #[test]
    fn pop_on_empty_queue() {
        assert!(!PatternRuntime::default().pop(1, 1));
    }

    #[test]
    fn pop_normal_cycle_delivers_downward() {
        let rt = with_queue(&[5], &[1], true);
        assert!(rt.pop(5, 2));
        assert!(!rt.pop(5, 1));
        assert!(!rt.pop(4, 2));
    }

    #[test]
    fn pop_logic_cycle_delivers_upward() {
        let normal = with_queue(&[5], &[2], true);
        assert!(!normal.pop(5, 1));
        let logic = with_queue(&[5], &[2], false);
        assert!(logic.pop(5, 1));
    }

    #[test]
    fn pop_witness_reports_last_match() {
        let rt = with_queue(&[5, 6, 5], &[1, 1, 1], true);
        assert_eq!(rt.pop_witness(5, 2), (true, 2));
        assert_eq!(rt.pop_witness(9, 2), (false, 0));
    }

    #[test]
    fn is_normal_exe_is_pure() {
        let mut rt = PatternRuntime::default();
        rt.init_event_queue(3, 1).unwrap();
        assert!(!rt.is_normal_exe());
        assert_eq!(rt.is_normal_exe(), rt.is_normal_exe());
        rt.init_event_queue(3, 0).unwrap();
        assert!(rt.is_normal_exe());
    }

    #[test]
    fn update_exe_info_cycles() {
        let mut rt = PatternRuntime::from_parts(vec![], vec![], 0, true, 3, vec![1, 2, 3]);
        assert_eq!(rt.update_exe_info(3), Ok(1));
        assert_eq!(rt.update_exe_info(3), Ok(2));
        assert_eq!(rt.token(), 2);
        let mut single = PatternRuntime::from_parts(vec![], vec![], 0, true, 1, vec![1]);
        assert_eq!(single.update_exe_info(1), Ok(1));
    }

    #[test]
    fn run_checks_token_slot() {
        let rt = PatternRuntime::from_parts(vec![], vec![], 0, true, 1, vec![2, 1]);
        assert_eq!(rt.run(2), Ok(true));
        assert_eq!(rt.run(1), Ok(false));
        let single = PatternRuntime::from_parts(vec![], vec![], 0, true, 1, vec![1]);
        assert_eq!(single.run(1), Ok(true));
        assert!(single.run(0).is_err());
    }

    #[test]
    fn rank_is_position_in_order() {
        let rt = PatternRuntime::new(0, vec![3, 2]);
        assert_eq!((rt.rank(3), rt.rank(2), rt.rank(1)), (1, 2, 0));
        assert_eq!(rt.token(), 2);
    }
}
