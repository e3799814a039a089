//! Random-schedule simulation, an independent under-approximation of the
//! exhaustive checker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compile_query, EnvPolicy, Trace, VerifyError};
use crate::engine::Executable;
use crate::query::{Query, QueryMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSearch {
    /// Schedule reaching a state that refutes an `A[]` query or witnesses an
    /// `E<>` query.
    pub found: Option<Trace>,
    pub schedules: usize,
}

/// Runs `schedules` random schedules of `steps` timed steps each, drawing
/// environment choices uniformly from `policy`. Deterministic for a seed.
pub fn random_search(
    exec: &Executable,
    q: &Query,
    policy: EnvPolicy,
    schedules: usize,
    steps: usize,
    seed: u64,
) -> Result<RandomSearch, VerifyError> {
    let pred = compile_query(exec, q)?;
    let want = q.mode == QueryMode::ExistsEventually;
    let choices = policy.choices(exec.in_event_count());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = exec.init_session();
    if exec.holds(&pred, &init) == want {
        return Ok(RandomSearch { found: Some(Trace { env: vec![] }), schedules: 0 });
    }
    let mut picks = Vec::with_capacity(steps);
    for run in 0..schedules {
        let mut s = init.clone();
        picks.clear();
        for _ in 0..steps {
            let c = rng.gen_range(0..choices.len());
            picks.push(c);
            exec.timed_step_in_place(&mut s, &choices[c], false)?;
            if exec.holds(&pred, &s) == want {
                let env = picks.iter().map(|&c| choices[c].clone()).collect();
                return Ok(RandomSearch { found: Some(Trace { env }), schedules: run + 1 });
            }
        }
    }
    Ok(RandomSearch { found: None, schedules })
}
