//! Hoare-triple suites for the six runtime functions. Every case draws a
//! program state satisfying the precondition, runs the function and asserts
//! the postcondition as stated, over the pre-state where it mentions one.

use proptest::prelude::*;
use statepat::patterns::PatternRuntime;

const CASES: u32 = 10_000;

fn queue() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    prop::collection::vec((1i64..6, 1i64..6), 0..8).prop_map(|pairs| pairs.into_iter().unzip())
}

fn runtime() -> impl Strategy<Value = PatternRuntime> {
    (queue(), any::<bool>(), 1i64..6, prop::collection::vec(1i64..6, 0..6)).prop_map(
        |((events, senders), exe, token, order)| {
            let capacity = events.len() + 4;
            PatternRuntime::from_parts(events, senders, capacity, exe, token, order)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    /// {c < stNum ∧ stNum > 1} initEventQueue
    /// {(x=1 ∧ exe=true ∧ n=0) ∨ ((x=0 ∨ x=a+1) ∧ exe=false)}
    #[test]
    fn triple_init_event_queue(mut rt in runtime(), (st_num, c) in (2i64..10).prop_flat_map(|s| (Just(s), 0..s))) {
        let a = c;
        let x = rt.init_event_queue(st_num, c).unwrap();
        let post = (x == 1 && rt.exe() && rt.is_empty())
            || ((x == 0 || x == a + 1) && !rt.exe());
        prop_assert!(post, "x={x} exe={} n={}", rt.exe(), rt.len());
        // Branch-exact refinement.
        if c == 0 {
            prop_assert!(x == 1 && rt.exe() && rt.is_empty());
        } else {
            prop_assert_eq!(x, if c == st_num - 1 { 0 } else { c + 1 });
            prop_assert!(!rt.exe());
        }
        prop_assert!(x >= 0 && x < st_num);
    }

    /// {n=N ∧ N ≥ 0 ∧ e>0 ∧ s>0} push {E[n-1]=e ∧ S[n-1]=s ∧ n=N+1}
    #[test]
    fn triple_push(mut rt in runtime(), e in 1i64..100, s in 1i64..100) {
        let before = rt.clone();
        let big_n = rt.len();
        rt.push(e, s).unwrap();
        let n = rt.len();
        prop_assert_eq!(n, big_n + 1);
        prop_assert_eq!(rt.events()[n - 1], e);
        prop_assert_eq!(rt.senders()[n - 1], s);
        prop_assert_eq!(&rt.events()[..big_n], before.events());
        prop_assert_eq!(&rt.senders()[..big_n], before.senders());
    }

    /// {e>0 ∧ r>0} pop
    /// {x=false ∨ (x=true ∧ E[v]=e ∧ ((exe=true ∧ r>S[v]) ∨ (exe=false ∧ r<S[v])))}
    #[test]
    fn triple_pop(rt in runtime(), e in 1i64..6, r in 1i64..6) {
        let before = rt.clone();
        let (x, v) = rt.pop_witness(e, r);
        let post = !x
            || (rt.events()[v] == e
                && ((rt.exe() && r > rt.senders()[v]) || (!rt.exe() && r < rt.senders()[v])));
        prop_assert!(post);
        // x is also complete: false only when no queue entry qualifies.
        let exists = (0..rt.len()).any(|i| {
            rt.events()[i] == e
                && ((rt.exe() && r > rt.senders()[i]) || (!rt.exe() && r < rt.senders()[i]))
        });
        prop_assert_eq!(x, exists);
        prop_assert_eq!(rt.pop(e, r), x);
        prop_assert_eq!(&rt, &before, "pop must not modify the runtime");
    }

    /// {true} isNormalExe {x=exe}
    #[test]
    fn triple_is_normal_exe(rt in runtime()) {
        let before = rt.clone();
        prop_assert_eq!(rt.is_normal_exe(), rt.exe());
        prop_assert_eq!(&rt, &before);
    }

    /// {t>0 ∧ stNum>0} updateExeInfo {(t=stNum ∧ x=1) ∨ (t≠stNum ∧ x=t+1)}
    #[test]
    fn triple_update_exe_info(rt in runtime(), st_num in 1i64..10) {
        let mut rt = rt;
        let t = rt.token();
        let x = rt.update_exe_info(st_num).unwrap();
        prop_assert!((t == st_num && x == 1) || (t != st_num && x == t + 1));
        prop_assert_eq!(rt.token(), x);
    }

    /// {t>0 ∧ st>0} run {(x=true ∧ O[t-1]=st) ∨ (x=false ∧ O[t-1]≠st)}
    #[test]
    fn triple_run(
        (order, t) in prop::collection::vec(1i64..6, 1..6)
            .prop_flat_map(|o| { let len = o.len() as i64; (Just(o), 1..=len) }),
        st in 1i64..6,
    ) {
        let rt = PatternRuntime::from_parts(vec![], vec![], 0, true, t, order.clone());
        let before = rt.clone();
        let x = rt.run(st).unwrap();
        let slot = order[t as usize - 1];
        prop_assert!((x && slot == st) || (!x && slot != st));
        prop_assert_eq!(&rt, &before);
    }
}
