mod support;

#[test]
fn recovery_matches_last_committed_operation() {
    for seed in 0..40 {
        support::crash_replay_run(seed).unwrap();
    }
}
