use super::*;
use crate::conversation::TranslateScope;
use crate::empathy::FeedbackLength;
use crate::grammar::ErrorType;
use crate::llm::{MockProvider, MockRule, MockScript, ProviderRole};
use chrono::TimeZone;

const WRONG: &str = "We discussed about the plan.";
const RIGHT: &str = "We discussed the plan.";
const CLEAN: &str = "I like cats.";

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()
}

fn rules() -> Vec<MockRule> {
    vec![
        MockRule::contains(WRONG, RIGHT).for_role(ProviderRole::Grammar),
        MockRule::echo().for_role(ProviderRole::Grammar),
        MockRule::contains("User: what does", "Yes.").for_role(ProviderRole::Assistant),
        MockRule::contains("Answer with yes or no.", "No."),
        MockRule::contains("ONE SHORT PHRASE", "\"Weekend plans.\""),
        MockRule::contains("You only know English and Mandarin.", "It means talking. Any other question?"),
        MockRule::contains("most recent utterances", "GEN"),
        MockRule::contains("Shorten the feedback", "REWRITE"),
        MockRule::contains("Try to shorten to at most 3 sentences", "SUCCINCT"),
        MockRule::contains("Translate the following", "翻译"),
        MockRule::contains("", "That's nice! Tell me more.").for_role(ProviderRole::Conversation),
    ]
}

fn provider() -> MockProvider {
    MockProvider::new(MockScript::new(rules(), None))
}

fn session(condition: EmpathyMode) -> Session {
    Session::start("s1", "p1", Prefs::default(), "Food", condition, Policy::default(), 42, t0()).unwrap()
}

fn calm(text: &str) -> TurnSignals {
    TurnSignals::calm(text)
}

fn upset(text: &str) -> TurnSignals {
    TurnSignals::calm(text).with_affect(0.9)
}

fn turn(s: &mut Session, signals: TurnSignals, p: &dyn ChatProvider) -> TurnOutcome {
    let now = t0() + chrono::Duration::seconds(s.turn_counter as i64 + 1);
    process_turn(s, &signals, now, p).unwrap()
}

#[test]
fn start_validation() {
    let bad = Session::start("s", "p", Prefs::default(), "Cars", EmpathyMode::None, Policy::default(), 1, t0());
    assert_eq!(bad, Err(PipelineError::InvalidTopic("Cars".into())));
    let s = session(EmpathyMode::Fixed);
    assert_eq!(s.phase, Phase::Chatting);
    assert!(s.history.is_empty());
    assert_eq!(s.conversation_index, 0);
}

#[test]
fn clean_calm_input_gets_a_reply() {
    let p = provider();
    let mut s = session(EmpathyMode::Adaptive);
    let out = turn(&mut s, calm(CLEAN), &p);
    assert_eq!(out.kind, OutcomeKind::Conversation);
    assert_eq!(out.message, "That's nice! Tell me more.");
    assert!(out.emitted_error_types.is_empty());
    assert_eq!(s.history.len(), 2);
}

#[test]
fn grammar_feedback_without_empathy_condition() {
    let p = provider();
    let mut s = session(EmpathyMode::None);
    let out = turn(&mut s, upset(WRONG), &p);
    assert_eq!(out.kind, OutcomeKind::Grammar);
    assert_eq!(out.emitted_error_types, [ErrorType::UnnecessaryPreposition]);
    assert!(out.message.starts_with("Maybe you meant \"discussed\" rather than \"discussed about\"."));
    assert!(s.awaiting_followup);
    assert_eq!(s.pre_feedback_reply.as_deref(), Some("That's nice! Tell me more."));
}

#[test]
fn distress_with_adaptive_condition_gets_empathy() {
    let p = provider();
    let mut s = session(EmpathyMode::Adaptive);
    let out = turn(&mut s, upset(WRONG), &p);
    assert_eq!(out.kind, OutcomeKind::Empathy);
    assert!(out.message.starts_with("REWRITE "));
    assert_eq!(s.empathy_trigger_count, 1);
    assert!(s.awaiting_followup);

    let mut s = session(EmpathyMode::Fixed);
    let out = turn(&mut s, upset(CLEAN), &p);
    assert_eq!(out.kind, OutcomeKind::Empathy);
    assert!(crate::empathy::FixedBank::builtin().phrases().contains(&out.message));
}

#[test]
fn learning_query_then_forced_resume() {
    let p = provider();
    let mut s = session(EmpathyMode::None);
    turn(&mut s, calm(WRONG), &p);

    let q = turn(&mut s, calm("what does discuss mean?"), &p);
    assert_eq!(q.kind, OutcomeKind::QueryAnswer);
    assert_eq!(q.message, "It means talking. Any other question?");
    assert!(s.awaiting_followup);

    let before = p.call_count();
    let r = turn(&mut s, calm("what does plan mean?"), &p);
    assert_eq!(r.kind, OutcomeKind::QueryAnswer);
    let classify_calls = p.calls()[before..]
        .iter()
        .filter(|c| c.render().contains("Answer with yes or no."))
        .count();
    assert_eq!(classify_calls, 0);
    assert!(r.message.starts_with("It means talking. "));
    assert!(r.message.contains("Weekend plans"));
    assert!(r.message.ends_with("That's nice! Tell me more."));
    assert!(!r.message.contains("Any other question?"));
    assert!(!s.awaiting_followup);
    assert!(s.pre_feedback_reply.is_none());

    assert_eq!(turn(&mut s, calm(CLEAN), &p).kind, OutcomeKind::Conversation);
}

#[test]
fn empathy_resume_uses_reply_before_feedback() {
    let p = provider();
    let mut s = session(EmpathyMode::Fixed);
    turn(&mut s, calm(CLEAN), &p);
    turn(&mut s, upset("I can't say it."), &p);
    let before = p.call_count();
    let out = turn(&mut s, calm("ok"), &p);
    assert_eq!(out.kind, OutcomeKind::QueryAnswer);
    let resume = p.calls()[before..]
        .iter()
        .find(|c| c.provider == ProviderRole::Conversation)
        .cloned()
        .expect("fresh conversation reply");
    assert_eq!(resume.last_user_text(), Some("I can't say it."));
}

#[test]
fn empathy_rate_limit() {
    let p = provider();
    let mut s = session(EmpathyMode::Fixed);
    let kinds: Vec<OutcomeKind> = (0..5).map(|_| turn(&mut s, upset(CLEAN), &p).kind).collect();
    assert_eq!(
        kinds,
        [
            OutcomeKind::Empathy,
            OutcomeKind::QueryAnswer,
            OutcomeKind::Conversation,
            OutcomeKind::Empathy,
            OutcomeKind::QueryAnswer
        ]
    );
    assert_eq!(s.empathy_trigger_count as usize, s.empathy_turns_in_history());
}

#[test]
fn provider_failure_leaves_session_untouched() {
    let p = MockProvider::new(MockScript::new(
        vec![MockRule::echo().for_role(ProviderRole::Grammar)],
        None,
    ));
    let mut s = session(EmpathyMode::None);
    let snapshot = s.clone();
    let err = process_turn(&mut s, &calm(CLEAN), t0(), &p).unwrap_err();
    assert!(err.upstream().is_some());
    assert_eq!(s, snapshot);
}

#[test]
fn end_conversation_resets_counter() {
    let p = MockProvider::new(MockScript::new(
        vec![
            MockRule::contains("I has a cat", "I have a cat").for_role(ProviderRole::Grammar),
            MockRule::contains("", "ok").for_role(ProviderRole::Conversation),
        ],
        None,
    ));
    let mut s = session(EmpathyMode::None);
    for _ in 0..2 {
        assert_eq!(turn(&mut s, calm("I has a cat"), &p).kind, OutcomeKind::Conversation);
    }
    s.end_conversation().unwrap();
    let kinds: Vec<OutcomeKind> = (0..3).map(|_| turn(&mut s, calm("I has a cat"), &p).kind).collect();
    assert_eq!(kinds, [OutcomeKind::Conversation, OutcomeKind::Conversation, OutcomeKind::Grammar]);
}

#[test]
fn survey_gating() {
    let mut s = session(EmpathyMode::None);
    for i in 0..3 {
        assert_eq!(
            s.advance_to_survey(),
            Err(PipelineError::NotEnoughConversations { have: i, need: 3 })
        );
        s.end_conversation().unwrap();
    }
    s.advance_to_survey().unwrap();
    assert_eq!(s.end_conversation(), Err(PipelineError::SessionClosed(Phase::Survey)));
    s.close();
    let p = provider();
    assert_eq!(
        process_turn(&mut s, &calm(CLEAN), t0(), &p),
        Err(PipelineError::SessionClosed(Phase::Closed))
    );
}

#[test]
fn translations_follow_scope() {
    let p = provider();
    let prefs = Prefs {
        translations: true,
        feedback_length: FeedbackLength::Succinct,
    };
    let mut s = Session::start("s", "p", prefs, "Food", EmpathyMode::None, Policy::default(), 1, t0()).unwrap();
    let out = turn(&mut s, calm(CLEAN), &p);
    assert_eq!(out.translation.as_deref(), Some("翻译"));
    assert_eq!(s.history.last().unwrap().translation.as_deref(), Some("翻译"));

    let policy = Policy {
        translate_scope: TranslateScope::FeedbackOnly,
        ..Policy::default()
    };
    let mut s = Session::start("s", "p", prefs, "Food", EmpathyMode::None, policy, 1, t0()).unwrap();
    assert_eq!(turn(&mut s, calm(CLEAN), &p).translation, None);
    assert!(turn(&mut s, calm(WRONG), &p).translation.is_some());

    let mut s = session(EmpathyMode::None);
    assert_eq!(turn(&mut s, calm(CLEAN), &p).translation, None);
}

#[test]
fn timestamps_strictly_increase() {
    let p = provider();
    let mut s = session(EmpathyMode::None);
    for _ in 0..4 {
        process_turn(&mut s, &calm(CLEAN), t0(), &p).unwrap();
    }
    let ts: Vec<_> = s.history.turns().iter().map(|t| t.timestamp).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
}

/// Expected branch for one routing combination, written out independently.
fn expected_kind(condition: EmpathyMode, distressed: bool, has_error: bool, awaiting: bool) -> OutcomeKind {
    if awaiting {
        OutcomeKind::QueryAnswer
    } else if distressed && condition != EmpathyMode::None {
        OutcomeKind::Empathy
    } else if has_error {
        OutcomeKind::Grammar
    } else {
        OutcomeKind::Conversation
    }
}

#[test]
fn routing_is_exhaustive_and_ordered() {
    let mut combos = 0;
    for condition in EmpathyMode::ALL {
        for distressed in [false, true] {
            for has_error in [false, true] {
                for awaiting in [false, true] {
                    let p = provider();
                    let mut s = session(condition);
                    turn(&mut s, calm(CLEAN), &p);
                    if awaiting {
                        s.awaiting_followup = true;
                        s.feedback_anchor = Some(1);
                    }
                    let text = if has_error { WRONG } else { CLEAN };
                    let signals = if distressed { upset(text) } else { calm(text) };
                    let out = turn(&mut s, signals, &p);
                    assert_eq!(
                        out.kind,
                        expected_kind(condition, distressed, has_error, awaiting),
                        "{condition:?} distressed={distressed} error={has_error} awaiting={awaiting}"
                    );
                    assert_eq!(out.kind == OutcomeKind::Grammar, !out.emitted_error_types.is_empty());
                    if condition == EmpathyMode::None {
                        assert_ne!(out.kind, OutcomeKind::Empathy);
                    }
                    combos += 1;
                }
            }
        }
    }
    assert_eq!(combos, 24);
}

#[test]
fn replay_reproduces_outcomes() {
    let p = provider();
    let mut live = session(EmpathyMode::Adaptive);
    let start = live.clone();
    let inputs = [upset(CLEAN), calm("what does that mean?"), calm("fine"), calm(WRONG), calm("sure"), calm(CLEAN)];
    let mut log = Vec::new();
    for (i, signals) in inputs.iter().enumerate() {
        let now = t0() + chrono::Duration::seconds(i as i64 + 1);
        let (out, calls) = process_turn_recorded(&mut live, signals, now, &p).unwrap();
        log.push((signals.clone(), now, out, calls));
    }
    let mut replayed = start;
    for (signals, now, out, calls) in log {
        assert_eq!(replay_turn(&mut replayed, &signals, now, calls).unwrap(), out);
    }
    assert_eq!(replayed, live);
}
