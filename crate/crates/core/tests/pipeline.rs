mod common;

use std::sync::Arc;
use std::thread;

use appletgen_core::agents::{AgentRole, BackendError, LlmRequest};
use appletgen_core::{Binding, BindingSource, LlmBackend, Outcome, PipelineConfig, PipelineError, PipelineRun};
use common::*;

fn failure(run: &PipelineRun) -> &appletgen_core::agents::FailureReport {
    match &run.outcome {
        Outcome::Exhausted(r) => r,
        Outcome::Accepted(a) => panic!("expected exhaustion, got {a:?}"),
    }
}

#[test]
fn stock_example_replays_the_documented_decisions() {
    let engine = engine_with(synthetic(), scripted(STOCK_SCRIPT), PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let applet = run.applet().expect("accepted");
    assert_eq!(applet.trigger.id, "stocks.todays_price_rises_by_percentage");
    assert_eq!(applet.action.id, "hue.change_light_mode");
    assert_eq!(applet.verifier.score, 0.85);
    assert!(!applet.verifier.via_rule_fallback);
    assert_eq!(applet.attempts, 1);
    let statik = |f: &str, v: &str| Binding {
        field_slug: f.into(),
        source: BindingSource::Static,
        value: v.into(),
        match_kind: None,
    };
    assert_eq!(
        applet.action.bindings,
        vec![statik("light", "TODO_light"), statik("color", "green")]
    );
    assert_eq!(
        applet.trigger.field_values.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect::<Vec<_>>(),
        vec![("percentage", "TODO_percentage"), ("symbol", "TODO_symbol")]
    );

    // The model's trigger override is accepted on a high agreement ratio;
    // the action pick agrees with retrieval.
    let [trig, act] = &applet.decisions[..] else {
        panic!("two decisions expected: {:?}", applet.decisions)
    };
    assert_eq!(trig.agent, AgentRole::TriggerSelector);
    assert_eq!(trig.rag_choice, "stocks.price_rises_above");
    assert!(trig.overrode);
    assert!(trig.ratio.unwrap() >= 0.95 && trig.ratio.unwrap() < 1.0);
    assert!(!act.overrode);
    assert_eq!(act.ratio, Some(1.0));
    assert_override_sound(&applet.decisions);
}

#[test]
fn stock_example_is_byte_identical_across_fresh_engines() {
    let render = || {
        let engine = engine_with(synthetic(), scripted(STOCK_SCRIPT), PipelineConfig::default());
        serde_json::to_string(&engine.run(STOCK_QUERY).unwrap()).unwrap()
    };
    let first = render();
    assert_eq!(first, render());
    assert_eq!(first, render());
}

#[test]
fn failed_first_pair_falls_back_to_second() {
    let engine = engine_with(synthetic(), scripted(&verifier_script(&[0.3, 0.9])), PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let applet = run.applet().expect("second pair accepted");
    assert_eq!(applet.attempts, 2);
    assert_eq!(run.attempts.len(), 2);
    assert_eq!(run.attempts[0].queue_rank, 1);
    assert_eq!(run.attempts[0].score, 0.3);
    assert_eq!(run.attempts[1].queue_rank, 2);
    assert_eq!(applet.trigger.id, run.queue[1].trigger_id);
    assert_eq!(applet.action.id, run.queue[1].action_id);
    assert_eq!(applet.verifier.score, 0.9);
    assert_override_sound(&applet.decisions);
}

#[test]
fn all_failing_exhausts_exactly_k_squared_attempts() {
    for k in [1, 3, 5] {
        let config = PipelineConfig { k, ..Default::default() };
        let engine = engine_with(synthetic(), scripted(&verifier_script(&[0.3])), config);
        let run = engine.run(STOCK_QUERY).unwrap();
        assert_eq!(run.queue.len(), k * k);
        let report = failure(&run);
        assert_eq!(report.attempts.len(), k * k);
        let ranks: Vec<usize> = report.attempts.iter().map(|a| a.queue_rank).collect();
        assert_eq!(ranks, (1..=k * k).collect::<Vec<_>>());
        assert!(report.attempts.iter().all(|a| a.score == 0.3 && !a.forced_rag));
        assert_override_sound(&report.decisions);
    }
}

#[test]
fn failed_override_is_retried_with_retrieval_choices_within_budget() {
    // The selector always picks the percentage trigger, which agrees closely
    // enough with the top retrieved trigger to override it; the verifier
    // always rejects.
    let script = serde_json::json!({
        "default": {
            "trigger_selector": [{"thinking": "t", "decision": {"selected_id": "stocks.todays_price_rises_by_percentage", "reasoning": "r"}}],
            "verifier": [{"thinking": "v", "decision": {"binding_quality": 0.2, "completeness": 0.2, "executability": 0.2, "score": 0.2, "critique": "no"}}]
        }
    })
    .to_string();
    let engine = engine_with(synthetic(), scripted(&script), PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let report = failure(&run);
    assert_eq!(report.attempts.len(), 25, "retries consume the same budget");
    let first = &report.attempts[0];
    assert!(first.llm_overrode_rag && !first.forced_rag);
    assert_eq!(first.trigger_id, "stocks.todays_price_rises_by_percentage");
    let second = &report.attempts[1];
    assert!(second.forced_rag && !second.llm_overrode_rag);
    assert_eq!(second.queue_rank, 1);
    assert_eq!(second.trigger_id, "stocks.price_rises_above");
    for pair in report.attempts.windows(2) {
        if pair[0].llm_overrode_rag && !pair[0].forced_rag {
            assert!(pair[1].forced_rag);
            assert_eq!(pair[1].queue_rank, pair[0].queue_rank);
        }
    }
    assert_override_sound(&report.decisions);
}

#[test]
fn low_agreement_pick_keeps_retrieval_choice() {
    let script = serde_json::json!({
        "default": {
            "trigger_selector": [{"thinking": "t", "decision": {"selected_id": "stocks.todays_closing_price", "reasoning": "r"}}]
        }
    })
    .to_string();
    let engine = engine_with(synthetic(), scripted(&script), PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let applet = run.applet().unwrap();
    assert_eq!(applet.trigger.id, "stocks.price_rises_above");
    let d = &applet.decisions[0];
    assert!(!d.overrode);
    assert!(d.ratio.unwrap() < 0.95);
    assert_override_sound(&applet.decisions);
}

#[test]
fn llm_off_keeps_the_top_pair_and_uses_rule_verifier() {
    let engine = engine_with(synthetic(), None, PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let applet = run.applet().unwrap();
    assert_eq!(applet.trigger.id, run.queue[0].trigger_id);
    assert_eq!(applet.action.id, run.queue[0].action_id);
    assert!(applet.verifier.via_rule_fallback);
    assert!(applet.decisions.iter().all(|d| !d.overrode));
    assert_eq!(run.ranked_pairs()[0], (run.queue[0].trigger_id.clone(), run.queue[0].action_id.clone()));
}

#[test]
fn concurrent_runs_match_sequential_runs() {
    let engine = Arc::new(engine_with(synthetic(), None, PipelineConfig::default()));
    let queries = [
        STOCK_QUERY,
        "Post my new Instagram photos to Twitter",
        "Text me if it will rain tomorrow",
        "Blink the lights when someone rings the doorbell",
    ];
    let sequential: Vec<PipelineRun> = queries.iter().map(|q| engine.run(q).unwrap()).collect();
    let handles: Vec<_> = queries
        .iter()
        .map(|q| {
            let engine = engine.clone();
            let q = q.to_string();
            thread::spawn(move || engine.run(&q).unwrap())
        })
        .collect();
    let parallel: Vec<PipelineRun> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(sequential, parallel);
}

#[test]
fn intents_drive_retrieval_when_enabled() {
    let config = PipelineConfig {
        reretrieve_with_intents: true,
        ..Default::default()
    };
    let engine = engine_with(synthetic(), scripted(STOCK_SCRIPT), config);
    let run = engine.run(STOCK_QUERY).unwrap();
    let plain = engine_with(synthetic(), None, PipelineConfig::default())
        .run("stock price rises")
        .unwrap();
    assert_eq!(run.trigger_candidates, plain.trigger_candidates);
}

struct Offline;

impl LlmBackend for Offline {
    fn complete(&self, _: &LlmRequest) -> Result<String, BackendError> {
        Err(BackendError::Unreachable("connection refused".into()))
    }
}

#[test]
fn unreachable_backend_is_reported_not_papered_over() {
    let engine = engine_with(synthetic(), Some(Arc::new(Offline)), PipelineConfig::default());
    assert!(matches!(
        engine.run(STOCK_QUERY),
        Err(PipelineError::Backend(BackendError::Unreachable(_)))
    ));
}

#[test]
fn garbage_replies_fall_back_deterministically() {
    let script = r#"{"default": {
        "intent_analyzer": ["no json here"], "trigger_selector": ["```json\n{\"oops\": 1}\n```"],
        "action_selector": ["???"], "binding_generator": ["[]"], "verifier": ["{\"score\": 7}"]}}"#;
    let engine = engine_with(synthetic(), scripted(script), PipelineConfig::default());
    let run = engine.run(STOCK_QUERY).unwrap();
    let off = engine_with(synthetic(), None, PipelineConfig::default()).run(STOCK_QUERY).unwrap();
    let (a, b) = (run.applet().unwrap(), off.applet().unwrap());
    assert_eq!((a.trigger_id(), a.action_id()), (b.trigger_id(), b.action_id()));
    assert_eq!(a.action.bindings, b.action.bindings);
    assert!(a.verifier.via_rule_fallback);
}

#[test]
fn empty_query_is_rejected() {
    let engine = engine_with(synthetic(), None, PipelineConfig::default());
    assert!(matches!(engine.run("   "), Err(PipelineError::EmptyQuery)));
}
