//! A small hand-written conversation corpus and the models trained on it.

#![allow(dead_code)]

use improv_core::corpus::{run_extraction, Extractor, ImprovTriple, QueryResponsePair};
use improv_core::engine::{build_improv_index, build_qr_index, Engine, EngineConfig};
use improv_core::index::Bm25Params;
use improv_core::models::{init_matcher, train_ibm1, train_lm, train_matcher, Lambdas, MatcherHyperParams, Vocab};
use improv_core::ranker::{train_ranker, FeatureModels, LabeledExample, RankerHyperParams, RankerModel};
use improv_core::text::TextConfig;
use improv_core::trigger::TriggerConfig;

pub const PAIRS: &[(&str, &str)] = &[
    ("i am sad", "me too"),
    ("i feel so sad", "me too. i wanna hug u"),
    ("i am so sad today", "oh no. i wanna hug u"),
    ("i am tired", "me too. let us get some rest"),
    ("i am hungry", "me too. let us grab some pizza"),
    ("do you like cats", "yes. they are my world"),
    ("do you like dogs", "yes! they are so loyal"),
    ("are you there", "yes. want to chat for a while"),
    ("good night", "good night. sleep well"),
    ("i passed my exam", "wow. you are amazing"),
    ("i got a new job", "wow. i am so proud of you"),
    ("it is raining", "oh no. stay dry out there"),
    ("i like music", "me too. music makes everything better"),
    ("see you later", "bye. come back soon"),
    ("how are you", "good. thanks for asking"),
];

pub const SENTENCES: &[&str] = &[
    "i wanna hug u",
    "i wanna hug u so much",
    "let us get some rest",
    "let us grab some pizza",
    "they are my world",
    "they are so loyal",
    "you are amazing",
    "i am so proud of you",
    "stay dry out there",
    "music makes everything better",
    "come back soon",
    "sleep well",
    "thanks for asking",
    "want to chat for a while",
];

pub fn pairs() -> Vec<QueryResponsePair> {
    PAIRS.iter().map(|(q, r)| QueryResponsePair::new(*q, *r)).collect()
}

pub fn triples() -> Vec<ImprovTriple> {
    run_extraction(&Extractor::default(), &pairs(), &[]).0
}

pub fn feature_models() -> FeatureModels {
    let text = TextConfig::default();
    let tok: Vec<(Vec<String>, Vec<String>)> =
        PAIRS.iter().map(|(q, r)| (text.tokenize(q), text.tokenize(r))).collect();
    let flipped: Vec<_> = tok.iter().map(|(q, r)| (r.clone(), q.clone())).collect();
    let tm = train_ibm1(&flipped, 10).unwrap();
    let sentences: Vec<Vec<String>> = SENTENCES.iter().map(|s| text.tokenize(s)).collect();
    let lm = train_lm(&sentences, Lambdas::default(), 1).unwrap();
    let vocab = Vocab::from_tokens(tok.iter().flat_map(|(q, r)| q.iter().chain(r)).map(String::as_str), 1);
    let hyper = MatcherHyperParams { epochs: 30, ..Default::default() };
    let matcher = train_matcher(init_matcher(vocab, 8, 3).unwrap(), &tok, hyper).unwrap();
    FeatureModels { tm, lm, matcher, text }
}

/// Each mined triple's context is relevant to its improv response; every
/// other improv response is not.
pub fn labels() -> Vec<LabeledExample> {
    let triples = triples();
    let mut out = Vec::new();
    for t in &triples {
        let q = t.context_query.as_deref().unwrap();
        for u in &triples {
            out.push(LabeledExample::new(q, u.improv_response.as_str(), u8::from(u.improv_response == t.improv_response)));
        }
    }
    out
}

pub fn ranker(models: &FeatureModels) -> RankerModel {
    train_ranker(&labels(), models, RankerHyperParams::default()).unwrap()
}

pub fn engine(trigger: TriggerConfig, config: EngineConfig) -> Engine {
    let text = TextConfig::default();
    let models = feature_models();
    let ranker = ranker(&models);
    Engine {
        qr_index: build_qr_index(pairs(), Bm25Params::default(), text.clone()).unwrap(),
        improv_index: build_improv_index(triples(), Bm25Params::default(), text.clone()).unwrap(),
        models,
        ranker,
        config,
        trigger,
        text,
    }
}

pub fn forced_trigger() -> TriggerConfig {
    TriggerConfig { base_prob: 1.0, passivity_weight: 0.0, ..Default::default() }
}

pub fn disabled_trigger() -> TriggerConfig {
    TriggerConfig { base_prob: 0.0, passivity_weight: 0.0, ..Default::default() }
}
