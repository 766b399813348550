mod common;

use common::*;
use coqe::augment::example_for;
use coqe::augment::{augment_corpus, enumerate_orders, ElementOrder};
use coqe::corpus::{load_corpus, tokenize, write_corpus, LabelScheme, Role, TokenizerConfig};
use coqe::decoding::{
    build_allowed_set, constrained_decode, CorruptingGenerator, CorruptionConfig, DEFAULT_MAX_LEN,
};
use coqe::metrics::{match_sets, match_sets_with, tuple_match, MatchMode};
use coqe::postprocess::{map_to_spans, postprocess};
use coqe::template::{parse_view, render_view, Prompter, RawQuintuple, View};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn schemes() -> impl Strategy<Value = LabelScheme> {
    prop_oneof![Just(LabelScheme::vcom()), Just(LabelScheme::camera())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tokens_point_into_the_raw_text(text in "\\PC{0,40}") {
        let cfg = TokenizerConfig::default();
        let toks = tokenize(&text, &cfg);
        for t in &toks {
            prop_assert_eq!(&text[t.char_start..t.char_end], t.text.as_str());
            prop_assert!(!t.text.is_empty());
            prop_assert!(!t.text.chars().any(char::is_whitespace));
        }
        let joined = toks.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
        let again: Vec<String> = tokenize(&joined, &cfg).into_iter().map(|t| t.text).collect();
        let first: Vec<String> = toks.into_iter().map(|t| t.text).collect();
        prop_assert_eq!(again, first);
    }

    #[test]
    fn corpus_survives_write_and_load(seed in any::<u64>(), scheme in schemes()) {
        let c = random_corpus(seed, 8, &scheme);
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let back = load_corpus(buf.as_slice(), &scheme).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn augmentation_count_law(seed in any::<u64>(), k in 1usize..=24, flag in any::<bool>()) {
        let scheme = LabelScheme::vcom();
        let c = random_corpus(seed, 10, &scheme);
        let mut orders = enumerate_orders();
        orders.shuffle(&mut rng(seed));
        orders.truncate(k);
        let out = augment_corpus(&c, &orders, flag, &Prompter::default()).unwrap();
        let com = c.items.iter().filter(|i| i.is_comparative()).count();
        let non = c.len() - com;
        prop_assert_eq!(out.len(), com * (k + if flag { 5 } else { 0 }) + non);
    }

    #[test]
    fn render_then_parse_recovers_surfaces(seed in any::<u64>(), o in 0usize..24, scheme in schemes()) {
        let order = enumerate_orders()[o];
        let mut r = rng(seed);
        let item = random_labeled(&mut r, "x", &scheme);
        for view in [View::Quintuple(order), View::Single(Role::ALL[o % 5])] {
            let text = render_view(&item.quintuples, &item.sentence, &view);
            let parsed = parse_view(&text, &view);
            prop_assert!(parsed.is_clean(), "{} -> {:?}", text, parsed.diagnostics);
            let expected: Vec<RawQuintuple> = item
                .quintuples
                .iter()
                .map(|q| RawQuintuple::from_quintuple(q, &item.sentence).project(&view))
                .collect();
            prop_assert_eq!(parsed.tuples, expected);
        }
    }

    #[test]
    fn parser_is_total(text in "(\\[S\\]|\\[O\\]|\\[A\\]|\\[P\\]|\\[L\\]|\\[UNK\\]|;|none|</s>|COM\\+|a|b| |\\PC){0,30}", o in 0usize..24) {
        let view = View::Quintuple(enumerate_orders()[o]);
        let parsed = parse_view(&text, &view);
        let chars = text.chars().count();
        for d in &parsed.diagnostics {
            prop_assert!(d.position <= chars);
        }
    }

    #[test]
    fn decoding_stays_inside_the_allowed_set(seed in any::<u64>(), scheme in schemes()) {
        let mut r = rng(seed);
        let item = random_labeled(&mut r, "x", &scheme);
        let allowed = build_allowed_set(&item.sentence, &scheme);
        let mut g = RandomScorer { rng: rng(seed ^ 1) };
        let rec = constrained_decode(&mut g, "in", &allowed, 64).unwrap();
        prop_assert!(rec.output_tokens.iter().all(|t| allowed.contains(t)));
        prop_assert!(rec.step_count <= 64);
        let mut again = RandomScorer { rng: rng(seed ^ 1) };
        prop_assert_eq!(constrained_decode(&mut again, "in", &allowed, 64).unwrap(), rec.clone());
        let a = r.gen_range(0.01..100.0);
        let b = r.gen_range(-100.0..100.0);
        let mut scaled = Affine { inner: RandomScorer { rng: rng(seed ^ 1) }, a, b };
        let rec2 = constrained_decode(&mut scaled, "in", &allowed, 64).unwrap();
        prop_assert_eq!(rec2.output_tokens, rec.output_tokens);
    }

    #[test]
    fn accepted_tuples_are_sound(seed in any::<u64>(), p in prop::array::uniform4(0.0f64..=1.0)) {
        let scheme = LabelScheme::vcom();
        let mut r = rng(seed);
        let item = random_labeled(&mut r, "x", &scheme);
        let view = View::canonical();
        let ex = example_for(&item, &view, &Prompter::default());
        let allowed = build_allowed_set(&item.sentence, &scheme);
        let noise = CorruptionConfig { drop_element: p[0], swap_markers: p[1], substitute_word: p[2], truncate: p[3] };
        let mut g = CorruptingGenerator::new(&ex, &allowed, &noise, seed).unwrap();
        let rec = constrained_decode(&mut g, &ex.input, &allowed, DEFAULT_MAX_LEN).unwrap();
        let parsed = parse_view(&rec.output_text, &view);
        let post = postprocess(&parsed, &item.sentence, &scheme);
        for q in &post.quintuples {
            prop_assert!(scheme.contains(q.label.as_str()));
            prop_assert!(q.max_index().is_some_and(|m| m < item.sentence.len()));
            prop_assert!(Role::ELEMENTS.iter().any(|&r| q.span(r).is_some()));
        }
        for m in parsed.tuples.iter().flat_map(|t| map_to_spans(t, &item.sentence)) {
            for role in Role::ELEMENTS {
                if let Some(s) = m.span(role) {
                    prop_assert!(s.indices().windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn match_mode_dominance(seed in any::<u64>()) {
        let scheme = LabelScheme::camera();
        let mut r = rng(seed);
        let len = r.gen_range(1..=8);
        let g = random_quintuple(&mut r, len, &scheme);
        let p = random_quintuple(&mut r, len, &scheme);
        for arity in [MatchMode::EXACT_Q4.arity, MatchMode::EXACT_Q5.arity] {
            let e = tuple_match(&g, &p, MatchMode { strategy: coqe::metrics::Strategy::Exact, arity }).value();
            let pr = tuple_match(&g, &p, MatchMode { strategy: coqe::metrics::Strategy::Proportional, arity }).value();
            let b = tuple_match(&g, &p, MatchMode { strategy: coqe::metrics::Strategy::Binary, arity }).value();
            prop_assert!(e <= pr && pr <= b);
        }
        for (q4, q5) in [
            (MatchMode::EXACT_Q4, MatchMode::EXACT_Q5),
            (MatchMode::PROPORTIONAL_Q4, MatchMode::PROPORTIONAL_Q5),
            (MatchMode::BINARY_Q4, MatchMode::BINARY_Q5),
        ] {
            let a = tuple_match(&g, &p, q4);
            let b = tuple_match(&g, &p, q5);
            prop_assert!(!a.is_zero() || b.is_zero());
            if q4 != MatchMode::PROPORTIONAL_Q4 {
                prop_assert!(a.value() >= b.value());
            }
        }
    }

    #[test]
    fn set_scores_ignore_order(seed in any::<u64>()) {
        let scheme = LabelScheme::camera();
        let mut r = rng(seed);
        let len = r.gen_range(1..=6);
        let g: Vec<_> = (0..r.gen_range(0..=4)).map(|_| random_quintuple(&mut r, len, &scheme)).collect();
        let p: Vec<_> = (0..r.gen_range(0..=4)).map(|_| random_quintuple(&mut r, len, &scheme)).collect();
        let mut g2 = g.clone();
        let mut p2 = p.clone();
        g2.shuffle(&mut r);
        p2.shuffle(&mut r);
        for m in MatchMode::ALL {
            let base = match_sets(&g, &p, m).total;
            prop_assert_eq!(match_sets(&g2, &p2, m).total, base);
            prop_assert_eq!(match_sets_with(&g, &p, m, 0).total, base);
            prop_assert!(base <= num_rational::Ratio::from_integer(g.len().min(p.len()) as u64));
        }
    }
}

#[test]
fn mapping_a_rendered_target_is_lossless_on_unique_words() {
    let corpus = coqe::synth::synthesize(&coqe::synth::SynthConfig {
        sentences: 300,
        seed: 17,
        ..Default::default()
    });
    for order in enumerate_orders() {
        let view = View::Quintuple(order);
        for item in &corpus.items {
            let text = render_view(&item.quintuples, &item.sentence, &view);
            let post = postprocess(&parse_view(&text, &view), &item.sentence, &corpus.scheme);
            assert!(post.report.is_clean(), "{text}");
            assert_eq!(post.quintuples, item.quintuples, "{text}");
        }
    }
}

#[test]
fn raising_a_corruption_rate_raises_its_count() {
    let corpus = coqe::synth::synthesize(&coqe::synth::SynthConfig {
        sentences: 40,
        seed: 2,
        comparative_ratio: 1.0,
        ..Default::default()
    });
    let count = |noise: CorruptionConfig| {
        let mut totals = [0usize; 3];
        for seed in 0..100u64 {
            for item in &corpus.items {
                let view = View::canonical();
                let ex = example_for(item, &view, &Prompter::default());
                let allowed = build_allowed_set(&item.sentence, &corpus.scheme);
                let mut g = CorruptingGenerator::new(&ex, &allowed, &noise, seed).unwrap();
                let rec = constrained_decode(&mut g, &ex.input, &allowed, DEFAULT_MAX_LEN).unwrap();
                let post = postprocess(
                    &parse_view(&rec.output_text, &view),
                    &item.sentence,
                    &corpus.scheme,
                );
                totals[0] += post.report.wrong_marker_order;
                totals[1] += post.report.hallucination;
                totals[2] += post.report.missing_marker;
            }
        }
        totals
    };
    let lo = count(CorruptionConfig {
        swap_markers: 0.2,
        substitute_word: 0.2,
        truncate: 0.1,
        ..Default::default()
    });
    let hi_swap = count(CorruptionConfig {
        swap_markers: 0.6,
        substitute_word: 0.2,
        truncate: 0.1,
        ..Default::default()
    });
    let hi_sub = count(CorruptionConfig {
        swap_markers: 0.2,
        substitute_word: 0.6,
        truncate: 0.1,
        ..Default::default()
    });
    let hi_trunc = count(CorruptionConfig {
        swap_markers: 0.2,
        substitute_word: 0.2,
        truncate: 0.5,
        ..Default::default()
    });
    assert!(hi_swap[0] >= lo[0], "{hi_swap:?} {lo:?}");
    assert!(hi_sub[1] >= lo[1], "{hi_sub:?} {lo:?}");
    assert!(hi_trunc[2] >= lo[2], "{hi_trunc:?} {lo:?}");
}

#[test]
fn all_orders_are_distinct_permutations() {
    let all = enumerate_orders();
    assert_eq!(all.len(), 24);
    let set: std::collections::HashSet<ElementOrder> = all.iter().copied().collect();
    assert_eq!(set.len(), 24);
}
