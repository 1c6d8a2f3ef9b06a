//! Acceptance criteria 1-10. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing the test harness capture) before asserting.

use std::io::Write;
use std::time::{Duration, Instant};

use aspectag::adaptation::{pred_augment, weighted_union};
use aspectag::corpus::*;
use aspectag::evaluation::*;
use aspectag::models::*;
use aspectag::numkernel::{ParamId, ParamSet, Tape, Tensor};
use aspectag::training::{train, TrainConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

const FD_STEP: f64 = 1e-5;
const FD_MAX_REL_ERR: f64 = 1e-4;
/// Denominator floor for the relative error of near-zero gradients.
const FD_REL_FLOOR: f64 = 1e-6;
const ATTN_SUM_TOL: f64 = 1e-9;
const ATTN_MEAN_TOL: f64 = 1e-12;
const TTEST_DECIMALS: f64 = 1e-4;
const YOUTUBEAN_SENTENCES: usize = 578;
const YOUTUBEAN_ASPECTS: usize = 525;
const YOUTUBEAN_MEAN_WORDS: f64 = 20.71;
const YOUTUBEAN_WORDS_TOL: f64 = 1.0;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    report_status(n, name, if pass { "PASS" } else { "FAIL" }, detail);
}

fn report_status(n: u32, name: &str, verdict: &str, detail: &str) {
    let line = format!("criterion {n:>2} [{name}]: {verdict} ({detail})\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

const WORDS: [&str; 12] = [
    "the", "battery", "life", "is", "great", "but", "screen", "was", "dim", "and", "keyboard", "fine",
];

fn random_embeddings(dim: usize, rng: &mut ChaCha8Rng) -> EmbeddingTable {
    EmbeddingTable::random(WORDS, dim, rng)
}

fn random_instance(model: &Model, n: usize, rng: &mut ChaCha8Rng) -> Instance {
    let l = model.scheme().len();
    let f = model.config().feature_dim;
    Instance {
        ids: (0..n).map(|_| rng.gen_range(2..model.vocab().len())).collect(),
        features: model.config().use_features.then(|| {
            Tensor::new(vec![n, f], (0..n * f).map(|_| rng.gen_range(0..2) as f64).collect()).unwrap()
        }),
        labels: (0..n).map(|_| rng.gen_range(0..l)).collect(),
        scale: 1.0,
    }
}

fn loss_of(model: &Model, batch: &[Instance]) -> f64 {
    let mut tape = Tape::new(model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let l = model.loss(&mut tape, batch, false, &mut rng).unwrap().unwrap();
    tape.value(l).data()[0]
}

fn gradients_of(model: &Model, batch: &[Instance]) -> Vec<Option<Tensor>> {
    let mut tape = Tape::new(model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let l = model.loss(&mut tape, batch, false, &mut rng).unwrap().unwrap();
    let g = tape.backward(l).unwrap();
    model.params().iter().map(|(id, _)| g.get(id).cloned()).collect()
}

/// Largest relative error between backprop and central differences over
/// the listed parameters (every element).
fn max_fd_error(model: &mut Model, batch: &[Instance], only: Option<&[ParamId]>) -> (f64, String) {
    let analytic = gradients_of(model, batch);
    let ids: Vec<ParamId> = match only {
        Some(ids) => ids.to_vec(),
        None => model.params().iter().map(|(id, _)| id).collect(),
    };
    let mut worst = (0.0, String::new());
    for id in ids {
        for k in 0..model.params().value(id).len() {
            let orig = model.params().value(id).data()[k];
            model.params_mut().value_mut(id).data_mut()[k] = orig + FD_STEP;
            let up = loss_of(model, batch);
            model.params_mut().value_mut(id).data_mut()[k] = orig - FD_STEP;
            let down = loss_of(model, batch);
            model.params_mut().value_mut(id).data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic[id.0].as_ref().map_or(0.0, |g| g.data()[k]);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FD_REL_FLOOR);
            if err > worst.0 {
                worst = (err, format!("{}[{k}]", model.params().get(id).name));
            }
        }
    }
    worst
}

#[test]
fn criterion_01_gradient_correctness() {
    let started = Instant::now();
    let mut worst = (0.0, String::new());
    for mode in [Mode::Ae, Mode::Aesc] {
        for arch in Architecture::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(101);
            let mut cfg = ModelConfig::new(arch, mode);
            cfg.hidden_size = 8;
            cfg.window = 1;
            cfg.embedding_dim = 4;
            cfg.use_features = true;
            let emb = random_embeddings(cfg.embedding_dim, &mut rng);
            let mut model = Model::new(cfg, emb, FeatureTable::default(), &mut rng).unwrap();
            let inst = random_instance(&model, 5, &mut rng);
            let (err, at) = max_fd_error(&mut model, &[inst], None);
            if err > worst.0 {
                worst = (err, format!("{arch}/{mode} {at}"));
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = worst.0 < FD_MAX_REL_ERR && elapsed < Duration::from_secs(60);
    report(
        1,
        "gradient correctness",
        pass,
        &format!("max rel err {:.2e} at {}, {:.1}s", worst.0, worst.1, elapsed.as_secs_f64()),
    );
    assert!(pass);
}

#[derive(Deserialize)]
struct GoldenCase {
    scheme: String,
    gold: Vec<Vec<String>>,
    predicted: Vec<Vec<String>>,
    found_gold: usize,
    found_predicted: usize,
    correct: usize,
    precision: String,
    recall: String,
    f1: String,
}

#[test]
fn criterion_02_conlleval_equivalence() {
    let started = Instant::now();
    let cases: Vec<GoldenCase> = serde_json::from_str(include_str!("golden/conlleval_cases.json")).unwrap();
    let mut mismatches = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let r = conlleval_f1(&c.gold, &c.predicted).unwrap();
        let got = (
            r.gold,
            r.predicted,
            r.correct,
            format!("{:.2}", r.precision),
            format!("{:.2}", r.recall),
            format!("{:.2}", r.f1),
        );
        let want = (
            c.found_gold,
            c.found_predicted,
            c.correct,
            c.precision.clone(),
            c.recall.clone(),
            c.f1.clone(),
        );
        if got != want {
            mismatches.push(format!("case {i} ({}): {got:?} vs {want:?}", c.scheme));
        }
    }
    let per_scheme = |s: &str| cases.iter().filter(|c| c.scheme == s).count();
    let elapsed = started.elapsed();
    let pass = mismatches.is_empty()
        && per_scheme("ae") >= 50
        && per_scheme("aesc") >= 50
        && elapsed < Duration::from_secs(10);
    report(
        2,
        "conlleval equivalence",
        pass,
        &format!(
            "{} ae + {} aesc cases, {} mismatches{}",
            per_scheme("ae"),
            per_scheme("aesc"),
            mismatches.len(),
            mismatches.first().map(|m| format!(", first: {m}")).unwrap_or_default()
        ),
    );
    assert!(pass);
}

fn synthetic() -> Vec<Sentence> {
    read_canonical(include_bytes!("../data/synthetic.jsonl")).unwrap()
}

/// Trains on the synthetic corpus until its own F1 reaches 100 or 300
/// epochs pass; returns (report, epochs, per-epoch losses).
fn overfit(arch: Architecture, mode: Mode, seed: u64) -> (EvalReport, usize, Vec<f64>) {
    let data = synthetic();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = ModelConfig::new(arch, mode);
    cfg.hidden_size = 32;
    cfg.window = 1;
    cfg.dropout_keep = 1.0;
    cfg.embedding_dim = 20;
    let emb = EmbeddingTable::random(
        data.iter().flat_map(|s| s.tokens.iter().map(|t| t.surface.as_str())),
        cfg.embedding_dim,
        &mut rng,
    );
    let mut model = Model::new(cfg, emb, FeatureTable::default(), &mut rng).unwrap();
    let tc = TrainConfig {
        learning_rate: 0.3,
        decay: 0.99,
        batch_size: 1,
        max_epochs: 300,
        patience_steps: usize::MAX,
        target_f1: Some(100.0),
        seed,
        ..Default::default()
    };
    let summary = train(&mut model, &data, &data, &tc).unwrap();
    let (report, _) = evaluate_model(&model, &data).unwrap();
    (report, summary.epochs, summary.epoch_losses)
}

#[test]
fn criterion_03_overfit_sanity() {
    let started = Instant::now();
    let (arnn, epochs, losses) = overfit(Architecture::Arnn, Mode::Aesc, 1);
    let decreasing = losses.windows(2).take(4).all(|w| w[1] < w[0]);
    let mut details = vec![format!(
        "arnn aesc joint {:.2} after {epochs} epochs, first-5 loss decreasing {decreasing}",
        arnn.joint.f1
    )];
    let mut pass = format!("{:.2}", arnn.joint.f1) == "100.00" && decreasing;
    for arch in Architecture::ALL.into_iter().filter(|&a| a != Architecture::Arnn) {
        let (r, epochs, _) = overfit(arch, Mode::Ae, 1);
        pass &= format!("{:.2}", r.single.f1) == "100.00";
        details.push(format!("{arch} ae single {:.2} ({epochs} ep)", r.single.f1));
    }
    let elapsed = started.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    details.push(format!("{:.1}s", elapsed.as_secs_f64()));
    report(3, "overfit sanity", pass, &details.join("; "));
    assert!(pass);
}

/// Random sentence with non-overlapping token-aligned spans.
fn random_sentence(rng: &mut ChaCha8Rng, id: usize) -> Sentence {
    let n = rng.gen_range(1..25);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let mut s = Sentence::new(format!("r{id}"), words.join(" "));
    let mut t = 0;
    while t < n {
        if rng.gen_bool(0.3) {
            let last = (t + rng.gen_range(0..3)).min(n - 1);
            let (start, end) = (s.tokens[t].start, s.tokens[last].end);
            s.spans.push(AspectSpan {
                start,
                end,
                term: char_slice(&s.text, start, end).unwrap().to_string(),
                polarity: *[Polarity::Positive, Polarity::Negative, Polarity::Neutral].choose(rng).unwrap(),
            });
            t = last + 1;
        } else {
            t += 1;
        }
    }
    s
}

#[test]
fn criterion_04_tag_round_trip() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (aesc, ae) = (TagScheme::new(Mode::Aesc), TagScheme::new(Mode::Ae));
    let mut failures = 0;
    for i in 0..1000 {
        let s = random_sentence(&mut rng, i);
        let joint = encode_tags(&s, &aesc);
        let single = encode_tags(&s, &ae);
        let decoded = decode_tags(&joint.labels, &s.tokens, &s.text, &aesc).unwrap();
        let projected: Vec<String> = joint
            .labels
            .iter()
            .map(|&l| aesc.label(l).trim_end_matches(['+', '-', '0']).to_string())
            .collect();
        let ae_labels: Vec<String> = single.labels.iter().map(|&l| ae.label(l).to_string()).collect();
        if decoded.spans != s.spans || decoded.disagreements != 0 || !joint.warnings.is_empty() || projected != ae_labels {
            failures += 1;
        }
    }
    let elapsed = started.elapsed();
    let pass = failures == 0 && elapsed < Duration::from_secs(5);
    report(
        4,
        "tag-scheme round trip",
        pass,
        &format!("1000 sentences, {failures} failures, {:.2}s", elapsed.as_secs_f64()),
    );
    assert!(pass);
}

#[test]
fn criterion_05_attention_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_sum: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    let ps = ParamSet::new();
    for _ in 0..100 {
        let (n, d, a) = (rng.gen_range(1..12), rng.gen_range(1..8), rng.gen_range(1..8));
        let mut rand = |r: usize, c: usize| {
            Tensor::new(vec![r, c], (0..r * c).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap()
        };
        let (h, w, v) = (rand(n, d), rand(2 * d, a), rand(1, a));
        let mut tape = Tape::new(&ps);
        let hv = tape.constant(h.clone());
        let wv = tape.constant(w);
        let vv = tape.constant(v);
        let alpha = attention_scores(&mut tape, hv, wv, vv).unwrap();
        for r in 0..n {
            worst_sum = worst_sum.max((tape.value(alpha).row(r).iter().sum::<f64>() - 1.0).abs());
        }
        let zero = tape.constant(Tensor::zeros(1, a));
        let uniform = attention_scores(&mut tape, hv, wv, zero).unwrap();
        let t = context_vector(&mut tape, uniform, hv).unwrap();
        for c in 0..d {
            let mean = (0..n).map(|j| h.get(j, c)).sum::<f64>() / n as f64;
            for r in 0..n {
                worst_mean = worst_mean.max((tape.value(t).get(r, c) - mean).abs());
            }
        }
    }
    let pass = worst_sum <= ATTN_SUM_TOL && worst_mean <= ATTN_MEAN_TOL;
    report(
        5,
        "attention normalization",
        pass,
        &format!("max |sum-1| {worst_sum:.1e}, max |t-mean| with v=0 {worst_mean:.1e}"),
    );
    assert!(pass);
}

fn review(id: &str, text: &str, term: &str, polarity: Polarity) -> Sentence {
    let mut s = Sentence::new(id, text);
    let start = text.find(term).unwrap();
    let start = text[..start].chars().count();
    let end = start + term.chars().count();
    s.spans.push(AspectSpan {
        start,
        end,
        term: term.into(),
        polarity,
    });
    for t in &mut s.tokens {
        t.pos = Some(if t.surface == "is" { "VBZ" } else { "NN" }.into());
        t.chunk = Some("B-NP".into());
    }
    s
}

fn adaptation_corpora() -> (Vec<Sentence>, Vec<Sentence>) {
    let src = vec![
        review("s1", "the battery life is great", "battery life", Polarity::Positive),
        review("s2", "the screen is dim", "screen", Polarity::Negative),
    ];
    let tgt = vec![
        review("t1", "the keyboard is fine", "keyboard", Polarity::Neutral),
        review("t2", "battery is great and screen is fine", "screen", Polarity::Neutral),
    ];
    (src, tgt)
}

#[test]
fn criterion_06_weighted_neutrality() {
    let (src, tgt) = adaptation_corpora();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut cfg = ModelConfig::new(Architecture::Lstm, Mode::Ae);
    cfg.hidden_size = 6;
    cfg.embedding_dim = 3;
    cfg.use_features = true;
    let emb = random_embeddings(cfg.embedding_dim, &mut rng);
    let mut model = Model::new(cfg, emb, FeatureTable::default(), &mut rng).unwrap();

    let union_w1 = weighted_union(&src, &tgt, 1.0, Mode::Ae).unwrap();
    let plain: Vec<Sentence> = tgt.iter().chain(&src).cloned().collect();
    let batch = |ss: &[Sentence]| ss.iter().map(|s| model.instance(s)).collect::<Vec<_>>();
    let g1 = gradients_of(&model, &batch(&union_w1));
    let g0 = gradients_of(&model, &batch(&plain));
    let bitwise = g1.iter().zip(&g0).all(|(a, b)| match (a, b) {
        (Some(a), Some(b)) => a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()),
        (None, None) => true,
        _ => false,
    });

    // w = 0.2: lookup output equals windowing over the scaled vectors.
    let union = weighted_union(&src, &tgt, 0.2, Mode::Ae).unwrap();
    let d = model.config().window;
    let table_id = model.params().find("embedding").unwrap();
    let table = model.params().value(table_id).clone();
    let mut scaled_ok = true;
    for s in &union {
        let inst = model.instance(s);
        let mut tape = Tape::new(model.params());
        let xs = tape.embed_windows(table_id, window_rows(&inst.ids, d), 2 * d + 1, inst.scale).unwrap();
        let rows: Vec<Vec<f64>> = inst.ids.iter().map(|&i| table.row(i).iter().map(|v| v * s.weight).collect()).collect();
        let looked_up = Tensor::from_rows(&rows).unwrap();
        let pad = vec![0.0; table.cols()];
        for i in 0..inst.len() {
            scaled_ok &= tape.value(xs).row(i) == context_window(&looked_up, i, d, &pad).as_slice();
        }
    }
    let arithmetic = {
        let mut ps = ParamSet::new();
        let id = ps.add("e", Tensor::row_vector(&[1.0, -2.0]));
        let mut tape = Tape::new(&ps);
        let x = tape.embed_windows(id, vec![Some(0)], 1, 0.2).unwrap();
        tape.value(x).data() == [0.2, -0.4]
    };

    // Chain rule through the scale on a mixed batch.
    let mixed = batch(&union);
    let (fd_err, at) = max_fd_error(&mut model, &mixed, Some(&[table_id]));

    let pass = bitwise && scaled_ok && arithmetic && fd_err < FD_MAX_REL_ERR;
    report(
        6,
        "WEIGHTED neutrality",
        pass,
        &format!(
            "w=1 bitwise {bitwise}; w=0.2 windows scaled {scaled_ok}, [1,-2]->[0.2,-0.4] {arithmetic}; embedding fd err {fd_err:.1e} at {at}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_pred_augmentation() {
    let (src, tgt) = adaptation_corpora();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut src_cfg = ModelConfig::new(Architecture::Lstm, Mode::Ae);
    src_cfg.hidden_size = 6;
    src_cfg.embedding_dim = 3;
    let mut src_model = Model::new(src_cfg, random_embeddings(3, &mut rng), FeatureTable::default(), &mut rng).unwrap();
    let tc = TrainConfig {
        learning_rate: 0.3,
        max_epochs: 20,
        ..Default::default()
    };
    train(&mut src_model, &src, &[], &tc).unwrap();
    let augmented = pred_augment(&src_model, &tgt).unwrap();

    let mut tgt_cfg = ModelConfig::new(Architecture::Lstm, Mode::Aesc);
    tgt_cfg.hidden_size = 6;
    tgt_cfg.embedding_dim = 3;
    tgt_cfg.use_features = true;
    tgt_cfg.feature_dim = FEATURE_COUNT + PRED_IOB_WIDTH;
    let tgt_model = Model::new(tgt_cfg, random_embeddings(3, &mut rng), FeatureTable::default(), &mut rng).unwrap();

    let mut shape_ok = true;
    let mut unchanged = true;
    for (a, orig) in augmented.iter().zip(&tgt) {
        let inst = tgt_model.instance(a);
        let feats = inst.features.as_ref().unwrap();
        shape_ok &= feats.cols() == 17 && feats.rows() == a.tokens.len();
        for (r, tok) in a.tokens.iter().enumerate() {
            let row = feats.row(r);
            shape_ok &= row[..14] == FeatureTable::default().features(tok).to_f64()[..];
            shape_ok &= row[14..].iter().sum::<f64>() == 1.0;
        }
        unchanged &= serde_json::to_string(&a.spans).unwrap() == serde_json::to_string(&orig.spans).unwrap();
        unchanged &= inst.labels == tgt_model.instance(orig).labels;
        unchanged &= a.text == orig.text;
    }
    let pass = shape_ok && unchanged;
    report(
        7,
        "PRED augmentation shape",
        pass,
        &format!("17-bit features {shape_ok}; gold labels and spans unchanged {unchanged}"),
    );
    assert!(pass);
}

fn read_corpus_dir(dir: &std::path::Path) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths {
        let bytes = std::fs::read(&p).unwrap();
        match p.extension().and_then(|e| e.to_str()) {
            Some("xml") => out.extend(parse_semeval_xml(&bytes).unwrap()),
            Some("jsonl") => out.extend(read_canonical(&bytes).unwrap()),
            _ => {}
        }
    }
    out
}

#[test]
fn criterion_08_status() {
    let available = std::env::var_os("YOUTUBEAN_DIR").is_some();
    // The machinery on a bundled corpus: counts are exact by construction.
    let stats = corpus_stats(&synthetic());
    let fixture_ok = stats.sentences == 20 && stats.aspects == 22;
    let verdict = match (fixture_ok, available) {
        (false, _) => "FAIL",
        (true, false) => "NOT RUN",
        (true, true) => "SEE IGNORED TEST",
    };
    report_status(
        8,
        "corpus statistics",
        verdict,
        &format!(
            "Youtubean dataset {}; stats on bundled fixture: {} sentences, {} aspects",
            if available {
                "present, see criterion_08_youtubean_statistics"
            } else {
                "NOT AVAILABLE (set YOUTUBEAN_DIR and run with --ignored)"
            },
            stats.sentences,
            stats.aspects
        ),
    );
    assert!(fixture_ok);
}

#[test]
#[ignore = "requires the Youtubean dataset; set YOUTUBEAN_DIR"]
fn criterion_08_youtubean_statistics() {
    let dir = std::env::var_os("YOUTUBEAN_DIR").expect("YOUTUBEAN_DIR is not set");
    let stats = corpus_stats(&read_corpus_dir(std::path::Path::new(&dir)));
    let pass = stats.sentences == YOUTUBEAN_SENTENCES
        && stats.aspects == YOUTUBEAN_ASPECTS
        && (stats.mean_words_per_sentence - YOUTUBEAN_MEAN_WORDS).abs() <= YOUTUBEAN_WORDS_TOL;
    report(
        8,
        "corpus statistics (Youtubean)",
        pass,
        &format!(
            "{} sentences, {} aspects, {:.2} words/sentence; aspects/sentence {:.2} (all) {:.2} (with aspects), not asserted",
            stats.sentences,
            stats.aspects,
            stats.mean_words_per_sentence,
            stats.aspects_per_sentence,
            stats.aspects_per_sentence_with_aspects
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_joint_at_most_single() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let scheme = TagScheme::new(Mode::Aesc);
    let (mut violations, mut tp_mismatch) = (0, 0);
    for run in 0..500 {
        let sentences: Vec<Sentence> = (0..rng.gen_range(1..6)).map(|i| random_sentence(&mut rng, i)).collect();
        let gold: Vec<Vec<LabelId>> = sentences.iter().map(|s| encode_tags(s, &scheme).labels).collect();
        let predicted: Vec<Vec<LabelId>> = gold
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&l| if rng.gen_bool(0.3) { rng.gen_range(0..scheme.len()) } else { l })
                    .collect()
            })
            .collect();
        let r = evaluate(&scheme, &gold, &predicted).unwrap();
        if r.joint.f1 > r.single.f1 {
            violations += 1;
            eprintln!("run {run}: joint {} > single {}", r.joint.f1, r.single.f1);
        }
        if r.classes.iter().map(|c| c.scores.correct).sum::<usize>() != r.joint.correct {
            tp_mismatch += 1;
        }
    }
    let pass = violations == 0 && tp_mismatch == 0;
    report(
        9,
        "joint <= single",
        pass,
        &format!("500 randomized evaluations, {violations} violations, {tp_mismatch} class-TP mismatches"),
    );
    assert!(pass);
}

/// (a, b, t, df, p) from `scipy.stats.ttest_ind(a, b, equal_var=False)`.
#[allow(clippy::type_complexity)]
const TTEST_ORACLE: [(&[f64], &[f64], f64, f64, f64); 20] = [
    (&[54.8, 63.75], &[62.19, 63.92, 63.38, 63.74, 62.73, 64.82], -0.9326151595582013, 1.0143281520836924, 0.5204190797317596),
    (&[60.33, 65.64, 62.34], &[52.1, 60.66, 56.33, 55.7, 53.39, 62.26, 55.84], 2.965327397036996, 5.341751469737505, 0.02889024654328884),
    (&[58.24, 62.66, 61.83, 62.06, 62.15, 70.71], &[55.98, 60.19, 61.7, 58.04, 55.9, 55.95], 2.52967879699747, 8.227487476443557, 0.0345150399003016),
    (&[63.72, 62.72, 56.67, 61.16, 60.58], &[62.13, 64.69, 61.25, 62.5, 64.42, 52.69], -0.14276853818167654, 8.39255934421933, 0.8898414155475454),
    (&[57.65, 56.81, 58.62], &[71.32, 56.7, 64.13, 66.88, 69.21, 69.9], -3.8485479943608123, 5.541664474685151, 0.00987096143989889),
    (&[58.26, 57.69, 64.29, 59.04, 53.62, 54.33], &[56.69, 58.12, 55.21], 0.6750550001137864, 6.871593383105193, 0.5216988288489204),
    (&[63.13, 58.45, 62.28, 56.69, 58.18], &[61.35, 55.7, 58.55, 61.32, 61.12, 62.41], -0.2037738002948466, 8.185321524588845, 0.8435054702268476),
    (&[57.88, 59.6], &[51.72, 52.1, 53.71, 52.2], 6.534873388648558, 1.5518016548429936, 0.04115737671746482),
    (&[66.5, 58.22, 63.69, 55.33], &[58.76, 60.21, 57.07], 0.8364036768662959, 3.724139962773816, 0.4532271989154443),
    (&[61.19, 57.03, 52.77, 60.36, 57.35, 61.16], &[58.92, 55.09, 60.96], -0.006113821299854172, 4.49988698457201, 0.99538353385653),
    (&[66.8, 64.18, 61.78, 67.32, 54.06, 56.8], &[49.61, 59.38], 1.3671880734660453, 1.4376393493109958, 0.34663299898641303),
    (&[52.65, 54.92, 61.57], &[75.44, 65.07], -2.3778768987774446, 1.5489226318199143, 0.17607160246651718),
    (&[49.34, 61.34], &[54.05, 56.13, 61.44, 57.44, 56.05], -0.27462063027697914, 1.0853617356605603, 0.8265733970762019),
    (&[51.63, 57.57, 59.73], &[73.23, 63.94, 59.65, 61.03, 62.53], -2.2784094586502386, 5.299158311014415, 0.06870742763671692),
    (&[55.89, 64.19, 55.49, 64.66, 61.92], &[57.79, 60.45, 58.27, 56.41], 1.0184432120374036, 5.321629446662183, 0.3525126594678453),
    (&[60.86, 67.9, 60.8, 59.41, 61.43, 66.53, 61.1], &[59.77, 63.43, 58.96, 54.31, 53.84, 63.81, 64.05], 1.381042431224053, 11.113318869006848, 0.1944042522700768),
    (&[58.08, 67.31, 54.46, 55.53, 63.22, 58.03, 59.97], &[60.2, 59.4], -0.16423295182284636, 6.565760668826101, 0.8744883572402362),
    (&[49.75, 59.76], &[52.36, 55.0, 61.08, 50.18, 56.78, 54.27], -0.036289858314810554, 1.1953239079880278, 0.9761452009248431),
    (&[65.01, 62.69, 66.69, 59.23, 56.52, 58.88, 61.21], &[60.82, 61.0, 63.96], -0.27399839061894726, 7.519596572042659, 0.7914610825105635),
    (&[55.73, 58.56], &[56.16, 61.85, 49.49, 49.97, 40.43], 1.442231430851223, 4.869346804387505, 0.21032563880766597),
];

#[test]
fn criterion_10_ttest_oracle() {
    let mut worst: f64 = 0.0;
    for (a, b, t, df, p) in TTEST_ORACLE {
        let r = ttest_two_sided(a, b).unwrap();
        assert!((r.t - t).abs() < 1e-9 && (r.df - df).abs() < 1e-9, "t/df {r:?} vs {t} {df}");
        worst = worst.max((r.p - p).abs());
    }
    // a = [70.1, 71.3, 69.8, 70.5, 70.9] vs b = [72.0, 72.5, 71.8, 72.2, 72.6]
    let spec = ttest_two_sided(&[70.1, 71.3, 69.8, 70.5, 70.9], &[72.0, 72.5, 71.8, 72.2, 72.6]).unwrap();
    worst = worst.max((spec.p - 0.0012914195371179248).abs());
    let same = ttest_two_sided(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let pass = worst < TTEST_DECIMALS / 2.0 && same.p == 1.0;
    report(
        10,
        "t-test oracle",
        pass,
        &format!("21 pairs, max |dp| {worst:.1e}; identical samples p = {}", same.p),
    );
    assert!(pass);
}
