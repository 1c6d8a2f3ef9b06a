use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aspectag::adaptation::{pred_augment, weighted_folds, weighted_union, Method, Provenance, DEFAULT_WEIGHT};
use aspectag::corpus::*;
use aspectag::evaluation::{evaluate_model, ttest_two_sided, EvalReport};
use aspectag::models::Model;
use aspectag::training::{kfold_split, train, TrainSummary};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{FileConfig, Resolved};
use crate::output::RunDir;
use crate::{usage, Cli, Command, Format};

pub fn run(cli: &Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let run_dir = || RunDir::create(&cli.out_root, cli.name.as_deref().unwrap_or(cli.command.name()));
    match &cli.command {
        Command::Ingest { format, inputs } => ingest(*format, inputs, run_dir),
        Command::Stats { corpora, json } => stats(corpora, *json),
        Command::Train {
            train,
            dev,
            test,
            model,
            training,
        } => {
            let r = Resolved::new(&file, cli.seed, model, training)?;
            cmd_train(r, train, dev.as_deref(), test.as_deref(), run_dir)
        }
        Command::Crossval {
            compare: Some(runs), ..
        } => compare(&runs[0], &runs[1], run_dir),
        Command::Crossval {
            corpus,
            k,
            jobs,
            src,
            weight,
            model,
            training,
            ..
        } => {
            let r = Resolved::new(&file, cli.seed, model, training)?;
            let cv = file.crossval.unwrap_or_default();
            let k = k.or(cv.k).unwrap_or(5);
            let jobs = jobs.or(cv.jobs).unwrap_or(1).max(1);
            let corpus = corpus.as_deref().expect("required by clap");
            crossval(r, corpus, k, jobs, src.as_deref(), *weight, run_dir)
        }
        Command::Eval { model, corpus } => eval(model, corpus, run_dir),
        Command::Predict { model, corpus, stdout } => predict(model, corpus, *stdout, run_dir),
        Command::Adapt {
            method,
            tgt,
            src,
            src_model,
            weight,
            mode,
        } => adapt(method, tgt, src.as_deref(), src_model.as_deref(), *weight, mode, run_dir),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    read_canonical(&read(path)?).with_context(|| format!("corpus {}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn ingest(format: Format, inputs: &[PathBuf], run_dir: impl FnOnce() -> Result<RunDir>) -> Result<()> {
    let sentences = match (format, inputs) {
        (Format::SemevalXml, [xml]) => parse_semeval_xml(&read(xml)?).with_context(|| format!("{}", xml.display()))?,
        (Format::Canonical, [c]) => read_corpus(c)?,
        (Format::Brat, [txt, ann]) => {
            parse_brat(&read(txt)?, &read(ann)?).with_context(|| format!("{} / {}", txt.display(), ann.display()))?
        }
        (Format::Brat, _) => bail!(usage("brat input needs the .txt and the .ann file")),
        _ => bail!(usage(format!("{format:?} input takes exactly one file"))),
    };
    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "ingest",
        "format": format!("{format:?}"),
        "inputs": inputs,
        "output_dir": dir.path(),
    }))?;
    let path = dir.write("corpus.jsonl", write_canonical(&sentences))?;
    let st = corpus_stats(&sentences);
    dir.write_json("stats.json", &st)?;
    println!("{st}");
    println!("wrote {}", path.display());
    Ok(())
}

fn stats(corpora: &[PathBuf], as_json: bool) -> Result<()> {
    for path in corpora {
        let st = corpus_stats(&read_corpus(path)?);
        if as_json {
            println!("{}", serde_json::to_string(&json!({ "corpus": path, "stats": st }))?);
        } else {
            println!("== {}", path.display());
            println!("{st}\n");
        }
    }
    Ok(())
}

/// Embedding table from the configured file, or random vectors over the
/// words of `corpora`. Updates the configured embedding size to match.
fn embeddings(r: &mut Resolved, corpora: &[&[Sentence]]) -> Result<EmbeddingTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let table = match &r.embeddings {
        Some(src) => {
            let bytes = std::fs::read(&src.path)
                .with_context(|| format!("embedding file {} could not be read", src.path.display()))?;
            load_embeddings(&bytes, src.format, &mut rng).with_context(|| format!("embeddings {}", src.path.display()))?
        }
        None => {
            log::warn!("no embedding file given; initializing {}-d vectors at random", r.model.embedding_dim);
            let words = corpora.iter().flat_map(|c| c.iter()).flat_map(|s| s.tokens.iter().map(|t| t.surface.as_str()));
            EmbeddingTable::random(words, r.model.embedding_dim, &mut rng)
        }
    };
    r.model.embedding_dim = table.dim();
    Ok(table)
}

fn new_model(r: &Resolved, table: EmbeddingTable, features: FeatureTable, seed: u64) -> Result<Model> {
    Ok(Model::new(r.model.clone(), table, features, &mut ChaCha8Rng::seed_from_u64(seed))?)
}

/// Splits off round(n * fraction) shuffled sentences for validation.
fn hold_out(sentences: Vec<Sentence>, fraction: f64, seed: u64) -> (Vec<Sentence>, Vec<Sentence>) {
    let mut idx: Vec<usize> = (0..sentences.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((sentences.len() as f64) * fraction).round() as usize;
    let n_val = n_val.min(sentences.len().saturating_sub(1));
    let mut val: Vec<usize> = idx[..n_val].to_vec();
    val.sort_unstable();
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for (i, s) in sentences.into_iter().enumerate() {
        if val.binary_search(&i).is_ok() {
            v.push(s);
        } else {
            t.push(s);
        }
    }
    (t, v)
}

fn progress_log(summary: &TrainSummary) -> String {
    summary.history.iter().map(|p| p.line() + "\n").collect()
}

fn cmd_train(
    mut r: Resolved,
    train_path: &Path,
    dev: Option<&Path>,
    test: Option<&Path>,
    run_dir: impl FnOnce() -> Result<RunDir>,
) -> Result<()> {
    let corpus = read_corpus(train_path)?;
    let (train_set, validation) = match dev {
        Some(d) => (corpus, read_corpus(d)?),
        None => hold_out(corpus, r.validation_fraction, r.seed),
    };
    let test_set = test.map(read_corpus).transpose()?;
    if r.model.feature_dim > FEATURE_COUNT && !train_set.iter().any(|s| s.tokens.iter().any(|t| t.pred_iob.is_some())) {
        log::warn!("--pred-features set but the training corpus carries no predicted tags");
    }
    let features = r.feature_table()?;
    let table = embeddings(&mut r, &[&train_set, &validation])?;
    let mut model = new_model(&r, table, features, r.seed)?;

    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "train",
        "train": train_path,
        "dev": dev,
        "test": test,
        "output_dir": dir.path(),
        "config": &r,
    }))?;
    log::info!(
        "training {} ({}) on {} sentences, validating on {}",
        r.model.architecture,
        r.model.mode,
        train_set.len(),
        validation.len()
    );
    let summary = train(&mut model, &train_set, &validation, &r.training)?;
    model.save(&dir.join("model.ckpt"))?;
    dir.write("progress.log", progress_log(&summary))?;

    let mut result = json!({ "summary": &summary });
    if let Some(test_set) = &test_set {
        let (report, _) = evaluate_model(&model, test_set)?;
        println!("{report}");
        result["test"] = serde_json::to_value(&report)?;
    }
    dir.write_json("summary.json", &result)?;
    match summary.best_f1 {
        Some(f1) => println!(
            "best validation F1 {f1:.2} at step {} (epoch {})",
            summary.best_step,
            summary.best_epoch + 1
        ),
        None => println!("no validation set; kept the final parameters"),
    }
    println!("run directory {}", dir.path().display());
    Ok(())
}

const METRICS: [&str; 5] = ["single", "joint", "+", "-", "0"];

fn metrics(report: &EvalReport) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::from([("single".to_string(), report.single.f1), ("joint".to_string(), report.joint.f1)]);
    for c in &report.classes {
        m.insert(c.sentiment.suffix().to_string(), c.scores.f1);
    }
    m
}

#[derive(Debug, Serialize, Deserialize)]
struct FoldResult {
    fold: usize,
    train_sentences: usize,
    validation_sentences: usize,
    test_sentences: usize,
    summary: TrainSummary,
    test: EvalReport,
}

#[derive(Debug, Serialize, Deserialize)]
struct Aggregate {
    k: usize,
    /// Per-fold F1 by metric, in fold order.
    folds: BTreeMap<String, Vec<f64>>,
    mean: BTreeMap<String, f64>,
    /// Sample standard deviation (n - 1).
    std: BTreeMap<String, f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn aggregate(results: &[FoldResult]) -> Aggregate {
    let mut folds: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        for (k, v) in metrics(&r.test) {
            folds.entry(k).or_default().push(v);
        }
    }
    let (mut mean, mut std) = (BTreeMap::new(), BTreeMap::new());
    for (k, xs) in &folds {
        let (m, s) = mean_std(xs);
        mean.insert(k.clone(), m);
        std.insert(k.clone(), s);
    }
    Aggregate {
        k: results.len(),
        folds,
        mean,
        std,
    }
}

fn ordered<V>(map: &BTreeMap<String, V>) -> impl Iterator<Item = (&'static str, &V)> {
    METRICS.into_iter().filter_map(move |m| map.get(m).map(|v| (m, v)))
}

fn crossval(
    mut r: Resolved,
    corpus_path: &Path,
    k: usize,
    jobs: usize,
    src_path: Option<&Path>,
    weight: Option<f64>,
    run_dir: impl FnOnce() -> Result<RunDir>,
) -> Result<()> {
    let corpus = read_corpus(corpus_path)?;
    let src = src_path.map(read_corpus).transpose()?;
    let weight = weight.unwrap_or(DEFAULT_WEIGHT);
    if k < 2 || k > corpus.len() {
        bail!(usage(format!("k = {k} needs 2 <= k <= {} (corpus size)", corpus.len())));
    }
    let folds: Vec<(Vec<Sentence>, Vec<Sentence>, Vec<Sentence>)> = match &src {
        Some(src) => weighted_folds(src, &corpus, weight, r.model.mode, k, r.validation_fraction, r.seed)?
            .into_iter()
            .map(|f| (f.train, f.validation, f.test))
            .collect(),
        None => {
            let pick = |ids: &[usize]| ids.iter().map(|&i| corpus[i].clone()).collect::<Vec<_>>();
            kfold_split(corpus.len(), k, r.validation_fraction, r.seed)?
                .iter()
                .map(|f| (pick(&f.train), pick(&f.validation), pick(&f.test)))
                .collect()
        }
    };
    let features = r.feature_table()?;
    let mut vocab_sources: Vec<&[Sentence]> = vec![&corpus];
    if let Some(src) = &src {
        vocab_sources.push(src);
    }
    let table = embeddings(&mut r, &vocab_sources)?;

    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "crossval",
        "corpus": corpus_path,
        "k": k,
        "jobs": jobs,
        "src": src_path,
        "weight": src.as_ref().map(|_| weight),
        "output_dir": dir.path(),
        "config": &r,
    }))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<FoldResult> = pool.install(|| {
        folds
            .par_iter()
            .enumerate()
            .map(|(f, (tr, va, te))| -> Result<FoldResult> {
                let seed = r.seed.wrapping_add(f as u64);
                let mut model = new_model(&r, table.clone(), features.clone(), seed)?;
                let mut tc = r.training.clone();
                tc.seed = seed;
                let summary = train(&mut model, tr, va, &tc)?;
                let (test, _) = evaluate_model(&model, te)?;
                log::info!("fold {}: joint F1 {:.2}, single F1 {:.2}", f + 1, test.joint.f1, test.single.f1);
                Ok(FoldResult {
                    fold: f,
                    train_sentences: tr.len(),
                    validation_sentences: va.len(),
                    test_sentences: te.len(),
                    summary,
                    test,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for res in &results {
        dir.write_json(&format!("fold-{}.json", res.fold + 1), res)?;
    }
    let agg = aggregate(&results);
    dir.write_json("aggregate.json", &agg)?;

    let mut out = String::new();
    write!(out, "{:<8}", "fold")?;
    for (m, _) in ordered(&agg.folds) {
        write!(out, "{m:>16}")?;
    }
    writeln!(out)?;
    for f in 0..k {
        write!(out, "{:<8}", f + 1)?;
        for (_, xs) in ordered(&agg.folds) {
            write!(out, "{:>16.2}", xs[f])?;
        }
        writeln!(out)?;
    }
    write!(out, "{:<8}", "mean")?;
    for (m, mean) in ordered(&agg.mean) {
        write!(out, "{:>16}", format!("{mean:.2} ± {:.2}", agg.std[m]))?;
    }
    writeln!(out)?;
    print!("{out}");
    dir.write("table.txt", &out)?;
    println!("run directory {}", dir.path().display());
    Ok(())
}

fn compare(a: &Path, b: &Path, run_dir: impl FnOnce() -> Result<RunDir>) -> Result<()> {
    let load = |p: &Path| -> Result<Aggregate> {
        let f = p.join("aggregate.json");
        serde_json::from_slice(&read(&f)?).with_context(|| format!("{} is not a crossval aggregate", f.display()))
    };
    let (ra, rb) = (load(a)?, load(b)?);
    let mut rows = Vec::new();
    let mut out = format!(
        "{:<8}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
        "metric", "mean A", "mean B", "t", "df", "p"
    );
    for (m, xa) in ordered(&ra.folds) {
        let Some(xb) = rb.folds.get(m) else { continue };
        let s = ttest_two_sided(xa, xb)?;
        let flag = if s.degenerate { " (zero variance)" } else { "" };
        writeln!(
            out,
            "{m:<8}{:>10.2}{:>10.2}{:>10.3}{:>10.2}{:>12.4}{flag}",
            ra.mean[m], rb.mean[m], s.t, s.df, s.p
        )?;
        rows.push(json!({ "metric": m, "mean_a": ra.mean[m], "mean_b": rb.mean[m], "test": s }));
    }
    let dir = run_dir()?;
    dir.echo(&json!({ "command": "compare", "run_a": a, "run_b": b, "output_dir": dir.path() }))?;
    dir.write_json("comparison.json", &rows)?;
    print!("{out}");
    Ok(())
}

fn eval(model_path: &Path, corpus_path: &Path, run_dir: impl FnOnce() -> Result<RunDir>) -> Result<()> {
    let model = Model::load(model_path).with_context(|| format!("checkpoint {}", model_path.display()))?;
    let corpus = read_corpus(corpus_path)?;
    let (report, _) = evaluate_model(&model, &corpus)?;
    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "eval",
        "model": model_path,
        "model_sha256": sha256_hex(&read(model_path)?),
        "corpus": corpus_path,
        "output_dir": dir.path(),
    }))?;
    dir.write("report.json", report.to_json())?;
    println!("{report}");
    Ok(())
}

/// Token-per-line `token<TAB>gold<TAB>predicted`, blank line after each sentence.
fn conll_lines(model: &Model, corpus: &[Sentence], predicted: &[Vec<LabelId>]) -> String {
    let scheme = model.scheme();
    let mut out = String::new();
    for (s, pred) in corpus.iter().zip(predicted) {
        let gold = encode_tags(s, scheme).labels;
        for ((t, &g), &p) in s.tokens.iter().zip(&gold).zip(pred) {
            let _ = writeln!(out, "{}\t{}\t{}", t.surface, scheme.label(g), scheme.label(p));
        }
        out.push('\n');
    }
    out
}

fn predict(model_path: &Path, corpus_path: &Path, to_stdout: bool, run_dir: impl FnOnce() -> Result<RunDir>) -> Result<()> {
    let model = Model::load(model_path).with_context(|| format!("checkpoint {}", model_path.display()))?;
    let corpus = read_corpus(corpus_path)?;
    let (report, predicted) = evaluate_model(&model, &corpus)?;
    let lines = conll_lines(&model, &corpus, &predicted);
    if to_stdout {
        print!("{lines}");
        return Ok(());
    }
    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "predict",
        "model": model_path,
        "model_sha256": sha256_hex(&read(model_path)?),
        "corpus": corpus_path,
        "output_dir": dir.path(),
    }))?;
    let path = dir.write("predictions.txt", lines)?;
    println!("joint F1 {:.2}; wrote {}", report.joint.f1, path.display());
    Ok(())
}

fn adapt(
    method: &str,
    tgt_path: &Path,
    src_path: Option<&Path>,
    src_model: Option<&Path>,
    weight: Option<f64>,
    mode: &str,
    run_dir: impl FnOnce() -> Result<RunDir>,
) -> Result<()> {
    let method: Method = method.parse()?;
    let tgt = read_corpus(tgt_path)?;
    let (sentences, provenance) = match method {
        Method::Weighted => {
            let Some(src_path) = src_path else {
                bail!(usage("weighted adaptation needs --src"));
            };
            let mode: Mode = mode.parse().map_err(|_| usage("mode must be ae or aesc"))?;
            let w = weight.unwrap_or(DEFAULT_WEIGHT);
            let out = weighted_union(&read_corpus(src_path)?, &tgt, w, mode)?;
            let p = Provenance {
                method,
                weight: Some(w),
                src: src_path.display().to_string(),
                tgt: tgt_path.display().to_string(),
                src_model_sha256: None,
                sentences: out.len(),
            };
            (out, p)
        }
        Method::Pred => {
            let Some(model_path) = src_model else {
                bail!(usage("pred adaptation needs --src-model"));
            };
            if weight.is_some() {
                bail!(usage("--weight applies to weighted adaptation only"));
            }
            let bytes = read(model_path)?;
            let model = Model::from_bytes(&bytes).with_context(|| format!("checkpoint {}", model_path.display()))?;
            let out = pred_augment(&model, &tgt)?;
            let p = Provenance {
                method,
                weight: None,
                src: model_path.display().to_string(),
                tgt: tgt_path.display().to_string(),
                src_model_sha256: Some(sha256_hex(&bytes)),
                sentences: out.len(),
            };
            (out, p)
        }
    };
    let dir = run_dir()?;
    dir.echo(&json!({
        "command": "adapt",
        "method": method,
        "tgt": tgt_path,
        "src": src_path,
        "src_model": src_model,
        "weight": provenance.weight,
        "mode": mode,
        "output_dir": dir.path(),
    }))?;
    let path = dir.write("corpus.jsonl", write_canonical(&sentences))?;
    dir.write_json("provenance.json", &provenance)?;
    println!("{} sentences; wrote {}", sentences.len(), path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hold_out_sizes() {
        let s: Vec<Sentence> = (0..10).map(|i| Sentence::new(i.to_string(), "a b")).collect();
        let (t, v) = hold_out(s.clone(), 0.2, 1);
        assert_eq!((t.len(), v.len()), (8, 2));
        let (t, v) = hold_out(s[..1].to_vec(), 0.5, 1);
        assert_eq!((t.len(), v.len()), (1, 0));
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944487358056).abs() < 1e-12);
    }
}
