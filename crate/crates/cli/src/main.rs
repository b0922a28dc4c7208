use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use topicloc::corpus::{
    generate_synthetic, load_boxes, load_corpus, load_ground_truth, save_boxes, save_corpus, save_ground_truth,
    scan_vocab_size, Corpus, SynthConfig,
};
use topicloc::eval::{corloc_with, MeanKind};
use topicloc::fsutil::write_atomic;
use topicloc::inference::{
    fit_independent, fit_observed, infer_heldout_with, load_model, save_model, single_class_corpus, FitOptions,
    ModelFile, ModelKind,
};
use topicloc::localise::{document_heatmaps, localise_corpus, localise_independent, HeatMap, LocaliseParams, Method};
use topicloc::priors::{load_prior_rows, HyperParams, Settings};

#[derive(Parser)]
#[command(
    name = "topicloc",
    version,
    about = "Weakly supervised object localisation with a spatial topic model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a weakly labelled corpus.
    Train(TrainArgs),
    /// Infer held-out documents and write bounding boxes.
    Localise(LocaliseArgs),
    /// Score predicted boxes against ground truth (CorLoc).
    Eval(EvalArgs),
    /// Sample a synthetic corpus with known object boxes.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ExecArgs {
    /// Worker threads for per-document updates (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run on the calling thread only. Output is identical either way.
    #[arg(long, conflicts_with = "threads")]
    serial: bool,
}

impl ExecArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            parallel: !self.serial,
            threads: self.threads,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus file, one JSON document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Number of object classes.
    #[arg(long)]
    classes: usize,
    /// Vocabulary size (default: largest word id in the corpus plus one).
    #[arg(long)]
    vocab: Option<usize>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// ELBO trace file (default: `<out>.trace`).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of sweeps.
    #[arg(long)]
    iters: Option<usize>,
    /// Number of background topics.
    #[arg(long)]
    bg: Option<usize>,
    /// Foreground concentration for unlabelled documents.
    #[arg(long)]
    alpha_ssl: Option<f64>,
    /// Total pseudo-count mass of the appearance prior.
    #[arg(long)]
    prior_scale: Option<f64>,
    /// Replace the foreground appearance prior with rows read from a file.
    #[arg(long, conflicts_with_all = ["independent", "no_appearance_prior"])]
    prior_file: Option<PathBuf>,
    /// Drop the location model; every topic scores locations uniformly.
    #[arg(long)]
    no_spatial: bool,
    /// Use a flat appearance prior.
    #[arg(long)]
    no_appearance_prior: bool,
    /// Always run the full number of sweeps.
    #[arg(long)]
    no_early_stop: bool,
    /// Train one single-class model per class instead of a joint model.
    #[arg(long)]
    independent: bool,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gaussian,
    Sampling,
}

#[derive(Args)]
struct LocaliseArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Box file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Gaussian)]
    method: MethodArg,
    /// Directory for heat maps, one `<id>_c<k>.pgm` per document and class.
    #[arg(long)]
    heatmaps: Option<PathBuf>,
    /// Boxes kept per class by the sampling method.
    #[arg(long)]
    max_boxes: Option<usize>,
    /// Overlap above which sampling candidates are suppressed.
    #[arg(long)]
    iou_thresh: Option<f64>,
    /// Heat-map cell side in pixels.
    #[arg(long)]
    cell_size: Option<u32>,
    /// Expected vocabulary size of the corpus; must match the model.
    #[arg(long)]
    vocab: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted boxes.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth boxes.
    #[arg(long)]
    gt: PathBuf,
    /// Pool all (image, class) pairs instead of averaging per-class scores.
    #[arg(long)]
    weighted: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    bg: Option<usize>,
    #[arg(long)]
    docs: Option<usize>,
    /// Words per document.
    #[arg(long)]
    words: Option<usize>,
    #[arg(long)]
    vocab: Option<usize>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Dirichlet concentration of the true appearance topics.
    #[arg(long)]
    sharpness: Option<f64>,
    /// Object standard deviation as a fraction of the image side.
    #[arg(long)]
    cov_scale: Option<f64>,
    /// Probability that each class is present in a document.
    #[arg(long)]
    label_density: Option<f64>,
    /// Fraction of documents written without labels.
    #[arg(long)]
    unlabelled_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    corpus_out: PathBuf,
    #[arg(long)]
    gt_out: PathBuf,
}

/// Bad invocation; exits with status 2 like argument errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Train(a) => train(a),
        Command::Localise(a) => localise(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn corpus_vocab(path: &Path) -> Result<usize> {
    let f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(scan_vocab_size(f, path)?)
}

fn train(a: TrainArgs) -> Result<()> {
    let vocab = match a.vocab {
        Some(v) => v,
        None => corpus_vocab(&a.corpus)?,
    };
    let corpus = load_corpus(&a.corpus, vocab, a.classes)
        .with_context(|| format!("cannot load corpus {}", a.corpus.display()))?;
    let d = Settings::default();
    let settings = Settings {
        num_bg: a.bg.unwrap_or(d.num_bg),
        alpha_ssl: a.alpha_ssl.unwrap_or(d.alpha_ssl),
        iterations: a.iters.unwrap_or(d.iterations),
        early_stop: !a.no_early_stop,
        spatial_enabled: !a.no_spatial,
        appearance_prior_enabled: !a.no_appearance_prior,
        prior_scale: a.prior_scale.or(d.prior_scale),
        ..d
    };
    let opts = a.exec.options();
    let mut trace = String::new();
    let file = if a.independent {
        let fit = fit_independent(&corpus, &settings, a.seed, opts)?;
        writeln!(trace, "class\titeration\telbo").unwrap();
        for (c, m) in fit.members.iter().enumerate() {
            let t = &m.model.trace;
            println!("class {c}: {} sweeps, elbo {:.6}", t.len() - 1, t[t.len() - 1]);
            for (i, e) in t.iter().enumerate() {
                writeln!(trace, "{c}\t{i}\t{e:e}").unwrap();
            }
        }
        ModelFile::independent(fit.members.into_iter().map(|m| m.model).collect())
    } else {
        let hyper = match &a.prior_file {
            Some(p) => {
                let rows = load_prior_rows(p, a.classes, vocab)
                    .with_context(|| format!("cannot load prior {}", p.display()))?;
                HyperParams::with_injected_prior(&corpus, settings, rows)?
            }
            None => HyperParams::from_corpus(&corpus, settings)?,
        };
        let fit = fit_observed(&corpus, &hyper, a.seed, opts, |s| {
            println!("iter {:>4}  elbo {:.6}", s.iteration, s.elbo);
        })?;
        writeln!(trace, "iteration\telbo").unwrap();
        for (i, e) in fit.model.trace.iter().enumerate() {
            writeln!(trace, "{i}\t{e:e}").unwrap();
        }
        ModelFile::joint(fit.model)
    };
    let trace_path = a.trace.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".trace");
        p.into()
    });
    save_model(&file, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    write_atomic(&trace_path, trace.as_bytes()).with_context(|| format!("cannot write {}", trace_path.display()))?;
    Ok(())
}

fn heatmap_name(id: &str, class: usize) -> String {
    let safe: String = id
        .chars()
        .map(|c| if matches!(c, '/' | '\\') { '_' } else { c })
        .collect();
    format!("{safe}_c{class}.pgm")
}

fn localise(a: LocaliseArgs) -> Result<()> {
    let file = load_model(&a.model).with_context(|| format!("cannot load model {}", a.model.display()))?;
    let vocab = file.vocab_size();
    let used = corpus_vocab(&a.corpus)?;
    if let Some(v) = a.vocab.filter(|&v| v != vocab) {
        bail!("vocabulary mismatch: model has {vocab} words, --vocab is {v}");
    }
    if used > vocab {
        bail!(
            "vocabulary mismatch: model has {vocab} words, corpus uses word id {}",
            used - 1
        );
    }
    let corpus: Corpus = load_corpus(&a.corpus, vocab, file.num_classes())
        .with_context(|| format!("cannot load corpus {}", a.corpus.display()))?;

    let mut params = LocaliseParams::with_method(match a.method {
        MethodArg::Gaussian => Method::Gaussian,
        MethodArg::Sampling => Method::Sampling,
    });
    if let Some(n) = a.max_boxes {
        params.nms.max_boxes = n;
    }
    if let Some(t) = a.iou_thresh {
        params.nms.iou_thresh = t;
    }
    if let Some(c) = a.cell_size {
        if c == 0 {
            return Err(UsageError("--cell-size must be positive".into()).into());
        }
        params.cell_size = c;
    }
    let opts = a.exec.options();
    let want_maps = a.heatmaps.is_some();
    let mut maps: Vec<(String, HeatMap)> = Vec::new();

    let boxes = match file.kind {
        ModelKind::Joint => {
            let model = &file.models[0];
            let states = infer_heldout_with(model, &corpus, a.seed, opts)?;
            if want_maps {
                for (doc, st) in corpus.documents.iter().zip(&states) {
                    for hm in document_heatmaps(&model.hyper, doc, st, &params) {
                        maps.push((heatmap_name(&doc.id, hm.class), hm));
                    }
                }
            }
            localise_corpus(&model.hyper, &corpus, &states, &params)?
        }
        ModelKind::Independent => {
            let mut states = Vec::with_capacity(file.models.len());
            for (c, model) in file.models.iter().enumerate() {
                let sub = single_class_corpus(&corpus, c);
                let st = infer_heldout_with(model, &sub, a.seed, opts)?;
                if want_maps {
                    for (doc, s) in sub.documents.iter().zip(&st) {
                        for mut hm in document_heatmaps(&model.hyper, doc, s, &params) {
                            hm.class = c;
                            maps.push((heatmap_name(&doc.id, c), hm));
                        }
                    }
                }
                states.push(st);
            }
            let members: Vec<_> = file
                .models
                .iter()
                .zip(&states)
                .map(|(m, s)| (&m.hyper, s.as_slice()))
                .collect();
            localise_independent(&members, &corpus, &params)?
        }
    };

    if let Some(dir) = &a.heatmaps {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, hm) in &maps {
            let path = dir.join(name);
            write_atomic(&path, &hm.to_pgm()).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    save_boxes(&boxes, true, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    let n: usize = boxes.values().map(Vec::len).sum();
    println!("{n} boxes for {} documents", boxes.len());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let pred = load_boxes(&a.pred).with_context(|| format!("cannot load predictions {}", a.pred.display()))?;
    let gt = load_ground_truth(&a.gt).with_context(|| format!("cannot load ground truth {}", a.gt.display()))?;
    let mean = if a.weighted {
        MeanKind::ImageWeighted
    } else {
        MeanKind::Unweighted
    };
    let report = corloc_with(&pred, &gt, mean)?;
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        num_classes: a.classes.unwrap_or(d.num_classes),
        num_bg_topics: a.bg.unwrap_or(d.num_bg_topics),
        num_documents: a.docs.unwrap_or(d.num_documents),
        words_per_document: a.words.unwrap_or(d.words_per_document),
        vocab_size: a.vocab.unwrap_or(d.vocab_size),
        width: a.width.unwrap_or(d.width),
        height: a.height.unwrap_or(d.height),
        appearance_sharpness: a.sharpness.unwrap_or(d.appearance_sharpness),
        fg_cov_scale: a.cov_scale.unwrap_or(d.fg_cov_scale),
        label_density: a.label_density.unwrap_or(d.label_density),
        unlabelled_fraction: a.unlabelled_fraction.unwrap_or(d.unlabelled_fraction),
        seed: a.seed,
        ..d
    };
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    let syn = generate_synthetic(&cfg)?;
    save_corpus(&syn.corpus, &a.corpus_out).with_context(|| format!("cannot write {}", a.corpus_out.display()))?;
    save_ground_truth(&syn.ground_truth, &a.gt_out).with_context(|| format!("cannot write {}", a.gt_out.display()))?;
    println!(
        "{} documents, {} words, vocabulary {}",
        syn.corpus.len(),
        syn.corpus.total_words(),
        cfg.vocab_size
    );
    Ok(())
}
