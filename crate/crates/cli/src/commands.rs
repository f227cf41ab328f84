use std::fs;
use std::path::{Path, PathBuf};

use defvec::autoencoder::{load_checkpoint, save_checkpoint, train, write_loss_csv};
use defvec::embedding::{embed_vocabulary, load_table, save_table};
use defvec::eval::{
    eval_categorization, eval_outliers, eval_similarity, load_categorization, load_outliers,
    load_similarity,
};
use defvec::imageset::{training_pool, DirectorySource, SyntheticSource};
use defvec::vocab::{build_vocabulary, load_dictionary, load_word_list};
use defvec::{Architecture, AutoencoderModel, EvalReport, ImageSource, StopwordPolicy, Task, Vocabulary};

use crate::config::{ImageSpec, PipelineConfig};
use crate::error::{CliError, CliResult};

enum Source {
    Synthetic(SyntheticSource),
    Directory(DirectorySource),
}

impl Source {
    fn open(spec: &ImageSpec) -> CliResult<Self> {
        Ok(match spec {
            ImageSpec::Synthetic(seed) => Source::Synthetic(SyntheticSource::new(*seed)),
            ImageSpec::Directory(dir) => Source::Directory(DirectorySource::new(dir)?),
        })
    }

    fn as_dyn(&self) -> &dyn ImageSource {
        match self {
            Source::Synthetic(s) => s,
            Source::Directory(d) => d,
        }
    }

    fn write_coverage(&self, path: Option<&Path>) -> CliResult<()> {
        let (Source::Directory(dir), Some(path)) = (self, path) else {
            return Ok(());
        };
        let mut out = Vec::new();
        dir.write_coverage_report(&mut out).map_err(|e| io_error(path, e))?;
        write_file(path, &out)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| io_error(dir, e)),
        None => Ok(()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct VocabInputs<'a> {
    base: &'a Path,
    dictionary: &'a Path,
    stopwords: Option<&'a Path>,
}

impl<'a> VocabInputs<'a> {
    fn check(cfg: &'a PipelineConfig) -> CliResult<Self> {
        Ok(Self {
            base: cfg.input("base_vocab")?,
            dictionary: cfg.input("dictionary")?,
            stopwords: cfg.optional_input("stopwords")?,
        })
    }

    fn build(&self) -> CliResult<Vocabulary> {
        let base = load_word_list(self.base)?;
        let dict = load_dictionary(self.dictionary)?;
        let policy = match self.stopwords {
            Some(p) => StopwordPolicy::from_file(p)?,
            None => StopwordPolicy::default(),
        };
        let vocab = build_vocabulary(&base, &dict, &policy)?;
        log::info!(
            "vocabulary: {} base words, {} terms, {} skipped",
            vocab.len(),
            vocab.all_words().len(),
            vocab.skipped().len()
        );
        Ok(vocab)
    }
}

pub fn build_vocab(cfg: &PipelineConfig) -> CliResult<()> {
    let inputs = VocabInputs::check(cfg)?;
    let out = cfg.require("vocab_out")?;
    let skip = cfg
        .path("skip_report")
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(out, ".skipped"));

    let vocab = inputs.build()?;
    write_file(out, vocab.export().as_bytes())?;
    let mut report = Vec::new();
    vocab.write_skip_report(&mut report).map_err(|e| io_error(&skip, e))?;
    write_file(&skip, &report)?;
    log::info!("wrote {} and {}", out.display(), skip.display());
    Ok(())
}

pub fn train_model(cfg: &PipelineConfig) -> CliResult<()> {
    cfg.train.validate()?;
    let inputs = VocabInputs::check(cfg)?;
    let spec = cfg.image_spec()?;
    let checkpoint = cfg.require("checkpoint")?;
    let loss_csv = cfg
        .path("loss_csv")
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(checkpoint, ".loss.csv"));

    let vocab = inputs.build()?;
    let source = Source::open(spec)?;
    let pool = training_pool(&vocab, source.as_dyn())?;
    log::info!("training pool: {} images", pool.len());
    let model = AutoencoderModel::new(&Architecture::default(), cfg.train.seed);
    let outcome = train(model, &pool, &cfg.train)?;

    ensure_parent(checkpoint)?;
    save_checkpoint(&outcome.model, Some(&outcome.adam), checkpoint)?;
    let mut csv = Vec::new();
    write_loss_csv(&outcome.history, &mut csv).map_err(|e| io_error(&loss_csv, e))?;
    write_file(&loss_csv, &csv)?;
    source.write_coverage(cfg.path("coverage_report"))?;
    log::info!("wrote {} and {}", checkpoint.display(), loss_csv.display());
    Ok(())
}

pub fn embed(cfg: &PipelineConfig) -> CliResult<()> {
    let inputs = VocabInputs::check(cfg)?;
    let checkpoint = cfg.input("checkpoint")?;
    let spec = cfg.image_spec()?;
    let out = cfg.require("table")?;

    let model = load_checkpoint(checkpoint)?.model;
    let vocab = inputs.build()?;
    let source = Source::open(spec)?;
    let mut table = embed_vocabulary(&model, &vocab, source.as_dyn())?;
    if cfg.normalize {
        table = table.l2_normalized();
    }
    for (i, word) in table.words().enumerate() {
        log::debug!("embedded {}/{}: {word}", i + 1, table.len());
    }
    ensure_parent(out)?;
    save_table(&table, out, cfg.table_format)?;
    source.write_coverage(cfg.path("coverage_report"))?;
    log::info!("wrote {} rows of {} to {}", table.len(), table.dim(), out.display());
    Ok(())
}

/// Returns the human-readable report after writing `<task>.txt` and
/// `<task>.kv` into the report directory.
pub fn eval(cfg: &PipelineConfig, task: Task) -> CliResult<String> {
    let table_path = cfg.input("table")?;
    let dataset_key = match task {
        Task::Similarity => "similarity",
        Task::Outlier => "outlier",
        Task::Categorization => "categorization",
    };
    let dataset = cfg.input(dataset_key)?;
    let report_dir = match cfg.path("report_dir") {
        Some(d) => d.to_path_buf(),
        None => table_path.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };

    let table = load_table(table_path)?;
    let report: EvalReport = match task {
        Task::Similarity => eval_similarity(&table, &load_similarity(dataset)?)?,
        Task::Outlier => eval_outliers(&table, &load_outliers(dataset)?)?,
        Task::Categorization => {
            eval_categorization(&table, &load_categorization(dataset)?, cfg.eval_seed())?
        }
    };
    let human = report.to_human();
    write_file(&report_dir.join(format!("{task}.txt")), human.as_bytes())?;
    write_file(&report_dir.join(format!("{task}.kv")), report.to_key_value().as_bytes())?;
    log::info!("{task}: {} = {:.6}", task.metric_name(), report.metric);
    Ok(human)
}
