use std::collections::BTreeSet;
use std::path::Path;

use ndv_core::model::{model_texts, ModelConfig};
use ndv_core::semantics::{EmbeddingStore, TestEmbedder};

use crate::cli::{AblationArg, EmbedCommand, ExportArgs, GenerateArgs, ImportArgs};
use crate::dataset::{self, write_atomic, Manifest};
use crate::error::{CliError, Result};

pub fn run(command: &EmbedCommand) -> Result<()> {
    match command {
        EmbedCommand::Export(a) => export(a),
        EmbedCommand::Import(a) => import(a),
        EmbedCommand::Generate(a) => generate(a),
    }
}

/// Distinct texts the model embeds for every table of the dataset, sorted.
fn dataset_texts(manifest_path: &Path, ablation: AblationArg, seed: u64) -> Result<Vec<String>> {
    let manifest = Manifest::load(manifest_path)?;
    let config = ModelConfig {
        ablation: ablation.into(),
        ..ModelConfig::default()
    };
    let mut texts = BTreeSet::new();
    for id in manifest.all_ids() {
        let table = dataset::load_filtered(&manifest, id)?;
        texts.extend(model_texts(&table, &config, seed)?);
    }
    Ok(texts.into_iter().collect())
}

fn read_texts(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
    Ok(text.lines().filter(|l| !l.is_empty()).map(str::to_string).collect())
}

fn export(args: &ExportArgs) -> Result<()> {
    let texts = dataset_texts(&args.manifest, args.ablation, args.seed)?;
    if let Some(bad) = texts.iter().find(|t| t.contains(['\n', '\r'])) {
        return Err(CliError::Data(format!("column text {bad:?} contains a line break")));
    }
    let mut body = texts.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    write_atomic(&args.out, body.as_bytes())?;
    println!("wrote {} distinct column texts to {}", texts.len(), args.out.display());
    Ok(())
}

fn import(args: &ImportArgs) -> Result<()> {
    let store = dataset::load_store(&args.input)?;
    let header = store.header();
    println!(
        "{}: {} entries, dim {}, provider {}",
        args.input.display(),
        store.len(),
        header.dim,
        header.provider
    );
    let wanted = match (&args.manifest, &args.texts) {
        (Some(m), _) => Some(dataset_texts(m, args.ablation, args.seed)?),
        (None, Some(t)) => Some(read_texts(t)?),
        (None, None) => None,
    };
    match &wanted {
        Some(texts) => {
            let missing: Vec<&String> = texts.iter().filter(|t| !store.contains(t)).collect();
            println!(
                "coverage: {} of {} texts ({:.2}%)",
                texts.len() - missing.len(),
                texts.len(),
                100.0 * store.hit_rate(texts)
            );
            if args.require_complete && !missing.is_empty() {
                let preview: Vec<String> = missing.iter().take(5).map(|t| format!("{t:?}")).collect();
                return Err(CliError::Missing(format!(
                    "{} text(s) have no embedding: {}",
                    missing.len(),
                    preview.join(", ")
                )));
            }
        }
        None if args.require_complete => {
            return Err(CliError::Usage("--require-complete needs --manifest or --texts".into()));
        }
        None => {}
    }
    if let Some(out) = &args.out {
        store.save(out)?;
        println!("installed {}", out.display());
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<()> {
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let texts = read_texts(&args.input)?;
    let store = EmbeddingStore::build(&TestEmbedder::new(args.dim), &texts)?;
    store.save(&args.out)?;
    println!("embedded {} texts into {}", store.len(), args.out.display());
    Ok(())
}
