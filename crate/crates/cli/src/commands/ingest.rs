use std::collections::BTreeMap;
use std::path::Path;

use ndv_core::corpus::{
    filter_columns, load_table, split_dataset, table_ground_truth, write_ground_truth, EmptyCells, Exclusion,
    ExclusionReason, GroundTruth, LoadOptions, SplitRatios,
};

use crate::cli::IngestArgs;
use crate::dataset::{create_dir, write_atomic, Manifest, GROUND_TRUTH_FILE, MANIFEST_FILE};
use crate::error::{CliError, Result};

pub fn run(args: &IngestArgs) -> Result<()> {
    let &[train, test, validation] = args.ratios.as_slice() else {
        return Err(CliError::Usage("--ratios needs three fractions".into()));
    };
    let empty = if args.drop_empty {
        EmptyCells::Drop
    } else {
        EmptyCells::Keep
    };

    let mut failures = Vec::new();
    let mut exclusions = Vec::new();
    let mut sources = BTreeMap::new();
    let mut truths: Vec<GroundTruth> = Vec::new();
    let mut kept_columns = 0;
    for path in &args.paths {
        match ingest_one(path, empty, &mut exclusions) {
            Ok(None) => {}
            Ok(Some((id, source, table_truths))) => {
                if sources.insert(id.clone(), source).is_some() {
                    failures.push(format!("{}: duplicate table id {id:?}", path.display()));
                }
                kept_columns += table_truths.len();
                truths.extend(table_truths);
            }
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        return Err(CliError::Data(format!(
            "{} of {} input file(s) failed to ingest",
            failures.len(),
            args.paths.len()
        )));
    }

    let ids: Vec<&String> = sources.keys().collect();
    let mut dataset =
        split_dataset(&ids, args.seed, SplitRatios::new(train, test, validation)).map_err(CliError::data)?;
    exclusions.sort_by(|a, b| (&a.table_id, &a.column).cmp(&(&b.table_id, &b.column)));
    dataset.exclusions = exclusions;
    dataset.sources = sources;
    truths.sort_by(|a, b| (&a.table_id, a.column_index).cmp(&(&b.table_id, b.column_index)));

    create_dir(&args.out)?;
    let manifest = Manifest {
        dataset,
        empty_cells: empty,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(CliError::data)?;
    write_atomic(&args.out.join(MANIFEST_FILE), &json)?;
    let mut gt = Vec::new();
    write_ground_truth(&mut gt, &truths)?;
    write_atomic(&args.out.join(GROUND_TRUTH_FILE), &gt)?;

    let s = &manifest.dataset.splits;
    let dropped = manifest
        .dataset
        .exclusions
        .iter()
        .filter(|e| e.column.is_none())
        .count();
    println!(
        "ingested {} tables ({} train, {} test, {} validation) with {kept_columns} columns",
        manifest.dataset.sources.len(),
        s.train.len(),
        s.test.len(),
        s.validation.len(),
    );
    println!(
        "excluded {} columns and {dropped} tables",
        manifest.dataset.exclusions.len() - dropped
    );
    Ok(())
}

type Ingested = (String, String, Vec<GroundTruth>);

/// Loads and filters one file; `Ok(None)` when the whole table is excluded.
fn ingest_one(path: &Path, empty: EmptyCells, exclusions: &mut Vec<Exclusion>) -> Result<Option<Ingested>, String> {
    let table = load_table(path, &LoadOptions::default()).map_err(|e| e.to_string())?;
    let id = table.table_id().to_string();
    if table.row_count() == 0 {
        exclusions.push(Exclusion {
            table_id: id,
            column: None,
            reason: ExclusionReason::EmptyTable,
        });
        return Ok(None);
    }
    let outcome = filter_columns(table);
    exclusions.extend(outcome.exclusions);
    let Some(table) = outcome.table else {
        return Ok(None);
    };
    let truths = table_ground_truth(&table, empty).map_err(|e| format!("{}: {e}", path.display()))?;
    let source = std::fs::canonicalize(path)
        .map_err(|e| format!("{}: {e}", path.display()))?
        .to_string_lossy()
        .into_owned();
    Ok(Some((id, source, truths)))
}
