use ndv_core::eval::{layout_experiment, write_layout};
use ndv_core::{Method, SolverConfig};

use crate::cli::{LayoutArgs, REPORT_FORMATS};
use crate::dataset::create_dir;
use crate::error::Result;

pub fn run(args: &LayoutArgs) -> Result<()> {
    let series = layout_experiment(args.seed, &SolverConfig::default())?;
    create_dir(&args.out)?;
    for (format, ext) in REPORT_FORMATS {
        write_layout(&series, &args.out.join(format!("layout.{ext}")), format)?;
    }
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |q| format!("{q:.4}"));
    let last = series.points.len() - 1;
    println!("{} points, D = {} at k = 0", series.points.len(), series.points[0].d);
    for method in [Method::Chao, Method::Gee] {
        println!(
            "{}: q-error {} at k = 0, {} at k = {last}",
            method.name(),
            show(series.q(0, method)),
            show(series.q(last, method)),
        );
    }
    Ok(())
}
