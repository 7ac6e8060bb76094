pub mod embed;
pub mod estimate;
pub mod ingest;
pub mod layout;
pub mod train;

use crate::cli::Command;
use crate::error::Result;

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest::run(a),
        Command::Estimate(a) => estimate::run(a),
        Command::Train(a) => train::run(a),
        Command::Layout(a) => layout::run(a),
        Command::Embed(c) => embed::run(c),
    }
}
