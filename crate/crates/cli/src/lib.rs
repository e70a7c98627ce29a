//! Command-line front end: configuration, pipelines and report writers.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod svg;

pub use config::{parse_config, Mode, RunConfig};
pub use error::CliError;
pub use pipeline::{run_pipeline, Outcome};

/// Parses `args`, runs the pipeline and returns the process exit code.
/// Progress goes to stdout, errors to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return CliError::Clap(e).exit_code();
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match run_pipeline(&cfg) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
