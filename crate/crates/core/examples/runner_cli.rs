//! The config-driven runner from Rust: parse a TOML config, run it, and
//! print the CSV form of the report. `spectra-lab spectrum --config ...` does
//! the same and writes the files.

use spectra_lab::runner::{parse_config, run_experiment, Task};

const CONFIG: &str = r#"
task = "spectrum"
seed = 1

[grid]
dim = 1
radius = 8.0
spacing = 0.02

[operator.potential]
family = "power"
alpha = 2.0

[spectrum]
count = 5
"#;

fn main() {
    let cfg = parse_config(CONFIG, Some(Task::Spectrum)).unwrap_or_else(|e| panic!("config error: {e}"));
    let (record, stats) = run_experiment(&cfg, None);
    print!("{}", record.to_csv().expect("csv encoding"));
    eprintln!("cache: {stats:?}");
}
