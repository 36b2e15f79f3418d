//! Builds the restoration program for a scenario and writes it in MPS and
//! LP form, ready for any external MILP solver.
//!
//! ```bash
//! cargo run --example emit_model -- data/feeder37.json out/
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use mer_routing::milp::{read_mps, ModelFormat};
use mer_routing::{build_restoration, load_scenario, TransitionCoefficients};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/tiny.json").to_string());
    let scratch = tempfile::tempdir()?;
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| scratch.path().to_path_buf());
    run(&scenario, &out)
}

pub fn run(scenario: &str, out: &Path) -> Result<(), Box<dyn Error>> {
    std::fs::create_dir_all(out)?;
    let scenario = load_scenario(scenario)?;
    let r = build_restoration(&scenario, TransitionCoefficients::canonical())?;
    let m = &r.model;
    println!(
        "{}: {} binary, {} continuous, {} constraints",
        m.name(),
        m.num_binary(),
        m.num_continuous(),
        m.num_constraints()
    );
    for (file, format) in [("model.mps", ModelFormat::Mps), ("model.lp", ModelFormat::Lp)] {
        let path = out.join(file);
        m.emit(&path, format)?;
        println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    }
    let back = read_mps(std::io::BufReader::new(std::fs::File::open(out.join("model.mps"))?))?;
    assert_eq!(&back, m);
    Ok(())
}
