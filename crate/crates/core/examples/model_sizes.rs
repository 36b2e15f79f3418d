//! Model-size comparison between the proposed formulation and three
//! baselines as the number of nodes grows, with uniform travel times.
//!
//! ```bash
//! cargo run --example model_sizes
//! ```

use std::error::Error;

use mer_routing::sizing::{size_all, uniform_travel_times, write_sizes_csv};

pub fn main() -> Result<(), Box<dyn Error>> {
    let (mers, spans, travel) = (2, 36, 2);
    let mut reports = Vec::new();
    for nodes in [5u64, 10, 20, 37] {
        reports.extend(size_all(nodes, mers, spans, &uniform_travel_times(nodes as usize, travel))?);
    }
    write_sizes_csv(&reports, std::io::stdout().lock())?;
    Ok(())
}
