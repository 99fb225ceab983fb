//! Score a snapshot series and apply the 3-sigma rule. Snapshot 6 carries a
//! planted dense subgraph, so both the step into it and the step out of it
//! stand out.
//!
//! cargo run --release --example event_detection [num_nodes]

use latsum::summary::SummaryConfig;
use latsum::tasks::{detect_events, generate_er, inject_er_subgraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(3000), |s| s.parse())?;
    let mut snaps = (0..12).map(|t| generate_er(n, 10.0, 100 + t)).collect::<Result<Vec<_>, _>>()?;
    snaps[6] = inject_er_subgraph(&snaps[6], 100, 0.5, 9)?.0;
    let series = detect_events(&snaps, &SummaryConfig::default())?;
    for (t, s) in series.steps.iter().zip(&series.scores) {
        let z = (s - series.median) / series.stdev;
        println!("step {t:2}: score {s:9.3}  ({z:+.2} sd from median)");
    }
    println!("flagged steps: {:?}", series.flagged);
    Ok(())
}
