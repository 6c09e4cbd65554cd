//! Steps per second with random actions on five floors.

use towerforge::eval::{format_table, measure_throughput, THROUGHPUT_FLOORS};
use towerforge::sim::EpisodeConfig;

fn main() {
    let rows = measure_throughput(&THROUGHPUT_FLOORS, 5, 500, &EpisodeConfig::default()).unwrap();
    print!("{}", format_table(&rows));
    for r in &rows {
        println!("floor {:>2}: sps x mean_ms = {:.3}", r.floor, r.steps_per_second * r.mean_ms);
    }
}
