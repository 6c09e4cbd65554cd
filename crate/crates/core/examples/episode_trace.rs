//! Records a trace as JSON lines and reads it back.

use towerforge::sim::{read_trace, write_trace, Environment, EpisodeConfig};

fn main() {
    let mut env = Environment::new(EpisodeConfig::with_seeds(1, 1)).unwrap();
    let mut steps = Vec::new();
    for i in 0..50u32 {
        let r = env.step_flat((i * 11) % 54).unwrap();
        let done = r.done;
        steps.push(r);
        if done {
            break;
        }
    }
    let path = std::env::temp_dir().join("towerforge_trace.jsonl");
    write_trace(std::fs::File::create(&path).unwrap(), &steps).unwrap();
    let back = read_trace(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, steps);
    println!("{} steps written to {}", back.len(), path.display());
}
