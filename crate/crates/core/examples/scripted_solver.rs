//! Runs the full-information solver up a tower.

use towerforge::eval::ScriptedSolver;
use towerforge::sim::{Environment, EpisodeConfig};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(17);
    let mut env = Environment::new(EpisodeConfig::with_seeds(seed, 0)).unwrap();
    let mut solver = ScriptedSolver::new();
    let mut steps = 0u32;
    let mut last_floor = 0;
    while !env.is_done() {
        let a = solver.choose(&env);
        env.step(a).unwrap();
        steps += 1;
        let st = env.state();
        if st.floor_index != last_floor {
            println!("floor {:>2} done at step {steps:>5}, {} ticks left", last_floor, st.time_remaining);
            last_floor = st.floor_index;
        }
    }
    let t = env.state().totals;
    println!("{:?} after {steps} steps: {} floors, {} keys, {} doors, {} puzzles, {} orbs",
        env.state().termination, t.floors, t.keys_picked, t.doors_opened, t.puzzles_solved, t.orbs);
    println!("pushes replayed: {}", solver.puzzle_log.len());
}
