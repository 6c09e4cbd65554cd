//! Steps an environment with a fixed action script and prints events.

use towerforge::sim::{Action, Camera, Environment, EpisodeConfig, Jump, MoveFb, MoveLr, RewardMode};

fn main() {
    let config = EpisodeConfig {
        reward_mode: RewardMode::Dense,
        ..EpisodeConfig::with_seeds(5, 1)
    };
    let mut env = Environment::new(config).unwrap();
    let obs = env.observe();
    println!("reset: aux {:?}, raster {}x{}", obs.aux(), obs.side, obs.side);

    let forward = Action::new(MoveFb::Forward, MoveLr::NoOp, Camera::NoOp, Jump::NoOp);
    let turn = Action::new(MoveFb::NoOp, MoveLr::NoOp, Camera::Clockwise, Jump::NoOp);
    let hop = Action::new(MoveFb::Forward, MoveLr::NoOp, Camera::NoOp, Jump::Jump);
    let script = [forward, forward, turn, forward, hop, turn, turn, forward, Action::NOOP];
    for (i, a) in script.iter().cycle().take(60).enumerate() {
        let r = env.step(*a).unwrap();
        if !r.info.events.is_empty() || r.done {
            println!("step {i:>2} {:?}: reward {} events {:?}", a.to_tuple(), r.reward, r.info.events);
        }
        if r.done {
            println!("ended: {:?}", r.info.termination);
            break;
        }
    }
    let st = env.state();
    println!("floor {} room {:?} time {} totals {:?}", st.floor_index, st.room, st.time_remaining, st.totals);
}
