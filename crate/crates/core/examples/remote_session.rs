//! Starts a server, plays a session over TCP and checks it against a local
//! environment step for step.

use towerforge::service::{Client, Server};
use towerforge::sim::{Environment, EpisodeConfig};

fn main() {
    let server = Server::bind("127.0.0.1:0", 8).unwrap().spawn().unwrap();
    println!("server on {}", server.addr());

    let config = EpisodeConfig::with_seeds(12, 3);
    let mut client = Client::connect(server.addr()).unwrap();
    let (session, first) = client.create(config.clone()).unwrap();
    let mut local = Environment::new(config).unwrap();
    assert_eq!(first, local.observe());
    println!("session {session}");

    for i in 0..200u32 {
        let code = (i * 7 + 3) % 54;
        let remote = client.step(session, code).unwrap();
        assert_eq!(remote, local.step_flat(code).unwrap());
        if remote.done {
            println!("episode ended at step {i}: {:?}", remote.info.termination);
            break;
        }
    }
    let info = client.info(session).unwrap();
    println!("floor {} time {} ticks {}", info.floor_index, info.time_remaining, info.ticks);
    client.close(session).unwrap();
    println!("closed; unknown session now: {}", client.info(session).unwrap_err());
}
