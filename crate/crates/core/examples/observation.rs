//! The egocentric view as text and as palette codes under two themes.

use towerforge::floor::Theme;
use towerforge::sim::{ascii_view, Environment, EpisodeConfig, AGENT_CODE};

fn main() {
    let mut seen = Vec::new();
    for theme in [Theme::Ancient, Theme::Industrial] {
        let config = EpisodeConfig {
            theme_pool: vec![theme],
            raster_size: 168,
            ..EpisodeConfig::with_seeds(9, 0)
        };
        let env = Environment::new(config).unwrap();
        let obs = env.observe();
        let mut codes: Vec<u8> = obs.raster.clone();
        codes.sort();
        codes.dedup();
        println!("{theme:?}: {}x{} raster, codes {codes:?}", obs.side, obs.side);
        assert_eq!(obs.pixel(obs.side / 2, obs.side / 2), AGENT_CODE);
        seen.push(ascii_view(&env));
    }
    assert_eq!(seen[0], seen[1]);
    print!("{}", seen[0]);
}
