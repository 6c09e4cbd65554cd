use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use serde_json::{json, Value};
use towerforge::geom::{Direction, Pos};
use towerforge::layout::RoomKind;
use towerforge::rng::Stream;
use towerforge::room::{
    check_puzzle_solvable, instantiate_room, is_walkable, RoomInstance, RoomRequirements, TemplateLibrary, TileType,
};

fn ln_choose(n: u64, k: u64) -> f64 {
    let lg = |m: u64| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    lg(n) - lg(k) - lg(n - k)
}

fn binom_pmf(n: u64, k: u64, p: f64) -> f64 {
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// Smallest and largest counts whose tails each hold at most `alpha / 2`.
fn binomial_bounds(n: u64, p: f64, alpha: f64) -> (u64, u64) {
    let pmf: Vec<f64> = (0..=n).map(|k| binom_pmf(n, k, p)).collect();
    let mut lo = 0;
    let mut tail = 0.0;
    while tail + pmf[lo as usize] <= alpha / 2.0 {
        tail += pmf[lo as usize];
        lo += 1;
    }
    let mut hi = n;
    tail = 0.0;
    while tail + pmf[hi as usize] <= alpha / 2.0 {
        tail += pmf[hi as usize];
        hi -= 1;
    }
    (lo, hi)
}

fn library_with(extra: Value, categories: Value) -> TemplateLibrary {
    let mut v: Value = serde_json::from_str(&TemplateLibrary::builtin().to_json()).unwrap();
    for (k, c) in categories.as_object().unwrap() {
        v["categories"][k] = c.clone();
    }
    v["templates"].as_array_mut().unwrap().push(extra);
    TemplateLibrary::from_json(&v.to_string()).unwrap()
}

#[test]
fn oracle_bounds_match_hand_values() {
    // n = 10, p = 0.5: P(X = 0) = P(X = 10) = 1/1024.
    assert_eq!(binomial_bounds(10, 0.5, 2.0 / 1024.0), (1, 9));
    assert_eq!(binomial_bounds(10, 0.5, 1.9 / 1024.0), (0, 10));
    assert!((binom_pmf(4, 2, 0.5) - 0.375).abs() < 1e-12);
}

#[test]
fn category_draws_follow_weights() {
    let lib = library_with(
        json!({"id": "corners", "kinds": ["normal"], "rows": ["p.p", "...", "p.p"], "legend": {"p": "pit_mix"}}),
        json!({"pit_mix": {"floor": 0.8, "pit": 0.2}}),
    );
    let t = lib.template("corners").unwrap();
    let req = RoomRequirements {
        doors: Direction::ALL.to_vec(),
        entry: Some(Direction::North),
    };
    let mut stream = Stream::from_seed(2024);
    let samples = 100u64;
    let mut pits = 0u64;
    for _ in 0..samples {
        let r = instantiate_room(&lib, t, RoomKind::Normal, &req, &mut stream).unwrap();
        pits += r.find(TileType::Pit).len() as u64;
    }
    let n = 4 * samples;
    let (lo, hi) = binomial_bounds(n, 0.2, 1e-6);
    assert!((lo..=hi).contains(&pits), "{pits} pits of {n}, bounds {lo}..={hi}");
    let frac = pits as f64 / n as f64;
    assert!((0.1..=0.3).contains(&frac), "{frac}");
}

/// Push search over (block, agent region) pairs rather than raw positions.
fn oracle_solvable(room: &RoomInstance) -> bool {
    let block0 = room.find(TileType::Block)[0];
    let goal = room.find(TileType::BlockGoal)[0];
    let agent_ok = |p: Pos| room.is_interior(p) && is_walkable(room.tile(p));
    let block_ok =
        |p: Pos| room.is_interior(p) && matches!(room.tile(p), TileType::Floor | TileType::BlockGoal | TileType::Block);
    let region = |from: Pos, block: Pos| -> BTreeSet<Pos> {
        let mut seen = BTreeSet::from([from]);
        let mut q = VecDeque::from([from]);
        while let Some(p) = q.pop_front() {
            for d in Direction::ALL {
                let n = p.step(d);
                if n != block && agent_ok(n) && seen.insert(n) {
                    q.push_back(n);
                }
            }
        }
        seen
    };
    let key = |r: &BTreeSet<Pos>| *r.iter().next().unwrap();
    let start = region(room.origin(), block0);
    let mut visited = HashSet::from([(block0, key(&start))]);
    let mut q = VecDeque::from([(block0, start)]);
    while let Some((b, reg)) = q.pop_front() {
        if b == goal {
            return true;
        }
        for d in Direction::ALL {
            let behind = b.step(d.opposite());
            let to = b.step(d);
            if reg.contains(&behind) && block_ok(to) {
                let r = region(b, to);
                if visited.insert((to, key(&r))) {
                    q.push_back((to, r));
                }
            }
        }
    }
    false
}

fn puzzle_room(rows: &[&str], entry: Direction) -> RoomInstance {
    serde_json::from_value(json!({
        "template": "t", "kind": "puzzle", "rotation": 0, "doors": [entry], "entry": entry, "rows": rows
    }))
    .unwrap()
}

#[test]
fn every_puzzle_template_instantiates_solvably() {
    let lib = TemplateLibrary::builtin();
    let puzzles = lib.for_kind(RoomKind::Puzzle);
    assert!(!puzzles.is_empty());
    for t in puzzles {
        for i in 0..50u64 {
            let entry = Direction::ALL[(i % 4) as usize];
            let mut doors = vec![entry, Direction::ALL[((i / 4) % 4) as usize]];
            doors.dedup();
            let req = RoomRequirements { doors, entry: Some(entry) };
            let mut stream = Stream::from_seed(i);
            let room = instantiate_room(&lib, t, RoomKind::Puzzle, &req, &mut stream).unwrap();
            assert_eq!(check_puzzle_solvable(&room), Ok(true), "{} #{i}", t.id);
            assert!(oracle_solvable(&room), "{} #{i}", t.id);
        }
    }
}

#[test]
fn corner_deadlock_is_unsolvable() {
    let r = puzzle_room(&["######", "#..G.#", "+....#", "#....#", "#...B#", "######"], Direction::West);
    assert_eq!(check_puzzle_solvable(&r), Ok(false));
    assert!(!oracle_solvable(&r));
    let r = puzzle_room(&["######", "#G...#", "+....#", "#.B..#", "#....#", "######"], Direction::West);
    assert_eq!(check_puzzle_solvable(&r), Ok(true));
    assert!(oracle_solvable(&r));
}

#[test]
fn oracle_agrees_on_hand_rooms() {
    let cases: [(&[&str], bool); 4] = [
        (&["#####", "#G..#", "+.B.#", "#...#", "#####"], true),
        (&["#####", "#G.B#", "+...#", "#...#", "#####"], false),
        (&["#####", "#..G#", "+B_.#", "#...#", "#####"], false),
        (&["######", "#....#", "+...B#", "#....#", "#G...#", "######"], false),
    ];
    for (rows, expect) in cases {
        let r = puzzle_room(rows, Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(expect), "{rows:?}");
        assert_eq!(oracle_solvable(&r), expect, "{rows:?}");
    }
}

fn template_rows() -> impl Strategy<Value = Vec<String>> {
    (3usize..=5).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(prop::sample::select(vec!['.', '#', '_', 'o', 'e', '=', '1', '2', 'z']), n), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().collect()).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn template_files_round_trip(rows in template_rows(), kinds in prop::sample::subsequence(vec!["normal", "lock", "exit"], 1..=3)) {
        let lib = library_with(
            json!({"id": "gen", "kinds": kinds, "rows": rows, "legend": {"z": "custom"}}),
            json!({"custom": {"floor": 1.0, "time_orb": 0.5}}),
        );
        let again = TemplateLibrary::from_json(&lib.to_json()).unwrap();
        prop_assert_eq!(&again, &lib);
        prop_assert_eq!(again.to_json(), lib.to_json());
    }
}
