//! The demo layout, a randomized layout, and one episode of a random agent.
//!
//! cargo run --release --example gridworld

use empathy_snn::env::{self, Action, EnvConfig, GridWorld, LayoutMode, Scenario};
use empathy_snn::rng::stream;
use rand::seq::IndexedRandom;

fn main() -> empathy_snn::Result<()> {
    let demo = Scenario::demo();
    print!("{}", demo.to_text());
    println!(
        "BFS A->T {}, A->H->T {}",
        demo.shortest_path_cost(demo.a_start, demo.t_goal)?,
        demo.shortest_path_cost(demo.a_start, demo.h_goal)? + demo.shortest_path_cost(demo.h_goal, demo.t_goal)?
    );

    let cfg = EnvConfig {
        layout: LayoutMode::Randomized,
        ..EnvConfig::default()
    };
    let (random, _) = env::reset(&mut stream(3, "scenario", 0), &cfg)?;
    println!("\n{}", random.to_text());

    let mut world = GridWorld::new(demo)?;
    let mut rng = stream(3, "walk", 0);
    while !world.state().episode_done {
        let action = *Action::ALL.choose(&mut rng).unwrap();
        let out = world.step(action, &mut rng)?;
        println!(
            "{:>5} A {:?} B {:?} r {:+} {}",
            action.name(),
            out.a_pos,
            out.b_pos,
            out.r_self_task,
            out.events
        );
    }
    Ok(())
}
