//! Ball handler, next receiver, open players and key defenders over the demo
//! possession, with the importance level each player gets.

use hoopvis::bundle::preprocess;
use hoopvis::config::Config;
use hoopvis::synth::demo_game;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = preprocess(demo_game(7), &Config::default())?;
    let names = |s: &std::collections::BTreeSet<hoopvis::ingest::PlayerId>| {
        s.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(" ")
    };
    println!("frame handler receiver open        key-def  lv3");
    for st in bundle.states.iter().step_by(10) {
        let lv3: Vec<&str> = st
            .importance
            .iter()
            .filter(|(_, l)| l.value() == 3.0)
            .map(|(p, _)| p.as_str())
            .collect();
        println!(
            "{:>5} {:<7} {:<8} {:<11} {:<8} {}",
            st.frame,
            st.handler.as_ref().map_or("-", |p| p.as_str()),
            st.receiver.as_ref().map_or("-", |p| p.as_str()),
            names(&st.open_players),
            names(&st.key_defenders),
            lv3.join(" ")
        );
    }
    Ok(())
}
