//! An adversary answers every distance call with 1 and then places the query
//! next to a point the search never looked at.

use simlab::adversary::{self, Adversary, AnswerUnqueried, EarlyStop, FinalizeMode, LinearScan};
use simlab::FiniteMetric;

fn main() -> simlab::Result<()> {
    let space = adversary::random_space(8, 1)?;
    for t in [
        adversary::run_adversary_game(&space, &mut EarlyStop { calls: 3 })?,
        adversary::run_adversary_game(&space, &mut AnswerUnqueried)?,
        adversary::run_adversary_game(&space, &mut LinearScan)?,
    ] {
        println!(
            "{:<16} {} calls, answered {}, fooled {}",
            t.algorithm, t.distinct_calls, t.answer, t.fooled
        );
    }

    let mut adv = Adversary::new(&FiniteMetric::equilateral(4, 1.0)?)?;
    adv.answer(0)?;
    match adv.finalize(3, FinalizeMode::DistanceFormula) {
        Ok(f) => println!("formula gave {:?}", f.values),
        Err(e) => println!("formula rejected: {e}"),
    }
    Ok(())
}
