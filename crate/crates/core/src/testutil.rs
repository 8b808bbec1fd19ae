//! Shared fixtures for unit tests.

use crate::duration::{Duration, TimeUnit};
use crate::plan::{Constraint, Plan, Step};

pub(crate) fn minutes(v: u64) -> Duration {
    Duration::from_int(v, TimeUnit::Min)
}

pub(crate) fn days(v: u64) -> Duration {
    Duration::from_int(v, TimeUnit::Day)
}

/// Five steps, constraints 1->5, 2->3, 3->4, 4->5; optimum 55 min.
pub(crate) fn calzones() -> Plan {
    Plan::new(
        "Make Calzones",
        vec![
            Step::new(1, "Preheat the oven to 425 degrees.", minutes(10)),
            Step::new(2, "Roll out the dough.", minutes(10)),
            Step::new(3, "Add the filling.", minutes(15)),
            Step::new(4, "Fold and pinch the dough.", minutes(5)),
            Step::new(5, "Bake the calzones.", minutes(25)),
        ],
        [(1, 5), (2, 3), (3, 4), (4, 5)]
            .into_iter()
            .map(|(b, a)| Constraint::new(b, a)),
    )
    .unwrap()
}

/// Five steps, diamond 1->{2,3}->4->5; optimum 360 days.
pub(crate) fn video_game() -> Plan {
    Plan::new(
        "create a video game",
        vec![
            Step::new(1, "Learn the basics of programming", days(180)),
            Step::new(2, "Learn to use a language that is used in games", days(60)),
            Step::new(3, "Learn to use an existing game engine", days(30)),
            Step::new(4, "Program the game", days(90)),
            Step::new(5, "Test the game", days(30)),
        ],
        [(1, 2), (1, 3), (2, 4), (3, 4), (4, 5)]
            .into_iter()
            .map(|(b, a)| Constraint::new(b, a)),
    )
    .unwrap()
}

/// Grind (3) before coffee (8); bread (10) and egg (7) free. Optimum 11
/// min unlimited, 15 min on two agents, 28 min on one.
pub(crate) fn breakfast() -> Plan {
    Plan::new(
        "make breakfast",
        vec![
            Step::new(1, "Grind the coffee beans", minutes(3)),
            Step::new(2, "Boil the coffee", minutes(8)),
            Step::new(3, "Toast the bread", minutes(10)),
            Step::new(4, "Fry an egg", minutes(7)),
        ],
        [Constraint::new(1, 2)],
    )
    .unwrap()
}

pub(crate) fn single_step() -> Plan {
    Plan::new(
        "boil an egg",
        vec![Step::new(1, "Boil the egg", minutes(7))],
        [],
    )
    .unwrap()
}
