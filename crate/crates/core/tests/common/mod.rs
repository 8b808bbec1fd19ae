//! Shared plans for integration tests.

use asyncplan::duration::{Duration, TimeUnit};
use asyncplan::plan::{Constraint, Plan, Step};

pub fn minutes(v: u64) -> Duration {
    Duration::from_int(v, TimeUnit::Min)
}

pub fn days(v: u64) -> Duration {
    Duration::from_int(v, TimeUnit::Day)
}

pub fn calzones() -> Plan {
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

pub fn video_game() -> Plan {
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

#[allow(dead_code)]
pub fn breakfast() -> Plan {
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
