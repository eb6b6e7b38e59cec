// Classifies three textbook measurements on a qubit: the computational
// basis, a fair coin (`I/2, I/2`) and the trine.

use povmkit::extremality::classify_with_extremality;
use povmkit::instances::{coin, computational_pvm, trine};
use povmkit::operator::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    for (name, a) in [
        ("z-basis", computational_pvm(2)),
        ("coin", coin()),
        ("trine", trine()),
    ] {
        let c = classify_with_extremality(&a, &tol)?;
        println!(
            "{name:8} pvm={} commutative={} extreme={:?} kernel_dim={:?} commutator={:.6}",
            c.is_pvm, c.is_commutative, c.is_extreme, c.kernel_dimension, c.max_commutator_norm
        );
    }
    // the trine is extreme without being commutative
    let t = classify_with_extremality(&trine(), &tol)?;
    assert_eq!(t.is_extreme, Some(true));
    assert!(!t.is_commutative);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
