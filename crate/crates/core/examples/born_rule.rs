// Outcome probabilities of a random state under a random POVM, plus a JSON
// round trip of the measurement.

use povmkit::instances::trine;
use povmkit::json::{povm_from_json, povm_to_json};
use povmkit::operator::Tolerances;
use povmkit::povm::{born_probabilities, random_povm, random_state, State};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let rho = random_state(3, 1);
    let a = random_povm(3, 4, 2)?;
    let p = born_probabilities(&rho, &a, &tol)?;
    println!("p = {p:.4?} (sum {:.12})", p.iter().sum::<f64>());

    // |0> under the trine: (2/3) cos^2(2 pi k / 3) = 1/6, 1/6, 2/3
    let p0 = born_probabilities(&State::basis(2, 0), &trine(), &tol)?;
    println!("trine on |0>: {p0:.4?}");
    assert!((p0[2] - 2.0 / 3.0).abs() < 1e-12);

    let text = povm_to_json(&a);
    assert_eq!(povm_from_json(&text, &tol)?, a);
    println!("json: {} bytes, round trip exact", text.len());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
