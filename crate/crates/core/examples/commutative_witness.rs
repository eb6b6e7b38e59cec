// Builds the pair witness for a noisy Z measurement and checks both
// branches of "a commutative POVM is extreme iff it is a PVM".

use povmkit::extremality::{proof1_witness, theorem_check, TheoremBranch};
use povmkit::instances::{computational_pvm, noisy_z};
use povmkit::operator::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let a = noisy_z(0.7);

    let d = proof1_witness(&a, 0, 1, &tol)?;
    for (n, block) in d.blocks.iter().enumerate() {
        println!(
            "D_{n} eigenvalues {:?}",
            block.eigen().eigenvalues.as_slice()
        );
    }

    let report = theorem_check(&a, &tol)?;
    assert_eq!(report.branch, TheoremBranch::NonPvm);
    for (name, r) in report.residuals() {
        println!("{name}={r:.3e}");
    }

    let pvm = theorem_check(&computational_pvm(3), &tol)?;
    assert_eq!(pvm.branch, TheoremBranch::Pvm);
    assert_eq!(pvm.kernel_dimension, 0);
    println!("z-basis: kernel dimension {}", pvm.kernel_dimension);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
