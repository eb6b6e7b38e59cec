// Smears a random PVM with a random Markov kernel, then recovers a PVM and
// kernel from the result by joint diagonalization.

use povmkit::operator::Tolerances;
use povmkit::povm::{is_commutative, random_pvm};
use povmkit::smearing::{kernel_is_deterministic, random_kernel, simultaneous_diagonalize, smear};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let e = random_pvm(4, 4, 3)?;
    let nu = random_kernel(4, 3, 3, false)?;
    let a = smear(&e, &nu, &tol)?;
    println!(
        "commutator norm {:.2e}",
        is_commutative(&a, &tol).max_commutator_norm
    );

    let form = simultaneous_diagonalize(&a, &tol)?;
    println!("recovered {} projections", form.pvm.len());
    for row in form.kernel.to_rows() {
        println!("  nu row {row:.4?}");
    }
    println!(
        "deterministic={} reconstruction residual={:.2e}",
        kernel_is_deterministic(&form.kernel, &tol).deterministic,
        form.reconstruction_residual
    );
    assert!(form.reconstruct(&tol)?.max_distance(&a) <= 1e-9);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
