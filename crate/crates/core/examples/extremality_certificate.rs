// Finds a perturbation in the kernel of a random full-rank POVM and splits it
// into two distinct POVMs whose midpoint is the original.

use povmkit::extremality::{is_extreme, perturbation_kernel};
use povmkit::operator::Tolerances;
use povmkit::povm::random_povm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let a = random_povm(3, 2, 7)?;
    let kernel = perturbation_kernel(&a, &tol)?;
    println!(
        "map {}x{}, kernel dimension {}",
        kernel.map.codomain_dim(),
        kernel.map.domain_dim(),
        kernel.dim()
    );

    let verdict = is_extreme(&a, &tol)?;
    let cert = verdict.certificate.ok_or("expected a non-extreme POVM")?;
    let residual = cert.verify(&a, &tol)?;
    println!(
        "weight={} separation={:.4} midpoint residual={residual:.2e}",
        cert.weight, cert.separation
    );
    assert!(residual <= 1e-9);
    assert!(cert.plus.max_distance(&cert.minus) > 0.0);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
