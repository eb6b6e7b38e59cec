// Runs the theorem check over a batch of random commutative POVMs, mixing
// deterministic kernels (PVMs) with generic ones.

use povmkit::extremality::{theorem_check, TheoremBranch};
use povmkit::operator::Tolerances;
use povmkit::povm::split_seed;
use povmkit::smearing::random_commutative_povm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let (mut pvms, mut others, mut worst) = (0, 0, 0.0f64);
    for i in 0..40u64 {
        let a = random_commutative_povm(3, 3, split_seed(5, i), i % 4 == 0)?;
        let r = theorem_check(&a, &tol)?;
        match r.branch {
            TheoremBranch::Pvm => pvms += 1,
            TheoremBranch::NonPvm => others += 1,
        }
        if let Some(c) = &r.certificate {
            worst = worst.max(c.residual);
        }
    }
    println!("pvm branch: {pvms}, non-pvm branch: {others}, worst midpoint residual {worst:.2e}");
    assert_eq!(pvms + others, 40);
    assert!(worst <= 1e-9);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
