// Lowest eigenvalues of a three-magnon fiber too large for the dense path,
// using the matrix-free action and Lanczos.

use magnonspec::spectral::{eig_lanczos, fiber_spec, LanczosOptions, Which};
use magnonspec::symbols::{heisenberg_symbols, FiberParameter};

pub fn run_example() -> magnonspec::Result<Vec<f64>> {
    let (phi, psi) = heisenberg_symbols(1.0, 1.6, 3);
    let spec = fiber_spec(FiberParameter::new(0.0), &phi, &psi, 100)?;
    println!("fiber dimension {}", spec.dim());
    let low = eig_lanczos(|x, y| spec.apply_into(x, y), spec.dim(), 3, Which::Smallest, LanczosOptions::default())?;
    for (i, v) in low.values().iter().enumerate() {
        println!("lambda_{i} = {v:.10}");
    }
    Ok(low.values().to_vec())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("lanczos example");
}
