// Graph Laplacian of the Cayley graph of Z² restricted to ordered pairs,
// checked against T_{χ_M} + V_{-χ_M}.

use std::sync::Arc;

use magnonspec::lattice::TruncationBox;
use magnonspec::operators::{cayley_laplacian, compress_potential, compress_toeplitz, IndexSet};
use magnonspec::spectral::eig_dense;
use magnonspec::symbols::ShiftSymbol;

pub fn run_example() -> magnonspec::Result<(f64, f64)> {
    // triangular-lattice neighbours
    let m = ShiftSymbol::indicator(
        2,
        [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]].iter().map(|p| p.to_vec()),
    )?;
    let index = Arc::new(IndexSet::from_box(&TruncationBox::full(2, -10..=10, 10))?);
    let lap = cayley_laplacian(&m, &index)?;
    let rhs = compress_toeplitz(&m, &index)?.plus(&compress_potential(&m.scaled_real(-1.0), &index)?)?;
    let diff = lap.matrix.max_abs_diff(&rhs.matrix);
    let spectrum = eig_dense(&lap)?;
    let (lo, hi) = spectrum.hull().expect("nonempty box");
    println!("{} vertices, identity defect {diff:e}", index.len());
    println!("Laplacian spectrum in [{lo:.6}, {hi:.6}] (adjacency minus degree, so <= 0)");
    Ok((diff, hi))
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cayley example");
}
