// ‖χ_{Ω_2(n)} κ(H)‖ for a window κ around the bound states below the
// scattering band, next to the same quantity for an in-band window.

use std::sync::Arc;

use magnonspec::cli::{band_hull, contrast_window, outlier_window};
use magnonspec::dynamics::DenseCalculus;
use magnonspec::lattice::TruncationBox;
use magnonspec::operators::{IndexSet, OperatorSpec};
use magnonspec::symbols::heisenberg_symbols;

pub fn run_example() -> magnonspec::Result<Vec<(i64, f64, f64)>> {
    let (phi, psi) = heisenberg_symbols(1.0, 1.6, 2);
    let band = band_hull(&phi, &psi, 2, 64, 1)?;
    let index = Arc::new(IndexSet::from_box(&TruncationBox::full(2, -15..=15, 30))?);
    let calc = DenseCalculus::new(OperatorSpec::new(phi, psi, index)?.assemble()?)?;
    let kappa = outlier_window(calc.spectrum().values(), band, 0.1).expect("a bound state below the band");
    let contrast = contrast_window(band)?;
    println!("band [{:.3}, {:.3}], window [{:.3}, {:.3}]", band.0, band.1, kappa.lo, kappa.hi);
    let mut rows = Vec::new();
    for n in [0, 2, 5, 10, 15, 20] {
        let bound = calc.nonprop_norm(2, n, |x| kappa.eval(x))?;
        let inband = calc.nonprop_norm(2, n, |x| contrast.eval(x))?;
        println!("n={n:2}  bound-state window {bound:.3e}   in-band window {inband:.3}");
        rows.push((n, bound, inband));
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("non-propagation example");
}
