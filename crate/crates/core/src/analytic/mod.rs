//! Dirichlet polynomials and their mean squares, characters modulo a prime,
//! Weyl sums and Hua-type moments.

pub mod characters;
pub mod dirichlet;
pub mod quadrature;
pub mod weyl;

pub use characters::{dirichlet_characters, CharacterTable};
pub use dirichlet::{amplification_check, block_integral, sum_integral_sandwich};
pub use quadrature::{
    mean_value_closed_form, mean_value_integral, near_pair_mass, ExpPoly, MomentResult,
    QuadratureMethod,
};
pub use weyl::{
    equal_sum_count, hua_moment, quadruple_moment_check, vinogradov_count, weyl_sum, HuaMethod,
};

use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::WeightedPoint;

/// `sum_x alpha(x) x^{-it}`.
pub fn dirichlet_poly(points: &[WeightedPoint], t: f64) -> Result<Complex64> {
    let poly = ExpPoly::dirichlet(
        points
            .iter()
            .map(|p| (p.x, Complex64::new(p.weight as f64, 0.0))),
    )?;
    Ok(poly.eval(t))
}
