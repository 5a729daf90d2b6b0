//! Exact scalars: cyclotomic rationals and valued finite sums modeling K.

mod cyclotomic;
mod series;

pub use cyclotomic::{cyclotomic_poly, cyclotomic_poly_int, euler_phi, lcm_order, CycElement};
pub use series::{series_valuation, FieldElement, Valuation};
