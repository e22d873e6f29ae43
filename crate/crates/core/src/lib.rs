//! Bernstein operators, their combinations with endpoint modification, and
//! weighted Ditzian–Totik moduli of smoothness.
#![no_std]

extern crate alloc;

pub mod bernstein;
pub mod combination;
pub mod difference;
pub mod endpoint;
pub mod error;
pub mod fit;
pub mod function;
pub mod modulus;
pub mod quadrature;
pub mod sum;
pub mod weight;

pub use bernstein::{
    absolute_index_moment, basis, basis_row, bernstein_apply, bernstein_derivative, central_moment,
    Bernstein, MomentKind,
};
pub use combination::{
    combo_apply, combo_derivative, moment_annihilation, CombinationScheme, Ladder,
};
pub use difference::{diff_backward, diff_central, diff_forward};
pub use endpoint::{
    bstar_apply, bstar_derivative, lagrange_left, lagrange_right, modified_function, Cutoff,
    ModifiedCombination, ModifiedFunction,
};
pub use error::{Error, Result};
pub use fit::{fit_rate, RateFit};
pub use function::{from_fn, Endpoint, SampledFunction};
pub use modulus::{
    main_part_modulus, omega_modulus, steklov_k_functional, ModulusCurve, ModulusEstimate,
    OneSidedStep, Resolution, T_MAX,
};
pub use weight::{delta_n, JacobiWeight, StepWeight};
