//! Chebyshev collocation solver for matrix Riemann-Hilbert problems on
//! piecewise-smooth contours, with a scaled-and-shifted iterative solver and
//! drivers for Painleve II and the modified KdV equation.

pub mod cauchy;
pub mod chebyshev;
pub mod contour;
pub mod error;
pub mod painleve;
pub mod linalg;
pub mod mkdv;
pub mod scaled;
pub mod scatter;
pub mod sie;
pub mod toy;

pub use error::{Result, RhError};
pub use linalg::Mat2;
