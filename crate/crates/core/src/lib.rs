pub mod algebra;
pub mod arc;
pub mod error;
pub mod fuzz;
pub mod groupoid;
pub mod json;
pub mod matrix;
pub mod modq;
pub mod mpoly;
pub mod parse;
pub mod scalar;
pub mod series;
pub mod system;
pub mod upoly;
pub mod weierstrass;
pub mod zr;
