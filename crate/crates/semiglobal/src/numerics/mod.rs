//! Low-level numerical building blocks.

pub mod gauss;
pub mod quad;
pub mod roots;
