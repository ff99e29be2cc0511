#![allow(dead_code)]

pub mod lattices;
pub mod oracle;
pub mod quadrature;
