pub mod cases;
pub mod lattice;
pub mod ratfn;
pub mod sinv;
pub mod zariski;
