//! Many-body microwave spectra of a nanowire S–N–S Josephson junction.

pub mod lattice;
pub mod linalg;
pub mod model;
pub mod spectrum;
pub mod classify;
pub mod cli;
pub mod config;
pub mod effective;
pub mod io;
