pub mod grid;
pub mod numerics;
pub mod kernel;
pub mod profile;
pub mod operators;
pub mod weights;
pub mod verify;
pub mod cli;
