pub mod ball;
pub mod cli;
pub mod cylinder;
pub mod error;
pub mod gps;
pub mod green;
pub mod growth;
pub mod measure;
pub mod potential;
pub mod sample;
pub mod shadow;
pub mod stats;
pub mod word;
