pub mod algorithms;
pub mod cli;
pub mod engine;
pub mod experiment;
pub mod generate;
pub mod instance;
pub mod market;
pub mod restabilization;
pub mod strategies;
pub mod verifier;
