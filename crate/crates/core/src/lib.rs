pub mod cli;
pub mod costmodel;
pub mod error;
pub mod mapping;
pub mod model;
pub mod netsim;
pub mod optimizer;
pub mod rational;
