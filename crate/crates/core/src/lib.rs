pub mod cost;
pub mod error;
pub mod geometry;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod builders;
pub mod fast;
pub mod instances;
pub mod oracle;
pub mod io;
pub mod report;
pub mod cli;
