pub mod geometry;
pub mod trajectory;
pub mod constraint;
pub mod optimizer;
pub mod agents;
pub mod registration;
pub mod dataset;
pub mod io;
pub mod config;
pub mod pipeline;
pub mod service;
