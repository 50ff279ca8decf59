//! Command line and HTTP front ends for reviewer recommendation, sharing
//! one engine and one result cache.

pub mod cache;
pub mod cli;
pub mod engine;
pub mod render;
pub mod service;
