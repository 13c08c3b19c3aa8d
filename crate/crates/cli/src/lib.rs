//! Operator surface for the proof tutor: batch evaluation, dataset
//! generation, proof checking, a terminal tutor and the HTTP session service.

pub mod commands;
pub mod config;
pub mod http;
pub mod service;
pub mod session;
pub mod workspace;
