//! Turns OCR text of social-media screenshots into posts (author, timestamp,
//! body), labels the screenshot's post/author structure, and builds search
//! queries for locating the original posts.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod extract;
pub mod fixture;
pub mod group;
pub mod ocr;
pub mod pipeline;
pub mod query;
