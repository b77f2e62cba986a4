//! Goal-directed answer set programming at desk scale: a symbolic core,
//! a parser for a small ASP syntax, a brute-force stable-model oracle, a
//! query-driven solver with justifications, a default/exception compiler,
//! file-based commonsense knowledge import, and a textual QA pipeline.

pub mod ast;
pub mod corpus;
pub mod defaults;
pub mod ingest;
pub mod kb;
pub mod oracle;
pub mod parser;
pub mod qa;
pub mod solver;
pub mod token;
