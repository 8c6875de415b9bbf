pub mod conjdsl;
pub mod error;
pub mod harness;
pub mod modring;
pub mod ntbase;
pub mod seqgen;
pub mod sumeval;
