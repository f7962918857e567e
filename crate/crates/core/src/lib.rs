//! Core analysis library: a language-neutral code model, a C++ subset
//! front-end, model matching, refactoring detection, and behavior-change
//! reporting.
//!
//! The crate is `no_std` (with `alloc`); all IO, the CLI, and the fixture
//! evaluation harness live in the companion binary crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod behavior;
pub mod detect;
pub mod lexer;
pub mod matcher;
pub mod model;
pub mod parser;

pub use behavior::{report_behavior_changes, BehaviorChange, BehaviorChangeKind};
pub use detect::{detect, Refactoring, RefactoringType};
pub use lexer::{strip_preprocessor, tokenize, Token, TokenKind};
pub use matcher::{match_models, member_similarity, ModelDiff};
pub use model::{CodeModel, SourceLocation};
pub use parser::{parse, ParseError};
