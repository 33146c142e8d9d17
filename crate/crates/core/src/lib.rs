//! Engine for extracting structured, chronologically ordered event timelines
//! from long unstructured judgment documents.
//!
//! The crate is organized around six subsystems:
//!
//! - [`les`] — the four-attribute event schema (Timestamp, Event, Judge,
//!   Precedent), judgment documents, case categories, and the canonical text
//!   rendering used for prompting and scoring.
//! - [`gateway`] — a uniform interface to chat-completion and embedding
//!   endpoints: an OpenAI-compatible HTTP client with retry and rate
//!   limiting, plus deterministic scripted and simulated backends for tests
//!   and offline runs.
//! - [`parse`] — recovery of structured payloads (timelines, feedback
//!   reports) from noisy model completions with a bounded repair set.
//! - [`corpus`] — the synthetic-corpus pipeline: category sampling, gold
//!   timeline and judgment generation, JSONL persistence, and corpus
//!   statistics. Also houses the prompt template mechanism.
//! - [`refine`] — the dual-agent refinement loop (extract, critique, refine)
//!   with patience and tolerance stopping criteria.
//! - [`eval`] — greedy embedding-based Precision/Recall/F1 scoring and the
//!   order-swapped pairwise summary judging protocol.

pub mod corpus;
pub mod eval;
pub mod gateway;
pub mod les;
pub mod parse;
pub mod refine;
