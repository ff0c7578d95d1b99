//! Background-knowledge priors for summarization.
//!
//! Texts are represented as probability distributions over semantic units
//! (words). A summary is scored by how diverse it is (entropy), how close it
//! stays to its source document (KL divergence to the document), and how much
//! it deviates from what the reader already knows (KL divergence to a latent
//! background-knowledge distribution `K`):
//!
//! ```text
//! theta_K(S) = H(S) - alpha * KL(S || D) + beta * KL(S || K)
//! ```
//!
//! The crate infers `K` from summarization corpora in several ways:
//!
//! - [`closed_form`]: direct score maximization with a uniform or document
//!   prior (`MS|U`, `MS|D`), solved analytically, plus a numeric optimizer
//!   used to cross-check the analytic solutions.
//! - [`train`]: gradient descent on softmax logits for a contrastive
//!   likelihood (`PM`), a regression against human judgments (`hReg`), and
//!   pairwise preference learning (`hPL`).
//!
//! Around the core sit [`corpus`] (JSONL ingestion, tokenization,
//! vocabularies), [`scoring`] (`theta` and the baseline scorers), [`eval`]
//! (Kendall's tau, mean reference rank, ROUGE-2 recall, cross-validation),
//! [`analysis`] (model averaging, divergence geometry, MDS, IDF comparison),
//! [`synth`] (a planted-truth corpus generator used for verification), and
//! [`summarize`] (greedy and evolutionary extractive summarizers driven by
//! `theta_K`).

pub mod analysis;
pub mod closed_form;
pub mod corpus;
pub mod divergence;
pub mod eval;
pub mod scoring;
pub mod summarize;
pub mod synth;
pub mod train;

mod error;

pub use error::{Error, Result};
