//! Chained polar coding for the two-receiver wiretap broadcast channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: the source/channel law, exact entropies and sampling.
//! - [`polar`]: the polar transform and successive-cancellation recursions.
//! - [`sets`]: polarized index sets, the high-entropy partition, case
//!   classification and the chaining plan.
//! - [`codec`]: keys, message layout and the multi-block encoder.
//! - [`decoder`]: forward and backward chained decoders for the two receivers.
//! - [`eval`]: reliability trials, exact leakage, distribution checks and rate
//!   accounting.

pub mod channel;
pub mod codec;
pub mod decoder;
pub mod eval;
pub mod polar;
pub mod rng;
pub mod sets;

pub use channel::{ComponentChannel, Conditioning, DmsSpec, Observer};
