//! Cyclic polar codes over GF(q) plus burst-erasure analysis of spatially
//! coupled LDPC ensembles.
//!
//! The crate is organized as a pipeline: finite fields ([`gf`]) feed the
//! mixed-radix spectral transform ([`gfft`]), which feeds code construction
//! ([`polar_design`]) and the encoder/decoders ([`polar_codec`]). The
//! [`scldpc`] module is an independent family (ensemble sampling, peeling,
//! closed-form bounds). [`channels`] and [`montecarlo`] serve both families.

pub mod channels;
pub mod gf;
pub mod gfft;
pub mod montecarlo;
pub mod polar_codec;
pub mod polar_design;
pub mod scldpc;
