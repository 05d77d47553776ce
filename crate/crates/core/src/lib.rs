//! Convolutional network error correction over GF(2).
//!
//! The pieces, bottom up: polynomial algebra ([`gf2poly`]), the network and its
//! per-sink transfer matrices ([`netmodel`]), rate-1/c convolutional codes
//! ([`convcode`]), combined error vectors and decodability analysis ([`subspace`]),
//! the sliding-window decoder ([`decoder`]) and error simulation ([`errorsim`]).

pub mod config;
pub mod convcode;
pub mod decoder;
pub mod error;
pub mod errorsim;
pub mod gf2poly;
pub mod netmodel;
pub mod subspace;

pub use convcode::{
    encode, free_distance, is_catastrophic, t_dfree, weight_profile, CodeMetrics, Generator,
};
pub use decoder::{decode, expected_rx_length, DecodeMode, DecodeResult, Decoder, DecoderConfig};
pub use error::{Error, Result};
pub use gf2poly::{BitMatrix, Gf2Poly, PolyMatrix};
pub use netmodel::{NetworkCode, NetworkSpec, SinkTransfer};
pub use subspace::{ErrorVector, ReferenceTable, Window, WindowSpace};
