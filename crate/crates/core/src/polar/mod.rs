//! CRC-aided polar codes: construction, encoding, interleaving, soft
//! demapping and SC / stack / sequential decoding.

pub mod code;
pub mod crc;
pub mod decoder;
pub mod demap;
pub mod encode;
pub mod ga;
pub mod interleave;
pub mod spec_file;

pub use code::{construct_code, FrozenSource, PolarCode};
pub use crc::Crc;
pub use decoder::{decode_sc, decode_sc_with, decode_scs, decode_sequential, CheckRule, DecodeOutput, DecodeStats, Outcome};
pub use demap::{demap_llr, LLR_CLIP};
pub use encode::{bit_reverse, bit_reverse_permute, encode, transform};
pub use ga::{subchannel_error_probabilities, BiasTable};
pub use interleave::Interleaver;
pub use spec_file::{parse_reliability, read_reliability, CodeSpecFile, FrozenSourceKind};
