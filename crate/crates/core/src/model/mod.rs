//! System model: constellations, channels and the uncoded transmit path.

mod channel;
mod constellation;
mod frame;

pub use channel::{correlation_matrix, draw_channel, ChannelModel, ChannelParams, ChannelRealization};
pub use constellation::Constellation;
pub use frame::{noise_variance_from_snr_db, random_bits, transmit, TransmitFrame};
