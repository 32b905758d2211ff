//! Reconstruction network, discriminator and parameter storage.

mod dl;
mod gr;
pub mod init;
mod params;

pub use dl::{dl_forward, dl_forward_tape, dl_init, DlConfig};
pub use gr::{check_params, gr_forward, gr_forward_tape, gr_init, GrConfig, DENSE_BLOCKS_PER_RRDB};
pub use params::{load_params, save_params, ModelParams, ParamVars, Role, FORMAT_VERSION, MAGIC};
