//! Online adaptation: losses, the per-step optimizer, variants, pretraining
//! and the non-blind baseline.

mod config;
mod losses;
mod optim;
mod pool;
mod pretrain;
mod session;

pub use config::{Mode, TrainConfig, Variant};
pub use losses::{gan_losses, loss_eb, loss_ib, record_d_loss, record_g_loss, record_loss_eb, record_loss_ib};
pub use optim::AdamGroup;
pub use pool::ExternalPool;
pub use pretrain::{pretrain_gr, PretrainConfig, PretrainOutcome};
pub use session::{
    metrics_jsonl, nonblind_adapt, online_adapt, AdaptOutcome, Checkpoint, Degrader, Phase, Session, StepRecord,
};
