//! Fully connected FEP predictor: sorted dB SINRs in, one sigmoid output per
//! configuration, trained by masked binary cross-entropy on error events.

mod io;
mod mlp;
mod train;

pub use io::{load_model, read_model, save_model, write_model};
pub use mlp::{grad_check, loss_and_gradients, mlp_forward, Activation, InputNormalizer, MlpModel};
pub use train::{train, EpochLog, Optimizer, TrainConfig, TrainLog};

/// Hidden layer widths used unless configured otherwise.
pub const DEFAULT_HIDDEN: [usize; 3] = [60, 10, 60];
