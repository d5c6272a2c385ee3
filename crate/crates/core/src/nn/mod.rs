//! Small trainable 1-D convolutional classifier over raw waveforms.

pub mod checkpoint;
mod loss;
mod network;
mod optim;
mod spec;
mod train;

pub use loss::{argmax, log_softmax, loss_and_grad, one_hot, softmax, LossKind};
pub use network::{build_network, Gradients, LayerParams, NetworkState, Trace};
pub use optim::{apply_freeze_policy, lr_at, sgd_update, FreezePolicy, Schedule, TrainConfig};
pub use spec::{LayerSpec, Layout, NetworkSpec, Shape};
pub use train::{evaluate, predict, prepare_for_dafl, resize_last_conv, train, BestCheckpoint, Examples};
