//! Differentiable building blocks, the Elman-family recurrent heads and
//! the CNN classifier assembled from them.

pub mod adam;
pub mod fenn;
pub mod init;
pub mod layers;
pub mod loss;
pub mod network;

pub use adam::{adam_step, Adam, AdamConfig, AdamMoments};
pub use fenn::{
    fenn_backward, fenn_loss_and_gradients, fenn_sequence_forward, fenn_sequence_forward_with_resets, fenn_step,
    FennParameters, FennState, FennTrace, HeadKind,
};
pub use init::{he_initialize, he_normal};
pub use loss::{class_weights, softmax, weighted_cross_entropy, ClassWeights};
pub use network::{LayerSpec, Network, NetworkSpec, TrainingHyperparameters};
