use crate::error::Result;
use crate::numcore::{adam_step, AdamConfig, AdamState, Tensor};

/// Adam moments for an ordered group of tensors.
#[derive(Clone, Debug)]
pub struct AdamGroup {
    states: Vec<AdamState>,
}

impl AdamGroup {
    pub fn new<'a>(tensors: impl IntoIterator<Item = &'a Tensor>, lr: f64) -> Self {
        let config = AdamConfig::with_lr(lr);
        Self {
            states: tensors
                .into_iter()
                .map(|t| AdamState::new(t.numel(), config))
                .collect(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.states.first().map_or(0, |s| s.t)
    }

    /// Steps every tensor from its gradient, then zeroes the gradients.
    pub fn step<'a>(&mut self, tensors: impl IntoIterator<Item = &'a mut Tensor>) -> Result<()> {
        for (t, s) in tensors.into_iter().zip(&mut self.states) {
            if !t.grad_enabled() {
                t.set_grad_enabled(true);
            }
            adam_step(t, s)?;
            t.zero_grad();
        }
        Ok(())
    }
}
