use crate::error::{Error, Result};
use crate::model::{LayerDescriptor, LayerKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDescriptor {
    pub name: String,
    pub layers: Vec<LayerDescriptor>,
}

impl NetworkDescriptor {
    pub fn new(name: impl Into<String>, layers: Vec<LayerDescriptor>) -> Self {
        Self {
            name: name.into(),
            layers,
        }
    }

    /// Checks every layer and that each layer's (pooled) output volume feeds
    /// the next layer's input. FC layers accept any volume of matching size.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidLayer {
                layer: self.name.clone(),
                reason: "network has no layers".into(),
            });
        }
        for layer in &self.layers {
            layer.validate()?;
        }
        for pair in self.layers.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let out = prev.pooled_dims();
            let fail = |reason: String| {
                Err(Error::IncompatibleLayers {
                    network: self.name.clone(),
                    from: prev.name.clone(),
                    to: next.name.clone(),
                    reason,
                })
            };
            match next.kind {
                LayerKind::FullyConnected => {
                    let volume: usize = out.iter().product();
                    if volume != next.in_maps {
                        return fail(format!(
                            "output volume {volume} does not match FC input {}",
                            next.in_maps
                        ));
                    }
                }
                LayerKind::Conv | LayerKind::MaxPool => {
                    let input = next.input_dims();
                    if out != input {
                        return fail(format!("output {out:?} does not match input {input:?}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn compute_layers(&self) -> impl Iterator<Item = &LayerDescriptor> {
        self.layers.iter().filter(|l| l.is_compute())
    }

    pub fn input_dims(&self) -> [usize; 3] {
        self.layers[0].input_dims()
    }
}
