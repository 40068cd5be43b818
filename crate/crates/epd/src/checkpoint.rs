//! Network checkpoints as JSON:
//!
//! ```json
//! {"layers": [{"inputs": 8, "outputs": 32, "activation": "relu"}, ...],
//!  "theta": [0.12, -0.03, ...]}
//! ```
//!
//! Each layer contributes `outputs * inputs` row-major weights followed by
//! `outputs` biases to `theta`, in layer order.

use std::fs;
use std::path::Path;

use epd_core::nn::{LayerShape, Network};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    layers: Vec<LayerShape>,
    theta: Vec<f64>,
}

pub fn to_json(net: &Network) -> Result<String> {
    let ck = Checkpoint {
        layers: net.layers().to_vec(),
        theta: net.theta().to_vec(),
    };
    Ok(serde_json::to_string(&ck)?)
}

/// Parses and validates a checkpoint.
pub fn from_json(text: &str) -> Result<Network> {
    let ck: Checkpoint = serde_json::from_str(text)?;
    Ok(Network::new(ck.layers, ck.theta)?)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    fs::write(path, to_json(net)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Network> {
    from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_is_exact() {
        let net = Network::mlp(3, &[5], 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let back = from_json(&to_json(&net).unwrap()).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn inconsistent_checkpoint_is_rejected() {
        let text = r#"{"layers":[{"inputs":2,"outputs":2,"activation":"softmax"}],"theta":[0.0]}"#;
        assert!(from_json(text).is_err());
    }
}
