//! Models on disk use the canonical network text.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use lukmlp_core::NetworkState;

pub fn save_model(net: &NetworkState, path: &Path) -> Result<()> {
    fs::write(path, net.to_canonical_text()).with_context(|| format!("writing {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<NetworkState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NetworkState::from_canonical_text(&text).with_context(|| format!("parsing model {}", path.display()))
}
