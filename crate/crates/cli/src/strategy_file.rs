//! TOML strategy files.
//!
//! ```toml
//! n = 2
//! input_state = [0.0, 0.0, 0.0]
//! alice = [[0.7071067811865476, 0.0, 0.7071067811865476], [0.7071067811865476, 0.0, -0.7071067811865476]]
//! bob = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use temporal_rac::{BlochVector, TemporalStrategy};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub n: usize,
    pub input_state: [f64; 3],
    pub alice: Vec<[f64; 3]>,
    pub bob: Vec<[f64; 3]>,
}

impl StrategyFile {
    pub fn from_strategy(strategy: &TemporalStrategy) -> Self {
        Self {
            n: strategy.n(),
            input_state: strategy.input_state().to_array(),
            alice: strategy.alice_axes().iter().map(|v| v.to_array()).collect(),
            bob: strategy.bob_axes().iter().map(|v| v.to_array()).collect(),
        }
    }

    pub fn to_strategy(&self) -> temporal_rac::Result<TemporalStrategy> {
        let axes = |list: &[[f64; 3]]| list.iter().map(|&v| BlochVector::from_array(v)).collect();
        TemporalStrategy::with_input_state(
            self.n,
            axes(&self.alice),
            axes(&self.bob),
            BlochVector::from_array(self.input_state),
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    /// Floats are written with 17 significant digits, so reading the text
    /// back reproduces every coordinate bit for bit.
    pub fn to_toml(&self) -> String {
        fn vector(v: &[f64; 3]) -> String {
            format!("[{:.16e}, {:.16e}, {:.16e}]", v[0], v[1], v[2])
        }
        fn list(vs: &[[f64; 3]]) -> String {
            let mut s = String::from("[\n");
            for v in vs {
                let _ = writeln!(s, "    {},", vector(v));
            }
            s.push(']');
            s
        }
        format!(
            "n = {}\ninput_state = {}\nalice = {}\nbob = {}\n",
            self.n,
            vector(&self.input_state),
            list(&self.alice),
            list(&self.bob)
        )
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_toml())
    }
}
