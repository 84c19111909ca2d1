//! Canonical configurations.

use beckner::operator_core::{diag, re, unit};
use beckner::semigroup::{build_from_jumps, JumpTerm};

use crate::config::{ExperimentConfig, GeneratorSpec, JumpSpec, MatrixJson, SigmaSpec};
use crate::error::ConfigError;

pub const FIXTURE_NAMES: [&str; 4] = ["depol2", "depol3", "random_dbc_seeded", "classical_embed"];

fn base(d: usize, eigenvalues: Vec<f64>, generator: GeneratorSpec) -> ExperimentConfig {
    ExperimentConfig { dimension: d, sigma: SigmaSpec { eigenvalues, basis: None }, generator, ..Default::default() }
}

/// Two-level chain with stationary weights (θ, 1−θ): the jump |0⟩⟨1| with its modular partner
/// moves population, a Z jump dephases. Both are scaled so populations and coherences relax at
/// unit rate; θ = 1/2 gives the depolarizing semigroup at I/2.
pub fn classical_embed(theta: f64) -> Result<ExperimentConfig, ConfigError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(ConfigError::invalid("theta", "must lie in (0, 1)"));
    }
    let s = [theta, 1.0 - theta];
    let omega = (s[1] / s[0]).ln();
    let v = unit(2, 0, 1);
    let l = build_from_jumps(&diag(&s), &[JumpTerm { v: v.clone(), omega }])
        .map_err(|e| ConfigError::invalid("theta", e.to_string()))?;
    // σ-centred populations and |0⟩⟨1| are both eigenvectors
    let f = diag(&[1.0 - theta, -theta]);
    let rate = -l.apply(&f)[(0, 0)].re / f[(0, 0)].re;
    let coherence = -l.apply(&v)[(0, 1)].re / rate;
    let v = v * re(1.0 / rate.sqrt());
    let mut list = vec![JumpSpec { v: MatrixJson::from_matrix(&v), omega }];
    if coherence < 1.0 {
        // c·Z contributes 4c² to the coherence rate
        let z = diag(&[1.0, -1.0]) * re((1.0 - coherence).sqrt() / 2.0);
        list.push(JumpSpec { v: MatrixJson::from_matrix(&z), omega: 0.0 });
    }
    Ok(base(2, s.to_vec(), GeneratorSpec::Jumps { list }))
}

pub fn fixture(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg = match name {
        "depol2" => base(2, vec![0.75, 0.25], GeneratorSpec::Depolarizing { gamma: 1.0 }),
        "depol3" => base(3, vec![1.0 / 3.0; 3], GeneratorSpec::Depolarizing { gamma: 1.0 }),
        "random_dbc_seeded" => base(3, vec![0.5, 0.3, 0.2], GeneratorSpec::RandomDbc { pairs: 3, diag: 1, seed: 7 }),
        "classical_embed" => classical_embed(0.5)?,
        other => return Err(ConfigError::UnknownFixture(other.to_string())),
    };
    cfg.materialize()
}
