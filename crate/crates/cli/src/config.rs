//! Run configuration: flags override an optional TOML file, which
//! overrides built-in defaults.

use std::path::Path;

use clap::{Args, ValueEnum};
use serde::Deserialize;
use vne_core::mepde::{BacktrackLimit, Greedy, Mepde, SolveParams, Solver};
use vne_core::objectives::FragmentationParams;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Mepde,
    Greedy,
}

/// Every field is optional so that a file can set only what it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub solver: Option<SolverKind>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub population: Option<usize>,
    pub hops: Option<usize>,
    pub backtrack_factor: Option<u32>,
    pub q: Option<u32>,
    pub mutation: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::read(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

#[derive(Args, Debug, Default)]
pub struct SolverFlags {
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    /// Generations after the initial population.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Longest substrate path allowed for one virtual link.
    #[arg(long)]
    pub hops: Option<usize>,
    /// Backtracking budget per virtual node.
    #[arg(long)]
    pub backtrack_factor: Option<u32>,
    /// Fragmentation exponent.
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub mutation: Option<f64>,
    /// TOML file with any of the above keys plus `seed`.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub params: SolveParams,
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(
        flags: &SolverFlags,
        seed_flag: Option<u64>,
        default_seed: u64,
    ) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let defaults = SolveParams::default();
        let q = flags.q.or(file.q).unwrap_or(defaults.fragmentation.q());
        let fragmentation =
            FragmentationParams::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
        let seed = seed_flag.or(file.seed).unwrap_or(default_seed);
        let params = SolveParams {
            iterations_max: flags
                .iterations
                .or(file.iterations)
                .unwrap_or(defaults.iterations_max),
            population_size: flags
                .population
                .or(file.population)
                .unwrap_or(defaults.population_size),
            hops_max: flags.hops.or(file.hops).unwrap_or(defaults.hops_max),
            max_backtrack: match flags.backtrack_factor.or(file.backtrack_factor) {
                Some(k) => BacktrackLimit::PerVirtualNode(k),
                None => defaults.max_backtrack,
            },
            fragmentation,
            mutation_probability: flags
                .mutation
                .or(file.mutation)
                .unwrap_or(defaults.mutation_probability),
            seed,
        };
        params
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            solver: flags.solver.or(file.solver).unwrap_or(SolverKind::Mepde),
            params,
            seed,
        })
    }

    pub fn solver(&self) -> Box<dyn Solver> {
        match self.solver {
            SolverKind::Mepde => Box::new(Mepde {
                params: self.params,
            }),
            SolverKind::Greedy => Box::new(Greedy {
                params: self.params,
            }),
        }
    }
}
