//! Virtual network embedding on a capacitated substrate: the network
//! model, embedding objectives, a Pareto evolutionary embedder with a
//! greedy baseline, synthetic workloads, an online admission simulator
//! and plain-text file formats.

pub mod dataio;
pub mod mepde;
pub mod netmodel;
pub mod objectives;
pub mod pareto;
pub mod simulator;
pub mod workload;
