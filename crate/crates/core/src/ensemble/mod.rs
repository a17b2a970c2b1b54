//! Sampling of the random block matrices `G_n^(p)` and construction of their
//! deterministic counterparts `F_n^(p)` and `F̃_n^(p)`.

mod build;
mod rng;
mod spectrum;

pub use build::{
    block_dof_layout, build_f, build_f_tilde, build_g, build_with, scalar_entry_dof, tilde_a_entry, tilde_b_entry,
    ChiEntry, EntrySource, ExpectedEntries, GammaWeights,
};
pub use rng::{chi_sample, RngSeed, StreamRng};
pub use spectrum::{EmpiricalSpectrum, SpectrumMeta};
