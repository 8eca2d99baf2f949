//! Momentum-resolved fidelity between states of two-band and Dirac lattice
//! Hamiltonians, and the gap, zero and invariant analysis built on it.

pub mod correspondence;
pub mod error;
pub mod fidelity;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod scan;
pub mod spectrum;

pub use correspondence::{
    antipodal_lambda, counterexample_suite, critical_line, zero_fidelity_pairs, AntipodalWitness,
    CriticalLine, SuiteReport,
};
pub use error::{Error, Result};
pub use fidelity::{
    fidelity_at, fidelity_gibbs, fidelity_ising_k, fidelity_ising_total, fidelity_map,
    fidelity_product, fidelity_pure, Beta, Fidelity, GibbsContext,
};
pub use grid::{Grid2D, GridSpec, DEFAULT_GRID, GAPLESS_SENTINEL};
pub use model::{
    band_energies, catalog, eval_h, HVector, ModelId, ModelSpec, Momentum, ParamPoint,
};
pub use oracle::fidelity_oracle;
pub use scan::{parse_config, run_job, write_grid_csv, write_pgm, RunOptions, ScanJob};
pub use spectrum::{
    chern_number, gap_map, gapless_on_segment, tri_antipodality, z2_strong, zero_exponent,
    SegmentEvent, SegmentReport, TRI_MOMENTA,
};
