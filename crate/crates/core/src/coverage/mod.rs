//! Coupling maps, chain layouts and covering sets.

mod cover;
mod map;
mod paths;

pub use cover::{
    greedy_cover, validate_cover, CoverOptions, CoverReport, CoveringSet, DEFAULT_PATH_CAP,
    DEFAULT_RESTARTS,
};
pub use map::{builtin_topology, load_coupling_map, CouplingMap, DEVICE_FIXTURES};
pub use paths::{enumerate_paths, Layout, PathEnumeration};
