//! G-Net models of web services: the composition algebra, a token-game
//! simulator with cross-net method invocation, flattening to
//! predicate/transition nets, reachability analysis and PROD export.

pub mod algebra;
pub mod analysis;
pub mod dsl;
pub mod guards;
pub mod marking;
pub mod model;
pub mod prodexport;
pub mod registry;
pub mod sim;
pub mod value;
