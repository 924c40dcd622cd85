pub mod cli;
pub mod cube;
pub mod datagen;
pub mod distfit;
pub mod dtree;
pub mod error;
pub mod grouping;
pub mod io;
pub mod special;
pub mod stats;
pub mod pipeline;
pub mod sampling;
