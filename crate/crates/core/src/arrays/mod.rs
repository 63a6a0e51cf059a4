//! The array space `Λ^G` at finite scale.
//!
//! A cell is Zero, One, Star or a point of the base subshift truncated to
//! `B_r`. A column stacks cells over rows `-K..=K`; a window assigns a column
//! to every position of a box. Row 0 carries the orbit after embedding,
//! negative rows carry control symbols written by the stage codes, positive
//! rows archive overwritten content.

mod block;
mod cell;
mod io;
mod window;

pub use block::{
    block_distance, eps_dense_family, find_occurrences, find_occurrences_in, Block, FamilyMember,
    DOMAIN_MISMATCH_DISTANCE,
};
pub(crate) use block::occurrence_indices;
pub use cell::{cell_distance, Cell, CellKind, PatternLayout};
pub use io::{render_ascii, render_pgm, window_from_json, window_to_json};
pub use window::{column_distance, hat_embed, ArrayWindow, BasePattern, Column};
