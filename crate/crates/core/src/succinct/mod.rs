//! Succinct building blocks: bit vectors with rank/select/findclose,
//! packed fixed-width integers, and the three ordinal tree encodings.

mod bitvec;
mod packed;
mod tree;

pub use bitvec::{BitVector, SuccinctError};
pub use packed::{width_for, PackedIntVec};
pub use tree::{encode, NodeId, PointerTree, SuccinctTree, TreeEncoding};
