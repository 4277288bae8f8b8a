//! Distributed Patricia trie text index over a simulated bulk-synchronous
//! machine, with a distributed suffix-array baseline.

pub mod codec;
pub mod dpt;
pub mod dsa;
pub mod global;
pub mod index_io;
pub mod patricia;
pub mod report;
pub mod sim;
pub mod succinct;
pub mod text;

pub use dpt::{
    BatchOutcome, DptConfig, DptError, DptIndex, Query, QueryError, QueryKind, QueryResult,
    QueryValue,
};
pub use dsa::{DsaIndex, FetchStats};
pub use global::{GlobalTrie, RoutingResult};
pub use index_io::{load_index, save_index};
pub use patricia::{Backing, BlindOutcome, PatriciaTrie};
pub use report::{space_report, SpaceReport, DEFAULT_POS_WIDTH};
pub use sim::{CostLedger, Machine, SimError};
pub use text::{Pos, Text};
