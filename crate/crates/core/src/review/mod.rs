//! Double-review queue for generated candidates.

mod resolve;
mod store;

pub use resolve::{effective, resolve_status, Resolution};
pub use store::{
    replay, EnqueueReport, ReviewError, ReviewStore, StoreError, CANDIDATES_FILE, DECISIONS_FILE,
};
