pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod profiles;
pub mod selection;
pub mod synthetic;
pub mod textprep;
pub mod topicmodel;
pub mod topicnet;

pub use error::{Error, Result};
