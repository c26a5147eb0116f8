pub mod graph;
pub mod rewiring;
pub mod schreier;
pub mod stats;
pub mod trichotomy;
