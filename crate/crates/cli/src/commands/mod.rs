pub mod bench;
pub mod fit;
pub mod plot;
