pub mod bias;
pub mod eval;
pub mod report;
pub mod study;
pub mod train;
