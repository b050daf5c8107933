pub mod grid;
pub mod plan;
pub mod recover;
pub mod report;
pub mod sample;
pub mod synth;
pub mod verify;
