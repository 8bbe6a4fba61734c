pub mod beamforming;
pub mod bounds;
pub mod channel;
pub mod experiment;
pub mod geometry;
pub mod numerics;
pub mod simulator;
