pub mod error;
pub mod pulse;
pub mod state;
pub mod wave;
pub mod blockade;
pub mod fringe;
pub mod ode;
pub mod optimize;
pub mod budget;
pub mod experiment;
