pub mod compiler;
pub mod dense;
pub mod encoder;
pub mod error;
pub mod gf;
pub mod io;
pub mod params;
pub mod recovery;
pub mod secrecy;
pub mod state;
pub mod verify;
