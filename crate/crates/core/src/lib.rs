pub mod field;
pub mod network;
pub mod protocol;
pub mod io;
pub mod security;
pub mod cli;
