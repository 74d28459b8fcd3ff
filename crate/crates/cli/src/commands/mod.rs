pub mod construct;
pub mod demo;
pub mod falsify;
pub mod search;
pub mod selfcomm;
pub mod verify;
