pub mod error;
pub mod games;
pub mod ideal;
pub mod meager;
pub mod natset;
pub mod rational;
pub mod sequence;
pub mod submeasure;
pub mod transforms;

pub use error::{Error, Result};
pub use natset::{BlockSelector, NatSet, Tri};
pub use rational::{Coord, Q};
