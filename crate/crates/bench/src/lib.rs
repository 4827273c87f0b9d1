pub use betatile::*;
