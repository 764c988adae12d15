//! Far-field data and direct sampling reconstructions for penetrable
//! scatterers with two conductive boundary coefficients in two dimensions.

pub mod aperture;
pub mod bie;
pub mod disk;
pub mod farfield;
pub mod geometry;
pub mod imaging;
pub mod params;
pub mod special;
