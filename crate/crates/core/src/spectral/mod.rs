//! Discrete frequency lattice, test-function synthesis, L2 norms, lattice
//! convolution and null forms, and the anisotropic norm.

mod aniso;
mod convolve;
mod lattice;
mod nullform;
mod packets;

pub use aniso::anisotropic_norm;
pub use convolve::{
    convolve, convolve_direct, convolve_fft, convolve_windowed, restricted_product_norm,
    sum_lattice,
};
pub use lattice::{
    export_grid, import_grid, indicator_function, lattice_with_spacing, make_lattice,
    GridFunction, Lattice,
};
pub use nullform::{nullform_direct, nullform_sectored, NullformWeight};
pub use packets::{knapp_packet, PacketKind, PacketSpec};

pub(crate) use nullform::nullform_grid;
