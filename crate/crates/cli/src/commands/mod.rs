pub mod qnpas;
pub mod simulate;
pub mod spectra;
pub mod stability;
pub mod trim;
pub mod trimspace;
