pub mod christoffel;
