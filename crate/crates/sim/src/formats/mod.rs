pub mod class_model;
pub mod gvtf;
pub mod ppm;
pub mod profiles;
