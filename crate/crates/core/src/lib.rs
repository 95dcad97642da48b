pub mod channels;
pub mod cliffordt;
pub mod cptpcraft;
pub mod craftopt;
pub mod shiftgen;
pub mod synthesis;
pub mod whitenoise;
pub mod harness;
