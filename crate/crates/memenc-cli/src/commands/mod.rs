pub mod decode;
pub mod encode;
pub mod evaluate;
pub mod gendata;
pub mod robust;
pub mod sweep;
