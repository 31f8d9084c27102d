pub mod construct;
pub mod error;
pub mod field;
pub mod linalg;
pub mod poly;
pub mod search;
pub mod symmat;
pub mod transform;
