pub mod funcspace;
pub mod kernel;
pub mod lab;
pub mod lacunary;
pub mod maximal;
pub mod poisson;
pub mod quad;
pub mod special;
pub mod transform;
