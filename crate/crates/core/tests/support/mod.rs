pub mod oracle;
pub mod systems;
