pub mod exec;
pub mod game;
pub mod geometry;
pub mod scene;
pub mod sessionlog;
pub mod analytics;
