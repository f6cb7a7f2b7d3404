pub mod dtw;
pub mod evaluate;
pub mod extract;
pub mod represent;
