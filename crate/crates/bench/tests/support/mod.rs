pub mod reported;
