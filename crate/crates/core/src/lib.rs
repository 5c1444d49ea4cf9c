pub mod casestudy;
pub mod data_model;
pub mod knowledge_base;
pub mod recommender;
pub mod renderer;
