#![allow(dead_code)]

pub mod encoders;
