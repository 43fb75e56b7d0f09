#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;
pub mod plots;
pub mod svg;
