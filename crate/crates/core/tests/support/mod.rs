#![allow(dead_code)]

pub mod bessel_oracle;
