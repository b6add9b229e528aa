//! Command-line harness for the gatx engine: builds instances, runs GAT or
//! OPH, audits the result independently and writes reports and tables.

pub mod audit;
pub mod commands;
pub mod report;
