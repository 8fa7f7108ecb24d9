//! Matrix Market and CSV input/output.

pub mod csv;
pub mod mtx;

pub use self::csv::{format_float, write_csv, CsvTable, CsvValue};
pub use mtx::{
    read_matrix_market, read_matrix_market_header, write_matrix_market_dense, write_matrix_market_sparse, MtxHeader,
    MtxMatrix,
};
