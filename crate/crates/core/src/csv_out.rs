//! CSV output: RFC 4180 with CRLF line ends and 17 significant digits.

use csv::{Terminator, Writer, WriterBuilder};

use crate::error::{Error, Result};

pub(crate) fn writer() -> Writer<Vec<u8>> {
    WriterBuilder::new()
        .terminator(Terminator::CRLF)
        .from_writer(Vec::new())
}

/// Scientific notation with 17 significant digits, `.` as separator.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub(crate) fn finish(w: Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}
