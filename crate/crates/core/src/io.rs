//! JSON encoding: the channel file format and a float formatter that writes
//! every number with 17 significant digits, so emitted files are
//! byte-reproducible and re-parse to identical `f64`s.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};
use crate::prob::UniverseShape;

/// On-disk channel layout: `rows[flat(x)][y] = p(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub alphabets: Vec<usize>,
    pub outputs: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&PrivacyChannel> for ChannelFile {
    fn from(ch: &PrivacyChannel) -> Self {
        ChannelFile {
            alphabets: ch.input_shape().sizes().to_vec(),
            outputs: ch.output_size(),
            rows: ch.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl TryFrom<ChannelFile> for PrivacyChannel {
    type Error = Error;

    fn try_from(file: ChannelFile) -> Result<Self> {
        let shape = UniverseShape::new(file.alphabets)?;
        if file.rows.len() != shape.total_size() {
            return Err(Error::Dimension(format!(
                "{} rows for a universe of size {}",
                file.rows.len(),
                shape.total_size()
            )));
        }
        if let Some(x) = file.rows.iter().position(|r| r.len() != file.outputs) {
            return Err(Error::Dimension(format!(
                "row {x} has {} entries, outputs is {}",
                file.rows[x].len(),
                file.outputs
            )));
        }
        PrivacyChannel::new(shape, file.outputs, file.rows.into_iter().flatten().collect())
    }
}

pub fn parse_channel(text: &str) -> Result<PrivacyChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}

pub fn channel_to_json(ch: &PrivacyChannel) -> String {
    to_json(&ChannelFile::from(ch))
}

/// Compact JSON with fixed 17-significant-digit floats and a trailing
/// newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization of plain data cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Formats a float with 17 significant digits in scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}
