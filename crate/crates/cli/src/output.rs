use std::io::{self, Write};

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
}

/// Writes one record per call: a JSON line in jsonl mode, the given text
/// otherwise.
pub struct Emitter {
    format: Format,
    out: io::StdoutLock<'static>,
}

impl Emitter {
    pub fn new(format: Format) -> Self {
        Emitter {
            format,
            out: io::stdout().lock(),
        }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn record(
        &mut self,
        schema: &str,
        payload: Map<String, Value>,
        text: impl FnOnce() -> String,
    ) -> io::Result<()> {
        match self.format {
            Format::Jsonl => {
                let mut rec = Map::new();
                rec.insert("payload".into(), Value::Object(payload));
                rec.insert("schema".into(), Value::String(schema.into()));
                writeln!(self.out, "{}", Value::Object(rec))?;
            }
            Format::Text => writeln!(self.out, "{}", text())?,
        }
        self.out.flush()
    }

    /// Free-form text output, skipped in jsonl mode.
    pub fn text(&mut self, line: &str) -> io::Result<()> {
        if self.format == Format::Text {
            writeln!(self.out, "{line}")?;
            self.out.flush()?;
        }
        Ok(())
    }
}

/// Integers go out as decimal strings so that no reader loses precision.
pub fn num(n: impl ToString) -> Value {
    Value::String(n.to_string())
}

pub fn opt_num<T: ToString>(n: Option<T>) -> Value {
    n.map_or(Value::Null, num)
}

#[macro_export]
macro_rules! payload {
    ($($key:literal => $value:expr),* $(,)?) => {{
        let mut map = serde_json::Map::new();
        $(map.insert($key.to_string(), serde_json::Value::from($value));)*
        map
    }};
}
