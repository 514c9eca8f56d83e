//! Ordered JSON / CSV / text emission.
//!
//! Floats are always written with 17 significant digits in scientific
//! notation, so every value round-trips bit-exactly and output bytes are a
//! pure function of the data.

use std::fmt::Write;

/// Formats `x` with 17 significant digits. Non-finite values become the
/// JSON-compatible strings `"inf"`, `"-inf"`, `"nan"` (callers that embed in
/// JSON go through [`Json::Float`], which quotes them).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// A JSON value with insertion-ordered objects.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object() -> ObjectBuilder {
        ObjectBuilder(Vec::new())
    }

    pub fn to_json_string(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out);
        out
    }

    fn write_json(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(x) => {
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    write_str(out, &fmt_f64(*x));
                }
            }
            Json::Str(s) => write_str(out, s),
            Json::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write_json(out);
                }
                out.push(']');
            }
            Json::Object(fields) => {
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_str(out, key);
                    out.push(':');
                    value.write_json(out);
                }
                out.push('}');
            }
        }
    }

    /// `key: value` lines; nested values are shown as compact JSON.
    pub fn to_text(&self) -> String {
        match self {
            Json::Object(fields) => {
                let mut out = String::new();
                for (key, value) in fields {
                    let rendered = match value {
                        Json::Str(s) => s.clone(),
                        other => other.to_json_string(),
                    };
                    let _ = writeln!(out, "{key}: {rendered}");
                }
                out
            }
            Json::Str(s) => format!("{s}\n"),
            other => format!("{}\n", other.to_json_string()),
        }
    }
}

fn write_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

pub struct ObjectBuilder(Vec<(String, Json)>);

impl ObjectBuilder {
    pub fn field(mut self, key: &str, value: impl Into<Json>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn build(self) -> Json {
        Json::Object(self.0)
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Self {
        Json::Bool(b)
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Float(x)
    }
}

impl From<&str> for Json {
    fn from(s: &str) -> Self {
        Json::Str(s.to_string())
    }
}

impl From<String> for Json {
    fn from(s: String) -> Self {
        Json::Str(s)
    }
}

macro_rules! json_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Json {
            fn from(i: $t) -> Self {
                Json::Int(i as i128)
            }
        }
    )*};
}
json_int!(u8, u32, u64, usize, i32, i64);

impl From<u128> for Json {
    fn from(i: u128) -> Self {
        i128::try_from(i)
            .map(Json::Int)
            .unwrap_or_else(|_| Json::Str(i.to_string()))
    }
}

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Self {
        v.map_or(Json::Null, Into::into)
    }
}

impl<T: Into<Json>> From<Vec<T>> for Json {
    fn from(items: Vec<T>) -> Self {
        Json::Array(items.into_iter().map(Into::into).collect())
    }
}
