use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

/// `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Comma-separated table with a header row and LF line endings.
pub struct Csv {
    buf: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            buf,
            width: header.len(),
        }
    }

    /// Appends a row of already formatted fields.
    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        debug_assert_eq!(fields.len(), self.width);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn nums(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&x| num(x)).collect();
        self.row(&fields);
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

/// Serializes `value` with fields in declaration order and floats at full
/// precision.
pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser).expect("serializable value");
    let mut s = String::from_utf8(out).expect("utf-8 json");
    s.push('\n');
    s
}

/// Minimal SVG of polylines in `(θ, p)` over `[0, 1] × [p_lo, p_hi]`.
pub struct Svg {
    width: f64,
    height: f64,
    p_range: (f64, f64),
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64, p_range: (f64, f64)) -> Self {
        Self {
            width,
            height,
            p_range,
            body: String::new(),
        }
    }

    fn to_screen(&self, (x, p): (f64, f64)) -> (f64, f64) {
        let (lo, hi) = self.p_range;
        (x * self.width, (hi - p) / (hi - lo) * self.height)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for (i, &pt) in pts.iter().enumerate() {
            let (x, y) = self.to_screen(pt);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn finish(self) -> String {
        let (w, h) = (self.width, self.height);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}
