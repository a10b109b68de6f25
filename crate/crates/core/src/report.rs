//! Deterministic JSON output: fixed key order, floats with 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// Writes every finite float as `d.dddddddddddddddde±x`; non-finite values become `null`.
fn write_float<W: ?Sized + io::Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        if v == 0.0 {
            w.write_all(b"0.0")
        } else {
            write!(w, "{v:.16e}")
        }
    } else {
        w.write_all(b"null")
    }
}

macro_rules! delegate_formatter {
    ($name:ident, $inner:ty) => {
        struct $name<'a>($inner, std::marker::PhantomData<&'a ()>);

        impl<'a> Formatter for $name<'a> {
            fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
                write_float(w, v)
            }
            fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
                write_float(w, v as f64)
            }
            fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_array(w)
            }
            fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_array(w)
            }
            fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
                self.0.begin_array_value(w, first)
            }
            fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_array_value(w)
            }
            fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_object(w)
            }
            fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_object(w)
            }
            fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
                self.0.begin_object_key(w, first)
            }
            fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_object_value(w)
            }
            fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_object_value(w)
            }
        }
    };
}

delegate_formatter!(Pretty, PrettyFormatter<'a>);
delegate_formatter!(Compact, CompactFormatter);

fn render<T: Serialize + ?Sized, F: Formatter>(value: &T, f: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, f);
    value.serialize(&mut ser).expect("report values serialize");
    String::from_utf8(buf).expect("serde_json writes utf-8")
}

/// Indented JSON followed by a newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = render(value, Pretty(PrettyFormatter::with_indent(b"  "), std::marker::PhantomData));
    s.push('\n');
    s
}

/// One-line JSON without a trailing newline, for JSON-lines output.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> String {
    render(value, Compact(CompactFormatter, std::marker::PhantomData))
}
