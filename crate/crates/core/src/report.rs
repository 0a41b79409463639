//! Report schema shared by the CLI: versioned JSON with per-check
//! verdicts, fixed-order CSV tables, and SVG heatmaps for planar fields.
//!
//! Outputs are deterministic: no timestamps, no absolute paths, struct
//! field order fixed, and CSV floats printed with 17 significant digits.
//! An inequality verdict names the check, the inequality it asserts (the
//! anchor string), the measured slack and the pass flag, so the
//! check-to-output traceability is auditable from the files alone.

use serde::{Deserialize, Serialize};

pub const REPORT_FORMAT_VERSION: u32 = 1;

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// FNV-1a 64-bit digest, hex encoded; used as the input digest of
/// reports.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// 17-significant-digit scientific formatting for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    /// the asserted inequality, written out.
    pub anchor: String,
    pub slack: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn new(check: &str, anchor: &str, slack: f64, pass: bool) -> Self {
        Self {
            check: check.to_string(),
            anchor: anchor.to_string(),
            slack,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub tool_version: String,
    pub operation: String,
    pub input_digest: String,
    pub parameters: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_point_csv: Option<String>,
    pub aggregates: serde_json::Value,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(operation: &str, input_digest: String, parameters: serde_json::Value) -> Self {
        Self {
            format_version: REPORT_FORMAT_VERSION,
            tool_version: tool_version().to_string(),
            operation: operation.to_string(),
            input_digest,
            parameters,
            per_point_csv: None,
            aggregates: serde_json::Value::Null,
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Pretty JSON with every float at 17 significant digits (lossless
    /// for f64 and byte-stable across runs).
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17Formatter::new());
        serde::Serialize::serialize(self, &mut ser).expect("report serialization cannot fail");
        String::from_utf8(out).expect("report JSON is utf-8")
    }
}

/// Pretty formatter printing finite floats as {:.16e} (17 significant
/// digits). Non-finite values cannot appear in reports; they would be a
/// bug upstream, so they serialize as null like serde_json does.
struct Fixed17Formatter {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl Fixed17Formatter {
    fn new() -> Self {
        Self {
            pretty: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for Fixed17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    // everything else delegates to the pretty formatter
    fn begin_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, w)
    }
    fn end_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_array(&mut self.pretty, w)
    }
    fn begin_array_value<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, w, first)
    }
    fn end_array_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, w)
    }
    fn begin_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, w)
    }
    fn end_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object(&mut self.pretty, w)
    }
    fn begin_object_key<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, w, first)
    }
    fn end_object_key<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object_key(&mut self.pretty, w)
    }
    fn begin_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, w)
    }
    fn end_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, w)
    }
}

/// Fixed-column CSV table; floats rendered by `fmt_f64`.
pub struct CsvTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.push(values.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// SVG heatmap of a planar scalar grid with a fixed diverging palette
/// (blue through white to red) and a scale annotation.
///
/// `values[row][col]`; None cells (outside the domain) are left blank.
pub fn svg_heatmap(values: &[Vec<Option<f64>>], cell_px: usize, title: &str) -> String {
    let rows = values.len();
    let cols = values.first().map_or(0, |r| r.len());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in values {
        for v in row.iter().flatten() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-300 {
        hi = lo + 1.0;
    }
    let width = cols * cell_px;
    let height = rows * cell_px + 40;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\">\n"
    ));
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                let (r, g, b) = diverging_color(t);
                svg.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{cell_px}\" height=\"{cell_px}\" fill=\"rgb({r},{g},{b})\"/>\n",
                    j * cell_px,
                    i * cell_px,
                ));
            }
        }
    }
    svg.push_str(&format!(
        "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{title}: min {} max {}</text>\n",
        rows * cell_px + 16,
        fmt_f64(lo),
        fmt_f64(hi),
    ));
    svg.push_str(&format!(
        "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">palette: blue = min, white = mid, red = max</text>\n",
        rows * cell_px + 32,
    ));
    svg.push_str("</svg>\n");
    svg
}

fn diverging_color(t: f64) -> (u8, u8, u8) {
    // blue (0) -> white (0.5) -> red (1)
    let (r, g, b) = if t < 0.5 {
        let s = t * 2.0;
        (59.0 + (255.0 - 59.0) * s, 76.0 + (255.0 - 76.0) * s, 192.0 + (255.0 - 192.0) * s)
    } else {
        let s = (t - 0.5) * 2.0;
        (255.0 - (255.0 - 180.0) * s, 255.0 - (255.0 - 4.0) * s, 255.0 - (255.0 - 38.0) * s)
    };
    (r.round() as u8, g.round() as u8, b.round() as u8)
}
