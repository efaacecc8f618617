//! SER curve CSV files.
//!
//! Header (exact):
//! `snr_db,trials,errors,ser,ci_half_width,bound_lower,bound_upper,bound_up1,bound_lb1,bound_floor`.
//! Absent bounds are empty fields. Reals are written in shortest
//! round-trip form, so parsing a file back gives the same numbers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use qce_core::engine::BoundColumns;
use qce_core::SerPoint;

use crate::error::{LabError, Result};

pub const HEADER: [&str; 10] = [
    "snr_db",
    "trials",
    "errors",
    "ser",
    "ci_half_width",
    "bound_lower",
    "bound_upper",
    "bound_up1",
    "bound_lb1",
    "bound_floor",
];

pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

pub fn write_points<W: Write>(points: &[SerPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for p in points {
        let b = &p.bounds;
        w.write_record([
            format_f64(p.snr_db),
            p.trials.to_string(),
            p.errors.to_string(),
            format_f64(p.ser),
            format_f64(p.ci_half_width),
            opt(b.lower),
            opt(b.upper),
            opt(b.up1),
            opt(b.lb1),
            opt(b.floor),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a curve to `path`.
pub fn emit_csv(points: &[SerPoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(LabError::CsvFormat("refusing to write an empty curve".into()));
    }
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_points(points, std::io::BufWriter::new(file)).map_err(|source| LabError::Csv {
        path: path.to_owned(),
        source,
    })
}

pub fn read_points<R: Read>(input: R) -> Result<Vec<SerPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r
        .headers()
        .map_err(|e| LabError::CsvFormat(e.to_string()))?
        .clone();
    if header.iter().ne(HEADER) {
        return Err(LabError::CsvFormat(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| LabError::CsvFormat(e.to_string()))?;
        let line = row + 2;
        let field = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| {
                LabError::CsvFormat(format!("line {line}: bad `{}` value `{}`", HEADER[i], &rec[i]))
            })
        };
        let count = |i: usize| -> Result<u64> {
            rec[i].parse::<u64>().map_err(|_| {
                LabError::CsvFormat(format!("line {line}: bad `{}` value `{}`", HEADER[i], &rec[i]))
            })
        };
        let optional = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                field(i).map(Some)
            }
        };
        points.push(SerPoint {
            snr_db: field(0)?,
            trials: count(1)?,
            errors: count(2)?,
            ser: field(3)?,
            ci_half_width: field(4)?,
            degenerate_decodes: 0,
            bounds: BoundColumns {
                lower: optional(5)?,
                upper: optional(6)?,
                up1: optional(7)?,
                lb1: optional(8)?,
                floor: optional(9)?,
            },
        });
    }
    Ok(points)
}

pub fn read_csv(path: &Path) -> Result<Vec<SerPoint>> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    read_points(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_without_bounds() {
        let mut buf = Vec::new();
        write_points(&[SerPoint::from_counts(10.0, 1000, 7)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], HEADER.join(","));
        assert!(lines[1].starts_with("10.0,1000,7,0.007,"));
        assert!(lines[1].ends_with(",,,,,"));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_points("a,b\n1,2\n".as_bytes()).is_err());
        let bad = format!("{}\n1.0,x,0,0,0,,,,,\n", HEADER.join(","));
        let e = read_points(bad.as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    fn any_bound() -> impl Strategy<Value = Option<f64>> {
        proptest::option::of(prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), 1e-300f64..1.0])
    }

    proptest! {
        #[test]
        fn round_trip(rows in proptest::collection::vec(
            (-50.0f64..80.0, 1u64..u64::MAX, any::<u64>(), any_bound(), any_bound(), any_bound(), any_bound(), any_bound()),
            1..8,
        )) {
            let points: Vec<SerPoint> = rows
                .into_iter()
                .map(|(snr, trials, errors, lower, upper, up1, lb1, floor)| {
                    let mut p = SerPoint::from_counts(snr, trials, errors % (trials + 1).max(1));
                    p.bounds = BoundColumns { lower, upper, up1, lb1, floor };
                    p
                })
                .collect();
            let mut buf = Vec::new();
            write_points(&points, &mut buf).unwrap();
            prop_assert_eq!(read_points(buf.as_slice()).unwrap(), points);
        }
    }
}
