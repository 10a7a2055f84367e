//! Trace CSV format.
//!
//! One header line then one line per plant step, LF-terminated. Numbers are
//! written with 17 significant digits so that reading a file back yields
//! bit-identical values.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::sim::TraceRow;
use crate::Vec2;

pub const HEADER: &str = "t,q1,q2,qd1,qd2,e1,e2,edot1,edot2,sigma1,sigma2,tau1,tau2,d1,d2,L";
const COLUMNS: usize = 16;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line 1: expected header '{HEADER}', found '{0}'")]
    Header(String),
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
}

fn fields(r: &TraceRow) -> [f64; COLUMNS] {
    [
        r.t, r.q[0], r.q[1], r.qd[0], r.qd[1], r.e[0], r.e[1], r.edot[0], r.edot[1], r.sigma[0], r.sigma[1],
        r.tau[0], r.tau[1], r.d[0], r.d[1], r.lyapunov,
    ]
}

pub fn write_rows<W: Write>(rows: &[TraceRow], mut w: W) -> io::Result<()> {
    let mut line = String::with_capacity(COLUMNS * 25);
    writeln!(w, "{HEADER}")?;
    for r in rows {
        line.clear();
        for (i, v) in fields(r).iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            use std::fmt::Write as _;
            let _ = write!(line, "{v:.16e}");
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn to_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads rows back. Joint velocities and the desired velocity are not part
/// of the format and come back as NaN.
pub fn read_rows<R: BufRead>(r: R) -> Result<Vec<TraceRow>, CsvError> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != HEADER {
        return Err(CsvError::Header(header));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let mut v = [0.0; COLUMNS];
        let mut count = 0;
        for (j, tok) in line.split(',').enumerate() {
            if j >= COLUMNS {
                count = j + 1;
                break;
            }
            v[j] = tok.parse().map_err(|_| CsvError::Row {
                line: n,
                msg: format!("column {} is not a number: '{tok}'", j + 1),
            })?;
            count = j + 1;
        }
        if count != COLUMNS {
            return Err(CsvError::Row {
                line: n,
                msg: format!("expected {COLUMNS} columns"),
            });
        }
        let nan = Vec2::repeat(f64::NAN);
        rows.push(TraceRow {
            t: v[0],
            q: Vec2::new(v[1], v[2]),
            qdot: nan,
            qd: Vec2::new(v[3], v[4]),
            qd_dot: nan,
            e: Vec2::new(v[5], v[6]),
            edot: Vec2::new(v[7], v[8]),
            sigma: Vec2::new(v[9], v[10]),
            tau: Vec2::new(v[11], v[12]),
            d: Vec2::new(v[13], v[14]),
            lyapunov: v[15],
        });
    }
    Ok(rows)
}
