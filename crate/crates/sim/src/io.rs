//! File formats: cf32 IQ dumps, channel profiles and alist parity-check
//! matrices.

use std::fs;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use otfs_core::channel::TdlProfile;
use otfs_core::fec::ParityCheckMatrix;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {len} bytes is not a whole number of complex float32 samples")]
    TruncatedCf32 { path: String, len: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid content: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FormatError>;

/// Encode samples as little-endian `f32` pairs `I0 Q0 I1 Q1 ...`.
pub fn encode_cf32(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_cf32(bytes: &[u8]) -> Option<Vec<Complex64>> {
    if bytes.len() % 8 != 0 {
        return None;
    }
    Some(
        bytes
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect(),
    )
}

pub fn write_cf32(path: impl AsRef<Path>, samples: &[Complex64]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_cf32(samples))?;
    Ok(())
}

pub fn read_cf32(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_cf32(&bytes).ok_or_else(|| FormatError::TruncatedCf32 {
        path: path.display().to_string(),
        len: bytes.len() as u64,
    })
}

/// Parse a channel profile: one `delay_ns power_db` pair per line, `#`
/// starts a comment, blank lines are skipped. Delays are absolute; the
/// returned profile stores them normalized by their power-weighted RMS
/// spread so `profile.delays()` gives them back in seconds.
pub fn parse_channel_profile(text: &str) -> Result<TdlProfile> {
    let mut delays = Vec::new();
    let mut powers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(FormatError::Parse {
                line,
                msg: format!("expected `delay_ns power_db`, got {} fields", fields.len()),
            });
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FormatError::Parse {
                    line,
                    msg: format!("bad {what} `{s}`"),
                })
        };
        let d = num(fields[0], "delay")?;
        let p = num(fields[1], "power")?;
        if d < 0.0 {
            return Err(FormatError::Parse {
                line,
                msg: format!("negative delay {d}"),
            });
        }
        delays.push(d * 1e-9);
        powers.push(p);
    }
    if delays.is_empty() {
        return Err(FormatError::Invalid("channel profile has no taps".into()));
    }
    let lin: Vec<f64> = powers.iter().map(|p| 10f64.powf(p / 10.0)).collect();
    let total: f64 = lin.iter().sum();
    let mean: f64 = delays.iter().zip(&lin).map(|(d, p)| d * p).sum::<f64>() / total;
    let var: f64 = delays.iter().zip(&lin).map(|(d, p)| (d - mean).powi(2) * p).sum::<f64>() / total;
    let rms = var.sqrt();
    let normalized = if rms > 0.0 {
        delays.iter().map(|d| d / rms).collect()
    } else {
        delays.clone()
    };
    let profile = TdlProfile {
        normalized_delays: normalized,
        power_db: powers,
        rms_delay_spread: if rms > 0.0 { rms } else { 1.0 },
        max_doppler: 0.0,
    };
    profile.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(profile)
}

pub fn read_channel_profile(path: impl AsRef<Path>) -> Result<TdlProfile> {
    parse_channel_profile(&fs::read_to_string(path)?)
}

/// Render a profile in the format `parse_channel_profile` reads.
pub fn format_channel_profile(profile: &TdlProfile) -> String {
    let mut s = String::from("# delay_ns power_db\n");
    for (d, p) in profile.delays().iter().zip(&profile.power_db) {
        s.push_str(&format!("{:.4} {:.1}\n", d * 1e9, p));
    }
    s
}

/// MacKay's alist text layout: sizes, max degrees, per-column and per-row
/// degrees, then 1-based neighbour lists (columns first, then rows).
pub fn format_alist(h: &ParityCheckMatrix) -> String {
    let vars = h.vars();
    let checks = h.checks();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    s.push_str(&format!("{} {}\n", h.n(), h.m()));
    let max_col = vars.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = checks.iter().map(Vec::len).max().unwrap_or(0);
    s.push_str(&format!("{max_col} {max_row}\n"));
    s.push_str(&join(&mut vars.iter().map(Vec::len)));
    s.push('\n');
    s.push_str(&join(&mut checks.iter().map(Vec::len)));
    s.push('\n');
    for v in vars {
        s.push_str(&join(&mut v.iter().map(|&c| c + 1)));
        s.push('\n');
    }
    for c in checks {
        s.push_str(&join(&mut c.iter().map(|&v| v + 1)));
        s.push('\n');
    }
    s
}

pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next_nums = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (i, l) = lines.next().ok_or_else(|| FormatError::Invalid(format!("alist ends before {what}")))?;
        let nums = l
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| FormatError::Parse {
                    line: i + 1,
                    msg: format!("bad integer `{t}` in {what}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((i + 1, nums))
    };
    let (line, dims) = next_nums("the size line")?;
    if dims.len() != 2 {
        return Err(FormatError::Parse {
            line,
            msg: "expected `n m`".into(),
        });
    }
    let (n, m) = (dims[0], dims[1]);
    next_nums("the max-degree line")?;
    let (line, col_deg) = next_nums("column degrees")?;
    if col_deg.len() != n {
        return Err(FormatError::Parse {
            line,
            msg: format!("{} column degrees for {n} columns", col_deg.len()),
        });
    }
    let (line, row_deg) = next_nums("row degrees")?;
    if row_deg.len() != m {
        return Err(FormatError::Parse {
            line,
            msg: format!("{} row degrees for {m} rows", row_deg.len()),
        });
    }
    let mut col_lists = Vec::with_capacity(n);
    for &d in &col_deg {
        let (line, v) = next_nums("a column list")?;
        // Some writers pad short lists with zeros.
        let v: Vec<usize> = v.into_iter().filter(|&x| x != 0).collect();
        if v.len() != d || v.iter().any(|&r| r > m) {
            return Err(FormatError::Parse {
                line,
                msg: "column list does not match its degree".into(),
            });
        }
        col_lists.push(v);
    }
    let mut checks = Vec::with_capacity(m);
    for &d in &row_deg {
        let (line, v) = next_nums("a row list")?;
        let v: Vec<usize> = v.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
        if v.len() != d || v.iter().any(|&c| c >= n) {
            return Err(FormatError::Parse {
                line,
                msg: "row list does not match its degree".into(),
            });
        }
        checks.push(v);
    }
    let h = ParityCheckMatrix::new(n, checks).map_err(|e| FormatError::Invalid(e.to_string()))?;
    for (j, rows) in col_lists.iter().enumerate() {
        let mut a: Vec<usize> = rows.iter().map(|r| r - 1).collect();
        let mut b = h.vars()[j].clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(FormatError::Invalid(format!("column {} disagrees with the row lists", j + 1)));
        }
    }
    Ok(h)
}

pub fn read_alist(path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    let f = fs::File::open(path)?;
    let mut text = String::new();
    BufReader::new(f).read_to_string(&mut text)?;
    parse_alist(&text)
}

pub fn write_alist(path: impl AsRef<Path>, h: &ParityCheckMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_alist(h).as_bytes())?;
    Ok(())
}
