//! CSV tables for per-frame pipeline output.
//!
//! ```text
//! track_<CLASS>.csv   frame,present,x,y,w,h
//! stages_<CLASS>.csv  frame,raw_x,raw_y,filled_x,filled_y,peaks_x,peaks_y,smooth_x,smooth_y
//! hcp.csv             frame,hands,smoothed,providers
//! ```
//!
//! Numbers use six decimals; missing values are empty cells.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hcp::HcpTimeline;
use crate::trackpost::{TrackResult, TrackTimeline};
use crate::types::{BBox, ObjectClass};

pub const TRACK_HEADER: &str = "frame,present,x,y,w,h";
pub const STAGES_HEADER: &str = "frame,raw_x,raw_y,filled_x,filled_y,peaks_x,peaks_y,smooth_x,smooth_y";
pub const HCP_HEADER: &str = "frame,hands,smoothed,providers";

pub fn track_file_name(class: ObjectClass) -> String {
    format!("track_{class}.csv")
}

pub fn stages_file_name(class: ObjectClass) -> String {
    format!("stages_{class}.csv")
}

pub const HCP_FILE_NAME: &str = "hcp.csv";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

pub fn write_track_csv(track: &TrackTimeline) -> String {
    let mut s = String::from(TRACK_HEADER);
    s.push('\n');
    for (i, b) in track.boxes.iter().enumerate() {
        match b {
            Some(b) => {
                let _ = writeln!(s, "{i},1,{:.6},{:.6},{:.6},{:.6}", b.x, b.y, b.w, b.h);
            }
            None => {
                let _ = writeln!(s, "{i},0,,,,");
            }
        }
    }
    s
}

fn rows(text: &str, header: &str, fields: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line == header {
            continue;
        }
        let f: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if f.len() != fields {
            return Err(Error::parse(n + 1, format!("expected {fields} fields, got {}", f.len())));
        }
        let frame: usize = f[0]
            .parse()
            .map_err(|_| Error::parse(n + 1, format!("bad frame `{}`", f[0])))?;
        if frame != out.len() {
            return Err(Error::parse(n + 1, format!("expected frame {}, got {frame}", out.len())));
        }
        out.push((n + 1, f));
    }
    Ok(out)
}

fn number(line: usize, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("bad number `{s}`")))
}

pub fn parse_track_csv(text: &str, class: ObjectClass) -> Result<TrackTimeline> {
    let boxes = rows(text, TRACK_HEADER, 6)?
        .into_iter()
        .map(|(line, f)| match f[1].as_str() {
            "0" => Ok(None),
            "1" => {
                let b = BBox::new(
                    number(line, &f[2])?,
                    number(line, &f[3])?,
                    number(line, &f[4])?,
                    number(line, &f[5])?,
                )
                .map_err(|e| Error::parse(line, e.to_string()))?;
                Ok(Some(b))
            }
            other => Err(Error::parse(line, format!("present must be 0 or 1, got `{other}`"))),
        })
        .collect::<Result<_>>()?;
    Ok(TrackTimeline { class, boxes })
}

pub fn write_stages_csv(result: &TrackResult) -> String {
    let (x, y) = (&result.x, &result.y);
    let mut s = String::from(STAGES_HEADER);
    s.push('\n');
    for i in 0..x.raw.len() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            cell(x.raw[i]),
            cell(y.raw[i]),
            cell(x.filled[i]),
            cell(y.filled[i]),
            cell(x.peaks_removed[i]),
            cell(y.peaks_removed[i]),
            cell(x.smoothed[i]),
            cell(y.smoothed[i]),
        );
    }
    s
}

pub fn write_hcp_csv(hcp: &HcpTimeline) -> String {
    let mut s = String::from(HCP_HEADER);
    s.push('\n');
    for i in 0..hcp.len() {
        let _ = writeln!(s, "{i},{},{:.6},{}", hcp.hands[i], hcp.smoothed[i], hcp.providers[i]);
    }
    s
}

pub fn parse_hcp_csv(text: &str) -> Result<HcpTimeline> {
    let mut t = HcpTimeline {
        hands: Vec::new(),
        smoothed: Vec::new(),
        providers: Vec::new(),
    };
    for (line, f) in rows(text, HCP_HEADER, 4)? {
        t.hands.push(
            f[1].parse()
                .map_err(|_| Error::parse(line, format!("bad hand count `{}`", f[1])))?,
        );
        t.smoothed.push(number(line, &f[2])?);
        let p: u8 = f[3]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad provider count `{}`", f[3])))?;
        if p > 3 {
            return Err(Error::parse(line, format!("provider count {p} above 3")));
        }
        t.providers.push(p);
    }
    Ok(t)
}
