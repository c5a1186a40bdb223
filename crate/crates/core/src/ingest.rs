//! Event timestamps: parsing, binning into a 0/1 sequence and the clustering
//! report for the block `1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::Recurrence;
use crate::record::{block_statistics, StatsOptions, StatsRecord};
use crate::symbolic::{scan_occurrences, Alphabet, Block, SymbolSequence};

/// Bins beyond this many are refused rather than allocated.
pub const MAX_BINS: usize = 1 << 31;
pub const SWEEP_FACTORS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Sorted, distinct event times with a half-open span `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    timestamps: Vec<f64>,
    start: f64,
    end: f64,
    /// Repeated timestamps dropped while parsing.
    pub duplicates: usize,
    /// Whether the input had to be reordered.
    pub reordered: bool,
}

impl EventSeries {
    /// Sorts and deduplicates; the span runs from the first event to just
    /// past the last.
    pub fn new(mut timestamps: Vec<f64>) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(Error::Empty("events"));
        }
        if let Some(bad) = timestamps.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("timestamp {bad} is not finite")));
        }
        let reordered = timestamps.windows(2).any(|w| w[0] > w[1]);
        timestamps.sort_by(f64::total_cmp);
        let before = timestamps.len();
        timestamps.dedup();
        let start = timestamps[0];
        let end = next_up(timestamps[timestamps.len() - 1]);
        Ok(EventSeries {
            duplicates: before - timestamps.len(),
            reordered,
            timestamps,
            start,
            end,
        })
    }

    pub fn with_span(mut self, start: f64, end: f64) -> Result<Self> {
        let (first, last) = (self.timestamps[0], self.timestamps[self.timestamps.len() - 1]);
        if !(start <= first && last < end) {
            return Err(Error::InvalidParameter(format!(
                "span [{start}, {end}) does not contain the events [{first}, {last}]"
            )));
        }
        self.start = start;
        self.end = end;
        Ok(self)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn median_gap(&self) -> Option<f64> {
        let mut gaps: Vec<f64> = self.timestamps.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len();
        Some(if n % 2 == 1 {
            gaps[n / 2]
        } else {
            (gaps[n / 2 - 1] + gaps[n / 2]) / 2.0
        })
    }

    /// A quarter of the median inter-event gap.
    pub fn default_bin_width(&self) -> Option<f64> {
        self.median_gap().map(|g| g / 4.0)
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    /// Zero-based CSV column; plain one-value-per-line text when absent.
    pub column: Option<usize>,
    pub has_header: bool,
}

/// One timestamp per line, or a CSV column. Blank lines and lines starting
/// with `#` are skipped in plain mode.
pub fn parse_events_str(text: &str, opts: &ParseOptions) -> Result<EventSeries> {
    let mut values = Vec::new();
    match opts.column {
        None => {
            let skip = usize::from(opts.has_header);
            for (i, line) in text.lines().enumerate().skip(skip) {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                values.push(parse_value(line, i + 1)?);
            }
        }
        Some(col) => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(opts.has_header)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            for row in reader.records() {
                let row = row?;
                let line = row.position().map_or(0, |p| p.line() as usize);
                let field = row.get(col).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("no column {col}"),
                })?;
                values.push(parse_value(field, line)?);
            }
        }
    }
    let series = EventSeries::new(values)?;
    if series.duplicates > 0 {
        log::warn!("collapsed {} duplicate timestamps", series.duplicates);
    }
    if series.reordered {
        log::warn!("timestamps were not sorted; sorted ascending");
    }
    Ok(series)
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a timestamp: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("timestamp must be finite: {field:?}"),
        });
    }
    Ok(v)
}

pub fn parse_events(path: impl AsRef<Path>, opts: &ParseOptions) -> Result<EventSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_events_str(&text, opts)
}

/// Symbol `1` at bin `i` iff some event lies in `[start + i w, start + (i + 1) w)`.
pub fn binarize(ev: &EventSeries, bin_width: f64) -> Result<SymbolSequence> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let bins = ((ev.end - ev.start) / bin_width).ceil();
    if bins.is_nan() || bins > MAX_BINS as f64 {
        return Err(Error::InvalidParameter(format!(
            "bin width {bin_width} gives {bins} bins, more than {MAX_BINS}"
        )));
    }
    let bins = (bins as usize).max(1);
    let mut data = vec![0u8; bins];
    for &t in &ev.timestamps {
        let i = ((t - ev.start) / bin_width).floor() as usize;
        data[i.min(bins - 1)] = 1;
    }
    SymbolSequence::new(Alphabet::BINARY, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    pub bin_width: f64,
    pub n_events: usize,
    pub duplicates: usize,
    pub bins: usize,
    pub censored: usize,
    /// `[gap in bins, count]`, ascending.
    pub gap_histogram: Vec<[u64; 2]>,
    pub verdict: Recurrence,
    /// `F(epsilon)` for the waiting time from a random bin.
    pub entry_at_epsilon: f64,
    pub stats: StatsRecord,
}

/// Bins the events (at a quarter of the median gap by default) and classifies
/// the clustering of the block `1`.
pub fn burst_report(ev: &EventSeries, bin_width: Option<f64>, opts: &StatsOptions) -> Result<BurstReport> {
    if ev.len() < 3 {
        return Err(Error::TooFewOccurrences {
            needed: 3,
            found: ev.len(),
        });
    }
    let w = match bin_width {
        Some(w) => w,
        None => ev.default_bin_width().expect("at least two events"),
    };
    let seq = binarize(ev, w)?;
    let occ = scan_occurrences(&seq, &Block::binary("1")?)?;
    let stats = block_statistics("1", &occ, opts)?;
    let mut gaps: Vec<u64> = occ.positions().windows(2).map(|p| (p[1] - p[0]) as u64).collect();
    gaps.sort_unstable();
    let mut gap_histogram: Vec<[u64; 2]> = Vec::new();
    for g in gaps {
        match gap_histogram.last_mut() {
            Some([v, c]) if *v == g => *c += 1,
            _ => gap_histogram.push([g, 1]),
        }
    }
    Ok(BurstReport {
        bin_width: w,
        n_events: ev.len(),
        duplicates: ev.duplicates,
        bins: seq.len(),
        censored: stats.censored,
        gap_histogram,
        verdict: stats.classification.verdict,
        entry_at_epsilon: stats.classification.strong_value,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub bin_width: f64,
    pub verdict: Recurrence,
    pub entry_at_epsilon: f64,
    pub bins: usize,
}

/// Verdicts over multiples of the default bin width.
pub fn sweep(ev: &EventSeries, opts: &StatsOptions) -> Result<Vec<SweepEntry>> {
    let base = ev.default_bin_width().ok_or(Error::TooFewOccurrences {
        needed: 3,
        found: ev.len(),
    })?;
    SWEEP_FACTORS
        .iter()
        .map(|f| {
            let r = burst_report(ev, Some(base * f), opts)?;
            Ok(SweepEntry {
                bin_width: r.bin_width,
                verdict: r.verdict,
                entry_at_epsilon: r.entry_at_epsilon,
                bins: r.bins,
            })
        })
        .collect()
}
