use super::{InstrumentMeta, Millis, QuoteEvent, TickDataError, TickSeries, TradeEvent};
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

pub const TRADES_HEADER: &str = "ts_ms,price,qty";
pub const QUOTES_HEADER: &str = "ts_ms,bid,bid_qty,ask,ask_qty";
pub const TICKS_HEADER: &str = "ts_ms,mid";

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// How far (ms) a row may run behind the latest timestamp seen before the
    /// file is rejected. Rows within tolerance are re-sorted.
    pub ts_tolerance_ms: Millis,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { ts_tolerance_ms: 0 }
    }
}

/// A row that was skipped, with its 1-based line number in the file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowIssue {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub events: Vec<T>,
    pub warnings: Vec<RowIssue>,
}

fn open_reader(path: &Path, expected: &'static str) -> Result<csv::Reader<BufReader<File>>, TickDataError> {
    let file = File::open(path).map_err(|source| TickDataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let headers = rdr.headers().map_err(|source| TickDataError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let got: Vec<&str> = headers.iter().collect();
    if got.join(",") != expected {
        return Err(TickDataError::Header {
            path: path.to_path_buf(),
            expected,
        });
    }
    Ok(rdr)
}

/// Signed quantity field: negatives are a hard error, zero is a row issue.
enum Qty {
    Positive(u64),
    Zero,
    Negative,
}

fn parse_qty(s: &str) -> Option<Qty> {
    let v: i128 = s.parse().ok()?;
    Some(match v {
        v if v < 0 => Qty::Negative,
        0 => Qty::Zero,
        v => Qty::Positive(u64::try_from(v).ok()?),
    })
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct MonotoneCheck {
    latest: Option<Millis>,
    tolerance: Millis,
    needs_sort: bool,
}

impl MonotoneCheck {
    fn new(opts: ParseOptions) -> Self {
        Self {
            latest: None,
            tolerance: opts.ts_tolerance_ms.max(0),
            needs_sort: false,
        }
    }

    fn check(&mut self, path: &Path, line: u64, ts: Millis) -> Result<(), TickDataError> {
        match self.latest {
            Some(latest) if ts < latest => {
                let behind = latest - ts;
                if behind > self.tolerance {
                    return Err(TickDataError::NonMonotone {
                        path: path.to_path_buf(),
                        line,
                        ts,
                        behind,
                        tolerance: self.tolerance,
                    });
                }
                self.needs_sort = true;
            }
            _ => self.latest = Some(ts),
        }
        Ok(())
    }
}

/// Reads a trades file (`ts_ms,price,qty`). Rows with zero quantity, zero
/// price or unparseable fields are skipped and reported; negative values
/// reject the whole file.
pub fn parse_trades(
    path: &Path,
    meta: &InstrumentMeta,
    opts: ParseOptions,
) -> Result<Parsed<TradeEvent>, TickDataError> {
    let mut rdr = open_reader(path, TRADES_HEADER)?;
    let mut events = Vec::new();
    let mut warnings = Vec::new();
    let mut mono = MonotoneCheck::new(opts);
    for rec in rdr.records() {
        let rec = rec.map_err(|source| TickDataError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut issue = |msg: String| {
            warnings.push(RowIssue {
                line,
                message: format!("{}: {msg}", meta.ric),
            })
        };
        if rec.len() != 3 {
            issue(format!("expected 3 fields, found {}", rec.len()));
            continue;
        }
        let (Some(ts), Some(price), Some(qty)) = (
            rec[0].parse::<Millis>().ok(),
            parse_f64(&rec[1]),
            parse_qty(&rec[2]),
        ) else {
            issue("malformed row".into());
            continue;
        };
        if price < 0.0 {
            return Err(TickDataError::Negative {
                path: path.to_path_buf(),
                line,
                field: "price",
            });
        }
        let qty = match qty {
            Qty::Negative => {
                return Err(TickDataError::Negative {
                    path: path.to_path_buf(),
                    line,
                    field: "qty",
                })
            }
            Qty::Zero => {
                issue("zero quantity".into());
                continue;
            }
            Qty::Positive(q) => q,
        };
        if price == 0.0 {
            issue("zero price".into());
            continue;
        }
        mono.check(path, line, ts)?;
        events.push(TradeEvent::new(ts, price, qty));
    }
    if mono.needs_sort {
        events.sort_by_key(|e| e.ts);
    }
    Ok(Parsed { events, warnings })
}

/// Reads a quotes file (`ts_ms,bid,bid_qty,ask,ask_qty`). Crossed or locked
/// books (`bid >= ask`) are skipped and reported.
pub fn parse_quotes(
    path: &Path,
    meta: &InstrumentMeta,
    opts: ParseOptions,
) -> Result<Parsed<QuoteEvent>, TickDataError> {
    let mut rdr = open_reader(path, QUOTES_HEADER)?;
    let mut events = Vec::new();
    let mut warnings = Vec::new();
    let mut mono = MonotoneCheck::new(opts);
    for rec in rdr.records() {
        let rec = rec.map_err(|source| TickDataError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut issue = |msg: String| {
            warnings.push(RowIssue {
                line,
                message: format!("{}: {msg}", meta.ric),
            })
        };
        if rec.len() != 5 {
            issue(format!("expected 5 fields, found {}", rec.len()));
            continue;
        }
        let (Some(ts), Some(bid), Some(bid_qty), Some(ask), Some(ask_qty)) = (
            rec[0].parse::<Millis>().ok(),
            parse_f64(&rec[1]),
            parse_qty(&rec[2]),
            parse_f64(&rec[3]),
            parse_qty(&rec[4]),
        ) else {
            issue("malformed row".into());
            continue;
        };
        let neg = |field| TickDataError::Negative {
            path: path.to_path_buf(),
            line,
            field,
        };
        if bid < 0.0 {
            return Err(neg("bid"));
        }
        if ask < 0.0 {
            return Err(neg("ask"));
        }
        let bid_qty = match bid_qty {
            Qty::Negative => return Err(neg("bid_qty")),
            Qty::Zero => 0,
            Qty::Positive(q) => q,
        };
        let ask_qty = match ask_qty {
            Qty::Negative => return Err(neg("ask_qty")),
            Qty::Zero => 0,
            Qty::Positive(q) => q,
        };
        if bid >= ask {
            issue(format!("crossed book: bid {bid} >= ask {ask}"));
            continue;
        }
        mono.check(path, line, ts)?;
        events.push(QuoteEvent {
            ts,
            bid,
            bid_qty,
            ask,
            ask_qty,
        });
    }
    if mono.needs_sort {
        events.sort_by_key(|e| e.ts);
    }
    Ok(Parsed { events, warnings })
}

/// Reads a tick-series file (`ts_ms,mid`), one epoch per row.
pub fn parse_ticks(path: &Path) -> Result<TickSeries, TickDataError> {
    let mut rdr = open_reader(path, TICKS_HEADER)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| TickDataError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed = (rec.len() == 2)
            .then(|| (parse_f64(&rec[0]), parse_f64(&rec[1])))
            .and_then(|(t, m)| Some((t?, m?)));
        let Some((ts_ms, mid)) = parsed else {
            return Err(TickDataError::Series(format!(
                "{}:{line}: malformed row",
                path.display()
            )));
        };
        times.push(ts_ms / 1000.0);
        values.push(mid);
    }
    TickSeries::new(times, values)
}

fn create(path: &Path) -> Result<std::io::BufWriter<File>, TickDataError> {
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| TickDataError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> TickDataError + '_ {
    move |source| TickDataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes trades in the same format `parse_trades` reads. Prices use the
/// shortest representation that parses back to the identical `f64`.
pub fn write_trades(path: &Path, trades: &[TradeEvent]) -> Result<(), TickDataError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{TRADES_HEADER}").map_err(&err)?;
    for t in trades {
        writeln!(w, "{},{},{}", t.ts, t.price, t.qty).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_quotes(path: &Path, quotes: &[QuoteEvent]) -> Result<(), TickDataError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{QUOTES_HEADER}").map_err(&err)?;
    for q in quotes {
        writeln!(w, "{},{},{},{},{}", q.ts, q.bid, q.bid_qty, q.ask, q.ask_qty).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_ticks(path: &Path, series: &TickSeries) -> Result<(), TickDataError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{TICKS_HEADER}").map_err(&err)?;
    for (t, m) in series.times().iter().zip(series.values()) {
        let ms = t * 1000.0;
        let rounded = ms.round();
        if (ms - rounded).abs() < 1e-6 {
            writeln!(w, "{},{}", rounded as i64, m).map_err(&err)?;
        } else {
            writeln!(w, "{ms},{m}").map_err(&err)?;
        }
    }
    w.flush().map_err(&err)
}

/// Loads instrument metadata: a single JSON object or an array of them.
pub fn load_instruments(path: &Path) -> Result<Vec<InstrumentMeta>, TickDataError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let json_err = |source| TickDataError::Json {
        path: path.to_path_buf(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    let metas: Vec<InstrumentMeta> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value).map_err(json_err)?,
        _ => vec![serde_json::from_value(value).map_err(json_err)?],
    };
    for m in &metas {
        m.validate()?;
    }
    Ok(metas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> InstrumentMeta {
        InstrumentMeta {
            ric: "TEST.PA".into(),
            tick_size: 0.005,
            session_open_ms: 9 * 3_600_000,
            session_close_ms: 17 * 3_600_000 + 1_800_000,
            currency: "EUR".into(),
        }
    }

    fn file_with(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows_in_order() {
        let f = file_with("ts_ms,price,qty\n100,10.0,5\n200,10.005,3\n300,10.01,1\n");
        let p = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap();
        assert_eq!(p.events.len(), 3);
        assert!(p.warnings.is_empty());
        assert_eq!(
            p.events.iter().map(|e| e.ts).collect::<Vec<_>>(),
            vec![100, 200, 300]
        );
    }

    #[test]
    fn zero_qty_row_skipped_with_line_number() {
        let f = file_with("ts_ms,price,qty\n100,10.0,5\n200,10.005,0\n300,10.01,1\n");
        let p = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap();
        assert_eq!(p.events.len(), 2);
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].line, 3);
    }

    #[test]
    fn malformed_row_reported() {
        let f = file_with("ts_ms,price,qty\n100,abc,5\n200,10.0\n300,10.01,1\n");
        let p = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap();
        assert_eq!(p.events.len(), 1);
        let lines: Vec<u64> = p.warnings.iter().map(|w| w.line).collect();
        assert_eq!(lines, vec![2, 3]);
    }

    #[test]
    fn negative_values_reject_file() {
        let f = file_with("ts_ms,price,qty\n100,10.0,-5\n");
        let err = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, TickDataError::Negative { field: "qty", line: 2, .. }));
        let f = file_with("ts_ms,price,qty\n100,-10.0,5\n");
        let err = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, TickDataError::Negative { field: "price", .. }));
    }

    #[test]
    fn non_monotone_beyond_tolerance_rejected() {
        let f = file_with("ts_ms,price,qty\n100,10.0,5\n50,10.0,5\n");
        assert!(matches!(
            parse_trades(f.path(), &meta(), ParseOptions::default()),
            Err(TickDataError::NonMonotone { line: 3, behind: 50, .. })
        ));
        let p = parse_trades(f.path(), &meta(), ParseOptions { ts_tolerance_ms: 60 }).unwrap();
        assert_eq!(p.events[0].ts, 50);
        assert_eq!(p.events[1].ts, 100);
    }

    #[test]
    fn shared_timestamps_are_retained() {
        let f = file_with("ts_ms,price,qty\n100,10,100\n100,10.01,50\n");
        let p = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap();
        assert_eq!(p.events.len(), 2);
        let agg = crate::tickdata::aggregate_same_timestamp(&p.events);
        assert_eq!(agg.len(), 1);
    }

    #[test]
    fn missing_file_and_bad_header() {
        let err = parse_trades(Path::new("/nonexistent/x.csv"), &meta(), ParseOptions::default());
        assert!(matches!(err, Err(TickDataError::Io { .. })));
        let f = file_with("time,price,qty\n1,1,1\n");
        assert!(matches!(
            parse_trades(f.path(), &meta(), ParseOptions::default()),
            Err(TickDataError::Header { .. })
        ));
    }

    #[test]
    fn crossed_quotes_rejected_at_ingest() {
        let f = file_with("ts_ms,bid,bid_qty,ask,ask_qty\n1,10,5,10.01,5\n2,10.02,5,10.01,5\n3,10,5,10,5\n");
        let p = parse_quotes(f.path(), &meta(), ParseOptions::default()).unwrap();
        assert_eq!(p.events.len(), 1);
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn instruments_single_or_array() {
        let one = file_with(
            r#"{"ric":"A","tick_size":0.01,"session_open_ms":0,"session_close_ms":10,"currency":"EUR"}"#,
        );
        assert_eq!(load_instruments(one.path()).unwrap().len(), 1);
        let arr = file_with(
            r#"[{"ric":"A","tick_size":0.01,"session_open_ms":0,"session_close_ms":10,"currency":"EUR"},
                {"ric":"B","tick_size":0.5,"session_open_ms":0,"session_close_ms":10,"currency":"GBP"}]"#,
        );
        assert_eq!(load_instruments(arr.path()).unwrap().len(), 2);
        let bad = file_with(
            r#"{"ric":"A","tick_size":0,"session_open_ms":0,"session_close_ms":10,"currency":"EUR"}"#,
        );
        assert!(matches!(load_instruments(bad.path()), Err(TickDataError::Meta(_))));
    }

    #[test]
    fn ticks_round_trip() {
        let s = TickSeries::new(vec![1.0, 2.5, 3.001], vec![10.0, 10.005, 9.995]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_ticks(f.path(), &s).unwrap();
        let back = parse_ticks(f.path()).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.times(), s.times());
    }

    mod round_trip {
        use super::*;
        use proptest::prelude::*;

        fn trades() -> impl Strategy<Value = Vec<TradeEvent>> {
            prop::collection::vec((0i64..5_000, 1u32..200_000, 1u64..10_000), 1..40).prop_map(|rows| {
                let mut ts = 34_200_000;
                rows.into_iter()
                    .map(|(dt, p, q)| {
                        ts += dt;
                        TradeEvent::new(ts, p as f64 * 0.005, q)
                    })
                    .collect()
            })
        }

        fn quotes() -> impl Strategy<Value = Vec<QuoteEvent>> {
            prop::collection::vec((0i64..5_000, 1u32..200_000, 1u32..20, 1u64..10_000, 1u64..10_000), 1..40)
                .prop_map(|rows| {
                    let mut ts = 34_200_000;
                    rows.into_iter()
                        .map(|(dt, b, s, bq, aq)| {
                            ts += dt;
                            QuoteEvent {
                                ts,
                                bid: b as f64 * 0.005,
                                bid_qty: bq,
                                ask: (b + s) as f64 * 0.005,
                                ask_qty: aq,
                            }
                        })
                        .collect()
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn trades_parse_write_parse(events in trades()) {
                let f = tempfile::NamedTempFile::new().unwrap();
                write_trades(f.path(), &events).unwrap();
                let once = parse_trades(f.path(), &meta(), ParseOptions::default()).unwrap().events;
                let g = tempfile::NamedTempFile::new().unwrap();
                write_trades(g.path(), &once).unwrap();
                let twice = parse_trades(g.path(), &meta(), ParseOptions::default()).unwrap().events;
                prop_assert_eq!(&once, &events);
                prop_assert_eq!(&twice, &once);
                prop_assert_eq!(std::fs::read(f.path()).unwrap(), std::fs::read(g.path()).unwrap());
            }

            #[test]
            fn quotes_parse_write_parse(events in quotes()) {
                let f = tempfile::NamedTempFile::new().unwrap();
                write_quotes(f.path(), &events).unwrap();
                let once = parse_quotes(f.path(), &meta(), ParseOptions::default()).unwrap().events;
                prop_assert_eq!(&once, &events);
            }
        }
    }
}
