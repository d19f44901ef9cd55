//! CSV formats.
//!
//! Every writer takes an optional provenance line, emitted first as a
//! `#`-prefixed comment; every reader skips `#` lines. Reals are written in
//! shortest round-trip form, so reading a file back reproduces the values
//! bit for bit.

use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Error, Result};
use crate::grid::{DayGrid, Rejection, Tick, TickSeries};
use crate::har::HarFit;
use crate::metrics::{DailyMetrics, MetricsTable};
use crate::regress::{RegressionResult, RollingSeries};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn expect_header(header: &StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::parse(1, format!("expected header `{}`, got `{}`", expected.join(","), got.join(","))));
    }
    Ok(())
}

fn parse_field<T: FromStr>(rec: &StringRecord, i: usize, what: &str) -> Result<T> {
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::parse(line_of(rec), format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| Error::parse(line_of(rec), format!("invalid {what} `{raw}`")))
}

fn parse_date(rec: &StringRecord, i: usize) -> Result<NaiveDate> {
    parse_field(rec, i, "date")
}

fn check_increasing(prev: &mut Option<NaiveDate>, date: NaiveDate, rec: &StringRecord) -> Result<()> {
    if let Some(p) = *prev {
        if date <= p {
            return Err(Error::parse(line_of(rec), format!("date {date} does not follow {p}")));
        }
    }
    *prev = Some(date);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimestampKind {
    EpochMillis,
    Iso,
}

fn parse_timestamp(raw: &str, kind: TimestampKind) -> Option<NaiveDateTime> {
    match kind {
        TimestampKind::EpochMillis => raw
            .parse::<i64>()
            .ok()
            .and_then(DateTime::from_timestamp_millis)
            .map(|t| t.naive_utc()),
        TimestampKind::Iso => NaiveDateTime::from_str(raw).ok(),
    }
}

/// Reads `timestamp,price`. The timestamp kind (integer epoch milliseconds
/// or ISO-8601 date-time) is decided by the first record and applies to the
/// whole file.
pub fn read_ticks<R: Read>(r: R) -> Result<TickSeries> {
    let mut rdr = reader(r);
    expect_header(rdr.headers()?, &["timestamp", "price"])?;
    let mut kind = None;
    let mut ticks = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let raw = rec.get(0).unwrap_or("");
        let k = *kind.get_or_insert_with(|| {
            if !raw.is_empty() && raw.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
                TimestampKind::EpochMillis
            } else {
                TimestampKind::Iso
            }
        });
        let timestamp = parse_timestamp(raw, k)
            .ok_or_else(|| Error::parse(line_of(&rec), format!("invalid timestamp `{raw}` ({k:?})")))?;
        let price: f64 = parse_field(&rec, 1, "price")?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::parse(line_of(&rec), format!("non-positive price {price}")));
        }
        if ticks.last().is_some_and(|t: &Tick| timestamp < t.timestamp) {
            return Err(Error::parse(line_of(&rec), "timestamps decrease"));
        }
        ticks.push(Tick { timestamp, price });
    }
    if ticks.is_empty() {
        return Err(Error::EmptyInput);
    }
    TickSeries::new(ticks)
}

/// Reads `date,r1,...,rK`. Rows may have any number of returns; length and
/// finiteness are checked later by day validation.
pub fn read_gridded<R: Read>(r: R) -> Result<Vec<DayGrid>> {
    let mut rdr = reader(r);
    let header = rdr.headers()?.clone();
    let k = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("date".to_string())
        .chain((1..=k).map(|i| format!("r{i}")))
        .collect();
    expect_header(&header, &expected.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut prev = None;
    let mut days = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let date = parse_date(&rec, 0)?;
        check_increasing(&mut prev, date, &rec)?;
        let returns = (1..rec.len())
            .map(|i| parse_field::<f64>(&rec, i, "return"))
            .collect::<Result<Vec<_>>>()?;
        days.push(DayGrid::from_returns(date, returns));
    }
    if days.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(days)
}

fn writer<W: Write>(mut w: W, provenance: Option<&str>) -> Result<csv::Writer<W>> {
    if let Some(p) = provenance {
        writeln!(w, "# {p}")?;
    }
    Ok(WriterBuilder::new().from_writer(w))
}

pub fn write_gridded<W: Write>(w: W, days: &[DayGrid], returns_per_day: usize, provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    let mut header = vec!["date".to_string()];
    header.extend((1..=returns_per_day).map(|i| format!("r{i}")));
    wtr.write_record(&header)?;
    for day in days {
        let mut row = vec![day.date.to_string()];
        row.extend(day.returns.iter().map(|r| fmt_real(*r)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_rejections<W: Write>(w: W, rejections: &[Rejection], provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(["date", "reason"])?;
    for r in rejections {
        wtr.write_record([r.date.to_string(), r.reason.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn metrics_header(qs: &[usize]) -> Vec<String> {
    let mut h = vec!["date".to_string(), "log_rv".to_string()];
    h.extend(qs.iter().map(|q| format!("vr_{q}")));
    h
}

pub fn write_metrics<W: Write>(w: W, table: &MetricsTable, provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(metrics_header(&table.qs))?;
    for row in &table.rows {
        let mut rec = vec![row.date.to_string(), fmt_real(row.log_rv)];
        rec.extend(row.vr.iter().map(|v| fmt_real(*v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `date,log_rv,vr_<q>...`; the q values come from the header.
pub fn read_metrics<R: Read>(r: R) -> Result<MetricsTable> {
    let mut rdr = reader(r);
    let header = rdr.headers()?.clone();
    let qs = header
        .iter()
        .skip(2)
        .map(|h| {
            h.strip_prefix("vr_")
                .and_then(|q| q.parse::<usize>().ok())
                .ok_or_else(|| Error::parse(1, format!("unexpected metrics column `{h}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    expect_header(&header, &metrics_header(&qs).iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut prev = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::parse(line_of(&rec), format!("expected {} fields, got {}", header.len(), rec.len())));
        }
        let date = parse_date(&rec, 0)?;
        check_increasing(&mut prev, date, &rec)?;
        let log_rv = parse_field(&rec, 1, "log_rv")?;
        let vr = (2..rec.len())
            .map(|i| parse_field::<f64>(&rec, i, "variance ratio"))
            .collect::<Result<Vec<_>>>()?;
        rows.push(DailyMetrics { date, log_rv, vr });
    }
    MetricsTable::new(qs, rows)
}

pub fn write_har<W: Write>(w: W, fit: &HarFit, provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(["date", "log_rv", "sigma_p", "sigma_u"])?;
    for i in 0..fit.n_obs {
        wtr.write_record([
            fit.dates[i].to_string(),
            fmt_real(fit.log_rv[i]),
            fmt_real(fit.fitted[i]),
            fmt_real(fit.residuals[i]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_har_coefficients<W: Write>(w: W, fit: &HarFit, provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(["coefficient", "estimate", "std_error", "adj_r2_pct", "n_obs"])?;
    let names = ["beta0", "beta_d", "beta_w", "beta_m"];
    let est = fit.coefficients.as_array();
    let se = fit.std_errors.as_array();
    for i in 0..4 {
        wtr.write_record([
            names[i].to_string(),
            fmt_real(est[i]),
            fmt_real(se[i]),
            fmt_real(100.0 * fit.adj_r2),
            fit.n_obs.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Full-sample table, one row per slope coefficient (intercepts omitted),
/// grouped by q then specification.
pub fn write_table<W: Write>(w: W, results: &[RegressionResult], provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(["q", "spec", "coef_name", "estimate", "std_error", "adj_r2_pct", "n_obs"])?;
    for res in results {
        for c in res.coefficients.iter().skip(1) {
            wtr.write_record([
                res.q.to_string(),
                res.spec.to_string(),
                c.name.to_string(),
                fmt_real(c.estimate),
                fmt_real(c.std_error),
                fmt_real(res.adj_r2_pct()),
                res.n_obs.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Plot-ready rolling coefficients with confidence bands (slopes only).
pub fn write_rolling<W: Write>(w: W, rolling: &RollingSeries, provenance: Option<&str>) -> Result<()> {
    let mut wtr = writer(w, provenance)?;
    wtr.write_record(["window_end_date", "coef_name", "estimate", "ci_low", "ci_high"])?;
    for win in &rolling.windows {
        for (i, c) in win.result.coefficients.iter().enumerate().skip(1) {
            wtr.write_record([
                win.end_date.to_string(),
                c.name.to_string(),
                fmt_real(c.estimate),
                fmt_real(win.ci_low[i]),
                fmt_real(win.ci_high[i]),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
