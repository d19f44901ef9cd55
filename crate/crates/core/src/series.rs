use chrono::NaiveDate;

use crate::error::{Error, Result};

/// A real-valued series indexed by strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl DatedSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Alignment(format!(
                "{} dates for {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::UnorderedDates(w[1]));
        }
        Ok(Self { dates, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value on `date`, if present.
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.values[i])
    }

    /// Restricts to the given dates, all of which must be present.
    pub fn select(&self, dates: &[NaiveDate]) -> Result<Self> {
        let values = dates
            .iter()
            .map(|d| {
                self.get(*d)
                    .ok_or_else(|| Error::Alignment(format!("date {d} missing from series")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dates.to_vec(), values)
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            dates: self.dates[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }
}
