//! Monday-to-Friday business days. There is no holiday calendar.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

pub fn is_business_day(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

pub fn next_business_day(date: NaiveDate) -> NaiveDate {
    let mut d = date + Days::new(1);
    while !is_business_day(d) {
        d = d + Days::new(1);
    }
    d
}

pub fn prev_business_day(date: NaiveDate) -> NaiveDate {
    let mut d = date - Days::new(1);
    while !is_business_day(d) {
        d = d - Days::new(1);
    }
    d
}

/// Earliest business day on or after `date`.
pub fn roll_forward(date: NaiveDate) -> NaiveDate {
    if is_business_day(date) {
        date
    } else {
        next_business_day(date)
    }
}

/// The `len` business days ending at `date` (inclusive when `date` is a
/// business day), oldest first.
pub fn window_ending(date: NaiveDate, len: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let mut d = if is_business_day(date) {
        date
    } else {
        prev_business_day(date)
    };
    out.push(d);
    while out.len() < len {
        d = prev_business_day(d);
        out.push(d);
    }
    out.reverse();
    out
}

/// A contiguous run of business days.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessDayRange {
    days: Vec<NaiveDate>,
}

impl BusinessDayRange {
    /// `len` business days starting at `start` (rolled forward to a business day).
    pub fn new(start: NaiveDate, len: usize) -> Self {
        let mut days = Vec::with_capacity(len);
        let mut d = roll_forward(start);
        for _ in 0..len {
            days.push(d);
            d = next_business_day(d);
        }
        BusinessDayRange { days }
    }

    /// All business days in `[first, last]`.
    pub fn spanning(first: NaiveDate, last: NaiveDate) -> Self {
        let mut days = Vec::new();
        let mut d = roll_forward(first);
        while d <= last {
            days.push(d);
            d = next_business_day(d);
        }
        BusinessDayRange { days }
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn first(&self) -> Option<NaiveDate> {
        self.days.first().copied()
    }

    pub fn last(&self) -> Option<NaiveDate> {
        self.days.last().copied()
    }

    /// Index of `date` if it is one of the range's days.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search(&date).ok()
    }

    /// Index of the first day in the range that is `>= date`; equals `len()`
    /// when every day is earlier.
    pub fn first_index_on_or_after(&self, date: NaiveDate) -> usize {
        self.days.partition_point(|d| *d < date)
    }
}
