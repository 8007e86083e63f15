use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A calendar month in UTC, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    /// 1..=12
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        YearMonth { year, month }
    }

    pub fn of(at: DateTime<Utc>) -> Self {
        YearMonth::new(at.year(), at.month())
    }

    pub fn succ(self) -> Self {
        self.plus(1)
    }

    pub fn plus(self, months: i32) -> Self {
        let index = self.year * 12 + (self.month as i32 - 1) + months;
        YearMonth::new(index.div_euclid(12), index.rem_euclid(12) as u32 + 1)
    }

    /// Number of months from `self` to `later`; negative when `later` is earlier.
    pub fn months_until(self, later: YearMonth) -> i32 {
        (later.year * 12 + later.month as i32) - (self.year * 12 + self.month as i32)
    }

    pub fn start(self) -> DateTime<Utc> {
        NaiveDate::from_ymd_opt(self.year, self.month, 1)
            .expect("valid month")
            .and_hms_opt(0, 0, 0)
            .expect("midnight")
            .and_utc()
    }

    /// First instant after the month; releases strictly before it belong to
    /// the month-end state.
    pub fn end(self) -> DateTime<Utc> {
        self.succ().start()
    }

    /// Inclusive range of months.
    pub fn range(first: YearMonth, last: YearMonth) -> impl Iterator<Item = YearMonth> {
        let count = first.months_until(last) + 1;
        (0..count.max(0)).map(move |i| first.plus(i))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s.split_once('-').ok_or_else(|| format!("expected YYYY-MM, got {s:?}"))?;
        let year = y.parse().map_err(|_| format!("bad year in {s:?}"))?;
        let month: u32 = m.parse().map_err(|_| format!("bad month in {s:?}"))?;
        if !(1..=12).contains(&month) {
            return Err(format!("month out of range in {s:?}"));
        }
        Ok(YearMonth { year, month })
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let m = YearMonth::new(2019, 11);
        assert_eq!(m.plus(2), YearMonth::new(2020, 1));
        assert_eq!(m.plus(-11), YearMonth::new(2018, 12));
        assert_eq!(m.months_until(YearMonth::new(2020, 12)), 13);
        assert_eq!(YearMonth::range(m, YearMonth::new(2020, 2)).count(), 4);
        assert_eq!(YearMonth::range(m, YearMonth::new(2019, 10)).count(), 0);
        assert_eq!(m.end().to_rfc3339(), "2019-12-01T00:00:00+00:00");
        assert_eq!("2020-03".parse::<YearMonth>().unwrap(), YearMonth::new(2020, 3));
        assert_eq!(YearMonth::new(2020, 3).to_string(), "2020-03");
    }
}
