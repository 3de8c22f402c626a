use std::cmp::Ordering;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use super::OrbitError;

pub const SECONDS_PER_WEEK: f64 = 604_800.0;

/// GPS minus UTC in 2013, seconds.
pub const DEFAULT_UTC_OFFSET: f64 = 16.0;

fn gps_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1980, 1, 6).expect("valid date")
}

/// GPS week and seconds of week.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsTime {
    pub week: u32,
    pub sow: f64,
}

impl GpsTime {
    pub fn new(week: u32, sow: f64) -> Result<Self, OrbitError> {
        if !sow.is_finite() || !(0.0..SECONDS_PER_WEEK).contains(&sow) {
            return Err(OrbitError::InvalidTime(format!(
                "seconds of week {sow} outside [0, 604800)"
            )));
        }
        Ok(Self { week, sow })
    }

    /// Normalizes an arbitrary week/seconds pair, carrying whole weeks.
    pub fn normalized(week: i64, sow: f64) -> Result<Self, OrbitError> {
        Self::from_total_seconds(week as f64 * SECONDS_PER_WEEK + sow)
    }

    pub fn from_total_seconds(total: f64) -> Result<Self, OrbitError> {
        if !total.is_finite() || total < 0.0 {
            return Err(OrbitError::InvalidTime(format!("{total} s is before the GPS epoch")));
        }
        let week = (total / SECONDS_PER_WEEK).floor();
        let mut sow = total - week * SECONDS_PER_WEEK;
        let mut week = week as u32;
        if sow >= SECONDS_PER_WEEK {
            sow -= SECONDS_PER_WEEK;
            week += 1;
        }
        Ok(Self {
            week,
            sow: sow.max(0.0),
        })
    }

    /// Seconds since the GPS epoch (1980-01-06 00:00:00 GPS time).
    pub fn total_seconds(&self) -> f64 {
        self.week as f64 * SECONDS_PER_WEEK + self.sow
    }

    /// Calendar date and time already expressed in GPS time.
    pub fn from_calendar(
        year: i32,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        second: f64,
    ) -> Result<Self, OrbitError> {
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| OrbitError::InvalidTime(format!("invalid date {year}-{month}-{day}")))?;
        if hour > 23 || minute > 59 || !(0.0..61.0).contains(&second) {
            return Err(OrbitError::InvalidTime(format!(
                "invalid time of day {hour}:{minute}:{second}"
            )));
        }
        let days = date.signed_duration_since(gps_epoch()).num_days();
        Self::from_total_seconds(days as f64 * 86_400.0 + (hour * 3600 + minute * 60) as f64 + second)
    }

    /// Converts a UTC instant using a fixed GPS-UTC offset in seconds.
    pub fn from_utc(utc: NaiveDateTime, utc_offset: f64) -> Result<Self, OrbitError> {
        let t = Self::from_calendar(
            chrono::Datelike::year(&utc),
            chrono::Datelike::month(&utc),
            chrono::Datelike::day(&utc),
            utc.hour(),
            utc.minute(),
            utc.second() as f64 + utc.nanosecond() as f64 * 1e-9,
        )?;
        t.add_seconds(utc_offset)
    }

    /// Calendar date of this instant on the GPS time scale.
    pub fn date(&self) -> NaiveDate {
        let days = (self.total_seconds() / 86_400.0).floor() as i64;
        gps_epoch() + chrono::Days::new(days as u64)
    }

    pub fn add_seconds(&self, dt: f64) -> Result<Self, OrbitError> {
        Self::normalized(self.week as i64, self.sow + dt)
    }

    /// `self - other` in seconds.
    pub fn seconds_since(&self, other: &GpsTime) -> f64 {
        (self.week as f64 - other.week as f64) * SECONDS_PER_WEEK + (self.sow - other.sow)
    }
}

impl Eq for GpsTime {}

impl PartialOrd for GpsTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GpsTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.week.cmp(&other.week).then(self.sow.total_cmp(&other.sow))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_is_week_zero() {
        let t = GpsTime::from_calendar(1980, 1, 6, 0, 0, 0.0).unwrap();
        assert_eq!((t.week, t.sow), (0, 0.0));
    }

    #[test]
    fn known_dates() {
        // 2013-07-25 is a Thursday in GPS week 1750.
        let t = GpsTime::from_calendar(2013, 7, 25, 0, 0, 0.0).unwrap();
        assert_eq!((t.week, t.sow), (1750, 4.0 * 86_400.0));
        let t = GpsTime::from_calendar(2015, 10, 7, 0, 0, 0.0).unwrap();
        assert_eq!((t.week, t.sow), (1865, 3.0 * 86_400.0));
        assert_eq!(
            t.add_seconds(86_399.5).unwrap().date(),
            NaiveDate::from_ymd_opt(2015, 10, 7).unwrap()
        );
    }

    #[test]
    fn utc_offset_and_rollover() {
        let utc = NaiveDate::from_ymd_opt(2013, 7, 27)
            .unwrap()
            .and_hms_opt(23, 59, 50)
            .unwrap();
        let t = GpsTime::from_utc(utc, 16.0).unwrap();
        assert_eq!((t.week, t.sow), (1751, 6.0));
    }

    #[test]
    fn ordering_and_differences() {
        let a = GpsTime::new(1750, 604_000.0).unwrap();
        let b = GpsTime::new(1751, 100.0).unwrap();
        assert!(a < b);
        assert_eq!(b.seconds_since(&a), 900.0);
        assert_eq!(a.add_seconds(900.0).unwrap(), b);
        assert!(GpsTime::new(1, SECONDS_PER_WEEK).is_err());
    }
}
