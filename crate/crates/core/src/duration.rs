//! Time durations: parsing, exact arithmetic, comparison, and formatting.
//!
//! All arithmetic is done on exact rationals so that grading equality is
//! never subject to floating-point rounding. The canonical measure is
//! seconds, with `month = 30 days` and `year = 365 days` by default (see
//! [`UnitConvention`]).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rational = Ratio<i128>;

/// The seven time units, ordered from smallest to largest.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Sec,
    Min,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    /// All units in ascending order; a unit's position here is its index.
    pub const ALL: [TimeUnit; 7] = [
        TimeUnit::Sec,
        TimeUnit::Min,
        TimeUnit::Hour,
        TimeUnit::Day,
        TimeUnit::Week,
        TimeUnit::Month,
        TimeUnit::Year,
    ];

    /// Ordinal index 0..=6 in the `sec, min, h, day, week, month, year` order.
    pub fn index(self) -> usize {
        match self {
            TimeUnit::Sec => 0,
            TimeUnit::Min => 1,
            TimeUnit::Hour => 2,
            TimeUnit::Day => 3,
            TimeUnit::Week => 4,
            TimeUnit::Month => 5,
            TimeUnit::Year => 6,
        }
    }

    /// Canonical short label used in rendered durations.
    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::Sec => "sec",
            TimeUnit::Min => "min",
            TimeUnit::Hour => "h",
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Year => "year",
        }
    }

    /// Seconds per unit under the given convention.
    pub fn seconds_with(self, convention: &UnitConvention) -> u64 {
        const DAY: u64 = 86_400;
        match self {
            TimeUnit::Sec => 1,
            TimeUnit::Min => 60,
            TimeUnit::Hour => 3_600,
            TimeUnit::Day => DAY,
            TimeUnit::Week => 7 * DAY,
            TimeUnit::Month => u64::from(convention.month_days) * DAY,
            TimeUnit::Year => u64::from(convention.year_days) * DAY,
        }
    }

    /// Seconds per unit under the default convention (30-day month, 365-day year).
    pub fn seconds(self) -> u64 {
        self.seconds_with(&UnitConvention::default())
    }

    /// Recognizes one unit word (case-insensitive). Accepted spellings:
    /// `sec/second(s)`, `min/minute(s)`, `h/hr/hour(s)`, `day(s)`, `week(s)`,
    /// `month(s)`, `year(s)`.
    pub fn parse_word(word: &str) -> Option<TimeUnit> {
        match word.to_ascii_lowercase().as_str() {
            "sec" | "second" | "seconds" => Some(TimeUnit::Sec),
            "min" | "minute" | "minutes" => Some(TimeUnit::Min),
            "h" | "hr" | "hour" | "hours" => Some(TimeUnit::Hour),
            "day" | "days" => Some(TimeUnit::Day),
            "week" | "weeks" => Some(TimeUnit::Week),
            "month" | "months" => Some(TimeUnit::Month),
            "year" | "years" => Some(TimeUnit::Year),
            _ => None,
        }
    }

    fn is_pluralizable(self) -> bool {
        matches!(
            self,
            TimeUnit::Day | TimeUnit::Week | TimeUnit::Month | TimeUnit::Year
        )
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Calendar-free conversion constants for the two units the clock does not fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitConvention {
    pub month_days: u32,
    pub year_days: u32,
}

impl Default for UnitConvention {
    fn default() -> Self {
        UnitConvention {
            month_days: 30,
            year_days: 365,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DurationError {
    #[error("duration value must be nonnegative and finite")]
    NegativeValue,
    #[error("cannot take the unit distance of an empty duration list")]
    EmptyList,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DurationParseError {
    #[error("cannot parse duration component {span:?}")]
    Unparseable { span: String },
    #[error("negative duration {span:?}")]
    Negative { span: String },
    #[error("expected a single duration, found {count} components in {text:?}")]
    NotSingle { text: String, count: usize },
}

/// A scalar quantity of time expressed in one unit, e.g. `10 min`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Duration {
    value: Rational,
    unit: TimeUnit,
}

impl Duration {
    pub fn new(value: Rational, unit: TimeUnit) -> Result<Self, DurationError> {
        if value.is_negative() {
            return Err(DurationError::NegativeValue);
        }
        Ok(Duration { value, unit })
    }

    pub fn from_int(value: u64, unit: TimeUnit) -> Self {
        Duration {
            value: Rational::from_integer(value as i128),
            unit,
        }
    }

    pub fn value(&self) -> Rational {
        self.value
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn to_seconds(&self) -> CanonicalDuration {
        self.to_seconds_with(&UnitConvention::default())
    }

    pub fn to_seconds_with(&self, convention: &UnitConvention) -> CanonicalDuration {
        CanonicalDuration(
            self.value * Rational::from_integer(self.unit.seconds_with(convention) as i128),
        )
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plural = self.unit.is_pluralizable() && self.value != Rational::from_integer(1);
        write!(
            f,
            "{} {}{}",
            format_rational(&self.value),
            self.unit.label(),
            if plural { "s" } else { "" }
        )
    }
}

impl FromStr for Duration {
    type Err = DurationParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_single_duration(s)
    }
}

impl serde::Serialize for Duration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Duration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_single_duration(&text).map_err(serde::de::Error::custom)
    }
}

/// A duration normalized to seconds; the common measure for all comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalDuration(Rational);

impl CanonicalDuration {
    pub const fn zero() -> Self {
        CanonicalDuration(Rational::new_raw(0, 1))
    }

    pub fn from_seconds(seconds: Rational) -> Result<Self, DurationError> {
        if seconds.is_negative() {
            return Err(DurationError::NegativeValue);
        }
        Ok(CanonicalDuration(seconds))
    }

    pub fn from_secs_u64(seconds: u64) -> Self {
        CanonicalDuration(Rational::from_integer(seconds as i128))
    }

    pub fn seconds(&self) -> Rational {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Renders this duration deterministically.
    ///
    /// `LargestUnit` picks the largest unit in which the value is a whole
    /// number ("3300 sec" renders as "55 min"); when no unit divides it
    /// exactly the value decomposes greedily into mixed units, largest
    /// first, joined by " and ".
    pub fn format(&self, style: FormatStyle) -> String {
        match style {
            FormatStyle::Seconds => format!("{} sec", format_rational(&self.0)),
            FormatStyle::LargestUnit => self.format_largest_unit(),
        }
    }

    fn format_largest_unit(&self) -> String {
        if self.0.is_zero() {
            return "0 sec".to_string();
        }
        // Largest unit with an integral value, if any. Months and years are
        // convention-defined whole-day multiples, so any value integral in
        // them is integral in days too; the formatter never introduces them
        // ("360 days" stays "360 days" rather than becoming "12 months").
        const SEARCH: [TimeUnit; 5] = [
            TimeUnit::Sec,
            TimeUnit::Min,
            TimeUnit::Hour,
            TimeUnit::Day,
            TimeUnit::Week,
        ];
        for unit in SEARCH.iter().rev() {
            let in_unit = self.0 / Rational::from_integer(unit.seconds() as i128);
            if in_unit.is_integer() {
                return Duration {
                    value: in_unit,
                    unit: *unit,
                }
                .to_string();
            }
        }
        // Mixed units, descending; the sub-second remainder stays on `sec`.
        let mut parts: Vec<String> = Vec::new();
        let mut rest = self.0;
        for unit in SEARCH.iter().rev() {
            let unit_secs = Rational::from_integer(unit.seconds() as i128);
            if *unit == TimeUnit::Sec {
                if !rest.is_zero() {
                    parts.push(
                        Duration {
                            value: rest,
                            unit: TimeUnit::Sec,
                        }
                        .to_string(),
                    );
                }
                break;
            }
            let whole = (rest / unit_secs).floor();
            if !whole.is_zero() {
                parts.push(
                    Duration {
                        value: whole,
                        unit: *unit,
                    }
                    .to_string(),
                );
                rest -= whole * unit_secs;
            }
        }
        parts.join(" and ")
    }
}

impl std::ops::Add for CanonicalDuration {
    type Output = CanonicalDuration;
    fn add(self, rhs: CanonicalDuration) -> CanonicalDuration {
        CanonicalDuration(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for CanonicalDuration {
    fn add_assign(&mut self, rhs: CanonicalDuration) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for CanonicalDuration {
    fn sum<I: Iterator<Item = CanonicalDuration>>(iter: I) -> CanonicalDuration {
        iter.fold(CanonicalDuration::zero(), |a, b| a + b)
    }
}

impl fmt::Display for CanonicalDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(FormatStyle::LargestUnit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatStyle {
    LargestUnit,
    Seconds,
}

/// Parses a duration expression into its components, in textual order.
///
/// Accepts `"<number> <unit>"` with decimal numbers, and compounds joined
/// by "and" or commas: `"3 weeks and 1 hour"` parses to two components.
pub fn parse_duration(text: &str) -> Result<Vec<Duration>, DurationParseError> {
    let mut components = Vec::new();
    for comma_piece in text.split(',') {
        for piece in split_on_and(comma_piece) {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(DurationParseError::Unparseable {
                    span: comma_piece.trim().to_string(),
                });
            }
            components.push(parse_component(piece)?);
        }
    }
    if components.is_empty() {
        return Err(DurationParseError::Unparseable {
            span: text.trim().to_string(),
        });
    }
    Ok(components)
}

/// Parses text that must contain exactly one duration component.
pub fn parse_single_duration(text: &str) -> Result<Duration, DurationParseError> {
    let components = parse_duration(text)?;
    if components.len() != 1 {
        return Err(DurationParseError::NotSingle {
            text: text.trim().to_string(),
            count: components.len(),
        });
    }
    Ok(components.into_iter().next().unwrap())
}

/// Sum of a duration list in canonical seconds.
pub fn sum_durations(durations: &[Duration]) -> CanonicalDuration {
    durations.iter().map(Duration::to_seconds).sum()
}

/// Parses a (possibly compound) duration expression straight to canonical
/// seconds.
pub fn parse_canonical(text: &str) -> Result<CanonicalDuration, DurationParseError> {
    Ok(sum_durations(&parse_duration(text)?))
}

/// Total order on duration lists, by canonical seconds.
pub fn compare_durations(a: &[Duration], b: &[Duration]) -> Ordering {
    sum_durations(a).cmp(&sum_durations(b))
}

/// Difference between the highest and lowest unit index in the list.
pub fn unit_distance(durations: &[Duration]) -> Result<usize, DurationError> {
    let indices: Vec<usize> = durations.iter().map(|d| d.unit.index()).collect();
    match (indices.iter().min(), indices.iter().max()) {
        (Some(lo), Some(hi)) => Ok(hi - lo),
        _ => Err(DurationError::EmptyList),
    }
}

fn split_on_and(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut rest = text;
    loop {
        match find_and_word(rest) {
            Some(pos) => {
                pieces.push(&rest[..pos]);
                rest = &rest[pos + 3..];
            }
            None => {
                pieces.push(rest);
                break;
            }
        }
    }
    pieces
}

fn find_and_word(text: &str) -> Option<usize> {
    let lower = text.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut search_from = 0;
    while let Some(rel) = lower[search_from..].find("and") {
        let pos = search_from + rel;
        let before_ok = pos == 0 || !bytes[pos - 1].is_ascii_alphanumeric();
        let after = pos + 3;
        let after_ok = after >= bytes.len() || !bytes[after].is_ascii_alphanumeric();
        if before_ok && after_ok {
            return Some(pos);
        }
        search_from = pos + 3;
    }
    None
}

fn parse_component(piece: &str) -> Result<Duration, DurationParseError> {
    let tokens: Vec<&str> = piece.split_whitespace().collect();
    if tokens.len() != 2 {
        return Err(DurationParseError::Unparseable {
            span: piece.to_string(),
        });
    }
    let (negative, value) =
        parse_number(tokens[0]).ok_or_else(|| DurationParseError::Unparseable {
            span: piece.to_string(),
        })?;
    if negative {
        return Err(DurationParseError::Negative {
            span: piece.to_string(),
        });
    }
    let unit = TimeUnit::parse_word(tokens[1]).ok_or_else(|| DurationParseError::Unparseable {
        span: piece.to_string(),
    })?;
    Ok(Duration { value, unit })
}

/// Parses `\d+` or `\d+.\d+` with an optional leading sign. Returns the
/// sign separately so the caller can report negatives as a range error.
fn parse_number(token: &str) -> Option<(bool, Rational)> {
    let (negative, digits) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token.strip_prefix('+').unwrap_or(token)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = int_part.parse().ok()?;
    let mut denom: i128 = 1;
    if let Some(frac) = frac_part {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        for digit in frac.bytes() {
            numer = numer.checked_mul(10)?.checked_add((digit - b'0') as i128)?;
            denom = denom.checked_mul(10)?;
        }
    }
    Some((negative, Rational::new(numer, denom)))
}

/// Renders a rational as an integer, a finite decimal, or `num/den`.
pub(crate) fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    // Finite decimal expansion exists iff the reduced denominator is 2^a * 5^b.
    let mut denom = *value.denom();
    let mut scale: u32 = 0;
    while denom % 2 == 0 {
        denom /= 2;
        scale += 1;
    }
    let mut fives: u32 = 0;
    while denom % 5 == 0 {
        denom /= 5;
        fives += 1;
    }
    if denom != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let digits = scale.max(fives);
    let scaled = value * Rational::from_integer(10i128.pow(digits));
    let scaled = scaled.to_integer();
    let int_part = scaled / 10i128.pow(digits);
    let frac_part = (scaled % 10i128.pow(digits)).unsigned_abs();
    let frac_str = format!("{:0width$}", frac_part, width = digits as usize);
    let frac_str = frac_str.trim_end_matches('0');
    format!("{}.{}", int_part, frac_str)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dur(value: u64, unit: TimeUnit) -> Duration {
        Duration::from_int(value, unit)
    }

    #[test]
    fn parses_simple_forms() {
        assert_eq!(
            parse_duration("180 days").unwrap(),
            vec![dur(180, TimeUnit::Day)]
        );
        assert_eq!(
            parse_duration("1 sec").unwrap(),
            vec![dur(1, TimeUnit::Sec)]
        );
        assert_eq!(
            parse_duration("10 min").unwrap(),
            vec![dur(10, TimeUnit::Min)]
        );
        assert_eq!(
            parse_duration("2 hr").unwrap(),
            vec![dur(2, TimeUnit::Hour)]
        );
        assert_eq!(parse_duration("1.5 hours").unwrap().len(), 1);
        assert_eq!(
            parse_duration("1.5 h").unwrap()[0].value(),
            Rational::new(3, 2)
        );
    }

    #[test]
    fn parses_compounds_in_order() {
        let parsed = parse_duration("3 weeks and 1 hour").unwrap();
        assert_eq!(parsed, vec![dur(3, TimeUnit::Week), dur(1, TimeUnit::Hour)]);
        let parsed = parse_duration("1 h, 30 min and 15 sec").unwrap();
        assert_eq!(
            parsed,
            vec![
                dur(1, TimeUnit::Hour),
                dur(30, TimeUnit::Min),
                dur(15, TimeUnit::Sec)
            ]
        );
    }

    #[test]
    fn rejects_garbage_with_span() {
        let err = parse_duration("a few minutes").unwrap_err();
        assert!(matches!(err, DurationParseError::Unparseable { .. }));
        let err = parse_duration("10 fortnights").unwrap_err();
        assert_eq!(
            err,
            DurationParseError::Unparseable {
                span: "10 fortnights".to_string()
            }
        );
        assert!(parse_duration("3 weeks plus 1 hour").is_err());
        assert!(parse_duration("").is_err());
    }

    #[test]
    fn rejects_negative_numbers() {
        let err = parse_duration("-3 min").unwrap_err();
        assert!(matches!(err, DurationParseError::Negative { .. }));
    }

    #[test]
    fn converts_to_seconds() {
        assert_eq!(
            dur(1, TimeUnit::Min).to_seconds(),
            CanonicalDuration::from_secs_u64(60)
        );
        assert_eq!(
            dur(1, TimeUnit::Month).to_seconds(),
            CanonicalDuration::from_secs_u64(2_592_000)
        );
        assert_eq!(
            dur(1, TimeUnit::Year).to_seconds(),
            CanonicalDuration::from_secs_u64(31_536_000)
        );
    }

    #[test]
    fn three_weeks_and_one_hour_is_505_hours() {
        let parts = parse_duration("3 weeks and 1 hour").unwrap();
        let total = sum_durations(&parts);
        assert_eq!(total, CanonicalDuration::from_secs_u64(1_818_000));
        assert_eq!(total.format(FormatStyle::LargestUnit), "505 h");
    }

    #[test]
    fn sums_and_compares() {
        let calzones = [
            dur(10, TimeUnit::Min),
            dur(15, TimeUnit::Min),
            dur(5, TimeUnit::Min),
            dur(25, TimeUnit::Min),
        ];
        let total = sum_durations(&calzones);
        assert_eq!(total.format(FormatStyle::LargestUnit), "55 min");

        let x = [dur(7, TimeUnit::Hour)];
        assert_eq!(
            sum_durations(&[dur(7, TimeUnit::Hour), dur(0, TimeUnit::Sec)]),
            sum_durations(&x)
        );
        assert_eq!(
            compare_durations(&[dur(35, TimeUnit::Min)], &[dur(55, TimeUnit::Min)]),
            Ordering::Less
        );
    }

    #[test]
    fn formats_largest_unit() {
        assert_eq!(
            CanonicalDuration::from_secs_u64(3300).format(FormatStyle::LargestUnit),
            "55 min"
        );
        assert_eq!(
            CanonicalDuration::from_secs_u64(0).format(FormatStyle::LargestUnit),
            "0 sec"
        );
        assert_eq!(
            CanonicalDuration::from_secs_u64(1_818_000).format(FormatStyle::LargestUnit),
            "505 h"
        );
        assert_eq!(
            CanonicalDuration::from_secs_u64(90).format(FormatStyle::LargestUnit),
            "90 sec"
        );
        // 12 months exactly, but month is never introduced by formatting.
        assert_eq!(
            CanonicalDuration::from_secs_u64(31_104_000).format(FormatStyle::LargestUnit),
            "360 days"
        );
        assert_eq!(
            CanonicalDuration::from_secs_u64(7 * 86_400).format(FormatStyle::LargestUnit),
            "1 week"
        );
        // Not an integer in any unit: mixed descending.
        let d = CanonicalDuration::from_seconds(Rational::new(181, 2)).unwrap();
        assert_eq!(d.format(FormatStyle::LargestUnit), "1 min and 30.5 sec");
    }

    #[test]
    fn pluralizes_large_units_only() {
        assert_eq!(dur(180, TimeUnit::Day).to_string(), "180 days");
        assert_eq!(dur(1, TimeUnit::Day).to_string(), "1 day");
        assert_eq!(dur(55, TimeUnit::Min).to_string(), "55 min");
        assert_eq!(dur(505, TimeUnit::Hour).to_string(), "505 h");
        assert_eq!(dur(2, TimeUnit::Year).to_string(), "2 years");
    }

    #[test]
    fn unit_distance_examples() {
        assert_eq!(
            unit_distance(&[dur(5, TimeUnit::Sec), dur(10, TimeUnit::Min)]).unwrap(),
            1
        );
        assert_eq!(
            unit_distance(&[dur(15, TimeUnit::Hour), dur(50, TimeUnit::Hour)]).unwrap(),
            0
        );
        assert_eq!(
            unit_distance(&[dur(1, TimeUnit::Sec), dur(1, TimeUnit::Year)]).unwrap(),
            6
        );
        assert_eq!(unit_distance(&[]), Err(DurationError::EmptyList));
    }

    #[test]
    fn custom_convention() {
        let conv = UnitConvention {
            month_days: 28,
            year_days: 360,
        };
        assert_eq!(
            dur(1, TimeUnit::Month).to_seconds_with(&conv),
            CanonicalDuration::from_secs_u64(28 * 86_400)
        );
    }

    #[test]
    fn display_parse_round_trip() {
        for unit in TimeUnit::ALL {
            for value in [0u64, 1, 2, 55, 180] {
                let d = dur(value, unit);
                let back = parse_single_duration(&d.to_string()).unwrap();
                assert_eq!(back, d, "round-trip failed for {d}");
            }
        }
        let half = Duration::new(Rational::new(1, 2), TimeUnit::Hour).unwrap();
        assert_eq!(half.to_string(), "0.5 h");
        assert_eq!(parse_single_duration("0.5 h").unwrap(), half);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_duration() -> impl Strategy<Value = Duration> {
            (0u64..10_000, 0usize..7).prop_map(|(v, u)| Duration::from_int(v, TimeUnit::ALL[u]))
        }

        proptest! {
            #[test]
            fn addition_commutes_and_associates(a in arb_duration(), b in arb_duration(), c in arb_duration()) {
                let ab_c = (a.to_seconds() + b.to_seconds()) + c.to_seconds();
                let a_bc = a.to_seconds() + (b.to_seconds() + c.to_seconds());
                prop_assert_eq!(ab_c, a_bc);
                prop_assert_eq!(a.to_seconds() + b.to_seconds(), b.to_seconds() + a.to_seconds());
            }

            #[test]
            fn compare_consistent_with_seconds(a in arb_duration(), b in arb_duration()) {
                let ord = compare_durations(std::slice::from_ref(&a), std::slice::from_ref(&b));
                prop_assert_eq!(ord, a.to_seconds().seconds().cmp(&b.to_seconds().seconds()));
            }

            #[test]
            fn unit_distance_permutation_invariant(mut ds in proptest::collection::vec(arb_duration(), 1..6), seed in 0u64..1000) {
                let original = unit_distance(&ds).unwrap();
                // Cheap deterministic shuffle.
                let n = ds.len();
                for i in 0..n {
                    let j = ((seed as usize).wrapping_mul(31).wrapping_add(i * 7)) % n;
                    ds.swap(i, j);
                }
                prop_assert_eq!(unit_distance(&ds).unwrap(), original);
            }

            #[test]
            fn format_parse_round_trip(v in 0u64..100_000, u in 0usize..7) {
                let canonical = Duration::from_int(v, TimeUnit::ALL[u]).to_seconds();
                let text = canonical.format(FormatStyle::LargestUnit);
                let parsed = sum_durations(&parse_duration(&text).unwrap());
                prop_assert_eq!(parsed, canonical);
            }
        }
    }
}
