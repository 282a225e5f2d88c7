//! MovieLens "::"-delimited file parsing.
//!
//! Lines are handled as bytes so Latin-1 content elsewhere in a file never
//! trips the parser; the fields we read are plain ASCII. LF and CRLF both
//! work. Every error carries its 1-based line number.

use std::io::BufRead;

use fairrec_core::demographics::{AgeCode, DemographicTable, Gender, UserDemographics};
use fairrec_core::ratings::{RatingError, RatingMatrix, RatingMatrixBuilder};

/// Shape of a ratings file: field separator and the rating ceiling.
#[derive(Debug, Clone)]
pub struct RatingsFormat {
    pub separator: Vec<u8>,
    pub max_rating: u8,
}

impl Default for RatingsFormat {
    fn default() -> Self {
        Self { separator: b"::".to_vec(), max_rating: 5 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: expected {expected} '::'-separated fields, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: field {field} is not a valid number")]
    BadNumber { line: usize, field: &'static str },
    #[error("line {line}: {source}")]
    BadRating { line: usize, source: RatingError },
    #[error("line {line}: gender must be F or M")]
    BadGender { line: usize },
    #[error("line {line}: {value} is not a MovieLens age code")]
    BadAge { line: usize, value: u8 },
    #[error("line {line}: user {user} appears twice")]
    DuplicateUser { line: usize, user: u32 },
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

fn read_lines(
    mut reader: impl BufRead,
    mut on_line: impl FnMut(usize, &[u8]) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let mut line = buf.as_slice();
        if line.ends_with(b"\n") {
            line = &line[..line.len() - 1];
        }
        if line.ends_with(b"\r") {
            line = &line[..line.len() - 1];
        }
        if line.is_empty() {
            continue;
        }
        on_line(line_no, line)?;
    }
}

fn split_fields<'a>(line: &'a [u8], sep: &[u8]) -> Vec<&'a [u8]> {
    let mut fields = Vec::new();
    let mut rest = line;
    while let Some(pos) = rest.windows(sep.len()).position(|w| w == sep) {
        fields.push(&rest[..pos]);
        rest = &rest[pos + sep.len()..];
    }
    fields.push(rest);
    fields
}

fn parse_number<T: core::str::FromStr>(
    field: &[u8],
    line: usize,
    name: &'static str,
) -> Result<T, ParseError> {
    core::str::from_utf8(field)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::BadNumber { line, field: name })
}

/// Parses `UserID::MovieID::Rating::Timestamp` lines into a rating matrix.
/// Duplicate (user, item) pairs and out-of-range ratings are errors; the
/// timestamp is validated as a number and discarded.
pub fn parse_ratings(
    reader: impl BufRead,
    format: &RatingsFormat,
) -> Result<RatingMatrix, ParseError> {
    let mut builder = RatingMatrixBuilder::new(format.max_rating);
    read_lines(reader, |line_no, line| {
        let fields = split_fields(line, &format.separator);
        if fields.len() != 4 {
            return Err(ParseError::FieldCount { line: line_no, expected: 4, found: fields.len() });
        }
        let user: u32 = parse_number(fields[0], line_no, "user id")?;
        let item: u32 = parse_number(fields[1], line_no, "item id")?;
        let rating: u8 = parse_number(fields[2], line_no, "rating")?;
        let _timestamp: u64 = parse_number(fields[3], line_no, "timestamp")?;
        builder
            .add(user, item, rating)
            .map_err(|source| ParseError::BadRating { line: line_no, source })
    })?;
    Ok(builder.build())
}

/// Parses `UserID::Gender::Age::Occupation::Zip` lines. Occupation and zip
/// are accepted verbatim and dropped.
pub fn parse_users(reader: impl BufRead) -> Result<DemographicTable, ParseError> {
    let mut table = DemographicTable::new();
    read_lines(reader, |line_no, line| {
        let fields = split_fields(line, b"::");
        if fields.len() != 5 {
            return Err(ParseError::FieldCount { line: line_no, expected: 5, found: fields.len() });
        }
        let user: u32 = parse_number(fields[0], line_no, "user id")?;
        let gender = match fields[1] {
            b"F" => Gender::Female,
            b"M" => Gender::Male,
            _ => return Err(ParseError::BadGender { line: line_no }),
        };
        let age_value: u8 = parse_number(fields[2], line_no, "age")?;
        let age = AgeCode::new(age_value)
            .ok_or(ParseError::BadAge { line: line_no, value: age_value })?;
        table
            .insert(user, UserDemographics { gender, age })
            .map_err(|_| ParseError::DuplicateUser { line: line_no, user })
    })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parses_the_distribution_line_format() {
        let m = parse_ratings(
            Cursor::new("1::1193::5::978300760\n"),
            &RatingsFormat::default(),
        )
        .unwrap();
        assert_eq!(m.rating(1, 1193), Some(5));
        assert_eq!(m.num_entries(), 1);
    }

    #[test]
    fn empty_stream_gives_empty_matrix() {
        let m = parse_ratings(Cursor::new(""), &RatingsFormat::default()).unwrap();
        assert_eq!(m.num_entries(), 0);
        assert_eq!(m.num_users(), 0);
    }

    #[test]
    fn crlf_and_trailing_newline_are_tolerated() {
        let m = parse_ratings(
            Cursor::new("1::2::3::100\r\n2::2::4::101\n\n"),
            &RatingsFormat::default(),
        )
        .unwrap();
        assert_eq!(m.num_entries(), 2);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = parse_ratings(
            Cursor::new("1::2::3::100\nnot-a-line\n"),
            &RatingsFormat::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::FieldCount { line: 2, .. }), "{err}");
    }

    #[test]
    fn out_of_range_rating_is_an_error() {
        let err = parse_ratings(Cursor::new("1::2::9::100\n"), &RatingsFormat::default())
            .unwrap_err();
        assert!(matches!(err, ParseError::BadRating { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_rating_is_an_error() {
        let err = parse_ratings(
            Cursor::new("1::2::3::100\n1::2::4::101\n"),
            &RatingsFormat::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::BadRating { line: 2, .. }), "{err}");
    }

    #[test]
    fn parses_users_line() {
        let t = parse_users(Cursor::new("1::F::1::10::48067\n")).unwrap();
        let d = t.get(1).unwrap();
        assert_eq!(d.gender, Gender::Female);
        assert_eq!(d.age.get(), 1);
    }

    #[test]
    fn rejects_unknown_codes() {
        assert!(matches!(
            parse_users(Cursor::new("1::X::1::10::48067\n")).unwrap_err(),
            ParseError::BadGender { line: 1 }
        ));
        assert!(matches!(
            parse_users(Cursor::new("1::F::44::10::48067\n")).unwrap_err(),
            ParseError::BadAge { line: 1, value: 44 }
        ));
    }

    #[test]
    fn zip_extensions_and_latin1_bytes_pass_through() {
        let mut line = b"7::M::25::2::98107-2117\n".to_vec();
        line.extend_from_slice(b"8::F::35::4::caf\xe9\n"); // Latin-1 e-acute in zip
        let t = parse_users(Cursor::new(line)).unwrap();
        assert_eq!(t.len(), 2);
    }
}
