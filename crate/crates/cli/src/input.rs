//! Quaternion records from CSV (`q0,q1,q2,q3`) or JSON lines
//! (`{"q":[q0,q1,q2,q3]}`). Blank lines and `#` comments are skipped; the
//! format is detected per line.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

/// One input quaternion, kept as decimal text so exact profiles can parse it
/// without going through binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRecord {
    pub line: usize,
    pub fields: [String; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl InputRecord {
    pub fn as_f64(&self) -> [f64; 4] {
        // validated at parse time
        self.fields
            .clone()
            .map(|s| s.parse::<f64>().expect("validated decimal"))
    }

    pub fn as_rational(&self) -> [BigRational; 4] {
        self.fields
            .clone()
            .map(|s| parse_decimal(&s).expect("validated decimal"))
    }
}

/// Parse every record, collecting all errors.
pub fn parse_records(text: &str) -> Result<Vec<InputRecord>, Vec<ParseError>> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parsed = if t.starts_with('{') {
            parse_json_line(t)
        } else {
            parse_csv_line(t)
        };
        match parsed {
            Ok(fields) => records.push(InputRecord { line, fields }),
            Err(message) => errors.push(ParseError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(errors)
    }
}

fn parse_csv_line(t: &str) -> Result<[String; 4], String> {
    let parts: Vec<&str> = t.split(',').map(str::trim).collect();
    four_decimals(parts.iter().map(|s| s.to_string()).collect())
}

fn parse_json_line(t: &str) -> Result<[String; 4], String> {
    let v: serde_json::Value = serde_json::from_str(t).map_err(|e| format!("invalid JSON: {e}"))?;
    let arr = v
        .get("q")
        .and_then(|q| q.as_array())
        .ok_or_else(|| "expected an object with a \"q\" array".to_string())?;
    let fields = arr
        .iter()
        .map(|x| match x {
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => Err(format!("component {other} is not a number")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    four_decimals(fields)
}

fn four_decimals(fields: Vec<String>) -> Result<[String; 4], String> {
    if fields.len() != 4 {
        return Err(format!("expected 4 components, got {}", fields.len()));
    }
    for f in &fields {
        if parse_decimal(f).is_none() {
            return Err(format!("`{f}` is not a finite decimal number"));
        }
    }
    Ok(fields.try_into().expect("length checked"))
}

/// Exact value of a decimal literal such as `-12.5e-3`. `None` for anything
/// else, including `inf` and `nan`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, rest) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], rest[i + 1..].parse::<i32>().ok()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    if negative {
        value = -value;
    }
    // must also be finite in binary64
    let f: f64 = s.parse().ok()?;
    if !f.is_finite() {
        return None;
    }
    Some(value)
}
