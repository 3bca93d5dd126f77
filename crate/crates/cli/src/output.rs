//! Matrix rendering. Every value is rendered once as a token, so CSV and JSON
//! rows carry identical values.

use num_rational::BigRational;
use num_traits::Zero;

/// Shortest round-trip decimal; negative zero prints as `0`.
pub fn f64_token(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        x.to_string()
    }
}

/// `n` for integers, `n/d` otherwise.
pub fn rational_token(x: &BigRational) -> String {
    if x.is_zero() {
        "0".to_string()
    } else if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn csv_row(tokens: &[String; 9]) -> String {
    tokens.join(",")
}

/// `{"line":N,"matrix":[[..],[..],[..]]}`. Fractions are JSON strings since
/// they are not JSON numbers.
pub fn json_row(line: usize, tokens: &[String; 9]) -> String {
    let cell = |t: &String| {
        if t.contains('/') {
            format!("\"{t}\"")
        } else {
            t.clone()
        }
    };
    let rows: Vec<String> = tokens
        .chunks(3)
        .map(|r| format!("[{}]", r.iter().map(cell).collect::<Vec<_>>().join(",")))
        .collect();
    format!("{{\"line\":{line},\"matrix\":[{}]}}", rows.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        assert_eq!(f64_token(-0.0), "0");
        assert_eq!(f64_token(1.0), "1");
        assert_eq!(f64_token(0.1), "0.1");
        assert_eq!(f64_token(-2.5e-9).parse::<f64>().unwrap(), -2.5e-9);
        assert_eq!(
            rational_token(&BigRational::new((-6).into(), 4.into())),
            "-3/2"
        );
        assert_eq!(
            rational_token(&BigRational::from_integer((-20).into())),
            "-20"
        );
    }

    #[test]
    fn json_is_valid() {
        let t = ["1", "-1/2", "0", "0", "1", "0", "0", "0", "0.25"].map(String::from);
        let v: serde_json::Value = serde_json::from_str(&json_row(3, &t)).unwrap();
        assert_eq!(v["line"], 3);
        assert_eq!(v["matrix"][0][1], "-1/2");
        assert_eq!(v["matrix"][2][2], 0.25);
        assert_eq!(csv_row(&t), "1,-1/2,0,0,1,0,0,0,0.25");
    }
}
