//! Small floating-point helpers shared by the estimators and checkers.

/// Largest `y` with `y.ln() <= l` near `l.exp()`.
///
/// Tabulated lower witnesses are stored in linear scale; rounding `exp` downward keeps
/// `ln(value)` from exceeding the log-space requirement it was fitted to.
pub fn exp_floor(l: f64) -> f64 {
    let mut y = l.exp();
    while y > 0.0 && y.ln() > l {
        y = y.next_down();
    }
    y
}

/// Smallest `y` with `y.ln() >= l` near `l.exp()`.
pub fn exp_ceil(l: f64) -> f64 {
    let mut y = l.exp();
    while y.is_finite() && y.ln() < l {
        y = y.next_up();
    }
    y
}

/// Ordinary least-squares line `y ~ a + b x`. Returns `(a, b)`; a single abscissa gives
/// slope 0.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod extended_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            ser.serialize_f64(*x)
        } else if x.is_nan() {
            ser.serialize_str("nan")
        } else if *x > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    struct ExtVisitor;

    impl Visitor<'_> for ExtVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("unexpected float literal {other:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        de.deserialize_any(ExtVisitor)
    }
}
