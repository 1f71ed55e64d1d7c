//! Serde adapters that keep non-finite floats in JSON.
//!
//! JSON numbers cannot hold `±∞` or NaN and serde_json would write `null`,
//! which then fails to read back. These write `"inf"`, `"-inf"` and `"nan"`
//! instead and accept either form on input.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn to_repr(x: f64) -> Repr {
    if x.is_finite() {
        Repr::Num(x)
    } else if x.is_nan() {
        Repr::Text("nan".into())
    } else if x > 0.0 {
        Repr::Text("inf".into())
    } else {
        Repr::Text("-inf".into())
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("expected a number, \"inf\", \"-inf\" or \"nan\", got \"{other}\""))),
        },
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    to_repr(*x).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    from_repr(Repr::deserialize(d)?)
}

/// The same for a row of optional values; `None` stays `null`.
pub mod options {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Option<f64>], s: S) -> Result<S::Ok, S::Error> {
        let r: Vec<Option<Repr>> = v.iter().map(|x| x.map(to_repr)).collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<f64>>, D::Error> {
        Vec::<Option<Repr>>::deserialize(d)?
            .into_iter()
            .map(|x| x.map(from_repr::<D::Error>).transpose())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    #[derive(Debug, PartialEq, serde::Serialize, serde::Deserialize)]
    struct T {
        #[serde(with = "super")]
        x: f64,
        #[serde(with = "super::options")]
        v: Vec<Option<f64>>,
    }

    #[test]
    fn round_trip() {
        let t = T {
            x: f64::INFINITY,
            v: vec![Some(1.5), None, Some(f64::NEG_INFINITY)],
        };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"x":"inf","v":[1.5,null,"-inf"]}"#);
        assert_eq!(serde_json::from_str::<T>(&s).unwrap(), t);
        let nan: T = serde_json::from_str(r#"{"x":"nan","v":[]}"#).unwrap();
        assert!(nan.x.is_nan());
        assert!(serde_json::from_str::<T>(r#"{"x":"big","v":[]}"#).is_err());
    }
}
