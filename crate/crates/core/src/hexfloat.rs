//! Bit-exact textual encoding of `f64` as C99 hex-float literals (`0x1.8p+1`).

use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

const MANT_BITS: u32 = 52;
const EXP_BIAS: i64 = 1023;

/// Formats `v` so that [`parse`] recovers the identical bit pattern.
pub fn format(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_field = ((bits >> MANT_BITS) & 0x7ff) as i64;
    let mant = bits & ((1u64 << MANT_BITS) - 1);
    if exp_field == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_field == 0 { (0, 1 - EXP_BIAS) } else { (1, exp_field - EXP_BIAS) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{frac}p{esign}{}", exp.abs())
}

/// Parses a hex-float literal, or a plain decimal literal as a fallback.
pub fn parse(s: &str) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::Format(format!("not a hex-float literal: {s:?}"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let apply = |x: f64| if neg { -x } else { x };
    match body {
        "inf" | "infinity" => return Ok(apply(f64::INFINITY)),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return body.parse::<f64>().map(apply).map_err(|_| bad());
    };
    let (mantissa, exp) = match hex.find(['p', 'P']) {
        Some(i) => (&hex[..i], hex[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (hex, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    // Accumulate significant hex digits into a u128 and track the binary exponent.
    let mut acc: u128 = 0;
    let mut shift: i64 = 0;
    let mut sticky = false;
    for (i, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = c.to_digit(16).ok_or_else(bad)? as u128;
        let in_frac = i >= int_part.len();
        if acc >> 120 == 0 {
            acc = (acc << 4) | d;
            if in_frac {
                shift -= 4;
            }
        } else {
            sticky |= d != 0;
            if !in_frac {
                shift += 4;
            }
        }
    }
    if acc == 0 {
        return Ok(apply(0.0));
    }
    Ok(apply(compose(acc, sticky, shift + exp)))
}

/// Rounds `acc * 2^e2` (plus a sticky bit below `acc`) to the nearest `f64`, ties to even.
fn compose(acc: u128, sticky: bool, e2: i64) -> f64 {
    let top = 127 - acc.leading_zeros() as i64;
    // Value = 1.xxx * 2^(top + e2).
    let unbiased = top + e2;
    let keep = if unbiased < 1 - EXP_BIAS {
        // Subnormal: fewer mantissa bits survive.
        MANT_BITS as i64 + 1 - (1 - EXP_BIAS - unbiased)
    } else {
        MANT_BITS as i64 + 1
    };
    if keep <= 0 {
        // Below half the smallest subnormal (or exactly half with nothing else: rounds to even zero).
        let half = keep == 0 && (acc.count_ones() > 1 || sticky);
        return if half { f64::from_bits(1) } else { 0.0 };
    }
    let drop = top + 1 - keep;
    let (mut m, round_up) = if drop > 0 {
        let m = acc >> drop;
        let rem = acc & ((1u128 << drop) - 1);
        let half = 1u128 << (drop - 1);
        let up = rem > half || (rem == half && (sticky || m & 1 == 1));
        (m, up)
    } else {
        (acc << (-drop), false)
    };
    if round_up {
        m += 1;
    }
    let mut exp = e2 + drop.max(0) + drop.min(0);
    // m now has `keep` or `keep + 1` bits; value = m * 2^exp.
    let mbits = 128 - m.leading_zeros() as i64;
    let value_exp = exp + mbits - 1;
    if value_exp > EXP_BIAS {
        return f64::INFINITY;
    }
    if value_exp < 1 - EXP_BIAS {
        // Subnormal: field exponent 0, value = m * 2^exp with exp == -1074.
        debug_assert_eq!(exp, -1074);
        return f64::from_bits(m as u64);
    }
    if mbits > MANT_BITS as i64 + 1 {
        m >>= 1;
        exp += 1;
    }
    let field = (exp + MANT_BITS as i64 + EXP_BIAS) as u64;
    f64::from_bits((field << MANT_BITS) | (m as u64 & ((1u64 << MANT_BITS) - 1)))
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(*v))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Num(f64),
    }
    match Repr::deserialize(d)? {
        Repr::Text(s) => parse(&s).map_err(serde::de::Error::custom),
        Repr::Num(v) => Ok(v),
    }
}

/// Serde adapter for `Vec<f64>`.
pub mod vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Hex(#[serde(with = "super")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| Hex(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Hex>::deserialize(d)?.into_iter().map(|h| h.0).collect())
    }
}

/// Serde adapter for `Vec<Vec<f64>>`.
pub mod vec2 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "super::vec")] Vec<f64>);

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| Row(r.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?.into_iter().map(|r| r.0).collect())
    }
}
