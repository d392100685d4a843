//! C99-style hexadecimal float text (`%a`), exact for every finite `f64`.

use crate::error::{Error, Result};

pub fn to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

pub fn from_hex(s: &str) -> Result<f64> {
    let bad = || Error::contract(format!("malformed hex float {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let value = match body {
        "nan" => f64::NAN,
        "inf" => f64::INFINITY,
        _ => {
            let body = body.strip_prefix("0x").ok_or_else(bad)?;
            let (mantissa, exp) = body.split_once('p').ok_or_else(bad)?;
            let exp: i32 = exp.parse().map_err(|_| bad())?;
            let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
            if frac.len() > 13 || int.len() != 1 {
                return Err(bad());
            }
            let lead = u64::from_str_radix(int, 16).map_err(|_| bad())?;
            let frac_bits = if frac.is_empty() {
                0
            } else {
                u64::from_str_radix(frac, 16).map_err(|_| bad())? << (4 * (13 - frac.len()))
            };
            match lead {
                0 if frac_bits == 0 => 0.0,
                0 if exp == -1022 => f64::from_bits(frac_bits),
                1 if (-1022..=1023).contains(&exp) => {
                    f64::from_bits((((exp + 1023) as u64) << 52) | frac_bits)
                }
                _ => return Err(bad()),
            }
        }
    };
    Ok(if neg { -value } else { value })
}
