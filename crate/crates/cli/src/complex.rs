use num_complex::Complex64;

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// Parses `re`, `im i`, or `re±im i`, e.g. `0.5+0.25i`, `-i`, `1e-3-2e-2i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {text:?}");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (body[..j].parse::<f64>().map_err(|_| bad())?, &body[j..]),
        None => (0.0, body),
    };
    let im = parse_real(im)
        .filter(|_| !im.ends_with(['e', 'E']))
        .ok_or_else(bad)?;
    Ok(Complex64::new(re, im))
}

pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_complex)
        .collect()
}

pub fn parse_real_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse number {s:?}"))
        })
        .collect()
}
