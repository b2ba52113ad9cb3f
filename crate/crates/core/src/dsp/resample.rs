use crate::{Error, Result};

/// Linear-interpolation upsampling by an integer factor.
///
/// `out[k * factor] == x[k]`, points in between lie on the segment joining
/// consecutive inputs, and the `factor - 1` samples after the last input
/// repeat it, so the output is exactly `factor * x.len()` long.
pub fn upsample_linear(x: &[f64], factor: usize) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::Size {
            what: "linear upsampling",
            needed: 2,
            got: x.len(),
        });
    }
    if factor == 0 {
        return Err(Error::Config("upsampling factor must be >= 1".into()));
    }

    let mut out = Vec::with_capacity(x.len() * factor);
    for pair in x.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        out.push(a);
        for j in 1..factor {
            let frac = j as f64 / factor as f64;
            out.push(a + (b - a) * frac);
        }
    }
    let last = x[x.len() - 1];
    out.extend(std::iter::repeat(last).take(factor));
    Ok(out)
}
