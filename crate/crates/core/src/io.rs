//! Small file-format helpers.

use std::io::Write;

use crate::error::Result;

/// Binary 8-bit PGM, linearly scaled so the largest finite value maps to 255.
pub fn write_pgm<W: Write>(mut w: W, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    let max = data.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    write!(w, "P5\n{cols} {rows}\n255\n")?;
    let bytes: Vec<u8> = data
        .iter()
        .map(|&v| {
            if max > 0.0 && v.is_finite() {
                (v / max * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_scaling() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 1, 3, &[0.0, 1.0, 2.0]).unwrap();
        let header = b"P5\n3 1\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(&buf[header.len()..], &[0, 128, 255]);
    }
}
