use std::io::{self, BufRead, Write};

use super::StepResult;

/// Writes one JSON object per line.
pub fn write_trace<W: Write>(mut w: W, results: &[StepResult]) -> io::Result<()> {
    for r in results {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> io::Result<Vec<StepResult>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Environment, EpisodeConfig};

    #[test]
    fn round_trip() {
        let mut env = Environment::new(EpisodeConfig::with_seeds(4, 4)).unwrap();
        let steps: Vec<_> = (0..20).map(|i| env.step_flat(i * 2 % 54).unwrap()).collect();
        let mut buf = Vec::new();
        write_trace(&mut buf, &steps).unwrap();
        assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), 20);
        assert_eq!(read_trace(&buf[..]).unwrap(), steps);
    }
}
