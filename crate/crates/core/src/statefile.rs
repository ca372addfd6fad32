//! Plain-text state files.
//!
//! ```text
//! # the ± pair on two modes per party
//! modes: 2+2
//! state: psi
//! 0000: 0.7071067811865476,0
//! 0101: 0.7071067811865476,0
//! state: phi
//! 0000: 0.7071067811865476,0
//! 0101: -0.7071067811865476,0
//! ```
//!
//! Bit `j` of a bitstring (left to right) is the occupation of mode `j`;
//! Alice owns the first `n_alice` modes. A file without `state:` lines holds
//! a single state. Amplitudes are written with the shortest representation
//! that parses back to the same `f64`, so writing and re-reading is exact.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModePartition};
use crate::linalg::{CVector, ZERO};

/// One state block of a file, amplitudes as written.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEntry {
    pub name: Option<String>,
    pub amplitudes: CVector,
    /// 1-based line of the block start, for error messages.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub partition: ModePartition,
    pub states: Vec<StateEntry>,
}

impl StateFile {
    /// Validated Fock vectors, rescaled to unit norm when `normalize` is set.
    pub fn fock_states(&self, normalize: bool) -> Result<Vec<FockVector>> {
        self.states
            .iter()
            .map(|s| {
                let v = FockVector::new(self.partition, s.amplitudes.clone())?;
                if normalize {
                    v.normalized()
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&StateEntry> {
        self.states.iter().find(|s| s.name.as_deref() == Some(name))
    }
}

pub fn read_state_file(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
    parse_state_file(&text, &path.display().to_string())
}

pub fn parse_state_file(text: &str, origin: &str) -> Result<StateFile> {
    let err = |line: usize, message: String| Error::Parse { path: origin.to_string(), line, message };
    let mut partition: Option<ModePartition> = None;
    let mut states: Vec<StateEntry> = Vec::new();
    let mut seen: Vec<bool> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(err(line_no, format!("expected `key: value`, found {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "modes" => {
                if partition.is_some() {
                    return Err(err(line_no, "duplicate `modes` header".into()));
                }
                let parsed = value
                    .split_once('+')
                    .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)));
                let Some((na, nb)) = parsed else {
                    return Err(err(line_no, format!("expected `modes: <n_alice>+<n_bob>`, found {value:?}")));
                };
                partition = Some(ModePartition::new(na, nb).map_err(|e| err(line_no, e.to_string()))?);
            }
            "state" => {
                let p = partition.ok_or_else(|| err(line_no, "`state` before `modes` header".into()))?;
                if value.is_empty() {
                    return Err(err(line_no, "empty state name".into()));
                }
                if states.iter().any(|s| s.name.as_deref() == Some(value)) {
                    return Err(err(line_no, format!("duplicate state name {value:?}")));
                }
                if states.len() == 1 && states[0].name.is_none() {
                    return Err(err(line_no, "amplitudes before the first `state` line".into()));
                }
                states.push(StateEntry { name: Some(value.to_string()), amplitudes: CVector::zeros(p.dim()), line: line_no });
                seen = vec![false; p.dim()];
            }
            bits => {
                let p = partition.ok_or_else(|| err(line_no, "amplitude before `modes` header".into()))?;
                let idx = p.parse_bitstring(bits).map_err(|e| err(line_no, e.to_string()))?;
                let amp = parse_complex(value).ok_or_else(|| err(line_no, format!("bad amplitude {value:?}; expected `re,im`")))?;
                if states.is_empty() {
                    states.push(StateEntry { name: None, amplitudes: CVector::zeros(p.dim()), line: line_no });
                    seen = vec![false; p.dim()];
                }
                if seen[idx] {
                    return Err(err(line_no, format!("basis state {bits} listed twice")));
                }
                seen[idx] = true;
                states.last_mut().expect("pushed above").amplitudes[idx] = amp;
            }
        }
    }
    let partition = partition.ok_or_else(|| err(0, "missing `modes` header".into()))?;
    if states.is_empty() {
        return Err(err(0, "no amplitudes".into()));
    }
    Ok(StateFile { partition, states })
}

fn parse_complex(text: &str) -> Option<Complex64> {
    let (re, im) = text.split_once(',')?;
    let z = Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?);
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// Render named states sharing one partition. A single unnamed state
/// produces a file without `state:` lines.
pub fn write_states(states: &[(Option<&str>, &FockVector)]) -> Result<String> {
    let Some((_, first)) = states.first() else {
        return Err(Error::InvalidArgument("nothing to write".into()));
    };
    let p = *first.partition();
    if states.iter().any(|(_, s)| *s.partition() != p) {
        return Err(Error::PartitionMismatch);
    }
    let mut out = String::new();
    writeln!(out, "modes: {}+{}", p.n_alice(), p.n_bob()).expect("write to String");
    for (name, state) in states {
        if let Some(name) = name {
            writeln!(out, "state: {name}").expect("write to String");
        }
        for (i, a) in state.amplitudes().iter().enumerate() {
            if *a != ZERO {
                writeln!(out, "{}: {},{}", p.bitstring(i), a.re, a.im).expect("write to String");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_state;
    use crate::linalg::c64;

    const PM: &str = "# pair\nmodes: 2+2\nstate: psi\n0000: 0.7071067811865476,0\n0101: 0.7071067811865476,0 # tail\n\nstate: phi\n0000: 0.7071067811865476,0\n0101: -0.7071067811865476,0\n";

    #[test]
    fn parses_named_pair() {
        let f = parse_state_file(PM, "pm.txt").unwrap();
        assert_eq!((f.partition.n_alice(), f.partition.n_bob()), (2, 2));
        assert_eq!(f.states.len(), 2);
        let phi = f.get("phi").unwrap();
        assert_eq!(phi.amplitudes[10], c64(-std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let v = f.fock_states(true).unwrap();
        assert!(v[0].inner(&v[1]).norm() < 1e-15);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "modes: 1+1\n00: 1,0\n11: one,0\n";
        match parse_state_file(bad, "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        for (text, line) in [
            ("00: 1,0\n", 1),
            ("modes: 1+1\n000: 1,0\n", 2),
            ("modes: 1+1\n00: 1,0\n00: 1,0\n", 3),
            ("modes: 1+1\nmodes: 1+1\n", 2),
            ("modes: 1-1\n", 1),
            ("modes: 1+1\njunk\n", 2),
        ] {
            match parse_state_file(text, "x") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(parse_state_file("modes: 1+1\n", "x").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let p = ModePartition::new(2, 1).unwrap();
        let s = make_state(p, &[("000", c64(0.1, 0.2)), ("110", c64(-1.0 / 3.0, 1e-17)), ("011", c64(0.3, 0.0))], true).unwrap();
        let text = write_states(&[(None, &s)]).unwrap();
        let back = parse_state_file(&text, "rt").unwrap().fock_states(false).unwrap();
        assert_eq!(back[0], s);
    }
}
