//! Plain-text set files: a `# N=<N> model=<tag> seed=<base>:<stream>` header
//! followed by one decimal element per line.

use std::io::{BufRead, Write};

use super::Seed;
use crate::error::{Error, Result};
use crate::expsum::FrequencySet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetHeader {
    pub ambient: usize,
    pub model: String,
    pub seed: Seed,
}

pub fn write_set<W: Write>(mut w: W, set: &FrequencySet, model: &str, seed: Seed) -> std::io::Result<()> {
    writeln!(w, "# N={} model={} seed={}", set.ambient_size(), model, seed)?;
    for n in set.iter() {
        writeln!(w, "{n}")?;
    }
    w.flush()
}

fn parse_header(line: &str, lineno: usize) -> Result<(Option<usize>, Option<String>, Option<Seed>)> {
    let mut n = None;
    let mut model = None;
    let mut seed = None;
    for tok in line.trim_start_matches('#').split_whitespace() {
        let Some((k, v)) = tok.split_once('=') else {
            continue;
        };
        match k {
            "N" => {
                n = Some(v.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad ambient size {v:?}"),
                })?)
            }
            "model" => model = Some(v.to_string()),
            "seed" => {
                seed = Some(v.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad seed {v:?}"),
                })?)
            }
            _ => {}
        }
    }
    Ok((n, model, seed))
}

/// Reads a set file. Without an `N=` header the ambient size is the largest element.
pub fn read_set<R: BufRead>(r: R) -> Result<(FrequencySet, Option<SetHeader>)> {
    let mut elems = Vec::new();
    let mut header: (Option<usize>, Option<String>, Option<Seed>) = (None, None, None);
    let mut saw_header = false;
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if !saw_header {
                header = parse_header(t, lineno)?;
                saw_header = header.0.is_some();
            }
            continue;
        }
        let v: usize = t.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("expected a positive integer, found {t:?}"),
        })?;
        if v == 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: "frequencies start at 1".into(),
            });
        }
        if elems.last().is_some_and(|&last| last >= v) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("{v} does not increase on the previous element"),
            });
        }
        elems.push(v);
    }
    let ambient = header.0.unwrap_or_else(|| elems.last().copied().unwrap_or(1));
    let set = FrequencySet::new(ambient, elems)?;
    let meta = header.0.map(|n| SetHeader {
        ambient: n,
        model: header.1.unwrap_or_else(|| "custom".into()),
        seed: header.2.unwrap_or(Seed::new(0)),
    });
    Ok((set, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let set = FrequencySet::new(100, vec![3, 10, 17, 94]).unwrap();
        let mut buf = Vec::new();
        write_set(&mut buf, &set, "ap,b=3,a=7,len=14", Seed::with_stream(7, 2)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# N=100 model=ap,b=3,a=7,len=14 seed=7:2\n"));
        let (back, hdr) = read_set(&buf[..]).unwrap();
        assert_eq!(back, set);
        let hdr = hdr.unwrap();
        assert_eq!(hdr.ambient, 100);
        assert_eq!(hdr.seed, Seed::with_stream(7, 2));
    }

    #[test]
    fn headerless_and_errors() {
        let (s, h) = read_set("1\n2\n\n9\n".as_bytes()).unwrap();
        assert_eq!(s.ambient_size(), 9);
        assert!(h.is_none());
        match read_set("# N=10\n1\nx\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(read_set("5\n3\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(read_set("# N=4\n5\n".as_bytes()).is_err());
    }
}
