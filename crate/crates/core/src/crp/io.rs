//! Plain-text snapshot format, one record per line:
//!
//! ```text
//! baplan-snapshot 1
//! arities <D_0> <D_1> ...
//! context <C>
//! beta <beta>
//! mode fixed | mode hyper <shape> <rate>
//! alpha <alpha>
//! rows <T>
//! row <v_0> <v_1> ...          (T lines, `-` for an unobserved value)
//! assign <z_0> <z_1> ...
//! clusters <K>
//! cluster <size> observed <o_0> ... counts <c_0> ...   (K lines)
//! ```
//!
//! Counts are flattened dimension by dimension. Reading re-derives the
//! tables from the rows and assignments and rejects any mismatch.

use std::sync::Arc;

use super::{
    AlphaMode, ClusterTable, CrpPosteriorState, ModelSpec, PosteriorSnapshot, SubtaskObservation,
};
use crate::error::{Error, Result};

pub const SNAPSHOT_VERSION: u32 = 1;

fn join<T: std::fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_snapshot(snap: &PosteriorSnapshot) -> String {
    let spec = &snap.spec;
    let mut out = Vec::new();
    out.push(format!("baplan-snapshot {SNAPSHOT_VERSION}"));
    out.push(format!("arities {}", join(spec.arities())));
    out.push(format!("context {}", spec.n_context()));
    out.push(format!("beta {}", spec.beta()));
    out.push(match spec.alpha_mode() {
        AlphaMode::Fixed(_) => "mode fixed".to_string(),
        AlphaMode::Hyper { shape, rate } => format!("mode hyper {shape} {rate}"),
    });
    out.push(format!("alpha {}", snap.alpha));
    out.push(format!("rows {}", snap.data.len()));
    for row in snap.data.iter() {
        let vals = (0..row.len()).map(|d| row.get(d).map_or("-".to_string(), |v| v.to_string()));
        out.push(format!("row {}", join(vals)));
    }
    out.push(format!("assign {}", join(&snap.assign)));
    out.push(format!("clusters {}", snap.clusters.len()));
    for c in &snap.clusters {
        out.push(format!(
            "cluster {} observed {} counts {}",
            c.size,
            join(&c.observed),
            join(&c.counts)
        ));
    }
    out.join("\n") + "\n"
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            path: "<snapshot>".into(),
            line: self.last,
            msg: msg.into(),
        }
    }

    fn next(&mut self, tag: &str) -> Result<Vec<&'a str>> {
        loop {
            let (i, line) = self
                .inner
                .next()
                .ok_or_else(|| self.err(format!("missing `{tag}` line")))?;
            self.last = i + 1;
            let mut words = line.split_whitespace();
            match words.next() {
                None => continue,
                Some(t) if t == tag => return Ok(words.collect()),
                Some(t) => return Err(self.err(format!("expected `{tag}`, found `{t}`"))),
            }
        }
    }

    fn parse<T: std::str::FromStr>(&self, word: &str) -> Result<T> {
        word.parse()
            .map_err(|_| self.err(format!("cannot parse `{word}`")))
    }

    fn one<T: std::str::FromStr>(&mut self, tag: &str) -> Result<T> {
        let w = self.next(tag)?;
        if w.len() != 1 {
            return Err(self.err(format!("`{tag}` takes one value")));
        }
        self.parse(w[0])
    }

    fn many<T: std::str::FromStr>(&self, words: &[&str]) -> Result<Vec<T>> {
        words.iter().map(|w| self.parse(w)).collect()
    }
}

pub fn read_snapshot(text: &str) -> Result<PosteriorSnapshot> {
    let mut l = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let version: u32 = l.one("baplan-snapshot")?;
    if version != SNAPSHOT_VERSION {
        return Err(l.err(format!("unsupported version {version}")));
    }
    let w = l.next("arities")?;
    let arities: Vec<usize> = l.many(&w)?;
    let context: usize = l.one("context")?;
    let beta: f64 = l.one("beta")?;
    let mode = l.next("mode")?;
    let alpha: f64 = l.one("alpha")?;
    let mode = match mode.as_slice() {
        ["fixed"] => AlphaMode::Fixed(alpha),
        ["hyper", s, r] => AlphaMode::Hyper {
            shape: l.parse(s)?,
            rate: l.parse(r)?,
        },
        _ => return Err(l.err("mode is `fixed` or `hyper <shape> <rate>`")),
    };
    let spec = ModelSpec::new(arities, context, beta, mode)?;
    let n_rows: usize = l.one("rows")?;
    let mut data = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let w = l.next("row")?;
        let vals = w
            .iter()
            .map(|v| {
                if *v == "-" {
                    Ok(None)
                } else {
                    l.parse(v).map(Some)
                }
            })
            .collect::<Result<Vec<Option<u8>>>>()?;
        data.push(SubtaskObservation::new(&spec, &vals).map_err(|e| l.err(e.to_string()))?);
    }
    let w = l.next("assign")?;
    let assign: Vec<usize> = l.many(&w)?;
    let k: usize = l.one("clusters")?;
    let mut clusters = Vec::with_capacity(k);
    for _ in 0..k {
        let w = l.next("cluster")?;
        let (o, c) = (
            w.iter().position(|x| *x == "observed"),
            w.iter().position(|x| *x == "counts"),
        );
        let (Some(o), Some(c)) = (o, c) else {
            return Err(l.err("cluster line needs `observed` and `counts`"));
        };
        if w.is_empty() || o != 1 || c < o {
            return Err(l.err("malformed cluster line"));
        }
        clusters.push(ClusterTable {
            size: l.parse(w[0])?,
            observed: l.many(&w[o + 1..c])?,
            counts: l.many(&w[c + 1..])?,
        });
    }
    let state = CrpPosteriorState::from_dense_labels(&spec, &data, &assign, alpha)
        .map_err(|e| l.err(e.to_string()))?;
    if state.assignments() != assign.as_slice() || state.clusters() != clusters.as_slice() {
        return Err(l.err("cluster tables do not match rows and assignments"));
    }
    Ok(PosteriorSnapshot::new(
        Arc::new(spec),
        Arc::new(data),
        &state,
    ))
}
