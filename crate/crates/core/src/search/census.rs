//! Resumable batch run over many base pairs: builds each mate graph, records
//! its size, minimum degree, triangle property and large cliques, and appends
//! one checksummed line per pair to a checkpoint file.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use super::cliques::cliques_at_least;
use super::enumerate::enumerate_squares;
use super::mates::{mate_graph, mates};
use super::SearchError;
use crate::data::sha256_hex;
use crate::fsq::{canonical_form, write_fsq, MofsSet};

pub const CHECKPOINT_MAGIC: &str = "mofs-census v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusConfig {
    pub min_clique: usize,
    pub node_budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRecord {
    /// 1-based index into the pair list.
    pub pair: usize,
    pub mates: usize,
    pub min_degree: usize,
    pub triangles: bool,
    /// Maximal cliques of at least the configured size.
    pub cliques: usize,
    pub largest: usize,
    pub timed_out: bool,
}

impl CensusRecord {
    fn body(&self) -> String {
        format!(
            "pair {} mates {} min-degree {} triangles {} cliques {} largest {} timeout {}",
            self.pair,
            self.mates,
            self.min_degree,
            self.triangles as u8,
            self.cliques,
            self.largest,
            self.timed_out as u8
        )
    }

    fn line(&self) -> String {
        let body = self.body();
        format!("{body} sum {}", &sha256_hex(body.as_bytes())[..16])
    }

    fn parse(line: &str) -> Option<CensusRecord> {
        let (body, sum) = line.rsplit_once(" sum ")?;
        if sha256_hex(body.as_bytes())[..16] != *sum {
            return None;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 14 {
            return None;
        }
        let keys = ["pair", "mates", "min-degree", "triangles", "cliques", "largest", "timeout"];
        let mut v = [0usize; 7];
        for (i, key) in keys.iter().enumerate() {
            if f[2 * i] != *key {
                return None;
            }
            v[i] = f[2 * i + 1].parse().ok()?;
        }
        Some(CensusRecord {
            pair: v[0],
            mates: v[1],
            min_degree: v[2],
            triangles: v[3] == 1,
            cliques: v[4],
            largest: v[5],
            timed_out: v[6] == 1,
        })
    }
}

fn input_hash(pairs: &[MofsSet], cfg: &CensusConfig) -> String {
    let mut text = format!("min-clique {} budget {:?}\n", cfg.min_clique, cfg.node_budget);
    for p in pairs {
        text.push_str(&write_fsq(p));
    }
    sha256_hex(text.as_bytes())
}

fn analyse(index: usize, pair: &MofsSet, cfg: &CensusConfig) -> Result<CensusRecord, SearchError> {
    let g = mate_graph(pair)?;
    let (cliques, timed_out) = match cliques_at_least(&g.graph, cfg.min_clique, cfg.node_budget) {
        Ok(c) => (c, false),
        Err(SearchError::Timeout { partial, .. }) => (partial, true),
        Err(e) => return Err(e),
    };
    Ok(CensusRecord {
        pair: index + 1,
        mates: g.vertices.len(),
        min_degree: g.graph.min_degree(),
        triangles: g.graph.edge_outside_triangles().is_none(),
        cliques: cliques.len(),
        largest: cliques.iter().map(Vec::len).max().unwrap_or(0),
        timed_out,
    })
}

/// Runs the census over `pairs`, resuming from `checkpoint` when it exists.
/// A checkpoint written for other inputs, or with a damaged line, is
/// rejected. Returns all records in pair order.
pub fn census(
    pairs: &[MofsSet],
    cfg: &CensusConfig,
    checkpoint: &Path,
) -> Result<Vec<CensusRecord>, SearchError> {
    let hash = input_hash(pairs, cfg);
    let mut done: BTreeMap<usize, CensusRecord> = BTreeMap::new();
    if checkpoint.exists() {
        let reader = BufReader::new(File::open(checkpoint)?);
        let mut lines = reader.lines();
        let magic = lines.next().transpose()?.unwrap_or_default();
        let inputs = lines.next().transpose()?.unwrap_or_default();
        if magic != CHECKPOINT_MAGIC {
            return Err(SearchError::Checkpoint(format!("has unknown header `{magic}`")));
        }
        if inputs != format!("inputs {hash}") {
            return Err(SearchError::Checkpoint("was written for different inputs".into()));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            let rec = CensusRecord::parse(&line)
                .filter(|r| (1..=pairs.len()).contains(&r.pair))
                .ok_or_else(|| SearchError::Checkpoint(format!("line {} is damaged", i + 3)))?;
            done.insert(rec.pair, rec);
        }
    } else {
        let mut f = File::create(checkpoint)?;
        writeln!(f, "{CHECKPOINT_MAGIC}\ninputs {hash}")?;
    }
    let mut file = OpenOptions::new().append(true).open(checkpoint)?;
    for (i, pair) in pairs.iter().enumerate() {
        if done.contains_key(&(i + 1)) {
            continue;
        }
        let rec = analyse(i, pair, cfg)?;
        writeln!(file, "{}", rec.line())?;
        file.flush()?;
        done.insert(rec.pair, rec);
    }
    Ok(done.into_values().collect())
}

/// One representative of every isomorphism class of orthogonal pairs of
/// order `n <= 6`, sorted by canonical form.
pub fn orthogonal_pair_classes(n: usize) -> Result<Vec<MofsSet>, SearchError> {
    let firsts = enumerate_squares(n, true)?;
    let mut pairs = Vec::new();
    for f in &firsts {
        let base = MofsSet::new(n, vec![f.matrix().clone()])?;
        for g in mates(&base)? {
            pairs.push(MofsSet::new(n, vec![f.matrix().clone(), g.into_matrix()])?);
        }
    }
    let forms: Vec<_> = pairs
        .par_iter()
        .map(canonical_form)
        .collect::<Result<_, _>>()?;
    let mut classes = BTreeMap::new();
    for (form, p) in forms.into_iter().zip(pairs) {
        classes.entry(form).or_insert(p);
    }
    Ok(classes.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn record_lines_round_trip() {
        let rec = CensusRecord {
            pair: 3,
            mates: 6000,
            min_degree: 700,
            triangles: true,
            cliques: 2,
            largest: 15,
            timed_out: false,
        };
        assert_eq!(CensusRecord::parse(&rec.line()), Some(rec.clone()));
        let damaged = rec.line().replace("6000", "6001");
        assert_eq!(CensusRecord::parse(&damaged), None);
    }

    #[test]
    fn resume_and_reject() {
        let dir = std::env::temp_dir().join(format!("mofs-census-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ck.txt");
        let _ = std::fs::remove_file(&path);
        let set = data::load("display-10").unwrap();
        let pairs = vec![set.subset(&[0, 1]).unwrap()];
        let cfg = CensusConfig {
            min_clique: 30,
            node_budget: Some(1),
        };
        let first = census(&pairs, &cfg, &path).unwrap();
        assert_eq!(first.len(), 1);
        assert_eq!(census(&pairs, &cfg, &path).unwrap(), first);
        let other = CensusConfig {
            min_clique: 29,
            ..cfg.clone()
        };
        assert!(matches!(census(&pairs, &other, &path), Err(SearchError::Checkpoint(_))));
        let text = std::fs::read_to_string(&path).unwrap().replace("pair 1", "pair 2");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(census(&pairs, &cfg, &path), Err(SearchError::Checkpoint(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
