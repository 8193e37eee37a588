//! Example sets shipped with the crate, embedded at compile time with pinned
//! SHA-256 checksums. Setting `MOFS_DATA_DIR` makes the loaders read the
//! same file names from that directory instead; checksums are still enforced.

use std::borrow::Cow;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fsq::{content_lines, parse_fsq, verify_mofs, FsqError, MofsSet, Row};

pub const DATA_DIR_ENV: &str = "MOFS_DATA_DIR";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("unknown dataset `{0}`")]
    Unknown(String),
    #[error("checksum mismatch for `{name}`: expected {expected}, found {found}")]
    Checksum {
        name: String,
        expected: &'static str,
        found: String,
    },
    #[error("reading `{0}`: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("dataset `{0}` is not a valid set of MOFS: {1}")]
    Invalid(String, String),
    #[error("dataset `{0}`: {1}")]
    Format(String, String),
    #[error(transparent)]
    Fsq(#[from] FsqError),
}

pub struct Dataset {
    pub name: &'static str,
    pub sha256: &'static str,
    text: &'static str,
}

macro_rules! bundled {
    ($file:literal, $sum:literal) => {
        Dataset {
            name: $file,
            sha256: $sum,
            text: include_str!(concat!("../data/", $file)),
        }
    };
}

pub const DATASETS: &[Dataset] = &[
    bundled!("17-mofs-6-01.fsq", "a27e1ced545ec9743e2305f39bae72e04f349ffd0559e38f4f41063693c8fe65"),
    bundled!("17-mofs-6-02.fsq", "a04f222064c94aeb885365da496e7394e465ed3f2c42bfb91eae1b578add9b10"),
    bundled!("17-mofs-6-03.fsq", "449777e2a67fe921e914b3f548fa53288aa6b002edb06ac610e499e7fa06b0ff"),
    bundled!("17-mofs-6-04.fsq", "eeb9b3718435c6860b5a495d4228cf04e1a0ae848c1e149017c0e5f89270f22d"),
    bundled!("17-mofs-6-05.fsq", "420129d3d784989fe87f41f53996780ebe9c2bc6d13c843160a933487541a6e3"),
    bundled!("17-mofs-6-06.fsq", "1e30adf6b748f8d0da254299f405129f1472921d578d24eb28ad9f721a048d94"),
    bundled!("17-mofs-6-07.fsq", "78378d16213e0ba39b2d34f5e92bbb6a9adeb793265cdac0b560bbfa92b9af80"),
    bundled!("17-mofs-6-08.fsq", "6b5cee27c62acfb6612ed4773830760a21431c615d2f720f33470661c04b3a3d"),
    bundled!("17-mofs-6-09.fsq", "b44308132ec4d803a215dd1542f022cda55b2ed9e7c13595d630351531ad7c48"),
    bundled!("17-mofs-6-10.fsq", "9322ece01110ef1c0f2533a1205c8f44f0accd83f96b8118ed035e399b3470a6"),
    bundled!("17-mofs-6-11.fsq", "d04b173068865cef1504e5b795d152459dd2103cd9a86aca3c5b61f7d85d5f0f"),
    bundled!("17-mofs-6-12.fsq", "ed0951c07ec14ee96c9ddc9cab8dac397d0207869a1745ce6c97cc1a05220df0"),
    bundled!("17-mofs-6-13.fsq", "aed4332388a8c54652b92522375764834d0959ed2756a7036dcf4c0fb6ec3740"),
    bundled!("17-mofs-6-14.fsq", "885dfa0490bde268bde0b45fc93899a965dcf4c1571574d7717cbdf04a8ad256"),
    bundled!("17-mofs-6-15.fsq", "8018d62f1c982a9c84713ef9253c61ca8904fc21c571c303811322475e9dbc96"),
    bundled!("17-mofs-6-16.fsq", "f5dc6d05423fc5fedae4808a2fa7ea12f90d585dee712aaa25e6908c01baa851"),
    bundled!("17-mofs-6-17.fsq", "736596004cfe8328bcd28984c11f7f2781d73a01ab3f03ce7e4ff23983af0137"),
    bundled!("17-mofs-6-18.fsq", "506d2b82af6b093f8690bdf64d546c3a86460b5f4c68ecf2303c2c86f7a82ca8"),
    bundled!("display-10.fsq", "fffe8287a71c28e18d10d2b00ef65c66e832293ad06c9b2d94eac0aaf201faad"),
    bundled!("display-11.fsq", "d2d49af338d6fd812daa336fbb94a3e1d1f244cea86f02fd6bfdbca44664030e"),
    bundled!("display-12.fsq", "e63c6d36700b1bf9d28e7abd7964fa292d834c3b6b0125484e70016061d83e03"),
    bundled!("display-16.fsq", "16410bb28bc0a0f516d9332d60f98958cf66f45f67886bbe78aa9b30ae7348cd"),
    bundled!("display-17.fsq", "80673461d6ad85c698c6502ef924545e45a67a2d236b17554ab93b3009f88383"),
    bundled!("maxmofs-6-k06.fsq", "b96a50b32146b114b4c25fad63a67753ac072f3c8f0524cc095e2d2f894b6ec1"),
    bundled!("maxmofs-6-k07.fsq", "d344200180a0f4abe15299507cefad38508460b683614c992502538c1fa53677"),
    bundled!("maxmofs-6-k08.fsq", "966dac83e4ca37d0bba405210a1fd45c58d136061a7bba02e5c7a8cbef12ab05"),
    bundled!("maxmofs-6-k10.fsq", "ec9093250f05dd8aecc532e67dfda4d7bbead0d6451db8eba7e0c3665004f329"),
    bundled!("maxmofs-6-k11.fsq", "077971de5c0197c92543c6f5ab347bc945a5ca0f79e92b26aafe624a93c485dd"),
    bundled!("maxmofs-6-k12.fsq", "17648d218016528dabf461fe37155bc7b2438ea8018403310235e97eea0d2598"),
    bundled!("maxmofs-6-k14.fsq", "839327b9f4be88bad612bee0e4ddcc26e2131ae34ed6b8734e51a431e3e63363"),
    bundled!("maxmofs-6-k15.fsq", "75d41e3c3e1844bc508f8e3c499c41d0b181ca9b4d41fb4b8d083b911d2bdee0"),
    bundled!("mofs-10-circ-17.txt", "5d1b23c48b76ff6e3f973b612f7b1ee93780f29ab1f6104b03a2a4b939b31669"),
    bundled!("mofs-10-circ-9.txt", "15b95fd4f85e81fde53035ea43f9139eb1bf5ef5f5c79186529ba878e2f806a3"),
    bundled!("nine-mofs-6-rel-1-1.fsq", "084e0a4b1d66b716c44a3fc821ca3ffa12eb8d9af55146a069588d1c44e899d4"),
    bundled!("nine-mofs-6-rel-1-5.fsq", "d1f62480b2e199fb90cd1095bf43eee49f6e4fd49d333876d84597639551bafd"),
];

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn dataset(name: &str) -> Result<&'static Dataset, DataError> {
    DATASETS
        .iter()
        .find(|d| d.name == name || d.name.rsplit_once('.').map(|p| p.0) == Some(name))
        .ok_or_else(|| DataError::Unknown(name.to_string()))
}

/// The text of a dataset, honouring `MOFS_DATA_DIR`, after checking its
/// checksum.
pub fn dataset_text(name: &str) -> Result<Cow<'static, str>, DataError> {
    let d = dataset(name)?;
    let text: Cow<'static, str> = match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => {
            let path = PathBuf::from(dir).join(d.name);
            let s = std::fs::read_to_string(&path).map_err(|e| DataError::Io(path, e))?;
            Cow::Owned(s)
        }
        None => Cow::Borrowed(d.text),
    };
    let found = sha256_hex(text.as_bytes());
    if found != d.sha256 {
        return Err(DataError::Checksum {
            name: d.name.to_string(),
            expected: d.sha256,
            found,
        });
    }
    Ok(text)
}

/// Parses and verifies a bundled set.
pub fn load(name: &str) -> Result<MofsSet, DataError> {
    let set = parse_fsq(&dataset_text(name)?)?;
    let report = verify_mofs(&set);
    if !report.is_valid() {
        return Err(DataError::Invalid(name.to_string(), report.to_string()));
    }
    Ok(set)
}

/// The `i`-th of the eighteen 17-MOFS(6), `1 <= i <= 18`.
pub fn seventeen_mofs_6(i: usize) -> Result<MofsSet, DataError> {
    load(&format!("17-mofs-6-{i:02}.fsq"))
}

pub fn all_seventeen_mofs_6() -> Result<Vec<MofsSet>, DataError> {
    (1..=18).map(seventeen_mofs_6).collect()
}

/// Generating rows of a block-circulant set: row 1 and row `n/2 + 1` of the
/// superposition in decimal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CirculantRows {
    pub order: usize,
    pub squares: usize,
    pub first: Vec<Row>,
    pub middle: Vec<Row>,
}

pub fn parse_circulant_rows(name: &str, text: &str) -> Result<CirculantRows, DataError> {
    let bad = |m: &str| DataError::Format(name.to_string(), m.to_string());
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or_else(|| bad("empty"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "mofs-circ" {
        return Err(bad("header must be `mofs-circ <n> <k>`"));
    }
    let order: usize = fields[1].parse().map_err(|_| bad("bad order"))?;
    let squares: usize = fields[2].parse().map_err(|_| bad("bad square count"))?;
    let mut row = || -> Result<Vec<Row>, DataError> {
        let (_, line) = lines.next().ok_or_else(|| bad("missing row"))?;
        let v: Vec<Row> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad integer")))
            .collect::<Result<_, _>>()?;
        if v.len() != order {
            return Err(bad("row has the wrong length"));
        }
        Ok(v)
    };
    let first = row()?;
    let middle = row()?;
    Ok(CirculantRows {
        order,
        squares,
        first,
        middle,
    })
}

pub fn circulant_rows(name: &str) -> Result<CirculantRows, DataError> {
    parse_circulant_rows(name, &dataset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_file_matches_its_checksum() {
        for d in DATASETS {
            assert_eq!(sha256_hex(d.text.as_bytes()), d.sha256, "{}", d.name);
        }
    }

    #[test]
    fn every_bundled_set_is_valid() {
        for d in DATASETS.iter().filter(|d| d.name.ends_with(".fsq")) {
            load(d.name).unwrap();
        }
        assert_eq!(all_seventeen_mofs_6().unwrap().len(), 18);
        assert!(matches!(load("nope"), Err(DataError::Unknown(_))));
    }

    #[test]
    fn circulant_rows_parse() {
        let r = circulant_rows("mofs-10-circ-17.txt").unwrap();
        assert_eq!((r.order, r.squares), (10, 17));
        assert_eq!(r.middle[0], 131071);
    }
}
