//! Seventeen MOFS of every order `n ≡ 2 (mod 4)`, `n >= 6`.
//!
//! Orders 6 and 10 come from bundled data. Orders 14 to 34 plug a 17-MOFS(10)
//! into the hole of an IMOFS(n; 10) filled from an orthogonal array of index
//! `B(5 + B)`, `n = 10 + 4B`. Larger orders plug the set of order `m ≡ n
//! (mod 32)`, `6 <= m <= 34`, into an IMOFS filled from the order-32 Hadamard
//! matrix.

use std::fmt;

use super::hadamard::{hadamard, oa_prefix_from_hadamard};
use super::ConstructionError;
use crate::data;
use crate::embeddings::{fill_imofs, plug};
use crate::fsq::{verify_mofs, MofsSet};
use crate::search::reconstruct_circulant;

const SQUARES: usize = 17;
const BASE_SET: &str = "17-mofs-6-01.fsq";
const CIRCULANT_ROWS: &str = "mofs-10-circ-17.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeventeenStep {
    Bundled { order: usize, dataset: &'static str },
    Circulant { order: usize, dataset: &'static str },
    Embed {
        order: usize,
        base: usize,
        b: usize,
        hadamard: usize,
        lambda: usize,
        alpha: usize,
    },
}

impl fmt::Display for SeventeenStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeventeenStep::Bundled { order, dataset } => write!(f, "order {order}: bundled {dataset}"),
            SeventeenStep::Circulant { order, dataset } => {
                write!(f, "order {order}: block-circulant rows {dataset}")
            }
            SeventeenStep::Embed {
                order,
                base,
                b,
                hadamard,
                lambda,
                alpha,
            } => write!(
                f,
                "order {order}: hole {base}, b={b}, H({hadamard}) lambda={lambda} alpha={alpha}"
            ),
        }
    }
}

/// The chain of steps that builds the set of a given order, base first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeventeenPlan {
    pub steps: Vec<SeventeenStep>,
}

impl fmt::Display for SeventeenPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn seventeen_plan(n: usize) -> Result<SeventeenPlan, ConstructionError> {
    if n < 6 || n % 4 != 2 {
        return Err(ConstructionError::BadOrder(n, "seventeen needs n = 2 mod 4, n >= 6"));
    }
    let step = match n {
        6 => {
            return Ok(SeventeenPlan {
                steps: vec![SeventeenStep::Bundled {
                    order: 6,
                    dataset: BASE_SET,
                }],
            })
        }
        10 => {
            return Ok(SeventeenPlan {
                steps: vec![SeventeenStep::Circulant {
                    order: 10,
                    dataset: CIRCULANT_ROWS,
                }],
            })
        }
        14..=34 => {
            let big_b = (n - 10) / 4;
            let lambda = big_b * (5 + big_b);
            SeventeenStep::Embed {
                order: n,
                base: 10,
                b: 2 * big_b,
                hadamard: 4 * lambda,
                lambda,
                alpha: 1,
            }
        }
        _ => {
            let mut m = n % 32;
            if m < 6 {
                m += 32;
            }
            let b = (n - m) / 2;
            SeventeenStep::Embed {
                order: n,
                base: m,
                b,
                hadamard: 32,
                lambda: 8,
                alpha: b * (n - b) / 32,
            }
        }
    };
    let SeventeenStep::Embed { base, .. } = step else {
        unreachable!()
    };
    let mut plan = seventeen_plan(base)?;
    plan.steps.push(step);
    Ok(plan)
}

fn run_step(step: &SeventeenStep, below: Option<MofsSet>) -> Result<MofsSet, ConstructionError> {
    let missing = |e: &dyn fmt::Display| ConstructionError::MissingData(e.to_string());
    match step {
        SeventeenStep::Bundled { dataset, .. } => data::load(dataset).map_err(|e| missing(&e)),
        SeventeenStep::Circulant { order, dataset } => {
            let rows = data::circulant_rows(dataset).map_err(|e| missing(&e))?;
            reconstruct_circulant(*order, rows.squares, &rows.first, &rows.middle)
                .map_err(|e| missing(&e))
        }
        SeventeenStep::Embed {
            order, b, hadamard: h, ..
        } => {
            let base = below.expect("embedding step follows its base");
            let oa = oa_prefix_from_hadamard(&hadamard(*h)?, SQUARES)?;
            let p = fill_imofs(*order, *b, &oa)?;
            Ok(plug(&p, &base)?)
        }
    }
}

/// A verified 17-MOFS(n).
pub fn seventeen(n: usize) -> Result<MofsSet, ConstructionError> {
    let plan = seventeen_plan(n)?;
    let mut current = None;
    for step in &plan.steps {
        current = Some(run_step(step, current)?);
    }
    let set = current.expect("plans are never empty");
    let report = verify_mofs(&set);
    if !report.is_valid() || set.len() != SQUARES {
        return Err(ConstructionError::SelfCheckFailed(report.to_string()));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(seventeen_plan(6).unwrap().steps.len(), 1);
        let p = seventeen_plan(34).unwrap();
        assert_eq!(
            p.steps[1],
            SeventeenStep::Embed {
                order: 34,
                base: 10,
                b: 12,
                hadamard: 264,
                lambda: 66,
                alpha: 1
            }
        );
        let p = seventeen_plan(38).unwrap();
        assert!(matches!(p.steps[1], SeventeenStep::Embed { base: 6, b: 16, alpha: 11, .. }));
        let p = seventeen_plan(66).unwrap();
        assert!(matches!(p.steps.last(), Some(SeventeenStep::Embed { base: 34, b: 16, .. })));
        assert_eq!(p.steps.len(), 3);
        assert!(seventeen_plan(8).is_err());
        assert!(seventeen_plan(2).is_err());
    }

    #[test]
    fn small_orders() {
        for n in [6, 10, 14] {
            assert_eq!(seventeen(n).unwrap().len(), 17);
        }
    }
}
