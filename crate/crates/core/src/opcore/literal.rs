//! JSON interchange for matrices: an array of rows, each row an array of
//! `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use super::{Op, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<[f64; 2]>>);

impl MatrixLiteral {
    pub fn to_op(&self) -> Result<Op> {
        let dim = self.0.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in &self.0 {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend(row.iter().map(|[re, im]| C64::new(*re, *im)));
        }
        Op::from_rows(dim, &data)
    }
}

impl From<&Op> for MatrixLiteral {
    fn from(op: &Op) -> Self {
        let d = op.dim();
        MatrixLiteral(
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let z = op.get(i, j);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        )
    }
}
