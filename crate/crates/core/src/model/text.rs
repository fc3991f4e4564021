//! Plain-text matrix and vector files.
//!
//! A matrix file starts with a header line `m n` followed by `m` lines of `n`
//! whitespace-separated decimals. A vector file starts with `n` followed by
//! `n` decimals (one per line when written, any whitespace when read).
//! Values are written in shortest round-trip scientific notation, so reading a
//! written file reproduces every value bit for bit.

use std::io::{BufRead, Write};

use super::{Matrix, Vector};
use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(mut out: W, a: &Matrix) -> Result<()> {
    writeln!(out, "{} {}", a.nrows(), a.ncols())?;
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:e}", a[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn write_vector<W: Write>(mut out: W, v: &Vector) -> Result<()> {
    writeln!(out, "{}", v.len())?;
    for x in v.iter() {
        writeln!(out, "{x:e}")?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<Matrix> {
    let mut tokens = Tokens::new(input);
    let m = tokens.next_usize("row count")?;
    let n = tokens.next_usize("column count")?;
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        data.push(tokens.next_f64()?);
    }
    tokens.expect_end()?;
    Ok(Matrix::from_row_slice(m, n, &data))
}

pub fn read_vector<R: BufRead>(input: R) -> Result<Vector> {
    let mut tokens = Tokens::new(input);
    let n = tokens.next_usize("length")?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        data.push(tokens.next_f64()?);
    }
    tokens.expect_end()?;
    Ok(Vector::from_vec(data))
}

struct Tokens<R> {
    input: R,
    line: usize,
    pending: std::vec::IntoIter<String>,
}

impl<R: BufRead> Tokens<R> {
    fn new(input: R) -> Self {
        Self {
            input,
            line: 0,
            pending: Vec::new().into_iter(),
        }
    }

    fn next_token(&mut self) -> Result<Option<String>> {
        loop {
            if let Some(tok) = self.pending.next() {
                return Ok(Some(tok));
            }
            let mut buf = String::new();
            if self.input.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            self.pending = buf
                .split_whitespace()
                .map(str::to_owned)
                .collect::<Vec<_>>()
                .into_iter();
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .next_token()?
            .ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| self.err(format!("bad {what} `{tok}`")))
    }

    fn next_f64(&mut self) -> Result<f64> {
        let tok = self
            .next_token()?
            .ok_or_else(|| self.err("unexpected end of data"))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| self.err(format!("bad number `{tok}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite value `{tok}`")));
        }
        Ok(v)
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_token()? {
            None => Ok(()),
            Some(tok) => Err(self.err(format!("trailing data `{tok}`"))),
        }
    }
}
