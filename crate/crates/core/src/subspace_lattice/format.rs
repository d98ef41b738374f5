//! The versioned text format for families.
//!
//! ```text
//! qlattice-family v1 kind=subspaces q=3 n=3
//! 100;010
//! 102
//! ```
//!
//! Subspace lines are RREF rows joined by `;`, each row `n` base-q digits
//! (`0-9a-z`); for `q > 36` each row is `n` comma-separated decimal codes.
//! The zero subspace is `-`. Subset lines are `n` characters of `0`/`1`,
//! character `i` standing for element `i + 1`. Blank lines and lines starting
//! with `#` are ignored. Elements are written in canonical sorted order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::finite_field::{make_field, FieldSpec};

use super::matrix::MatrixGF;
use super::{canonicalize, Ambient, AnyFamily, Family, LatticeElement, SubsetHandle, SubspaceHandle};

pub const FAMILY_HEADER: &str = "qlattice-family v1";

fn header(ambient: &Ambient) -> String {
    let q = ambient.q().map_or("-".to_string(), |q| q.to_string());
    format!("{FAMILY_HEADER} kind={} q={} n={}", ambient.kind(), q, ambient.n())
}

/// Serializes a family; the output ends with a newline.
pub fn write_family<E: LatticeElement>(fam: &Family<E>) -> String {
    let mut out = header(fam.ambient());
    out.push('\n');
    for e in fam.elements() {
        let _ = writeln!(out, "{}", e.encode());
    }
    out
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

fn parse_header(line: usize, text: &str) -> Result<(String, Option<u32>, usize)> {
    let rest = text
        .strip_prefix(FAMILY_HEADER)
        .ok_or_else(|| perr(line, format!("expected header starting with `{FAMILY_HEADER}`")))?;
    let (mut kind, mut q, mut n) = (None, None, None);
    for tok in rest.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| perr(line, format!("malformed header field `{tok}`")))?;
        match key {
            "kind" => kind = Some(val.to_string()),
            "q" => {
                q = Some(if val == "-" {
                    None
                } else {
                    Some(val.parse::<u32>().map_err(|_| perr(line, format!("bad q `{val}`")))?)
                })
            }
            "n" => n = Some(val.parse::<usize>().map_err(|_| perr(line, format!("bad n `{val}`")))?),
            _ => return Err(perr(line, format!("unknown header field `{key}`"))),
        }
    }
    let kind = kind.ok_or_else(|| perr(line, "header lacks kind="))?;
    let q = q.ok_or_else(|| perr(line, "header lacks q="))?;
    let n = n.ok_or_else(|| perr(line, "header lacks n="))?;
    Ok((kind, q, n))
}

fn parse_subset(line: usize, text: &str, n: usize) -> Result<SubsetHandle> {
    if text.len() != n {
        return Err(perr(line, format!("expected {n} characters, found {}", text.len())));
    }
    let mut bits = 0u64;
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << i,
            _ => return Err(perr(line, format!("unexpected character `{c}` in subset"))),
        }
    }
    SubsetHandle::new(n, bits).map_err(|e| perr(line, e.to_string()))
}

fn parse_row(line: usize, text: &str, field: &FieldSpec, n: usize) -> Result<Vec<u8>> {
    let q = field.q();
    let codes: Vec<u32> = if q > 36 {
        text.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| perr(line, format!("bad code `{t}`"))))
            .collect::<Result<_>>()?
    } else {
        text.chars()
            .map(|c| c.to_digit(36).ok_or_else(|| perr(line, format!("bad digit `{c}`"))))
            .collect::<Result<_>>()?
    };
    if codes.len() != n {
        return Err(perr(line, format!("row has {} entries, expected {n}", codes.len())));
    }
    if let Some(bad) = codes.iter().find(|&&c| c >= q) {
        return Err(perr(line, format!("digit {bad} out of range for q={q}")));
    }
    Ok(codes.into_iter().map(|c| c as u8).collect())
}

fn parse_subspace(line: usize, text: &str, field: &FieldSpec, n: usize) -> Result<SubspaceHandle> {
    if text == "-" {
        return Ok(SubspaceHandle::zero(field, n));
    }
    let mut entries = Vec::new();
    let mut rows = 0;
    for row in text.split(';') {
        entries.extend(parse_row(line, row, field, n)?);
        rows += 1;
    }
    let m = MatrixGF::new(field, rows, n, entries).map_err(|e| perr(line, e.to_string()))?;
    let s = canonicalize(field, n, &m).map_err(|e| perr(line, e.to_string()))?;
    if s.dim() != rows {
        return Err(perr(line, format!("rows are dependent: rank {} < {rows}", s.dim())));
    }
    Ok(s)
}

/// Parses a family file. Non-canonical bases are canonicalized and repeated
/// elements collapse.
pub fn parse_family(text: &str) -> Result<AnyFamily> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, htext) = lines.next().ok_or_else(|| perr(1, "empty family file"))?;
    let (kind, q, n) = parse_header(hline, htext)?;
    match (kind.as_str(), q) {
        ("subsets", None) => {
            if n > 64 {
                return Err(perr(hline, format!("n={n} exceeds 64")));
            }
            let els = lines.map(|(l, t)| parse_subset(l, t, n)).collect::<Result<Vec<_>>>()?;
            Ok(AnyFamily::Subsets(Family::new(Ambient::sets(n), els)?))
        }
        ("subspaces", Some(q)) => {
            let field = make_field(q).map_err(|e| perr(hline, e.to_string()))?;
            let els = lines
                .map(|(l, t)| parse_subspace(l, t, &field, n))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyFamily::Subspaces(Family::new(Ambient::subspaces(&field, n), els)?))
        }
        ("subsets", Some(_)) => Err(perr(hline, "subset families take q=-")),
        ("subspaces", None) => Err(perr(hline, "subspace families need a numeric q")),
        (k, _) => Err(perr(hline, format!("unknown kind `{k}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace_lattice::enumerate_subspaces;

    #[test]
    fn subspace_round_trip() {
        for q in [2, 3, 4, 9] {
            let f = make_field(q).unwrap();
            let mut els: Vec<SubspaceHandle> = enumerate_subspaces(&f, 3, 1).unwrap().collect();
            els.extend(enumerate_subspaces(&f, 3, 2).unwrap());
            els.push(SubspaceHandle::zero(&f, 3));
            let fam = Family::new(Ambient::subspaces(&f, 3), els).unwrap();
            let text = write_family(&fam);
            let AnyFamily::Subspaces(back) = parse_family(&text).unwrap() else {
                panic!("wrong kind");
            };
            assert_eq!(back, fam);
            assert_eq!(write_family(&back), text);
        }
    }

    #[test]
    fn wide_field_round_trip() {
        let f = make_field(49).unwrap();
        let els: Vec<_> = enumerate_subspaces(&f, 2, 1).unwrap().collect();
        let fam = Family::new(Ambient::subspaces(&f, 2), els).unwrap();
        let text = write_family(&fam);
        assert!(text.lines().nth(2).unwrap().contains(','));
        let AnyFamily::Subspaces(back) = parse_family(&text).unwrap() else {
            panic!()
        };
        assert_eq!(back, fam);
    }

    #[test]
    fn subset_round_trip_and_header() {
        let a = SubsetHandle::from_elements(4, &[1, 2]).unwrap();
        let b = SubsetHandle::from_elements(4, &[2, 4]).unwrap();
        let fam = Family::new(Ambient::sets(4), [a, b]).unwrap();
        let text = write_family(&fam);
        assert_eq!(text, "qlattice-family v1 kind=subsets q=- n=4\n0101\n1100\n");
        assert_eq!(parse_family(&text).unwrap(), AnyFamily::Subsets(fam));
    }

    #[test]
    fn non_canonical_input_is_canonicalized() {
        let text = "qlattice-family v1 kind=subspaces q=2 n=4\n# comment\n1100;0110\n\n1010;0110\n";
        let fam = parse_family(text).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.encodings(), vec!["1010;0110"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("nonsense\n", 1),
            ("qlattice-family v1 kind=subsets q=- n=3\n101\n1012\n", 3),
            ("qlattice-family v1 kind=subspaces q=2 n=3\n100\n\n101;101\n", 4),
            ("qlattice-family v1 kind=subspaces q=3 n=2\n13\n", 2),
            ("qlattice-family v1 kind=subspaces q=6 n=2\n10\n", 1),
            ("qlattice-family v1 kind=subsets q=2 n=2\n", 1),
        ];
        for (text, line) in cases {
            match parse_family(text) {
                Err(Error::ParseError { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
