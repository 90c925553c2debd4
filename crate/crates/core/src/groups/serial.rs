//! Line-oriented element files.
//!
//! One element per line, `#` starts a comment. Free words are strings over
//! `{a, A, b, B}` (`e` for the identity). Matrix elements are row-major lists:
//! Abels elements as 16 `(mantissa,expo)` pairs meaning `mantissa · p^(−expo)`
//! (a bare integer is accepted for `expo = 0`), Heisenberg elements as 9
//! integers, reduced matrices as their integer residues.

use num_bigint::BigInt;

use super::{AbelsElement, FreeWord, GroupError, HeisenbergElement, ModMat, PAdicLaurent};

/// Content lines with their 1-based line numbers, comments stripped.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> GroupError {
    GroupError::Parse { line, message: message.into() }
}

pub fn read_free_words(text: &str) -> Result<Vec<FreeWord>, GroupError> {
    content_lines(text).map(|(n, l)| l.parse::<FreeWord>().map_err(|e| parse_err(n, e.to_string()))).collect()
}

pub fn format_abels(g: &AbelsElement) -> String {
    g.to_matrix().iter().flatten().map(|x| format!("({},{})", x.mantissa(), x.expo())).collect::<Vec<_>>().join(" ")
}

fn parse_laurent(tok: &str, prime: u64, line: usize) -> Result<PAdicLaurent, GroupError> {
    let bad = || parse_err(line, format!("bad entry {tok:?}"));
    if let Some(inner) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let (u, k) = inner.split_once(',').ok_or_else(bad)?;
        let u: BigInt = u.trim().parse().map_err(|_| bad())?;
        let k: u32 = k.trim().parse().map_err(|_| bad())?;
        Ok(PAdicLaurent::new(u, k, prime))
    } else {
        let u: BigInt = tok.parse().map_err(|_| bad())?;
        Ok(PAdicLaurent::new(u, 0, prime))
    }
}

pub fn parse_abels(line_text: &str, prime: u64, line: usize) -> Result<AbelsElement, GroupError> {
    let entries = line_text.split_whitespace().map(|t| parse_laurent(t, prime, line)).collect::<Result<Vec<_>, _>>()?;
    if entries.len() != 16 {
        return Err(parse_err(line, format!("expected 16 entries, found {}", entries.len())));
    }
    let mut it = entries.into_iter();
    let m: [[PAdicLaurent; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| it.next().unwrap()));
    AbelsElement::from_matrix(&m).ok_or_else(|| parse_err(line, "matrix is not in Abels' group"))
}

pub fn read_abels(text: &str, prime: u64) -> Result<Vec<AbelsElement>, GroupError> {
    content_lines(text).map(|(n, l)| parse_abels(l, prime, n)).collect()
}

pub fn format_heisenberg(h: &HeisenbergElement) -> String {
    format!("1 {} {} 0 1 {} 0 0 1", h.a, h.c, h.b)
}

pub fn parse_heisenberg(line_text: &str, line: usize) -> Result<HeisenbergElement, GroupError> {
    let v = line_text
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| parse_err(line, format!("bad integer {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != 9 {
        return Err(parse_err(line, format!("expected 9 entries, found {}", v.len())));
    }
    if v[0] != 1 || v[4] != 1 || v[8] != 1 || v[3] != 0 || v[6] != 0 || v[7] != 0 {
        return Err(parse_err(line, "matrix is not unipotent upper triangular"));
    }
    Ok(HeisenbergElement::new(v[1], v[5], v[2]))
}

pub fn read_heisenberg(text: &str) -> Result<Vec<HeisenbergElement>, GroupError> {
    content_lines(text).map(|(n, l)| parse_heisenberg(l, n)).collect()
}

pub fn format_modmat<const N: usize>(m: &ModMat<N>) -> String {
    m.to_vec().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_word_file() {
        let text = "# ball of radius 1\ne\na\nA  # inverse\n\nb\nB\n";
        let words = read_free_words(text).unwrap();
        assert_eq!(words.len(), 5);
        assert!(words[0].is_identity());
        assert!(read_free_words("ab\nxq\n").is_err());
    }

    #[test]
    fn abels_line_round_trip() {
        let mut g = AbelsElement::corner(PAdicLaurent::new(1, 1, 2));
        g.x23 = PAdicLaurent::new(-3, 2, 2);
        g.k_exp = -2;
        let line = format_abels(&g);
        assert_eq!(parse_abels(&line, 2, 1).unwrap(), g);
        let plain = "1 0 0 (1,1) 0 1 0 0 0 0 1 0 0 0 0 1";
        assert_eq!(parse_abels(plain, 2, 1).unwrap(), AbelsElement::corner(PAdicLaurent::new(1, 1, 2)));
        assert!(parse_abels("1 0 0", 2, 7).is_err());
    }

    #[test]
    fn heisenberg_line_round_trip() {
        let h = HeisenbergElement::new(2, -1, 5);
        assert_eq!(parse_heisenberg(&format_heisenberg(&h), 1).unwrap(), h);
        assert!(parse_heisenberg("1 0 0 1 1 0 0 0 1", 3).is_err());
    }
}
