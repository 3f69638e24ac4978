//! Crossingless matchings of `2n` points.
//!
//! A matching is stored as a partner table over the 1-based points
//! `1..=2n`. All public indices are 1-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Largest `n` accepted by [`enumerate`]; `Catalan(8) = 1430`.
pub const ENUMERATE_CAP: usize = 8;

/// A noncrossing perfect matching of `{1, .., 2n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    // partner[p - 1] is the point matched with p.
    partner: Vec<usize>,
}

impl Matching {
    /// Builds a matching from a list of pairs, checking every invariant.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let size = 2 * pairs.len();
        let mut partner = vec![0usize; size];
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == 0 || j > size || i == j {
                return Err(invalid(format!("pair ({a},{b}) out of range 1..={size}")));
            }
            if partner[i - 1] != 0 || partner[j - 1] != 0 {
                return Err(invalid(format!("point in pair ({a},{b}) used twice")));
            }
            if (j - i) % 2 == 0 {
                return Err(invalid(format!("pair ({i},{j}) encloses an odd number of points")));
            }
            partner[i - 1] = j;
            partner[j - 1] = i;
        }
        let m = Matching { partner };
        if let Some(((i, k), (j, l))) = m.find_crossing() {
            return Err(invalid(format!("pairs ({i},{k}) and ({j},{l}) cross")));
        }
        Ok(m)
    }

    /// The matching of zero points, the base of the reduction recursion.
    pub fn empty() -> Self {
        Matching { partner: Vec::new() }
    }

    /// Half the number of points.
    pub fn n(&self) -> usize {
        self.partner.len() / 2
    }

    /// Number of points, `2n`.
    pub fn points(&self) -> usize {
        self.partner.len()
    }

    /// Partner of any point `p`.
    pub fn partner(&self, p: usize) -> Result<usize> {
        if p == 0 || p > self.points() {
            return Err(invalid(format!("point {p} out of range 1..={}", self.points())));
        }
        Ok(self.partner[p - 1])
    }

    /// Pairs `(i, j)` with `i < j`, sorted by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner.iter().enumerate().filter_map(|(idx, &j)| (idx + 1 < j).then_some((idx + 1, j))).collect()
    }

    pub fn is_left_endpoint(&self, i: usize) -> bool {
        i >= 1 && i <= self.points() && self.partner[i - 1] > i
    }

    /// `s_a(i)`: the right partner of the left endpoint `i`.
    pub fn s(&self, i: usize) -> Result<usize> {
        if !self.is_left_endpoint(i) {
            return Err(invalid(format!("{i} is not a left endpoint of {self}")));
        }
        Ok(self.partner[i - 1])
    }

    /// `d_a(i) = (s_a(i) - i + 1) / 2`, the nesting depth of the cup at `i`
    /// counted as one plus the number of cups strictly inside it.
    pub fn d(&self, i: usize) -> Result<usize> {
        let j = self.s(i)?;
        Ok((j - i).div_ceil(2))
    }

    /// `O_a`, ascending.
    pub fn left_endpoints(&self) -> Vec<usize> {
        (1..=self.points()).filter(|&i| self.is_left_endpoint(i)).collect()
    }

    /// Smallest `i` with `(i, i + 1)` a pair.
    ///
    /// # Panics
    ///
    /// Panics on the empty matching, or if the partner table is corrupted;
    /// every nonempty noncrossing matching has an adjacent pair.
    pub fn find_adjacent(&self) -> usize {
        (1..self.points())
            .find(|&i| self.partner[i - 1] == i + 1)
            .expect("nonempty noncrossing matching has an adjacent pair")
    }

    /// All `i` with `(i, i + 1)` a pair.
    pub fn adjacent_pairs(&self) -> Vec<usize> {
        (1..self.points()).filter(|&i| self.partner[i - 1] == i + 1).collect()
    }

    /// Removes the pair `(i, i + 1)` and renumbers every point `j >= i + 2`
    /// to `j - 2`.
    pub fn reduce(&self, i: usize) -> Result<Matching> {
        if !(i >= 1 && i < self.points() && self.partner[i - 1] == i + 1) {
            return Err(invalid(format!("({i},{}) is not a pair of {self}", i + 1)));
        }
        let shift = |p: usize| if p >= i + 2 { p - 2 } else { p };
        let pairs: Vec<_> =
            self.pairs().into_iter().filter(|&(p, _)| p != i).map(|(p, q)| (shift(p), shift(q))).collect();
        Matching::from_pairs(&pairs)
    }

    /// Inverse of [`Matching::reduce`]: inserts a new cup `(i, i + 1)`,
    /// shifting every point `j >= i` to `j + 2`.
    pub fn insert_cup(&self, i: usize) -> Result<Matching> {
        if i == 0 || i > self.points() + 1 {
            return Err(invalid(format!("cannot insert a cup at {i}")));
        }
        let shift = |p: usize| if p >= i { p + 2 } else { p };
        let mut pairs: Vec<_> = self.pairs().into_iter().map(|(p, q)| (shift(p), shift(q))).collect();
        pairs.push((i, i + 1));
        Matching::from_pairs(&pairs)
    }

    /// Pairs not enclosed by any other pair, left to right.
    ///
    /// They tile `1..=2n` consecutively and their depths sum to `n`; both
    /// facts are asserted.
    pub fn outermost(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut k = 1;
        while k <= self.points() {
            let l = self.partner[k - 1];
            assert!(l > k, "point {k} should open an outermost cup");
            out.push((k, l));
            k = l + 1;
        }
        let depth_sum: usize = out.iter().map(|&(k, l)| (l - k).div_ceil(2)).sum();
        assert_eq!(depth_sum, self.n(), "outermost depths must sum to n");
        out
    }

    /// Balanced-parenthesis word: `(` at each left endpoint.
    pub fn to_parens(&self) -> String {
        (1..=self.points()).map(|p| if self.is_left_endpoint(p) { '(' } else { ')' }).collect()
    }

    /// Pair-list form, `[(1,4),(2,3)]`.
    pub fn to_pairs_string(&self) -> String {
        let body: Vec<String> = self.pairs().iter().map(|(i, j)| format!("({i},{j})")).collect();
        format!("[{}]", body.join(","))
    }

    fn find_crossing(&self) -> Option<((usize, usize), (usize, usize))> {
        let pairs = self.pairs();
        for &(i, k) in &pairs {
            for &(j, l) in &pairs {
                if i < j && j < k && k < l {
                    return Some(((i, k), (j, l)));
                }
            }
        }
        None
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pairs_string())
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matching{}", self.to_pairs_string())
    }
}

impl FromStr for Matching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Canonical text form (balanced parentheses).
pub fn format(a: &Matching) -> String {
    a.to_parens()
}

/// Parses either a parenthesis word like `(())` or a pair list like
/// `[(1,4),(2,3)]`. Whitespace is ignored.
pub fn parse(text: &str) -> Result<Matching> {
    let trimmed = text.trim_start();
    let offset = text.len() - trimmed.len();
    match trimmed.chars().next() {
        None => Err(Error::Parse { position: 0, message: "empty input".into() }),
        Some('[') => parse_pair_list(text),
        Some('(') => {
            // "(1,2)" style without brackets is a pair list; a parens word
            // never contains a digit.
            if trimmed.chars().any(|c| c.is_ascii_digit()) {
                parse_pair_list(text)
            } else {
                parse_parens(text)
            }
        }
        Some(c) => Err(Error::Parse { position: offset, message: format!("unexpected character {c:?}") }),
    }
}

fn parse_parens(text: &str) -> Result<Matching> {
    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    let mut point = 0;
    for (pos, c) in text.char_indices() {
        match c {
            '(' => {
                point += 1;
                stack.push(point);
            }
            ')' => {
                point += 1;
                let open =
                    stack.pop().ok_or_else(|| Error::Parse { position: pos, message: "unmatched ')'".into() })?;
                pairs.push((open, point));
            }
            c if c.is_whitespace() => {}
            c => {
                return Err(Error::Parse { position: pos, message: format!("unexpected character {c:?}") });
            }
        }
    }
    if !stack.is_empty() {
        return Err(Error::Parse { position: text.len(), message: format!("{} unclosed '('", stack.len()) });
    }
    pairs.sort_unstable();
    Matching::from_pairs(&pairs).map_err(|e| Error::Parse { position: 0, message: e.to_string() })
}

fn parse_pair_list(text: &str) -> Result<Matching> {
    struct Cursor<'a> {
        bytes: &'a [u8],
        pos: usize,
    }
    impl Cursor<'_> {
        fn skip_ws(&mut self) {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.bytes.get(self.pos).copied()
        }
        fn expect(&mut self, want: u8) -> Result<()> {
            match self.peek() {
                Some(b) if b == want => {
                    self.pos += 1;
                    Ok(())
                }
                Some(b) => Err(self.err(format!("expected '{}', found '{}'", want as char, b as char))),
                None => Err(self.err(format!("expected '{}', found end of input", want as char))),
            }
        }
        fn number(&mut self) -> Result<usize> {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a point index".into()));
            }
            std::str::from_utf8(&self.bytes[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse { position: start, message: "index too large".into() })
        }
        fn err(&self, message: String) -> Error {
            Error::Parse { position: self.pos, message }
        }
    }

    let mut cur = Cursor { bytes: text.as_bytes(), pos: 0 };
    let bracketed = cur.peek() == Some(b'[');
    if bracketed {
        cur.expect(b'[')?;
    }
    let mut pairs = Vec::new();
    loop {
        match cur.peek() {
            Some(b'(') => {
                cur.expect(b'(')?;
                let i = cur.number()?;
                cur.expect(b',')?;
                let j = cur.number()?;
                cur.expect(b')')?;
                pairs.push((i, j));
                if cur.peek() == Some(b',') {
                    cur.expect(b',')?;
                }
            }
            Some(b']') if bracketed => {
                cur.expect(b']')?;
                break;
            }
            None if !bracketed => break,
            _ => return Err(cur.err("expected '(' or end of list".into())),
        }
    }
    if cur.peek().is_some() {
        return Err(cur.err("trailing characters".into()));
    }
    Matching::from_pairs(&pairs).map_err(|e| Error::Parse { position: 0, message: e.to_string() })
}

/// All crossingless matchings of `2n` points, sorted lexicographically by
/// their pair lists.
pub fn enumerate(n: usize) -> Result<Vec<Matching>> {
    if n == 0 || n > ENUMERATE_CAP {
        return Err(invalid(format!("enumerate expects 1 <= n <= {ENUMERATE_CAP}, got {n}")));
    }
    let mut words = Vec::new();
    let mut buf = String::with_capacity(2 * n);
    balanced_words(n, 0, 0, &mut buf, &mut words);
    let mut out: Vec<Matching> = words.iter().map(|w| parse_parens(w).expect("generated word is balanced")).collect();
    out.sort_by_key(|m| m.pairs());
    Ok(out)
}

fn balanced_words(n: usize, open: usize, close: usize, buf: &mut String, out: &mut Vec<String>) {
    if close == n {
        out.push(buf.clone());
        return;
    }
    if open < n {
        buf.push('(');
        balanced_words(n, open + 1, close, buf, out);
        buf.pop();
    }
    if close < open {
        buf.push(')');
        balanced_words(n, open, close + 1, buf, out);
        buf.pop();
    }
}
