//! Boolean expression domain: the 8-token vocabulary, expression trees,
//! random generation, serialization, strict parsing, and the three-way
//! correctness classification used to verify model output.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Cap on candidate draws inside [`generate_dataset`] before aborting.
pub const DRAW_BUDGET: u64 = 1_000_000_000;

/// The fixed 8-symbol vocabulary. Integer ids are stable: `True`=0,
/// `False`=1, `not`=2, `and`=3, `or`=4, `(`=5, `)`=6, `<eos>`=7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Token {
    True = 0,
    False = 1,
    Not = 2,
    And = 3,
    Or = 4,
    LParen = 5,
    RParen = 6,
    Eos = 7,
}

impl Token {
    pub const COUNT: usize = 8;

    pub const ALL: [Token; 8] = [
        Token::True,
        Token::False,
        Token::Not,
        Token::And,
        Token::Or,
        Token::LParen,
        Token::RParen,
        Token::Eos,
    ];

    /// The seven symbols that may appear inside an expression (everything but `<eos>`).
    pub const EXPR: [Token; 7] = [
        Token::True,
        Token::False,
        Token::Not,
        Token::And,
        Token::Or,
        Token::LParen,
        Token::RParen,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Token> {
        Token::ALL.get(id as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Token::True => "True",
            Token::False => "False",
            Token::Not => "not",
            Token::And => "and",
            Token::Or => "or",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::Eos => "<eos>",
        }
    }

    pub fn from_word(word: &str) -> Option<Token> {
        Token::ALL.iter().copied().find(|t| t.as_str() == word)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sequence over the 8-token vocabulary: the unit of model I/O and datasets.
///
/// Renders as whitespace-separated words (`not ( True and False )`) and
/// round-trips through [`FromStr`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSeq(Vec<Token>);

impl TokenSeq {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenSeq(tokens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Token> + '_ {
        self.0.iter().copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().map(|t| t.id())
    }

    pub fn push(&mut self, token: Token) {
        self.0.push(token);
    }

    /// The sequence with one trailing `<eos>` removed, if present.
    pub fn without_trailing_eos(&self) -> &[Token] {
        match self.0.last() {
            Some(Token::Eos) => &self.0[..self.0.len() - 1],
            _ => &self.0,
        }
    }
}

impl From<Vec<Token>> for TokenSeq {
    fn from(tokens: Vec<Token>) -> Self {
        TokenSeq(tokens)
    }
}

impl std::ops::Deref for TokenSeq {
    type Target = [Token];

    fn deref(&self) -> &[Token] {
        &self.0
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown token {word:?} at word index {index}")]
pub struct UnknownToken {
    pub word: String,
    pub index: usize,
}

impl FromStr for TokenSeq {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = Vec::new();
        for (index, word) in s.split_whitespace().enumerate() {
            match Token::from_word(word) {
                Some(t) => tokens.push(t),
                None => {
                    return Err(UnknownToken {
                        word: word.to_string(),
                        index,
                    })
                }
            }
        }
        Ok(TokenSeq(tokens))
    }
}

/// A boolean expression tree. Leaves are literal `True`/`False`; `not` is
/// unary; `and`/`or` are binary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Tree depth: 0 for a leaf, 1 + max child depth for operators.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 0,
            Expr::Not(c) => 1 + c.depth(),
            Expr::And(l, r) | Expr::Or(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Standard boolean semantics; total on every well-formed tree.
    pub fn evaluate(&self) -> bool {
        match self {
            Expr::Leaf(v) => *v,
            Expr::Not(c) => !c.evaluate(),
            Expr::And(l, r) => l.evaluate() && r.evaluate(),
            Expr::Or(l, r) => l.evaluate() || r.evaluate(),
        }
    }

    fn is_leaf(&self) -> bool {
        matches!(self, Expr::Leaf(_))
    }

    /// Deterministic rendering: every compound child is wrapped in
    /// parentheses, the root never is, so the token string pins the tree
    /// shape exactly. No `<eos>` is included.
    pub fn serialize(&self) -> TokenSeq {
        let mut out = Vec::new();
        self.write_tokens(&mut out);
        TokenSeq(out)
    }

    fn write_tokens(&self, out: &mut Vec<Token>) {
        match self {
            Expr::Leaf(true) => out.push(Token::True),
            Expr::Leaf(false) => out.push(Token::False),
            Expr::Not(c) => {
                out.push(Token::Not);
                c.write_child(out);
            }
            Expr::And(l, r) => {
                l.write_child(out);
                out.push(Token::And);
                r.write_child(out);
            }
            Expr::Or(l, r) => {
                l.write_child(out);
                out.push(Token::Or);
                r.write_child(out);
            }
        }
    }

    fn write_child(&self, out: &mut Vec<Token>) {
        if self.is_leaf() {
            self.write_tokens(out);
        } else {
            out.push(Token::LParen);
            self.write_tokens(out);
            out.push(Token::RParen);
        }
    }
}

/// Random expression of depth exactly `d` along every root-to-leaf path:
/// `d = 0` draws a uniform leaf, otherwise a uniform operator recurses at
/// `d - 1`.
pub fn generate_expression<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Expr {
    if d == 0 {
        return Expr::Leaf(rng.random_range(0..2u8) == 0);
    }
    match rng.random_range(0..3u8) {
        0 => Expr::Not(Box::new(generate_expression(d - 1, rng))),
        1 => Expr::And(
            Box::new(generate_expression(d - 1, rng)),
            Box::new(generate_expression(d - 1, rng)),
        ),
        _ => Expr::Or(
            Box::new(generate_expression(d - 1, rng)),
            Box::new(generate_expression(d - 1, rng)),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("invalid dataset parameters: m={m}, d_min={d_min}, d_max={d_max} (need m >= 1 and 1 <= d_min <= d_max)")]
    InvalidParams { m: usize, d_min: usize, d_max: usize },
    #[error("draw budget of {budget} candidates exhausted after collecting {collected} of {target} unique True expressions")]
    DrawBudgetExhausted {
        budget: u64,
        collected: usize,
        target: usize,
    },
}

/// Rejection-samples `m` distinct serialized expressions that evaluate to
/// `True`, with tree depth drawn uniformly from `[d_min, d_max]` per
/// candidate. False-evaluating and duplicate candidates are discarded.
pub fn generate_dataset<R: Rng + ?Sized>(
    m: usize,
    d_min: usize,
    d_max: usize,
    rng: &mut R,
) -> Result<Vec<TokenSeq>, DatasetError> {
    if m < 1 || d_min < 1 || d_min > d_max {
        return Err(DatasetError::InvalidParams { m, d_min, d_max });
    }
    let mut seen: HashSet<TokenSeq> = HashSet::with_capacity(m * 2);
    let mut out = Vec::with_capacity(m);
    let mut draws: u64 = 0;
    while out.len() < m {
        if draws >= DRAW_BUDGET {
            return Err(DatasetError::DrawBudgetExhausted {
                budget: DRAW_BUDGET,
                collected: out.len(),
                target: m,
            });
        }
        draws += 1;
        let depth = rng.random_range(d_min..=d_max);
        let expr = generate_expression(depth, rng);
        if !expr.evaluate() {
            continue;
        }
        let seq = expr.serialize();
        if seen.insert(seq.clone()) {
            out.push(seq);
        }
    }
    Ok(out)
}

/// Parse failure, carrying the token index of the first violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("syntax error at token index {index}")]
pub struct SyntaxError {
    pub index: usize,
}

/// Strict recursive-descent parse of the precedence grammar
///
/// ```text
/// expr     := or_term ('or' or_term)*
/// or_term  := and_term ('and' and_term)*
/// and_term := 'not' and_term | atom
/// atom     := 'True' | 'False' | '(' expr ')'
/// ```
///
/// Binary operators are left-associative, precedence `not` > `and` > `or`,
/// and the input must be fully consumed. Empty input is a [`SyntaxError`].
pub fn parse(tokens: &[Token]) -> Result<Expr, SyntaxError> {
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.or_chain()?;
    if p.pos != tokens.len() {
        return Err(SyntaxError { index: p.pos });
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn or_chain(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.and_chain()?;
        while self.peek() == Some(Token::Or) {
            self.pos += 1;
            let rhs = self.and_chain()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_chain(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(Token::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.peek() == Some(Token::Not) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(Token::True) => {
                self.pos += 1;
                Ok(Expr::Leaf(true))
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Expr::Leaf(false))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.or_chain()?;
                if self.peek() != Some(Token::RParen) {
                    return Err(SyntaxError { index: self.pos });
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(SyntaxError { index: self.pos }),
        }
    }
}

/// Three-way verdict for a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    TrueExpr,
    FalseExpr,
    SyntaxError,
}

/// Classify a raw sequence: one trailing `<eos>` is stripped, then the
/// remainder is parsed and evaluated. Unparseable input yields
/// [`Classification::SyntaxError`]; this never fails.
pub fn classify(seq: &TokenSeq) -> Classification {
    match parse(seq.without_trailing_eos()) {
        Ok(expr) => {
            if expr.evaluate() {
                Classification::TrueExpr
            } else {
                Classification::FalseExpr
            }
        }
        Err(_) => Classification::SyntaxError,
    }
}
