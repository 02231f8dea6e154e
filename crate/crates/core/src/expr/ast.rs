use std::fmt;

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// One-argument functions of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    Abs,
    Log,
    Exp,
}

impl Func {
    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs" => Func::Abs,
            "log" => Func::Log,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
            Func::Log => "log",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    /// Non-negative decimal literal.
    Num(f64),
    /// The free variable (`z`, or `t` for majorants).
    Var,
    ImagUnit,
    E,
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `u ^ n` with an integer exponent.
    PowInt(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    /// `pow(u, c)` with a real constant exponent.
    Pow(Box<Expr>, Box<Expr>),
}

/// Expression tree node. `pos` is the character offset of the node in the
/// source text; it is ignored by equality.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Num(a), Num(b)) => a.to_bits() == b.to_bits(),
            (Var, Var) | (ImagUnit, ImagUnit) | (E, E) | (Pi, Pi) => true,
            (Neg(a), Neg(b)) => a == b,
            (Binary(o1, a1, b1), Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (PowInt(a, n), PowInt(b, m)) => n == m && a == b,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            (Pow(a1, b1), Pow(a2, b2)) => a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}

impl Expr {
    pub(crate) fn new(kind: ExprKind, pos: usize) -> Self {
        Expr { kind, pos }
    }

    /// True when the tree does not reference the free variable.
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ExprKind::Var => false,
            ExprKind::Num(_) | ExprKind::ImagUnit | ExprKind::E | ExprKind::Pi => true,
            ExprKind::Neg(a) | ExprKind::PowInt(a, _) | ExprKind::Call(_, a) => a.is_constant(),
            ExprKind::Binary(_, a, b) | ExprKind::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + match &self.kind {
            ExprKind::Num(_) | ExprKind::Var | ExprKind::ImagUnit | ExprKind::E | ExprKind::Pi => 0,
            ExprKind::Neg(a) | ExprKind::PowInt(a, _) | ExprKind::Call(_, a) => a.depth(),
            ExprKind::Binary(_, a, b) | ExprKind::Pow(a, b) => a.depth().max(b.depth()),
        }
    }

    fn is_atom(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Num(_)
                | ExprKind::Var
                | ExprKind::ImagUnit
                | ExprKind::E
                | ExprKind::Pi
                | ExprKind::Call(..)
                | ExprKind::Pow(..)
        )
    }

    /// Prints the tree with `var` as the name of the free variable. The output
    /// reparses to a structurally identical tree.
    pub fn display_with<'a>(&'a self, var: &'a str) -> impl fmt::Display + 'a {
        Printer { expr: self, var }
    }
}

struct Printer<'a> {
    expr: &'a Expr,
    var: &'a str,
}

impl Printer<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> Printer<'b> {
        Printer { expr: e, var: self.var }
    }

    fn wrapped(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if e.is_atom() {
            write!(f, "{}", self.child(e))
        } else {
            write!(f, "({})", self.child(e))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.expr.kind {
            ExprKind::Num(x) => write!(f, "{x:?}"),
            ExprKind::Var => f.write_str(self.var),
            ExprKind::ImagUnit => f.write_str("i"),
            ExprKind::E => f.write_str("e"),
            ExprKind::Pi => f.write_str("pi"),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                self.wrapped(a, f)
            }
            ExprKind::Binary(op, a, b) => {
                self.wrapped(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.wrapped(b, f)
            }
            ExprKind::PowInt(a, n) => {
                self.wrapped(a, f)?;
                write!(f, "^{n}")
            }
            ExprKind::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
            ExprKind::Pow(a, b) => write!(f, "pow({}, {})", self.child(a), self.child(b)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("z"))
    }
}
