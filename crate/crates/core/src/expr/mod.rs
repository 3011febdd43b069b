//! Arithmetic expressions over chart coordinates `x1..xd`.
//!
//! Grammar (`^` is right-associative and binds looser than unary minus, so
//! `-x1^2` is `(-x1)^2`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?
//! unary   := '-' unary | primary
//! primary := number | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos tan sinh cosh tanh exp log sqrt`; the constant `pi` is
//! also accepted. Variables are 1-based in text and 0-based in [`Expr::Var`].

mod parser;

use std::fmt;

use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, a: f64) -> Result<f64, EvalErrorKind> {
        Ok(match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Sinh => a.sinh(),
            Func::Cosh => a.cosh(),
            Func::Tanh => a.tanh(),
            Func::Exp => a.exp(),
            Func::Log => {
                if a <= 0.0 {
                    return Err(EvalErrorKind::LogOfNonPositive(a));
                }
                a.ln()
            }
            Func::Sqrt => {
                if a < 0.0 {
                    return Err(EvalErrorKind::SqrtOfNegative(a));
                }
                a.sqrt()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalErrorKind {
    LogOfNonPositive(f64),
    SqrtOfNegative(f64),
    DivisionByZero,
    FractionalPowerOfNegative { base: f64, exponent: f64 },
    MissingVariable { index: usize, provided: usize },
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::LogOfNonPositive(a) => write!(f, "log of non-positive value {a}"),
            EvalErrorKind::SqrtOfNegative(a) => write!(f, "sqrt of negative value {a}"),
            EvalErrorKind::DivisionByZero => write!(f, "division by zero"),
            EvalErrorKind::FractionalPowerOfNegative { base, exponent } => {
                write!(f, "fractional power {exponent} of negative base {base}")
            }
            EvalErrorKind::MissingVariable { index, provided } => write!(
                f,
                "variable x{} requested but only {provided} coordinates given",
                index + 1
            ),
            EvalErrorKind::NonFinite => write!(f, "non-finite result"),
        }
    }
}

/// Evaluation failure, located by the offending subexpression.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("domain error in `{subexpr}`: {kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Whether the expression mentions coordinate `var` (0-based).
    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Highest variable index used (0-based), if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_inner(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(EvalErrorKind::NonFinite))
        }
    }

    fn fail(&self, kind: EvalErrorKind) -> EvalError {
        EvalError {
            kind,
            subexpr: self.to_string(),
        }
    }

    fn eval_inner(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => x.get(*i).copied().ok_or_else(|| {
                self.fail(EvalErrorKind::MissingVariable {
                    index: *i,
                    provided: x.len(),
                })
            }),
            Expr::Neg(a) => Ok(-a.eval_inner(x)?),
            Expr::Call(f, a) => {
                let arg = a.eval_inner(x)?;
                f.apply(arg).map_err(|k| self.fail(k))
            }
            Expr::Binary(op, a, b) => {
                let l = a.eval_inner(x)?;
                let r = b.eval_inner(x)?;
                match op {
                    BinOp::Add => Ok(l + r),
                    BinOp::Sub => Ok(l - r),
                    BinOp::Mul => Ok(l * r),
                    BinOp::Div => {
                        if r == 0.0 {
                            Err(self.fail(EvalErrorKind::DivisionByZero))
                        } else {
                            Ok(l / r)
                        }
                    }
                    BinOp::Pow => power(l, r).map_err(|k| self.fail(k)),
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var` (0-based).
    ///
    /// Only constant folding is applied to the result.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(i) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match op {
                    BinOp::Add => add(a.diff(var), b.diff(var)),
                    BinOp::Sub => sub(a.diff(var), b.diff(var)),
                    BinOp::Mul => add(mul(a.diff(var), b.clone()), mul(a.clone(), b.diff(var))),
                    BinOp::Div => div(
                        sub(mul(a.diff(var), b.clone()), mul(a.clone(), b.diff(var))),
                        pow(b.clone(), Expr::Num(2.0)),
                    ),
                    BinOp::Pow => {
                        if !b.depends_on(var) {
                            // b * a^(b-1) * a'
                            mul(
                                mul(b.clone(), pow(a.clone(), sub(b.clone(), Expr::Num(1.0)))),
                                a.diff(var),
                            )
                        } else {
                            // a^b * (b' log a + b a' / a)
                            mul(
                                self.clone(),
                                add(
                                    mul(b.diff(var), call(Func::Log, a.clone())),
                                    div(mul(b.clone(), a.diff(var)), a.clone()),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let inner = a.diff(var);
                if inner.is_zero() {
                    return Expr::Num(0.0);
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Tan => div(Expr::Num(1.0), pow(call(Func::Cos, a), Expr::Num(2.0))),
                    Func::Sinh => call(Func::Cosh, a),
                    Func::Cosh => call(Func::Sinh, a),
                    Func::Tanh => div(Expr::Num(1.0), pow(call(Func::Cosh, a), Expr::Num(2.0))),
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(Expr::Num(1.0), a),
                    Func::Sqrt => div(Expr::Num(0.5), call(Func::Sqrt, a)),
                };
                mul(outer, inner)
            }
        }
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalErrorKind> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalErrorKind::DivisionByZero);
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalErrorKind::FractionalPowerOfNegative { base, exponent });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalErrorKind::DivisionByZero);
    }
    Ok(base.powf(exponent))
}

// Constructors with constant folding, used by `diff`.

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (a, b) => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, _) if a.is_zero() => Expr::Num(0.0),
        (_, b) if b.is_zero() => Expr::Num(0.0),
        (Expr::Num(1.0), b) => b,
        (a, Expr::Num(1.0)) => a,
        (a, b) => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) if y != 0.0 => Expr::Num(x / y),
        (a, Expr::Num(1.0)) => a,
        (a, b) => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (_, Expr::Num(0.0)) => Expr::Num(1.0),
        (a, Expr::Num(1.0)) => a,
        (Expr::Num(x), Expr::Num(y)) => match power(x, y) {
            Ok(v) if v.is_finite() => Expr::Num(v),
            _ => Expr::Binary(BinOp::Pow, Box::new(Expr::Num(x)), Box::new(Expr::Num(y))),
        },
        (a, b) => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    if let Expr::Num(x) = a {
        if let Ok(v) = f.apply(x) {
            if v.is_finite() {
                return Expr::Num(v);
            }
        }
    }
    Expr::Call(f, Box::new(a))
}

/// Fully parenthesized text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ev(src: &str, d: usize, x: &[f64]) -> f64 {
        parse(src, d).unwrap().eval(x).unwrap()
    }

    fn central_diff(e: &Expr, k: usize, x: &[f64], h: f64) -> f64 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h)
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0", 2).unwrap(), Expr::Num(0.0));
        assert_eq!(ev("7", 3, &[1.0, 2.0, 3.0]), 7.0);
    }

    #[test]
    fn product_of_trig_functions() {
        let e = parse("-sin(x1)*cos(x1)", 2).unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Mul, _, _)));
        assert!(e.eval(&[FRAC_PI_2, 0.0]).unwrap().abs() < 1e-16);
    }

    #[test]
    fn power_is_right_associative() {
        // manual: 2^(2^3) = 2^8
        assert_eq!(ev("x1^2^3", 1, &[2.0]), 256.0);
        assert_eq!(ev("(x1^2)^3", 1, &[2.0]), 64.0);
        // unary minus binds tighter than ^
        assert_eq!(ev("-x1^2", 1, &[3.0]), 9.0);
        assert_eq!(ev("-(x1^2)", 1, &[3.0]), -9.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("x1+x2", 2, &[1.0, 2.0]), 3.0);
        assert_eq!(ev("1-2-3", 1, &[0.0]), -4.0);
        assert_eq!(ev("8/4/2", 1, &[0.0]), 1.0);
        assert_eq!(ev("1+2*3^2", 1, &[0.0]), 19.0);
        assert_eq!(ev("2*pi", 1, &[0.0]), 2.0 * PI);
        assert_eq!(ev("1.5e-1 * 2E2", 1, &[0.0]), 30.0);
    }

    #[test]
    fn sinh_matches_closed_form() {
        let e1 = std::f64::consts::E;
        let v = ev("sinh(x1)", 1, &[1.0]);
        assert!((v - (e1 - 1.0 / e1) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("x1 + * 2", 2).unwrap_err();
        assert_eq!(e.offset, 5);
        let e = parse("sin(x1", 1).unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let e = parse("x1 $ 2", 1).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(e.offset, 3);
        let e = parse("x1 x2", 2).unwrap_err();
        assert_eq!(e.offset, 3);
        assert_eq!(parse("   ", 2).unwrap_err().kind, ParseErrorKind::Empty);
    }

    #[test]
    fn identifier_errors() {
        let e = parse("2*foo(x1)", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(e.offset, 2);
        let e = parse("x3 + 1", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::VariableOutOfRange { index: 3, dim: 2 });
        assert!(matches!(
            parse("x0", 2).unwrap_err().kind,
            ParseErrorKind::VariableOutOfRange { index: 0, .. }
        ));
        assert!(parse("sin x1", 1).is_err());
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + log(x1 - 2)", 1).unwrap();
        let err = e.eval(&[1.0]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::LogOfNonPositive(-1.0));
        assert_eq!(err.subexpr, "log((x1 - 2.0))");

        let err = parse("sqrt(x1)", 1).unwrap().eval(&[-1.0]).unwrap_err();
        assert!(matches!(err.kind, EvalErrorKind::SqrtOfNegative(_)));
        let err = parse("1/(x1-x1)", 1).unwrap().eval(&[3.0]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        let err = parse("x1^0.5", 1).unwrap().eval(&[-4.0]).unwrap_err();
        assert!(matches!(err.kind, EvalErrorKind::FractionalPowerOfNegative { .. }));
        // integer powers of negative bases are fine
        assert_eq!(ev("x1^3", 1, &[-2.0]), -8.0);
        let err = parse("exp(x1)", 1).unwrap().eval(&[1e4]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NonFinite);
    }

    #[test]
    fn derivative_rules() {
        let d = parse("x1*x2", 2).unwrap().diff(0);
        assert_eq!(d.eval(&[3.0, 5.0]).unwrap(), 5.0);
        assert_eq!(parse("sin(x1)", 1).unwrap().diff(0).eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(parse("x2^3", 2).unwrap().diff(0), Expr::Num(0.0));
        assert_eq!(parse("7", 1).unwrap().diff(0), Expr::Num(0.0));
    }

    #[test]
    fn derivatives_match_central_differences() {
        let cases = [
            "sin(x1)*cos(x2)^2",
            "tan(x1)+tanh(x2)",
            "exp(x1*x2)/(1+x1^2)",
            "log(x1)*sqrt(x2)",
            "sinh(x1)^2 - cosh(x2)",
            "x1^x2",
            "-x1^3 + 2^x2",
            "(x1 - x2)^0.5",
        ];
        let x = [1.3, 0.4];
        for src in cases {
            let e = parse(src, 2).unwrap();
            for k in 0..2 {
                let exact = e.diff(k).eval(&x).unwrap();
                let fd = central_diff(&e, k, &x, 1e-5);
                assert!(
                    (exact - fd).abs() <= 1e-7 * (1.0 + exact.abs()),
                    "{src} d/dx{}: {exact} vs {fd}",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for src in ["-sin(x1)*cos(x1)", "x1^2^3", "-x1^2", "1-(2-x2)", "-2.5e-7*x1", "sqrt(-(-x1))"] {
            let e = parse(src, 2).unwrap();
            assert_eq!(parse(&e.to_string(), 2).unwrap(), e, "{src}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop_oneof![
                (0.0f64..100.0).prop_map(Expr::Num),
                (-100.0f64..-0.001).prop_map(Expr::Num),
                (0usize..3).prop_map(Expr::Var),
            ];
            leaf.prop_recursive(5, 48, 2, |inner| {
                prop_oneof![
                    inner
                        .clone()
                        .prop_filter("parser folds negated literals", |e| !matches!(e, Expr::Num(_)))
                        .prop_map(|e| Expr::Neg(Box::new(e))),
                    (
                        prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                        inner.clone(),
                        inner.clone()
                    )
                        .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
                    (prop::sample::select(Func::ALL.to_vec()), inner)
                        .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
                ]
            })
        }

        fn poly() -> impl Strategy<Value = String> {
            prop::collection::vec((-3.0f64..3.0, 0u32..4, 0u32..4), 1..6).prop_map(|terms| {
                terms
                    .iter()
                    .map(|(c, p, q)| format!("({c:?})*x1^{p}*x2^{q}"))
                    .collect::<Vec<_>>()
                    .join(" + ")
            })
        }

        proptest! {
            #[test]
            fn print_then_parse_is_identity(e in arb_expr()) {
                let text = e.to_string();
                prop_assert_eq!(parse(&text, 3).unwrap(), e);
            }

            #[test]
            fn polynomial_derivative_matches_finite_difference(
                src in poly(), x1 in -1.5f64..1.5, x2 in -1.5f64..1.5, k in 0usize..2,
            ) {
                let e = parse(&src, 2).unwrap();
                let exact = e.diff(k).eval(&[x1, x2]).unwrap();
                let fd = central_diff(&e, k, &[x1, x2], 1e-5);
                prop_assert!((exact - fd).abs() <= 1e-8, "{} vs {}", exact, fd);
            }
        }
    }
}
