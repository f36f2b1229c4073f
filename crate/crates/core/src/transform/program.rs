//! Solver-neutral conic program: affine expressions constrained to the zero
//! cone, the nonnegative orthant, second-order cones and exponential cones,
//! with a linear objective to maximize.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::TransformError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Semantic tag of a registered variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Qx,
    Qy,
    Qz,
    B1,
    Eta,
    Tau,
    AlphaA,
    AlphaB,
    AlphaE,
    MuA,
    MuB,
    MuE,
    Theta,
    Rub,
    Rue,
    Rb,
    Re,
    /// Epigraph of the ground distance to Eve's disc center.
    GroundDist,
    /// Epigraph of the orthogonality penalty.
    Penalty,
    /// Elastic slack on the Eve QoS constraint.
    QosSlack,
    Free,
}

impl VarKind {
    pub fn label(&self) -> &'static str {
        match self {
            VarKind::Qx => "qx",
            VarKind::Qy => "qy",
            VarKind::Qz => "qz",
            VarKind::B1 => "b1",
            VarKind::Eta => "eta",
            VarKind::Tau => "tau",
            VarKind::AlphaA => "alpha_a",
            VarKind::AlphaB => "alpha_b",
            VarKind::AlphaE => "alpha_e",
            VarKind::MuA => "mu_a",
            VarKind::MuB => "mu_b",
            VarKind::MuE => "mu_e",
            VarKind::Theta => "theta",
            VarKind::Rub => "r_ub",
            VarKind::Rue => "r_ue",
            VarKind::Rb => "r_b",
            VarKind::Re => "r_e",
            VarKind::GroundDist => "ground_dist",
            VarKind::Penalty => "penalty",
            VarKind::QosSlack => "qos_slack",
            VarKind::Free => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub kind: VarKind,
    pub slot: Option<usize>,
    /// Multiply the program value by `unit` to get SI units.
    pub unit: f64,
}

impl VarInfo {
    pub fn name(&self) -> String {
        match self.slot {
            Some(n) => format!("{}[{}]", self.kind.label(), n),
            None => self.kind.label().to_string(),
        }
    }
}

/// `Σ coef·var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(v: VarId) -> Self {
        Self { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self { terms: vec![(v, coef)], constant: 0.0 }
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(v, c)| acc + c * x[v.0])
    }

    /// Merge repeated variables and drop exact zeros, ordering terms by id.
    pub fn canonical(&self) -> LinExpr {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        LinExpr {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, c: f64) -> LinExpr {
        self.constant += c;
        self
    }
}

/// Cone membership of affine expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    /// `e = 0`
    Zero(LinExpr),
    /// `e ≥ 0`
    NonNeg(LinExpr),
    /// `e[0] ≥ ‖e[1..]‖`
    SecondOrder(Vec<LinExpr>),
    /// `(a, b, c)` with `b·exp(c/b) ≤ a`, `b > 0` (closure included).
    Exp { a: LinExpr, b: LinExpr, c: LinExpr },
}

impl Cone {
    pub fn tag(&self) -> &'static str {
        match self {
            Cone::Zero(_) => "zero",
            Cone::NonNeg(_) => "nonneg",
            Cone::SecondOrder(_) => "soc",
            Cone::Exp { .. } => "exp",
        }
    }

    fn exprs(&self) -> Vec<&LinExpr> {
        match self {
            Cone::Zero(e) | Cone::NonNeg(e) => vec![e],
            Cone::SecondOrder(es) => es.iter().collect(),
            Cone::Exp { a, b, c } => vec![a, b, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: &'static str,
    pub slot: Option<usize>,
    pub cone: Cone,
}

/// Hypograph `t ≤ x·ln(1 + w/x)` as the exponential-cone triple
/// `(x + w, x, t)`.
pub fn perspective_log_hypograph(x: LinExpr, w: LinExpr, t: LinExpr) -> Cone {
    Cone::Exp { a: x.clone() + w, b: x, c: t }
}

/// Direct membership test for the exponential cone, with absolute slack
/// `tol` on the log-form inequality `c ≤ b·ln(a/b)`.
pub fn exp_cone_contains(a: f64, b: f64, c: f64, tol: f64) -> bool {
    if b > 0.0 {
        a > 0.0 && c <= b * (a / b).ln() + tol
    } else if b == 0.0 {
        a >= -tol && c <= tol
    } else {
        false
    }
}

/// Maximize `objective` subject to every constraint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexProgram {
    pub vars: Vec<VarInfo>,
    pub constraints: Vec<Constraint>,
    pub objective: LinExpr,
    /// Multiply the objective value by this to get nat/s.
    pub objective_unit: f64,
}

impl ConvexProgram {
    pub fn new() -> Self {
        Self { objective_unit: 1.0, ..Default::default() }
    }

    pub fn add_var(&mut self, kind: VarKind, slot: Option<usize>, unit: f64) -> VarId {
        self.vars.push(VarInfo { kind, slot, unit });
        VarId(self.vars.len() - 1)
    }

    pub fn push(&mut self, family: &'static str, slot: Option<usize>, cone: Cone) {
        self.constraints.push(Constraint { family, slot, cone });
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Number of constraints per `(cone tag, family)`.
    pub fn census(&self) -> BTreeMap<(&'static str, &'static str), usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            *out.entry((c.cone.tag(), c.family)).or_insert(0) += 1;
        }
        out
    }

    pub fn count(&self, tag: &str, family: &str) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.cone.tag() == tag && c.family == family)
            .count()
    }

    /// Check that every expression references registered variables and
    /// that cone dimensions are sensible.
    pub fn validate(&self) -> Result<(), TransformError> {
        let n = self.vars.len();
        let check = |e: &LinExpr, what: &str| -> Result<(), TransformError> {
            if !e.constant.is_finite() {
                return Err(TransformError::MalformedProgram(format!("{what}: non-finite constant")));
            }
            for &(v, c) in &e.terms {
                if v.0 >= n {
                    return Err(TransformError::MalformedProgram(format!(
                        "{what}: variable {} not registered ({n} vars)",
                        v.0
                    )));
                }
                if !c.is_finite() {
                    return Err(TransformError::MalformedProgram(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for c in &self.constraints {
            if let Cone::SecondOrder(es) = &c.cone {
                if es.len() < 2 {
                    return Err(TransformError::MalformedProgram(format!(
                        "{}: second-order cone of dimension {}",
                        c.family,
                        es.len()
                    )));
                }
            }
            for e in c.cone.exprs() {
                check(e, c.family)?;
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint at `x`, in program units.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let v = match &c.cone {
                Cone::Zero(e) => e.eval(x).abs(),
                Cone::NonNeg(e) => (-e.eval(x)).max(0.0),
                Cone::SecondOrder(es) => {
                    let head = es[0].eval(x);
                    let tail = es[1..].iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
                    (tail - head).max(0.0)
                }
                Cone::Exp { a, b, c } => {
                    let (a, b, c) = (a.eval(x), b.eval(x), c.eval(x));
                    if b > 0.0 && a > 0.0 {
                        (c - b * (a / b).ln()).max(0.0)
                    } else {
                        (-b).max(0.0) + (-a).max(0.0) + c.max(0.0)
                    }
                }
            };
            worst = worst.max(v);
        }
        worst
    }

    fn fmt_expr(&self, e: &LinExpr) -> String {
        let e = e.canonical();
        let mut s = String::new();
        for (i, &(v, c)) in e.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(if c < 0.0 { " - " } else { " + " });
                let _ = write!(s, "{:e}*{}", c.abs(), self.vars[v.0].name());
            } else {
                let _ = write!(s, "{:e}*{}", c, self.vars[v.0].name());
            }
        }
        if e.constant != 0.0 || e.terms.is_empty() {
            if e.terms.is_empty() {
                let _ = write!(s, "{:e}", e.constant);
            } else {
                let _ = write!(s, " {} {:e}", if e.constant < 0.0 { '-' } else { '+' }, e.constant.abs());
            }
        }
        s
    }

    /// Text dump, one constraint per line, tagged with its cone type.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} variables, {} constraints", self.vars.len(), self.constraints.len());
        let _ = writeln!(out, "maximize {}", self.fmt_expr(&self.objective));
        for c in &self.constraints {
            let slot = c.slot.map(|n| format!("[{n}]")).unwrap_or_default();
            let body = match &c.cone {
                Cone::Zero(e) => format!("{} == 0", self.fmt_expr(e)),
                Cone::NonNeg(e) => format!("{} >= 0", self.fmt_expr(e)),
                Cone::SecondOrder(es) => {
                    let parts: Vec<String> = es.iter().map(|e| self.fmt_expr(e)).collect();
                    format!("({}) >= ||({})||", parts[0], parts[1..].join(", "))
                }
                Cone::Exp { a, b, c } => format!(
                    "(a, b, c) = ({}; {}; {})",
                    self.fmt_expr(a),
                    self.fmt_expr(b),
                    self.fmt_expr(c)
                ),
            };
            let _ = writeln!(out, "{} {}{}: {}", c.cone.tag(), c.family, slot, body);
        }
        out
    }
}
