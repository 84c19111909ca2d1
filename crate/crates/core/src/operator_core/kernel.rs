//! Scalar kernels for the functional calculus and their divided differences.

/// Relative gap below which two eigenvalues count as equal in a divided difference.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Second divided differences switch to a Taylor value below this relative spread.
const SECOND_ORDER_TOL: f64 = 1e-4;

/// One-variable kernel f(x).
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Constant(f64),
    Identity,
    Square,
    /// x^a.
    Power(f64),
    Log,
    /// log(x + s).
    LogShift(f64),
    /// f_p(x) = x^{p−1}/(p−1).
    Fp(f64),
    /// φ_p(x) = (x − x^{1/p}) / ((p−1)(x^{1/p} − 1)).
    Phi(f64),
    /// Power-difference kernel κ_α(x) = α/(α−1) · (x^{α−1} − 1)/(x^α − 1).
    Kappa(f64),
}

/// expm1(c u)/c, continuous at c = 0.
fn em(c: f64, u: f64) -> f64 {
    if c == 0.0 {
        u
    } else {
        (c * u).exp_m1() / c
    }
}

impl Scalar {
    pub fn name(&self) -> String {
        match self {
            Scalar::Constant(c) => format!("const({c})"),
            Scalar::Identity => "x".into(),
            Scalar::Square => "x^2".into(),
            Scalar::Power(a) => format!("x^{a}"),
            Scalar::Log => "log".into(),
            Scalar::LogShift(s) => format!("log(x+{s})"),
            Scalar::Fp(p) => format!("f_{p}"),
            Scalar::Phi(p) => format!("phi_{p}"),
            Scalar::Kappa(a) => format!("kappa_{a}"),
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            Scalar::Constant(_) | Scalar::Identity | Scalar::Square => true,
            Scalar::Power(a) => {
                if *a < 0.0 {
                    x > 0.0
                } else if a.fract() == 0.0 {
                    true
                } else {
                    x >= 0.0
                }
            }
            Scalar::Fp(p) => {
                if *p < 1.0 {
                    x > 0.0
                } else {
                    x >= 0.0
                }
            }
            Scalar::Log | Scalar::Phi(_) | Scalar::Kappa(_) => x > 0.0,
            Scalar::LogShift(s) => x + s > 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Scalar::Constant(c) => *c,
            Scalar::Identity => x,
            Scalar::Square => x * x,
            Scalar::Power(a) => {
                if x == 0.0 && *a == 0.0 {
                    1.0
                } else {
                    x.powf(*a)
                }
            }
            Scalar::Log => x.ln(),
            Scalar::LogShift(s) => (x + s).ln(),
            Scalar::Fp(p) => x.powf(p - 1.0) / (p - 1.0),
            Scalar::Phi(p) => {
                let u = x.ln();
                if u.abs() < 1e-9 {
                    return 1.0 + 0.5 * u;
                }
                let r = 1.0 / p;
                x.powf(r) * ((1.0 - r) * u).exp_m1() / ((p - 1.0) * (r * u).exp_m1())
            }
            Scalar::Kappa(a) => {
                let u = x.ln();
                if u.abs() < 1e-9 {
                    return 1.0 - u / 2.0;
                }
                em(a - 1.0, u) / em(*a, u)
            }
        }
    }

    /// First derivative.
    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Scalar::Constant(_) => 0.0,
            Scalar::Identity => 1.0,
            Scalar::Square => 2.0 * x,
            Scalar::Power(a) => a * x.powf(a - 1.0),
            Scalar::Log => 1.0 / x,
            Scalar::LogShift(s) => 1.0 / (x + s),
            Scalar::Fp(p) => x.powf(p - 2.0),
            Scalar::Phi(_) | Scalar::Kappa(_) => self.numeric_d1(x),
        }
    }

    /// Second derivative.
    pub fn d2(&self, x: f64) -> f64 {
        match self {
            Scalar::Constant(_) | Scalar::Identity => 0.0,
            Scalar::Square => 2.0,
            Scalar::Power(a) => a * (a - 1.0) * x.powf(a - 2.0),
            Scalar::Log => -1.0 / (x * x),
            Scalar::LogShift(s) => -1.0 / ((x + s) * (x + s)),
            Scalar::Fp(p) => (p - 2.0) * x.powf(p - 3.0),
            Scalar::Phi(_) | Scalar::Kappa(_) => {
                let h = 1e-4 * x.abs().max(1e-3);
                (self.eval(x + h) - 2.0 * self.eval(x) + self.eval(x - h)) / (h * h)
            }
        }
    }

    fn numeric_d1(&self, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1e-3);
        (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
    }

    /// First divided difference f^{[1]}(x, y).
    pub fn divdiff(&self, x: f64, y: f64) -> f64 {
        let scale = 1f64.max(x.abs()).max(y.abs());
        if (x - y).abs() <= DEGENERACY_TOL * scale {
            self.d1(0.5 * (x + y))
        } else {
            (self.eval(x) - self.eval(y)) / (x - y)
        }
    }

    /// Second divided difference f^{[2]}(a, b, c), symmetric in its arguments.
    pub fn divdiff2(&self, a: f64, b: f64, c: f64) -> f64 {
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let [lo, mid, hi] = v;
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= SECOND_ORDER_TOL * scale || hi == lo {
            return 0.5 * self.d2((lo + mid + hi) / 3.0);
        }
        (self.divdiff(mid, hi) - self.divdiff(lo, mid)) / (hi - lo)
    }
}

/// Two-variable kernel f(x, y) for double operator sums.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar2 {
    Constant(f64),
    /// f^{[1]}(x, y).
    DivDiff(Scalar),
    /// 1 / f^{[1]}(x, y); θ_p for f = f_p and the logarithmic mean for f = log.
    InvDivDiff(Scalar),
    /// g(x)·h(y).
    Separable(Scalar, Scalar),
}

impl Scalar2 {
    /// θ_p(x, y) = (p−1)(x−y)/(x^{p−1} − y^{p−1}).
    pub fn theta(p: f64) -> Self {
        Scalar2::InvDivDiff(Scalar::Fp(p))
    }

    /// Logarithmic mean (x−y)/(log x − log y).
    pub fn log_mean() -> Self {
        Scalar2::InvDivDiff(Scalar::Log)
    }

    pub fn name(&self) -> String {
        match self {
            Scalar2::Constant(c) => format!("const({c})"),
            Scalar2::DivDiff(f) => format!("[{}]^1", f.name()),
            Scalar2::InvDivDiff(f) => format!("1/[{}]^1", f.name()),
            Scalar2::Separable(g, h) => format!("{}(x){}(y)", g.name(), h.name()),
        }
    }

    pub fn in_domain_x(&self, x: f64) -> bool {
        match self {
            Scalar2::Constant(_) => x.is_finite(),
            Scalar2::DivDiff(f) | Scalar2::InvDivDiff(f) => f.in_domain(x),
            Scalar2::Separable(g, _) => g.in_domain(x),
        }
    }

    pub fn in_domain_y(&self, y: f64) -> bool {
        match self {
            Scalar2::Constant(_) => y.is_finite(),
            Scalar2::DivDiff(f) | Scalar2::InvDivDiff(f) => f.in_domain(y),
            Scalar2::Separable(_, h) => h.in_domain(y),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Scalar2::Constant(c) => *c,
            Scalar2::DivDiff(f) => f.divdiff(x, y),
            Scalar2::InvDivDiff(f) => 1.0 / f.divdiff(x, y),
            Scalar2::Separable(g, h) => g.eval(x) * h.eval(y),
        }
    }

    /// Divided difference in the first variable: (f(x1,y) − f(x2,y))/(x1 − x2).
    pub fn delta1(&self, x1: f64, x2: f64, y: f64) -> f64 {
        match self {
            Scalar2::Constant(_) => 0.0,
            Scalar2::DivDiff(f) => f.divdiff2(x1, x2, y),
            Scalar2::InvDivDiff(f) => -f.divdiff2(x1, x2, y) / (f.divdiff(x1, y) * f.divdiff(x2, y)),
            Scalar2::Separable(g, h) => g.divdiff(x1, x2) * h.eval(y),
        }
    }

    /// Divided difference in the second variable: (f(x,y1) − f(x,y2))/(y1 − y2).
    pub fn delta2(&self, x: f64, y1: f64, y2: f64) -> f64 {
        match self {
            Scalar2::Constant(_) => 0.0,
            Scalar2::DivDiff(f) => f.divdiff2(x, y1, y2),
            Scalar2::InvDivDiff(f) => -f.divdiff2(x, y1, y2) / (f.divdiff(x, y1) * f.divdiff(x, y2)),
            Scalar2::Separable(g, h) => g.eval(x) * h.divdiff(y1, y2),
        }
    }
}
