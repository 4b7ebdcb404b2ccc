//! Scalar function handles with descriptive metadata.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{c, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTag {
    pub name: String,
    /// Global Lipschitz constant, when known.
    pub lipschitz: Option<f64>,
    /// Period, when the function is periodic.
    pub period: Option<f64>,
    pub real_valued: bool,
}

/// A pointwise-evaluable function `R -> C` together with its [`FunctionTag`].
#[derive(Clone)]
pub struct ScalarFunction {
    tag: FunctionTag,
    f: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction").field("tag", &self.tag).finish()
    }
}

impl ScalarFunction {
    pub fn new(tag: FunctionTag, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self { tag, f: Arc::new(f) }
    }

    pub fn real(name: &str, lipschitz: Option<f64>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(
            FunctionTag {
                name: name.to_string(),
                lipschitz,
                period: None,
                real_valued: true,
            },
            move |t| c(f(t), 0.0),
        )
    }

    pub fn identity() -> Self {
        Self::real("identity", Some(1.0), |t| t)
    }

    pub fn square() -> Self {
        Self::real("square", None, |t| t * t)
    }

    pub fn sin() -> Self {
        let mut f = Self::real("sin", Some(1.0), f64::sin);
        f.tag.period = Some(2.0 * PI);
        f
    }

    /// `t -> exp(2 pi i t)`, 1-periodic.
    pub fn exp_2pi_i() -> Self {
        Self::new(
            FunctionTag {
                name: "exp2pi".into(),
                lipschitz: Some(2.0 * PI),
                period: Some(1.0),
                real_valued: false,
            },
            |t| {
                let (s, co) = (2.0 * PI * t).sin_cos();
                c(co, s)
            },
        )
    }

    /// `t -> cos(2 pi t)`, 1-periodic.
    pub fn cos_2pi() -> Self {
        let mut f = Self::real("cos2pi", Some(2.0 * PI), |t| (2.0 * PI * t).cos());
        f.tag.period = Some(1.0);
        f
    }

    /// `t -> |t|^alpha`.
    pub fn abs_pow(alpha: f64) -> Self {
        let lip = if alpha == 1.0 { Some(1.0) } else { None };
        Self::real(&format!("abspow:{alpha}"), lip, move |t| t.abs().powf(alpha))
    }

    pub fn constant(value: f64) -> Self {
        Self::real(&format!("const:{value}"), Some(0.0), move |_| value)
    }

    /// `t -> t + amplitude * sin(2 pi t)`.
    pub fn wiggle(amplitude: f64) -> Self {
        Self::real(
            &format!("wiggle:{amplitude}"),
            Some(1.0 + 2.0 * PI * amplitude.abs()),
            move |t| t + amplitude * (2.0 * PI * t).sin(),
        )
    }

    /// Parses the names accepted on the command line:
    /// `identity`, `square`, `sin`, `exp2pi`, `cos2pi`, `abspow:<alpha>`,
    /// `const:<c>`, `wiggle:<a>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidInput(format!("function `{name}` needs an argument")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("function `{name}`: {e}")))
        };
        match head {
            "identity" => Ok(Self::identity()),
            "square" => Ok(Self::square()),
            "sin" => Ok(Self::sin()),
            "exp2pi" => Ok(Self::exp_2pi_i()),
            "cos2pi" => Ok(Self::cos_2pi()),
            "abspow" => Ok(Self::abs_pow(number(arg)?)),
            "const" => Ok(Self::constant(number(arg)?)),
            "wiggle" => Ok(Self::wiggle(number(arg)?)),
            _ => Err(Error::InvalidInput(format!(
                "unknown function `{name}` (known: identity, square, sin, exp2pi, cos2pi, abspow:<a>, const:<c>, wiggle:<a>)"
            ))),
        }
    }

    pub fn tag(&self) -> &FunctionTag {
        &self.tag
    }

    pub fn name(&self) -> &str {
        &self.tag.name
    }

    #[inline]
    pub fn eval(&self, t: f64) -> C64 {
        (self.f)(t)
    }

    /// Evaluates and rejects non-finite values.
    pub fn eval_checked(&self, t: f64) -> Result<C64> {
        let v = self.eval(t);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(t))
        }
    }

    /// Sup of `|f'|` on `[lo, hi]`, from the tag when available and
    /// otherwise from centred differences on a fine grid.
    pub fn derivative_sup(&self, lo: f64, hi: f64) -> f64 {
        if let Some(l) = self.tag.lipschitz {
            return l;
        }
        let n = 4096;
        let h = (hi - lo) / n as f64;
        (0..n)
            .map(|i| {
                let t = lo + (i as f64 + 0.5) * h;
                ((self.eval(t + 0.5 * h) - self.eval(t - 0.5 * h)) / h).norm()
            })
            .fold(0.0, f64::max)
    }
}
