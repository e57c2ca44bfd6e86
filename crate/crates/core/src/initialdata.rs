//! Initial data `f` on `[0, inf)` with `f(inf) = 0`.
//!
//! Two analytic families carry `f'` and are admissible everywhere. Tabulated
//! data are interpolated by a monotone (Fritsch-Carlson) cubic and may only
//! be used by evaluators that need `f` alone.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// `sqrt(ln 1e12)` rounded up: `exp(-z^2) <= 1e-12` for `z` beyond it.
const GAUSSIAN_CUTOFF_SIGMAS: f64 = 5.3;
/// `ln 1e12` rounded up.
const EXP_CUTOFF_FACTOR: f64 = 27.7;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// `exp(-((x - center) / width)^2)`.
    GaussianBump {
        center: f64,
        width: f64,
    },
    /// `exp(-rate x)`.
    ExpDecay {
        rate: f64,
    },
    Table(TableDatum),
}

impl InitialDatum {
    pub fn gaussian_bump(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gaussian bump needs finite center and positive width (got {center}, {width})"
            )));
        }
        Ok(Self::GaussianBump { center, width })
    }

    pub fn exp_decay(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "exponential decay needs a positive rate (got {rate})"
            )));
        }
        Ok(Self::ExpDecay { rate })
    }

    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        TableDatum::new(xs, ys, None).map(Self::Table)
    }

    pub fn table_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        TableDatum::from_csv(path.as_ref()).map(Self::Table)
    }

    /// Whether `f'` is available.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Self::Table(_))
    }

    pub fn eval_f(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.f(x))
    }

    pub fn eval_fprime(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        if !self.is_smooth() {
            return Err(Error::NotSmooth);
        }
        Ok(self.fprime(x))
    }

    /// Unchecked `f`; callers guarantee `x >= 0`.
    pub(crate) fn f(&self, x: f64) -> f64 {
        match *self {
            Self::GaussianBump { center, width } => {
                let z = (x - center) / width;
                (-z * z).exp()
            }
            Self::ExpDecay { rate } => (-rate * x).exp(),
            Self::Table(ref table) => table.eval(x),
        }
    }

    /// Unchecked `f'`; zero for tables, which never reach it.
    pub(crate) fn fprime(&self, x: f64) -> f64 {
        match *self {
            Self::GaussianBump { center, width } => {
                let z = (x - center) / width;
                -2.0 * z / width * (-z * z).exp()
            }
            Self::ExpDecay { rate } => -rate * (-rate * x).exp(),
            Self::Table(_) => 0.0,
        }
    }

    /// Point beyond which `|f| <= 1e-12`.
    pub fn cutoff(&self) -> f64 {
        match *self {
            Self::GaussianBump { center, width } => center.max(0.0) + GAUSSIAN_CUTOFF_SIGMAS * width,
            Self::ExpDecay { rate } => EXP_CUTOFF_FACTOR / rate,
            Self::Table(ref table) => *table.xs.last().unwrap(),
        }
    }

    /// Points where the datum has its own structure (peak, table ends).
    pub fn features(&self) -> Vec<f64> {
        match *self {
            Self::GaussianBump { center, width } => [center - width, center, center + width]
                .into_iter()
                .filter(|&c| c > 0.0)
                .collect(),
            Self::ExpDecay { .. } => Vec::new(),
            Self::Table(ref table) => vec![table.xs[0], *table.xs.last().unwrap()],
        }
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

impl fmt::Display for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianBump { center, width } => {
                write!(f, "gaussian:center={center},width={width}")
            }
            Self::ExpDecay { rate } => write!(f, "expdecay:rate={rate}"),
            Self::Table(table) => match &table.source {
                Some(path) => write!(f, "table:{}", path.display()),
                None => write!(f, "table:<{} points>", table.xs.len()),
            },
        }
    }
}

impl FromStr for InitialDatum {
    type Err = Error;

    /// `gaussian:center=<r>,width=<r>` | `expdecay:rate=<r>` | `table:<csv path>`
    fn from_str(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("datum `{spec}` has no `kind:` prefix")))?;
        match kind.trim() {
            "gaussian" => {
                let params = parse_params(rest, &["center", "width"])?;
                Self::gaussian_bump(params[0], params[1])
            }
            "expdecay" => {
                let params = parse_params(rest, &["rate"])?;
                Self::exp_decay(params[0])
            }
            "table" => Self::table_from_csv(rest.trim()),
            other => Err(Error::Parse(format!("unknown datum family `{other}`"))),
        }
    }
}

fn parse_params(body: &str, names: &[&str]) -> Result<Vec<f64>> {
    let mut values = vec![None; names.len()];
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        let idx = names
            .iter()
            .position(|n| *n == key.trim())
            .ok_or_else(|| Error::Parse(format!("unknown parameter `{}`", key.trim())))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{value}` is not a number")))?;
        if values[idx].replace(v).is_some() {
            return Err(Error::Parse(format!("parameter `{key}` given twice")));
        }
    }
    names
        .iter()
        .zip(values)
        .map(|(n, v)| v.ok_or_else(|| Error::Parse(format!("missing parameter `{n}`"))))
        .collect()
}

/// Tabulated datum with a monotone piecewise-cubic Hermite interpolant.
///
/// Outside `[xs[0], xs[n-1]]` the datum is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDatum {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    source: Option<PathBuf>,
}

impl TableDatum {
    fn new(xs: Vec<f64>, ys: Vec<f64>, source: Option<PathBuf>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidArgument("table columns differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidArgument("table needs at least two points".into()));
        }
        if xs[0] < 0.0 {
            return Err(Error::InvalidArgument("table starts left of x = 0".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("table holds a non-finite value".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("table x must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes, source })
    }

    fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Parse(format!(
                    "{}: row {} has fewer than two columns",
                    path.display(),
                    i + 1
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                // a header line
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "{}: row {} is not numeric",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Self::new(xs, ys, Some(path.to_path_buf()))
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[k] + h * h10 * self.slopes[k] + h01 * self.ys[k + 1] + h * h11 * self.slopes[k + 1]
    }
}

/// Node derivatives of the Fritsch-Carlson monotone interpolant, with the
/// weighted harmonic mean inside and a shape-preserving three-point rule at
/// the ends.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}
