//! Text forms for processes, coefficient lists and ranges.

use std::str::FromStr;

use ldcusum::ProcessSpec;

/// `ar1:0.5`, `ma1:-0.9`, `white`, `arma:ar=0.5,-0.2;ma=0.4`. A bare `ar1`
/// or `ma1` means coefficient 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessArg(pub ProcessSpec);

impl FromStr for ProcessArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (family, rest) = match s.split_once(':') {
            Some((f, r)) => (f.trim(), Some(r.trim())),
            None => (s, None),
        };
        let coef = |r: Option<&str>| -> Result<f64, String> {
            match r {
                None | Some("") => Ok(0.0),
                Some(v) => v.parse().map_err(|_| format!("bad coefficient `{v}`")),
            }
        };
        let spec = match family.to_ascii_lowercase().as_str() {
            "ar1" => ProcessSpec::Ar1(coef(rest)?),
            "ma1" => ProcessSpec::Ma1(coef(rest)?),
            "white" => ProcessSpec::Arma { ar: vec![], ma: vec![] },
            "arma" => {
                let mut ar = vec![];
                let mut ma = vec![];
                for part in rest.unwrap_or("").split(';').filter(|p| !p.trim().is_empty()) {
                    let (k, v) = part
                        .split_once('=')
                        .ok_or_else(|| format!("expected ar=… or ma=…, got `{part}`"))?;
                    let list = parse_list(v)?;
                    match k.trim() {
                        "ar" => ar = list,
                        "ma" => ma = list,
                        other => return Err(format!("unknown arma component `{other}`")),
                    }
                }
                ProcessSpec::Arma { ar, ma }
            }
            other => return Err(format!("unknown process `{other}` (ar1, ma1, white, arma)")),
        };
        Ok(Self(spec))
    }
}

impl std::fmt::Display for ProcessArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        match &self.0 {
            ProcessSpec::Ar1(c) => write!(f, "ar1:{c}"),
            ProcessSpec::Ma1(c) => write!(f, "ma1:{c}"),
            ProcessSpec::Arma { ar, ma } if ar.is_empty() && ma.is_empty() => write!(f, "white"),
            ProcessSpec::Arma { ar, ma } => write!(f, "arma:ar={};ma={}", join(ar), join(ma)),
        }
    }
}

/// Comma-separated numbers; empty input gives an empty list.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("bad number `{p}`")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumberList<T>(pub Vec<T>);

impl<T: FromStr> FromStr for NumberList<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_list(s).map(Self)
    }
}

impl<T: ToString> std::fmt::Display for NumberList<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(T::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding, or a plain list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub text: String,
    pub values: Vec<f64>,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, step] => {
                let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number `{v}`"));
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if !(step > 0.0) || b < a {
                    return Err(format!("range `{s}` needs start <= stop and step > 0"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| ((a + i as f64 * step) * 1e10).round() / 1e10).collect()
            }
            [_] => parse_list(s)?,
            _ => return Err(format!("expected start:stop:step or a list, got `{s}`")),
        };
        Ok(Self {
            text: s.to_string(),
            values,
        })
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn process_forms() {
        assert_eq!("ar1:0.5".parse::<ProcessArg>().unwrap().0, ProcessSpec::Ar1(0.5));
        assert_eq!("ma1:-0.9".parse::<ProcessArg>().unwrap().0, ProcessSpec::Ma1(-0.9));
        assert_eq!("ar1".parse::<ProcessArg>().unwrap().0, ProcessSpec::Ar1(0.0));
        assert_eq!(
            "arma:ar=0.5,-0.2;ma=0.4".parse::<ProcessArg>().unwrap().0,
            ProcessSpec::Arma { ar: vec![0.5, -0.2], ma: vec![0.4] }
        );
        assert!("garch:1".parse::<ProcessArg>().is_err());
        for s in ["ar1:0.5", "ma1:-0.9", "white", "arma:ar=0.5,-0.2;ma=0.4"] {
            assert_eq!(s.parse::<ProcessArg>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn grids() {
        let g: Grid = "-0.9:0.9:0.1".parse().unwrap();
        assert_eq!(g.values.len(), 19);
        assert_eq!(g.values[0], -0.9);
        assert_eq!(g.values[9], 0.0);
        assert_eq!(g.values[18], 0.9);
        assert_eq!("0.1,0.3".parse::<Grid>().unwrap().values, vec![0.1, 0.3]);
        assert!("1:0:0.1".parse::<Grid>().is_err());
    }
}
