//! Parsing of command-line value lists.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid value `{input}`: {reason}")]
pub struct ValueError {
    pub input: String,
    pub reason: String,
}

fn err(input: &str, reason: impl Into<String>) -> ValueError {
    ValueError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn number(text: &str) -> Result<f64, ValueError> {
    let v: f64 = text.trim().parse().map_err(|_| err(text, "not a number"))?;
    if !v.is_finite() {
        return Err(err(text, "must be finite"));
    }
    Ok(v)
}

/// Comma-separated joint values; an entry written `deg:<x>` is in degrees.
pub fn parse_joint_values(text: &str) -> Result<Vec<(f64, bool)>, ValueError> {
    if text.trim().is_empty() {
        return Err(err(text, "empty joint list"));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            match item.strip_prefix("deg:") {
                Some(rest) => Ok((number(rest)? * PI / 180.0, true)),
                None => Ok((number(item)?, false)),
            }
        })
        .collect()
}

/// Either a comma list (`0.5,1,2`), an inclusive linear range
/// `start:end:count`, or the empty string for an empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ValueError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.contains(':') {
        let parts: Vec<&str> = trimmed.split(':').collect();
        let [start, end, count] = parts[..] else {
            return Err(err(text, "range must be start:end:count"));
        };
        let (start, end) = (number(start)?, number(end)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| err(text, "count must be a non-negative integer"))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
                .collect(),
        });
    }
    trimmed.split(',').map(number).collect()
}

pub fn parse_epsilons(text: &str) -> Result<Vec<i8>, ValueError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|item| match item.trim() {
            "1" | "+1" => Ok(1),
            "-1" => Ok(-1),
            _ => Err(err(item, "epsilon must be -1 or +1")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_per_entry() {
        let q = parse_joint_values("0, deg:90,0.5").unwrap();
        assert_eq!(q[1], (PI / 2.0, true));
        assert_eq!(q[2], (0.5, false));
        assert!(parse_joint_values("1,x").is_err());
        assert!(parse_joint_values("").is_err());
        assert!(parse_joint_values("nan").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("3:4:1").unwrap(), vec![3.0]);
        assert!(parse_grid("0:1:0").unwrap().is_empty());
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:-2").is_err());
    }

    #[test]
    fn epsilons() {
        assert_eq!(parse_epsilons("-1,+1,1").unwrap(), vec![-1, 1, 1]);
        assert!(parse_epsilons("0").is_err());
    }
}
