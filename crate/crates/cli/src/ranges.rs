//! Integer list arguments: `a..b` (inclusive), `a,b,c`, or a single `a`.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

impl IntList {
    pub fn single(&self) -> Option<usize> {
        match self.0.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn number(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (number(a)?, number(b)?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(number).collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err("empty list".into());
        }
        Ok(IntList(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!("2..5".parse::<IntList>().unwrap().0, vec![2, 3, 4, 5]);
        assert_eq!("7..7".parse::<IntList>().unwrap().0, vec![7]);
        assert_eq!("1,4,9".parse::<IntList>().unwrap().0, vec![1, 4, 9]);
        assert_eq!("3".parse::<IntList>().unwrap().single(), Some(3));
    }

    #[test]
    fn rejects() {
        for bad in ["5..2", "a..3", "", "1,,2", "-1"] {
            assert!(bad.parse::<IntList>().is_err(), "{bad}");
        }
    }
}
