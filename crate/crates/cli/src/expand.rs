//! Parameter ranges for sweeps.

use anyhow::{bail, Context, Result};

/// Expands the first `{...}` group of `pattern` and recurses. A group is
/// either an inclusive integer range `a..b` or alternatives `x|y|z`.
pub fn expand(pattern: &str) -> Result<Vec<String>> {
    let Some(open) = pattern.find('{') else {
        if pattern.contains('}') {
            bail!("unbalanced braces in {pattern:?}");
        }
        return Ok(vec![pattern.to_string()]);
    };
    let close = open + pattern[open..].find('}').with_context(|| format!("unbalanced braces in {pattern:?}"))?;
    let (head, group, tail) = (&pattern[..open], &pattern[open + 1..close], &pattern[close + 1..]);
    let choices: Vec<String> = match group.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().with_context(|| format!("bad range {group:?}"))?;
            let b: u64 = b.trim().parse().with_context(|| format!("bad range {group:?}"))?;
            (a..=b).map(|x| x.to_string()).collect()
        }
        None => group.split('|').map(|s| s.trim().to_string()).collect(),
    };
    let mut out = Vec::new();
    for c in choices {
        for rest in expand(tail)? {
            out.push(format!("{head}{c}{rest}"));
        }
    }
    Ok(out)
}

/// `;`-separated items, each brace-expanded. Specs such as `collision:64,32`
/// contain commas, hence the separator.
pub fn expand_list(list: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in list.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        out.extend(expand(item)?);
    }
    Ok(out)
}

/// Seeds as `a..b` (half-open) or a `;`-separated list.
pub fn seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().with_context(|| format!("bad seed range {spec:?}"))?;
        let b: u64 = b.trim().parse().with_context(|| format!("bad seed range {spec:?}"))?;
        return Ok((a..b).collect());
    }
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().with_context(|| format!("bad seed {s:?}")))
        .collect()
}
