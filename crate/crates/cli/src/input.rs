//! Problem files: a small sectioned format.
//!
//! ```text
//! [vars]
//! x even
//! y even fiber
//! [poisson]
//! x * d_x * d_y
//! [submanifold]
//! transverse = y
//! k = 3
//! [order]
//! 2
//! ```
//!
//! Variables marked `fiber` (or listed under `transverse =`) cut out the
//! submanifold; the rest are tangent. The bivector is written in the
//! shared grammar over the ambient doubled alphabet, conjugates named
//! `d_<var>`.

use anyhow::{anyhow, bail, Context, Result};

use coiso_core::derived::SubmanifoldSpec;
use coiso_core::multivector::MultiVector;
use coiso_core::parse::parse_poly;

#[derive(Debug, Clone)]
pub struct Problem {
    pub base: Vec<String>,
    pub transverse: Vec<String>,
    pub poisson: String,
    pub trunc: u32,
    pub order: usize,
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut section = String::new();
    let mut vars: Vec<(String, bool, bool)> = Vec::new(); // (name, odd, fiber)
    let mut poisson_lines: Vec<String> = Vec::new();
    let mut transverse_override: Option<Vec<String>> = None;
    let mut trunc: Option<u32> = None;
    let mut order: Option<usize> = None;

    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_lowercase();
            continue;
        }
        match section.as_str() {
            "vars" => {
                let mut words = line.split_whitespace();
                let name = words
                    .next()
                    .ok_or_else(|| anyhow!("empty variable line"))?
                    .to_string();
                let mut odd = false;
                let mut fiber = false;
                for w in words {
                    match w.to_lowercase().as_str() {
                        "even" => odd = false,
                        "odd" => odd = true,
                        "fiber" => fiber = true,
                        other => bail!("unknown variable keyword `{other}`"),
                    }
                }
                vars.push((name, odd, fiber));
            }
            "poisson" => poisson_lines.push(line.to_string()),
            "submanifold" => {
                let Some((key, value)) = line.split_once('=') else {
                    bail!("expected `key = value` in [submanifold], got `{line}`");
                };
                match key.trim().to_lowercase().as_str() {
                    "transverse" => {
                        transverse_override = Some(
                            value
                                .split(',')
                                .map(|s| s.trim().to_string())
                                .filter(|s| !s.is_empty())
                                .collect(),
                        );
                    }
                    "k" => {
                        trunc = Some(value.trim().parse().context("parsing k")?);
                    }
                    other => bail!("unknown submanifold key `{other}`"),
                }
            }
            "order" => {
                order = Some(line.parse().context("parsing order")?);
            }
            other => bail!("unknown section `[{other}]`"),
        }
    }

    if vars.is_empty() {
        bail!("no variables declared");
    }
    for (name, odd, _) in &vars {
        if *odd {
            bail!("variable `{name}` is odd: the submanifold pipeline works on even ambient coordinates");
        }
    }
    let fiber_flags: Vec<String> = vars
        .iter()
        .filter(|(_, _, f)| *f)
        .map(|(n, _, _)| n.clone())
        .collect();
    let transverse = transverse_override.unwrap_or(fiber_flags);
    for t in &transverse {
        if !vars.iter().any(|(n, _, _)| n == t) {
            bail!("transverse variable `{t}` is not declared");
        }
    }
    let base: Vec<String> = vars
        .iter()
        .map(|(n, _, _)| n.clone())
        .filter(|n| !transverse.contains(n))
        .collect();
    if poisson_lines.is_empty() {
        bail!("no [poisson] expression");
    }
    let order = order.unwrap_or(2);
    // Default truncation: enough fiber orders for all brackets in reach.
    let trunc = trunc.unwrap_or((order + 4) as u32);
    Ok(Problem {
        base,
        transverse,
        poisson: poisson_lines.join(" + "),
        trunc,
        order,
    })
}

impl Problem {
    pub fn spec(&self) -> Result<SubmanifoldSpec> {
        let base: Vec<&str> = self.base.iter().map(|s| s.as_str()).collect();
        let tr: Vec<&str> = self.transverse.iter().map(|s| s.as_str()).collect();
        SubmanifoldSpec::new(&base, &tr, self.trunc).map_err(|e| anyhow!("{e}"))
    }

    pub fn poisson(&self, spec: &SubmanifoldSpec) -> Result<MultiVector> {
        let ctx = spec.dictionary().b_side();
        let body = parse_poly(ctx.full(), &self.poisson)
            .map_err(|e| anyhow!("parsing [poisson]: {e}"))?;
        MultiVector::new(ctx, body).map_err(|e| anyhow!("{e}"))
    }
}
