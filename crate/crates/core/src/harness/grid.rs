//! Evaluation grids: a Cartesian product over ranged coordinates, or
//! seeded random samples from the same box.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::SplitChart;
use crate::sample::random_points;

use super::HarnessError;

pub const DEFAULT_COUNT: usize = 17;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Coordinates that vary, with their closed ranges.
    #[serde(default)]
    pub ranges: BTreeMap<String, [f64; 2]>,
    /// Points per ranged coordinate (default 17).
    #[serde(default)]
    pub counts: BTreeMap<String, usize>,
    /// Values of coordinates without a range (default 0).
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    /// Draw this many seeded random points from the box instead.
    #[serde(default)]
    pub random: Option<usize>,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Schema(format!("grid: {}", msg.into()))
}

fn number(s: &str) -> Result<f64, HarnessError> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("'{s}' is not a number")))
}

fn count(s: &str) -> Result<usize, HarnessError> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("'{s}' is not a count")))
}

impl GridSpec {
    pub fn validate(&self, chart: &SplitChart) -> Result<(), HarnessError> {
        for name in self.ranges.keys().chain(self.counts.keys()).chain(self.fixed.keys()) {
            if chart.index_of(name).is_none() {
                return Err(bad(format!("unknown coordinate '{name}'")));
            }
        }
        for (name, r) in &self.ranges {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
                return Err(bad(format!("bad range for {name}")));
            }
        }
        for name in self.counts.keys() {
            if !self.ranges.contains_key(name) {
                return Err(bad(format!("count given for {name} without a range")));
            }
        }
        Ok(())
    }

    /// Apply a command-line override such as `x2=-1:1:9,v=0.5:2,x1=0.3,random=50`.
    /// `count=N` sets the count of every ranged coordinate.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), HarnessError> {
        for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected NAME=VALUE in '{item}'")))?;
            let key = key.trim();
            match key {
                "random" => self.random = Some(count(value)?),
                "count" => {
                    let c = count(value)?;
                    let names: Vec<String> = self.ranges.keys().cloned().collect();
                    for n in names {
                        self.counts.insert(n, c);
                    }
                }
                _ => {
                    let parts: Vec<&str> = value.split(':').collect();
                    match parts.as_slice() {
                        [v] => {
                            self.ranges.remove(key);
                            self.counts.remove(key);
                            self.fixed.insert(key.to_string(), number(v)?);
                        }
                        [a, b] | [a, b, _] => {
                            self.fixed.remove(key);
                            self.ranges.insert(key.to_string(), [number(a)?, number(b)?]);
                            if let [_, _, c] = parts.as_slice() {
                                self.counts.insert(key.to_string(), count(c)?);
                            }
                        }
                        _ => return Err(bad(format!("cannot read '{item}'"))),
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self, chart: &SplitChart) -> usize {
        if let Some(r) = self.random {
            return r;
        }
        chart
            .names()
            .iter()
            .map(|n| self.axis(n).len())
            .product()
    }

    pub fn is_empty(&self, chart: &SplitChart) -> bool {
        self.len(chart) == 0
    }

    fn axis(&self, name: &str) -> Vec<f64> {
        match self.ranges.get(name) {
            Some(&[a, b]) => {
                let k = self.counts.get(name).copied().unwrap_or(DEFAULT_COUNT);
                match k {
                    0 => vec![],
                    1 => vec![a],
                    _ => (0..k)
                        .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
                        .collect(),
                }
            }
            None => vec![self.fixed.get(name).copied().unwrap_or(0.0)],
        }
    }

    /// Per-coordinate sample values of the product grid.
    pub fn axes(&self, chart: &SplitChart) -> Vec<Vec<f64>> {
        chart.names().iter().map(|n| self.axis(n)).collect()
    }

    /// Points in a fixed order: the last chart coordinate varies fastest.
    pub fn points(&self, chart: &SplitChart, seed: u64) -> Vec<Vec<f64>> {
        if let Some(k) = self.random {
            let ranges: Vec<(f64, f64)> = chart
                .names()
                .iter()
                .map(|n| match self.ranges.get(*n) {
                    Some(&[a, b]) => (a, b),
                    None => {
                        let v = self.fixed.get(*n).copied().unwrap_or(0.0);
                        (v, v)
                    }
                })
                .collect();
            return random_points(&mut ChaCha8Rng::seed_from_u64(seed), &ranges, k);
        }
        let axes = self.axes(chart);
        let mut out = vec![Vec::with_capacity(axes.len())];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_and_size() {
        let chart = SplitChart::new(["x", "y"], ["u"]).unwrap();
        let mut g = GridSpec::default();
        g.apply_override("x=0:1:2,u=0:2:3,y=5").unwrap();
        let p = g.points(&chart, 0);
        assert_eq!(p.len(), 6);
        assert_eq!(g.len(&chart), 6);
        assert_eq!(p[0], vec![0.0, 5.0, 0.0]);
        assert_eq!(p[1], vec![0.0, 5.0, 1.0]);
        assert_eq!(p[5], vec![1.0, 5.0, 2.0]);
    }

    #[test]
    fn random_is_seeded() {
        let chart = SplitChart::new(["x"], ["u"]).unwrap();
        let mut g = GridSpec::default();
        g.apply_override("x=-1:1,random=5").unwrap();
        assert_eq!(g.points(&chart, 3), g.points(&chart, 3));
        assert_ne!(g.points(&chart, 3), g.points(&chart, 4));
        assert!(g.points(&chart, 3).iter().all(|p| p[1] == 0.0));
    }

    #[test]
    fn rejects_unknown_coordinates() {
        let chart = SplitChart::new(["x"], ["u"]).unwrap();
        let mut g = GridSpec::default();
        g.apply_override("z=0:1").unwrap();
        assert!(g.validate(&chart).is_err());
        assert!(g.apply_override("x=a:b").is_err());
    }
}
