//! Bundled instance generators and the `name(args)` spec syntax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexLabel};

/// Path with `n` edges (vertices `0..=n`).
pub fn path(n: usize) -> Result<MetricGraph> {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
    MetricGraph::from_edges(n + 1, &edges)
}

pub fn cycle(n: usize) -> Result<MetricGraph> {
    if n < 3 {
        return Err(Error::Invalid(format!(
            "cycle({n}) needs at least 3 vertices"
        )));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    MetricGraph::from_edges(n, &edges)
}

/// Centre `0` with leaves `1..=k`.
pub fn star(k: usize) -> Result<MetricGraph> {
    let edges: Vec<(usize, usize)> = (1..=k).map(|l| (0, l)).collect();
    MetricGraph::from_edges(k + 1, &edges)
}

/// Centre `0` with three legs of the given lengths, numbered leg by leg.
pub fn tripod(a: usize, b: usize, c: usize) -> Result<MetricGraph> {
    let mut edges = Vec::new();
    let mut next = 1;
    for len in [a, b, c] {
        let mut prev = 0;
        for _ in 0..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    MetricGraph::from_edges(next, &edges)
}

/// Vertex `i > 0` attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, seed: u64) -> Result<MetricGraph> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    MetricGraph::from_edges(n, &edges)
}

/// Reduced words over `rank` generators, as letter sequences; generator
/// `g` is letter `2g`, its inverse `2g + 1`.
pub fn free_group_words(rank: usize, radius: usize) -> Vec<Vec<u8>> {
    let mut words = vec![Vec::new()];
    let mut frontier = vec![Vec::<u8>::new()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..(2 * rank) as u8 {
                if w.last().is_some_and(|&p| p ^ 1 == l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}

pub fn word_label(w: &[u8]) -> String {
    if w.is_empty() {
        return "e".into();
    }
    w.iter()
        .map(|&l| {
            let c = (b'a' + l / 2) as char;
            if l % 2 == 1 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

/// Ball of the given radius about the identity in the Cayley tree of the
/// free group of the given rank.
pub fn free_group_ball(rank: usize, radius: usize) -> Result<MetricGraph> {
    if rank == 0 {
        return Err(Error::Invalid("free group of rank 0".into()));
    }
    let words = free_group_words(rank, radius);
    let index: std::collections::HashMap<&[u8], usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i))
        .collect();
    let edges: Vec<(usize, usize)> = words
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, w)| (index[&w[..w.len() - 1]], i))
        .collect();
    let labels = words
        .iter()
        .map(|w| VertexLabel::Str(word_label(w)))
        .collect();
    MetricGraph::with_labels(labels, &edges)
}

/// A subspace of a product of graphs: factor graphs and one coordinate
/// tuple per point.
#[derive(Clone, Debug)]
pub struct ProductSpec {
    pub factors: Vec<MetricGraph>,
    pub points: Vec<Vec<usize>>,
}

/// The band `|x − y| ≤ 1` in the square of `path(n)`.
pub fn staircase(n: usize) -> Result<ProductSpec> {
    let p = path(n)?;
    let mut points = Vec::new();
    for x in 0..=n {
        for y in x.saturating_sub(1)..=(x + 1).min(n) {
            points.push(vec![x, y]);
        }
    }
    Ok(ProductSpec {
        factors: vec![p.clone(), p],
        points,
    })
}

/// `{(v, v)}` in the square of a graph.
pub fn diagonal(g: MetricGraph) -> ProductSpec {
    let points = (0..g.len()).map(|v| vec![v, v]).collect();
    ProductSpec {
        factors: vec![g.clone(), g],
        points,
    }
}

/// The whole square of `path(n)`.
pub fn full_product(n: usize) -> Result<ProductSpec> {
    let p = path(n)?;
    let points = (0..=n)
        .flat_map(|x| (0..=n).map(move |y| vec![x, y]))
        .collect();
    Ok(ProductSpec {
        factors: vec![p.clone(), p],
        points,
    })
}

/// The free-group ball mapped to two trees by `g ↦ (g, σ(g))`, where `σ`
/// swaps the first two generators (the identity in rank 1).
pub fn free_group_pair(rank: usize, radius: usize) -> Result<ProductSpec> {
    let g = free_group_ball(rank, radius)?;
    let words = free_group_words(rank, radius);
    let index: std::collections::HashMap<Vec<u8>, usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let swap = |l: u8| if rank >= 2 && l < 4 { l ^ 2 } else { l };
    let points = words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let image: Vec<u8> = w.iter().map(|&l| swap(l)).collect();
            vec![i, index[&image]]
        })
        .collect();
    Ok(ProductSpec {
        factors: vec![g.clone(), g],
        points,
    })
}

use crate::metric::FiniteMetric;

/// A parsed generator call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Int(u64),
    Call(Call),
}

pub fn parse_spec(s: &str) -> Result<Call> {
    let mut p = Parser {
        s: s.as_bytes(),
        i: 0,
    };
    let c = p.call()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(Error::UnknownGenerator(s.to_string()));
    }
    Ok(c)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn err(&self) -> Error {
        Error::UnknownGenerator(String::from_utf8_lossy(self.s).into_owned())
    }

    fn call(&mut self) -> Result<Call> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len()
            && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_')
        {
            self.i += 1;
        }
        if start == self.i || self.s[start].is_ascii_digit() {
            return Err(self.err());
        }
        let name = String::from_utf8_lossy(&self.s[start..self.i]).into_owned();
        self.ws();
        let mut args = Vec::new();
        if self.i < self.s.len() && self.s[self.i] == b'(' {
            self.i += 1;
            self.ws();
            if self.i < self.s.len() && self.s[self.i] == b')' {
                self.i += 1;
                return Ok(Call { name, args });
            }
            loop {
                self.ws();
                if self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    let start = self.i;
                    while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                        self.i += 1;
                    }
                    let v = std::str::from_utf8(&self.s[start..self.i])
                        .unwrap()
                        .parse()
                        .map_err(|_| self.err())?;
                    args.push(Arg::Int(v));
                } else {
                    args.push(Arg::Call(self.call()?));
                }
                self.ws();
                match self.s.get(self.i) {
                    Some(b',') => self.i += 1,
                    Some(b')') => {
                        self.i += 1;
                        break;
                    }
                    _ => return Err(self.err()),
                }
            }
        }
        Ok(Call { name, args })
    }
}

/// What a spec string generates.
#[derive(Clone, Debug)]
pub enum Generated {
    Graph(MetricGraph),
    Product(ProductSpec),
}

fn ints(c: &Call, n: usize) -> Result<Vec<usize>> {
    if c.args.len() != n {
        return Err(Error::UnknownGenerator(format!(
            "{} takes {n} integer argument(s)",
            c.name
        )));
    }
    c.args
        .iter()
        .map(|a| match a {
            Arg::Int(v) => Ok(*v as usize),
            Arg::Call(_) => Err(Error::UnknownGenerator(format!(
                "{} takes integer arguments",
                c.name
            ))),
        })
        .collect()
}

pub fn generate_call(c: &Call) -> Result<Generated> {
    let g = |r: Result<MetricGraph>| r.map(Generated::Graph);
    match c.name.as_str() {
        "path" => g(path(ints(c, 1)?[0])),
        "cycle" => g(cycle(ints(c, 1)?[0])),
        "star" => g(star(ints(c, 1)?[0])),
        "tripod" => {
            let a = ints(c, 3)?;
            g(tripod(a[0], a[1], a[2]))
        }
        "random_tree" => {
            let a = ints(c, 2)?;
            g(random_tree(a[0], a[1] as u64))
        }
        "free_group_ball" => {
            let a = ints(c, 2)?;
            g(free_group_ball(a[0], a[1]))
        }
        "staircase" => Ok(Generated::Product(staircase(ints(c, 1)?[0])?)),
        "full_product" => Ok(Generated::Product(full_product(ints(c, 1)?[0])?)),
        "free_group_pair" => {
            let a = ints(c, 2)?;
            Ok(Generated::Product(free_group_pair(a[0], a[1])?))
        }
        "diagonal" => match c.args.as_slice() {
            [Arg::Call(inner)] => match generate_call(inner)? {
                Generated::Graph(base) => Ok(Generated::Product(diagonal(base))),
                Generated::Product(_) => {
                    Err(Error::UnknownGenerator("diagonal takes a graph".into()))
                }
            },
            _ => Err(Error::UnknownGenerator(
                "diagonal takes one graph generator".into(),
            )),
        },
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

pub fn generate(spec: &str) -> Result<Generated> {
    generate_call(&parse_spec(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(path(100).unwrap().len(), 101);
        assert_eq!(tripod(3, 4, 5).unwrap().len(), 13);
        assert!(tripod(3, 4, 5).unwrap().is_tree());
        assert_eq!(star(3).unwrap().len(), 4);
        assert_eq!(cycle(12).unwrap().edge_count(), 12);
        let t = random_tree(150, 7).unwrap();
        assert!(t.is_tree() && t.len() == 150);
        assert_eq!(random_tree(150, 7).unwrap().dist_table(), t.dist_table());
        // 1 + 4 + 12 words in F_2 up to length 2.
        assert_eq!(free_group_ball(2, 2).unwrap().len(), 17);
        let s = staircase(12).unwrap();
        assert_eq!(s.points.len(), 37);
        assert_eq!(full_product(4).unwrap().points.len(), 25);
    }

    #[test]
    fn free_group_pair_is_injective() {
        let p = free_group_pair(2, 3).unwrap();
        let mut images: Vec<usize> = p.points.iter().map(|c| c[1]).collect();
        images.sort_unstable();
        images.dedup();
        assert_eq!(images.len(), p.points.len());
    }

    #[test]
    fn spec_parsing() {
        assert!(matches!(generate("path(100)").unwrap(), Generated::Graph(g) if g.len() == 101));
        assert!(
            matches!(generate(" diagonal( path(4) ) ").unwrap(), Generated::Product(p) if p.points.len() == 5)
        );
        assert!(matches!(
            generate("random_tree(10,3)").unwrap(),
            Generated::Graph(_)
        ));
        for bad in [
            "",
            "path",
            "path(",
            "path(1,2)",
            "nope(3)",
            "diagonal(3)",
            "path(3)x",
        ] {
            assert!(generate(bad).is_err(), "{bad}");
        }
    }
}
