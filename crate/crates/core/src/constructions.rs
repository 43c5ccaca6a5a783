//! Lower-bound instances: spiral matrices, the padded matrix with its initialization gadget,
//! the theory-compliant initial gap, and snake-in-the-box paths with their induced games.
//!
//! Matrix indices are 0-based here; locators are reported 1-based by the file formats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::Game;
use crate::matrix::Matrix;

/// Recursive spiral matrix with positive entries r+1, …, r+2m−1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralMatrix {
    pub m: usize,
    pub r: i64,
    pub matrix: Matrix,
}

/// Spiral block padded by one gadget row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedMatrix {
    pub m: usize,
    pub gamma: f64,
    pub matrix: Matrix,
    /// `locators[k - 3]` is the 0-based cell holding payoff k, for k = 3..=2m−1.
    pub locators: Vec<(usize, usize)>,
}

impl PaddedMatrix {
    /// 0-based cell holding payoff `k`.
    pub fn locator(&self, k: usize) -> Option<(usize, usize)> {
        k.checked_sub(3).and_then(|i| self.locators.get(i)).copied()
    }

    /// Number of the last period, 2m−1.
    pub fn last_period(&self) -> usize {
        2 * self.m - 1
    }

    pub fn game(&self) -> Game {
        Game::identical_matrix(self.matrix.clone())
            .expect("padded matrix entries are finite")
            .with_metadata("construction", "padded")
            .with_metadata("m", self.m)
            .with_metadata("gamma", crate::hexfloat::format(self.gamma))
            .with_metadata("gamma_decimal", self.gamma)
            .with_metadata("norm_family", "l1/linf")
    }
}

pub fn spiral_matrix(m: usize, r: i64) -> Result<SpiralMatrix> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::Construction(format!("spiral size must be even and at least 2, got {m}")));
    }
    let mut matrix = Matrix::zeros(m, m);
    fill_spiral(&mut matrix, 0, m, r);
    Ok(SpiralMatrix { m, r, matrix })
}

fn fill_spiral(a: &mut Matrix, off: usize, m: usize, r: i64) {
    let v = |d: i64| (r + d) as f64;
    if m == 2 {
        a.set(off, off, v(1));
        a.set(off + 1, off, v(2));
        a.set(off + 1, off + 1, v(3));
        return;
    }
    let last = off + m - 1;
    a.set(off, off, v(1));
    a.set(last, off, v(2));
    a.set(last, last, v(3));
    a.set(off + 1, last, v(4));
    fill_spiral(a, off + 1, m - 2, r + 4);
}

/// Unique 0-based cell holding value `k`.
pub fn locator(matrix: &Matrix, k: f64) -> Result<(usize, usize)> {
    let mut found = None;
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            if matrix.get(i, j) == k {
                if found.is_some() {
                    return Err(Error::Construction(format!("payoff {k} appears more than once")));
                }
                found = Some((i, j));
            }
        }
    }
    found.ok_or_else(|| Error::Construction(format!("payoff {k} is absent")))
}

pub fn padded_matrix(m: usize, gamma: f64) -> Result<PaddedMatrix> {
    if m < 5 || m % 2 == 0 {
        return Err(Error::Construction(format!("padded size must be odd and at least 5, got {m}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Construction(format!("gamma must be positive and finite, got {gamma}")));
    }
    let b = spiral_matrix(m - 1, 2)?.matrix;
    let last = m - 1;
    let row_sum = |i: usize| b.row(i).iter().sum::<f64>();
    let col_sum = |j: usize| (0..last).map(|i| b.get(i, j)).sum::<f64>();
    let mut a = Matrix::zeros(m, m);
    for i in 0..last {
        for j in 0..last {
            a.set(i, j, b.get(i, j));
        }
    }
    a.set(last, 0, -col_sum(0));
    a.set(0, last, -row_sum(0));
    for k in 1..last {
        a.set(last, k, -gamma - col_sum(k));
        a.set(k, last, -gamma - row_sum(k));
    }
    a.set(last, last, -2.0 * gamma);
    let locators = (3..=2 * m - 1).map(|k| locator(&a, k as f64)).collect::<Result<Vec<_>>>()?;
    Ok(PaddedMatrix { m, gamma, matrix: a, locators })
}

/// Initial gap γ⁽¹⁾ that makes round-1 play leave every action except the first, for
/// δ = 1/(4m), learning-rate exponent `alpha` and regularizer range `reg_range`.
pub fn gamma_init(m: usize, alpha: f64, reg_range: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(reg_range > 0.0) {
        return Err(Error::InvalidArgument(format!("regularizer range must be positive, got {reg_range}")));
    }
    if m < 5 || m % 2 == 0 {
        return Err(Error::InvalidArgument(format!("m must be odd and at least 5, got {m}")));
    }
    let mf = m as f64;
    let delta = 1.0 / (4.0 * mf);
    let p = 1.0 / (1.0 - alpha);
    let alpha_pow = if alpha == 0.0 { 1.0 } else { alpha.powf(alpha / (1.0 - alpha)) };
    let t1 = 4.0 * mf.powi(3) * reg_range;
    let t2 = 2.0 * (64.0 * reg_range * mf / delta).powf(p);
    let t3 = (reg_range * mf / delta).powf(p) * alpha_pow * (1.0 - alpha);
    Ok(t1.max(t2).max(t3))
}

/// Matrix-level γ for which the round-1 gaps of the padded game equal `gamma_init`.
///
/// Uniform play makes the round-1 gap of the middle actions γ/m, so the gadget entries
/// carry m·γ⁽¹⁾.
pub fn auto_gamma(m: usize, alpha: f64, reg_range: f64) -> Result<f64> {
    Ok(m as f64 * gamma_init(m, alpha, reg_range)?)
}

/// Side length of the normalized construction: spiral block plus ⌈γ⁽¹⁾⌉ padding actions.
pub fn normalized_padded_size(m: usize, alpha: f64, reg_range: f64) -> Result<usize> {
    Ok(m - 1 + gamma_init(m, alpha, reg_range)?.ceil() as usize)
}

/// Largest normalized construction that is materialized (entries per matrix).
pub const MAX_DENSE_ENTRIES: usize = 1 << 26;

/// Payoffs in [−1, 1]: the spiral block scaled by 1/(2m−1) followed by `pad` actions per
/// player whose payoffs are −1 except 0 against the opponent's first action.
pub fn normalized_padded_matrix_with_pad(m: usize, pad: usize) -> Result<Game> {
    if m < 5 || m % 2 == 0 {
        return Err(Error::Construction(format!("m must be odd and at least 5, got {m}")));
    }
    let side = m - 1 + pad;
    if side.saturating_mul(side) > MAX_DENSE_ENTRIES {
        return Err(Error::Construction(format!("{side}x{side} matrix exceeds the dense size limit")));
    }
    let b = spiral_matrix(m - 1, 2)?.matrix.scale(1.0 / (2 * m - 1) as f64);
    let core = m - 1;
    let a = Matrix::from_fn(side, side, |i, j| match (i < core, j < core) {
        (true, true) => b.get(i, j),
        (false, _) if j == 0 => 0.0,
        (_, false) if i == 0 => 0.0,
        _ => -1.0,
    });
    Ok(Game::identical_matrix(a)?
        .with_metadata("construction", "normalized_padded")
        .with_metadata("m", m)
        .with_metadata("pad", pad))
}

/// The normalized construction with ⌈γ⁽¹⁾⌉ padding actions for the given schedule and range.
pub fn normalized_padded_matrix(m: usize, alpha: f64, reg_range: f64) -> Result<Game> {
    let pad = gamma_init(m, alpha, reg_range)?.ceil() as usize;
    normalized_padded_matrix_with_pad(m, pad)
}

// ---------------------------------------------------------------------------
// Snake in the box

/// Induced path in the n-cube; vertex bit i is the action of player i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnakePath {
    pub n: usize,
    pub vertices: Vec<u32>,
}

impl SnakePath {
    /// Number of edges.
    pub fn length(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// One bitstring per line, player 1 leftmost.
    pub fn to_bitstrings(&self) -> String {
        self.vertices.iter().map(|&v| format!("{}\n", bitstring(v, self.n))).collect()
    }

    pub fn from_bitstrings(text: &str) -> Result<Self> {
        let mut n = None;
        let mut vertices = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if *n.get_or_insert(line.len()) != line.len() {
                return Err(Error::Format("bitstrings of unequal length".into()));
            }
            let mut v = 0u32;
            for (i, c) in line.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => v |= 1 << i,
                    _ => return Err(Error::Format(format!("bad bit {c:?}"))),
                }
            }
            vertices.push(v);
        }
        Ok(SnakePath { n: n.unwrap_or(0), vertices })
    }

    /// 1-based path position of a vertex, if on the path.
    pub fn position(&self, v: u32) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v).map(|p| p + 1)
    }
}

pub fn bitstring(v: u32, n: usize) -> String {
    (0..n).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn verify_snake(path: &SnakePath) -> bool {
    let vs = &path.vertices;
    if path.n == 0 || path.n > 31 || vs.iter().any(|&v| v >> path.n != 0) {
        return false;
    }
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let d = (vs[i] ^ vs[j]).count_ones();
            if (j == i + 1 && d != 1) || (j > i + 1 && d < 2) {
                return false;
            }
        }
    }
    true
}

/// Outcome of a budgeted snake search.
#[derive(Debug, Clone)]
pub struct SnakeSearch {
    pub path: SnakePath,
    pub nodes: u64,
    /// True when the search space was exhausted, so the path is a longest snake.
    pub exhaustive: bool,
}

struct SnakeDfs {
    n: usize,
    budget: u64,
    nodes: u64,
    /// Number of path vertices equal or adjacent to each cube vertex.
    blocked: Vec<u8>,
    free: usize,
    path: Vec<u32>,
    best: Vec<u32>,
    stopped: bool,
}

impl SnakeDfs {
    fn touch(&mut self, v: u32, delta: i8) {
        let mark = |w: u32, s: &mut Self| {
            let before = s.blocked[w as usize];
            let after = (before as i8 + delta) as u8;
            s.blocked[w as usize] = after;
            if before == 0 && after != 0 {
                s.free -= 1;
            } else if before != 0 && after == 0 {
                s.free += 1;
            }
        };
        mark(v, self);
        for b in 0..self.n {
            mark(v ^ (1 << b), self);
        }
    }

    fn push(&mut self, v: u32) {
        self.touch(v, 1);
        self.path.push(v);
    }

    fn pop(&mut self) {
        let v = self.path.pop().expect("non-empty path");
        self.touch(v, -1);
    }

    /// `used_bits`: flipped coordinates are a prefix 0..used_bits (canonical relabelling).
    fn dfs(&mut self, used_bits: usize) {
        if self.path.len() > self.best.len() {
            self.best = self.path.clone();
        }
        // Every later vertex is unblocked now, except the next one which touches the tail.
        if self.path.len() + 1 + self.free <= self.best.len() {
            return;
        }
        let tail = *self.path.last().expect("non-empty path");
        let limit = (used_bits + 1).min(self.n);
        for b in 0..limit {
            let v = tail ^ (1 << b);
            if self.blocked[v as usize] != 1 {
                continue;
            }
            if self.nodes >= self.budget {
                self.stopped = true;
                return;
            }
            self.nodes += 1;
            self.push(v);
            self.dfs(used_bits.max(b + 1));
            self.pop();
            if self.stopped {
                return;
            }
        }
    }
}

/// Longest snake found by depth-first search from 0ⁿ with coordinates introduced in
/// increasing order, visiting at most `budget` nodes.
pub fn search_snake(n: usize, budget: u64) -> Result<SnakeSearch> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!("snake dimension must lie in 2..=8, got {n}")));
    }
    let mut s = SnakeDfs {
        n,
        budget,
        nodes: 0,
        blocked: vec![0; 1 << n],
        free: 1 << n,
        path: Vec::new(),
        best: Vec::new(),
        stopped: false,
    };
    s.push(0);
    s.dfs(0);
    let path = SnakePath { n, vertices: s.best };
    if path.length() < n {
        return Err(Error::BudgetExhausted { budget, needed: n });
    }
    Ok(SnakeSearch { path, nodes: s.nodes, exhaustive: !s.stopped })
}

pub fn find_snake(n: usize, budget: u64) -> Result<SnakePath> {
    search_snake(n, budget).map(|s| s.path)
}

/// Identical-interest game on n binary players paying the 1-based path position on the
/// path and 0 elsewhere.
pub fn snake_game(path: &SnakePath) -> Result<Game> {
    if !verify_snake(path) {
        return Err(Error::InvalidSnake("path violates the snake property".into()));
    }
    let mut values = vec![0.0; 1 << path.n];
    for (k, &v) in path.vertices.iter().enumerate() {
        values[v as usize] = (k + 1) as f64;
    }
    let bits: Vec<String> = path.vertices.iter().map(|&v| bitstring(v, path.n)).collect();
    Ok(Game::identical_tensor(vec![2; path.n], values)?
        .with_metadata("construction", "snake")
        .with_metadata("n", path.n)
        .with_metadata("path", bits))
}
