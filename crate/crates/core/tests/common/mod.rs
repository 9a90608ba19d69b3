//! Reference implementations used as oracles. Nothing here calls into the
//! library's enumeration, winding or combination code.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};

use anyonsim_core::{Amplitude, DiscretePath, TwoParticleConfig};
use rand::Rng;

pub type Site = [i32; 2];
pub type Joint = (Site, Site);

pub const MOVES: [Site; 5] = [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]];

fn on_lattice(s: Site, extent: i32) -> bool {
    s[0].abs() <= extent && s[1].abs() <= extent
}

fn rel(j: Joint) -> [i64; 2] {
    [i64::from(j.0[0] - j.1[0]), i64::from(j.0[1] - j.1[1])]
}

/// Half-turn test: opposite directions exactly.
fn is_half_turn(a: [i64; 2], b: [i64; 2]) -> bool {
    a[0] * b[1] == a[1] * b[0] && a[0] * b[0] + a[1] * b[1] < 0
}

fn admissible_step(from: Joint, to: Joint, extent: i32) -> bool {
    on_lattice(to.0, extent)
        && on_lattice(to.1, extent)
        && to.0 != to.1
        && !is_half_turn(rel(from), rel(to))
}

/// Every sequence of `n` joint moves, odometer order with the first step most
/// significant and particle 1's move major within a step; keeps sequences
/// that stay admissible and end at `end`.
pub fn brute_force_walks(extent: i32, start: Joint, end: Joint, n: usize) -> Vec<Vec<Joint>> {
    let joint: Vec<(Site, Site)> = MOVES
        .iter()
        .flat_map(|&a| MOVES.iter().map(move |&b| (a, b)))
        .collect();
    let total = joint.len().pow(n as u32);
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut walk = vec![start];
        let mut ok = true;
        for &d in &digits {
            let cur = *walk.last().unwrap();
            let (m1, m2) = joint[d];
            let next = (
                [cur.0[0] + m1[0], cur.0[1] + m1[1]],
                [cur.1[0] + m2[0], cur.1[1] + m2[1]],
            );
            if !admissible_step(cur, next, extent) {
                ok = false;
                break;
            }
            walk.push(next);
        }
        if ok && *walk.last().unwrap() == end {
            out.push(walk);
        }
        // increment odometer, last digit fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < joint.len() {
                break;
            }
            *d = 0;
        }
    }
    out
}

/// Winding in half turns from unwrapped absolute polar angles.
pub fn half_turns(walk: &[Joint]) -> i64 {
    let mut acc = 0.0;
    let mut prev = {
        let r = rel(walk[0]);
        (r[1] as f64).atan2(r[0] as f64)
    };
    for &j in &walk[1..] {
        let r = rel(j);
        let a = (r[1] as f64).atan2(r[0] as f64);
        let mut d = a - prev;
        while d > PI {
            d -= TAU;
        }
        while d < -PI {
            d += TAU;
        }
        acc += d;
        prev = a;
    }
    let h = acc / PI;
    assert!(
        (h - h.round()).abs() < 1e-9,
        "oracle winding not a half-integer"
    );
    h.round() as i64
}

pub fn walk_action(walk: &[Joint], spacing: f64, dt: f64, mass: f64) -> f64 {
    walk.windows(2)
        .map(|w| {
            let d = |a: Site, b: Site| {
                let dx = f64::from(b[0] - a[0]) * spacing;
                let dy = f64::from(b[1] - a[1]) * spacing;
                dx * dx + dy * dy
            };
            mass * (d(w[0].0, w[1].0) + d(w[0].1, w[1].1)) / (2.0 * dt)
        })
        .sum()
}

/// Direct summation per class in half turns.
pub fn oracle_partials(
    walks: &[Vec<Joint>],
    spacing: f64,
    dt: f64,
    mass: f64,
    hbar: f64,
) -> BTreeMap<i64, Amplitude> {
    let mut out: BTreeMap<i64, Amplitude> = BTreeMap::new();
    for w in walks {
        let amp = Amplitude::from_polar(1.0, walk_action(w, spacing, dt, mass) / hbar);
        *out.entry(half_turns(w)).or_default() += amp;
    }
    out
}

/// Forward propagation of amplitudes over all joint sites, one step at a time.
#[allow(clippy::too_many_arguments)]
pub fn transfer_matrix_sum(
    extent: i32,
    start: Joint,
    end: Joint,
    n: usize,
    spacing: f64,
    dt: f64,
    mass: f64,
    hbar: f64,
) -> Amplitude {
    let mut layer: HashMap<Joint, Amplitude> = HashMap::new();
    layer.insert(start, Amplitude::new(1.0, 0.0));
    for _ in 0..n {
        let mut next: HashMap<Joint, Amplitude> = HashMap::new();
        for (&from, &amp) in &layer {
            for m1 in MOVES {
                for m2 in MOVES {
                    let to = (
                        [from.0[0] + m1[0], from.0[1] + m1[1]],
                        [from.1[0] + m2[0], from.1[1] + m2[1]],
                    );
                    if !admissible_step(from, to, extent) {
                        continue;
                    }
                    let s = walk_action(&[from, to], spacing, dt, mass);
                    *next.entry(to).or_default() += amp * Amplitude::from_polar(1.0, s / hbar);
                }
            }
        }
        layer = next;
    }
    layer.get(&end).copied().unwrap_or_default()
}

pub fn joint_to_config(j: Joint, spacing: f64) -> TwoParticleConfig {
    TwoParticleConfig::from_coords(
        f64::from(j.0[0]) * spacing,
        f64::from(j.0[1]) * spacing,
        f64::from(j.1[0]) * spacing,
        f64::from(j.1[1]) * spacing,
    )
}

pub fn config_to_joint(c: &TwoParticleConfig, spacing: f64) -> Joint {
    let s = |v: f64| (v / spacing).round() as i32;
    ([s(c.p1.x), s(c.p1.y)], [s(c.p2.x), s(c.p2.y)])
}

pub fn path_to_joints(p: &DiscretePath, spacing: f64) -> Vec<Joint> {
    p.configs()
        .iter()
        .map(|c| config_to_joint(c, spacing))
        .collect()
}

/// Random admissible walk of `n` steps from `start` by rejection sampling of moves.
pub fn random_walk<R: Rng>(rng: &mut R, extent: i32, start: Joint, n: usize) -> Vec<Joint> {
    let mut walk = vec![start];
    while walk.len() < n + 1 {
        let cur = *walk.last().unwrap();
        let m1 = MOVES[rng.gen_range(0..MOVES.len())];
        let m2 = MOVES[rng.gen_range(0..MOVES.len())];
        let next = (
            [cur.0[0] + m1[0], cur.0[1] + m1[1]],
            [cur.1[0] + m2[0], cur.1[1] + m2[1]],
        );
        if admissible_step(cur, next, extent) {
            walk.push(next);
        }
    }
    walk
}

pub fn random_joint<R: Rng>(rng: &mut R, extent: i32) -> Joint {
    loop {
        let mut s = || {
            [
                rng.gen_range(-extent..=extent),
                rng.gen_range(-extent..=extent),
            ]
        };
        let j = (s(), s());
        if j.0 != j.1 {
            return j;
        }
    }
}

pub fn walk_to_path(walk: &[Joint], spacing: f64, dt: f64) -> DiscretePath {
    DiscretePath::new(
        dt,
        walk.iter().map(|&j| joint_to_config(j, spacing)).collect(),
    )
    .unwrap()
}

pub fn random_amplitude<R: Rng>(rng: &mut R) -> Amplitude {
    Amplitude::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Amplitude>> {
    (0..n)
        .map(|_| (0..n).map(|_| random_amplitude(rng)).collect())
        .collect()
}

/// Ryser's inclusion-exclusion formula.
pub fn permanent_ryser(m: &[Vec<Amplitude>]) -> Amplitude {
    let n = m.len();
    let mut total = Amplitude::new(0.0, 0.0);
    for subset in 1u32..(1 << n) {
        let mut prod = Amplitude::new(1.0, 0.0);
        for row in m {
            let s: Amplitude = (0..n)
                .filter(|c| subset & (1 << c) != 0)
                .map(|c| row[c])
                .sum();
            prod *= s;
        }
        let k = subset.count_ones() as usize;
        let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

/// Gaussian elimination with partial pivoting.
pub fn determinant_lu(m: &[Vec<Amplitude>]) -> Amplitude {
    let n = m.len();
    let mut a: Vec<Vec<Amplitude>> = m.to_vec();
    let mut det = Amplitude::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Amplitude::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        let pivot_row = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (x, v) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * v;
            }
        }
    }
    det
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
