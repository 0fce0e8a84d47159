//! Parameter tables for the two general assemblers, selected by the residue
//! of `k = (m-1)/2` modulo 4.
//!
//! Branch A covers odd `m ≢ 0 (mod 3)`, `m ≥ 7`, `m ≠ 11`; branch B covers
//! odd `m ≡ 0 (mod 3)`, `m ≥ 15`. Each table row is an exact integer
//! expression in `k` (the divisions below never truncate on their row), then
//! reduced mod m.

use thiserror::Error;

use crate::circulant::gcd;
use crate::model::Modulus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("m={0} is not in this branch")]
    OutOfScope(u32),
    #[error("parameter invariant violated for m={m}: {detail}")]
    Invariant { m: u32, detail: String },
}

/// Parameters of the `m ≢ 0 (mod 3)` assembler.
///
/// `d` is the pure-left linking difference, the primed values are split
/// points of the leftover 2m-cycle, `a_i = (y_{t_i}, y_{s_i})` are the
/// pure-right linking arcs of differences `d_i^Y = s_i - t_i`, and `r_i`
/// solves `s_i' + r_i d = t_i'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamsA {
    pub m: Modulus,
    pub d: u32,
    pub s1p: u32,
    pub s2p: u32,
    pub t1p: u32,
    pub t2p: u32,
    pub s1: u32,
    pub s2: u32,
    pub t1: u32,
    pub t2: u32,
    pub r1: u32,
    pub r2: u32,
    pub d1y: u32,
    pub d2y: u32,
}

impl ParamsA {
    /// Linking arcs on the right side, as residue pairs `(t_i, s_i)`.
    pub fn a1(&self) -> (u32, u32) {
        (self.t1, self.s1)
    }

    pub fn a2(&self) -> (u32, u32) {
        (self.t2, self.s2)
    }
}

/// Raw table evaluation, without the invariant gate. Defined for every odd
/// `m ≢ 0 (mod 3)` with `m ≥ 7`, including `m = 11` (where an invariant
/// fails, which is exactly what the verifier reports).
pub fn params_a_raw(m: Modulus) -> Result<ParamsA, ParamsError> {
    if m.m() % 3 == 0 || m.m() < 7 {
        return Err(ParamsError::OutOfScope(m.m()));
    }
    let k = m.k() as i64;
    let (d, s1p, s2p, t2p, t1) = match k % 4 {
        0 => ((7 * k + 8) / 4, k / 4, (3 * k + 4) / 4, (k - 2) / 2, (3 * k + 2) / 2),
        1 => ((5 * k + 7) / 4, (3 * k + 1) / 4, (k + 3) / 4, (3 * k - 1) / 2, (k + 1) / 2),
        2 => ((3 * k + 6) / 4, (5 * k + 2) / 4, (7 * k + 6) / 4, (k - 2) / 2, (3 * k + 2) / 2),
        _ => ((k + 5) / 4, (7 * k + 3) / 4, (5 * k + 5) / 4, (3 * k - 1) / 2, (k + 1) / 2),
    };
    let d = m.reduce(d);
    let s1p = m.reduce(s1p);
    let s2p = m.reduce(s2p);
    let t2p = m.reduce(t2p);
    let t1 = m.reduce(t1);
    let t1p = m.reduce(k); // t_1' = s_2 = k
    let s2 = t1p;
    let s1 = m.reduce(2 * k - 1);
    let t2 = t2p;
    // r_i is the unique solution of s_i' + r_i d = t_i'; found by stepping
    // since gcd(d, m) = 1 in this branch.
    let solve_r = |sp: u32, tp: u32| -> Result<u32, ParamsError> {
        let mut v = sp;
        for r in 0..m.m() {
            if v == tp {
                return Ok(r);
            }
            v = m.reduce(v as i64 + d as i64);
        }
        Err(ParamsError::Invariant { m: m.m(), detail: format!("no r with {sp} + r*{d} = {tp}") })
    };
    let r1 = solve_r(s1p, t1p)?;
    let r2 = solve_r(s2p, t2p)?;
    let d1y = m.reduce(s1 as i64 - t1 as i64);
    let d2y = m.reduce(s2 as i64 - t2 as i64);
    Ok(ParamsA { m, d, s1p, s2p, t1p, t2p, s1, s2, t1, t2, r1, r2, d1y, d2y })
}

/// Invariant violations of a raw A-table evaluation. Empty means valid.
pub fn params_a_violations(p: &ParamsA) -> Vec<String> {
    let m = p.m;
    let k1 = m.k() + 1;
    let mut out = Vec::new();
    if gcd(p.d, m.m()) != 1 {
        out.push(format!("gcd(d={}, m={}) != 1", p.d, m.m()));
    }
    if m.reduce(p.r1 as i64 + p.r2 as i64) != m.reduce(-2) || p.r1 + p.r2 != m.m() - 2 {
        out.push(format!("r1 + r2 = {} + {} != m - 2", p.r1, p.r2));
    }
    if m.reduce(p.s1p as i64 - p.t2p as i64) != p.d {
        out.push(format!("s1' - t2' = {} != d = {}", m.reduce(p.s1p as i64 - p.t2p as i64), p.d));
    }
    if m.reduce(p.s2p as i64 - p.t1p as i64) != p.d {
        out.push(format!("s2' - t1' = {} != d = {}", m.reduce(p.s2p as i64 - p.t1p as i64), p.d));
    }
    for (name, v) in [("d", p.d), ("d1y", p.d1y), ("d2y", p.d2y)] {
        if v == k1 {
            out.push(format!("{name} = {v} collides with k+1"));
        }
    }
    out
}

/// Branch-A parameters with all invariants enforced; rejects `m = 11`,
/// where a linking difference collides with `k+1`.
pub fn params_nonzero(m: Modulus) -> Result<ParamsA, ParamsError> {
    if m.m() == 11 {
        return Err(ParamsError::OutOfScope(11));
    }
    let p = params_a_raw(m)?;
    let violations = params_a_violations(&p);
    if !violations.is_empty() {
        return Err(ParamsError::Invariant { m: m.m(), detail: violations.join("; ") });
    }
    Ok(p)
}

/// Parameters of the `m ≡ 0 (mod 3)` assembler.
///
/// `b_i^X`, `b_i^Y` are the linking arcs spliced into `R_m`; the `c_i` are
/// the difference-`d^X` arcs that the arithmetic paths of `R_{m+1}` leave
/// unused, which the X-side witness must absorb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamsB {
    pub m: Modulus,
    pub s1: u32,
    pub s2: u32,
    pub s3: u32,
    pub t1: u32,
    pub t2: u32,
    pub t3: u32,
    /// d_1^X = 1 - t_1, shared by b_1^X and b_2^X.
    pub d1x: u32,
    /// d_2^X = -2 - t_1, the difference of b_3^X.
    pub d2x: u32,
    /// d^X = -t_1, the arithmetic-path difference; gcd(m, t_1) = 3.
    pub dx: u32,
    /// d_1^Y = s_1 - 1, shared by b_1^Y and b_2^Y.
    pub d1y: u32,
    /// d_2^Y = s_1 + 5, the difference of b_3^Y.
    pub d2y: u32,
}

impl ParamsB {
    pub fn b_x(&self) -> [(u32, u32); 3] {
        [(self.t1, 1), (self.t2, 2), (self.t3, 0)]
    }

    pub fn b_y(&self) -> [(u32, u32); 3] {
        let m = self.m;
        [(1, self.s1), (3, self.s2), (m.reduce(-1), self.s3)]
    }

    pub fn c(&self) -> [(u32, u32); 3] {
        [(self.t1, 0), (self.t2, 1), (self.t3, 2)]
    }
}

/// Raw B-table evaluation for odd `m ≡ 0 (mod 3)`, `m ≥ 9`. The general
/// assembler needs `m ≥ 15`; `m = 9` reuses these values in its special
/// construction.
pub fn params_b_raw(m: Modulus) -> Result<ParamsB, ParamsError> {
    if m.m() % 3 != 0 || m.m() < 9 {
        return Err(ParamsError::OutOfScope(m.m()));
    }
    let k = m.k() as i64;
    let (s1, t1) = match k % 4 {
        0 => (k / 2, 3 * k / 4),
        1 => ((3 * k + 1) / 2, (k - 1) / 4),
        2 => (k / 2, (7 * k + 2) / 4),
        _ => ((3 * k + 1) / 2, (5 * k + 1) / 4),
    };
    let s1 = m.reduce(s1);
    let t1 = m.reduce(t1);
    Ok(ParamsB {
        m,
        s1,
        s2: m.reduce(s1 as i64 + 2),
        s3: m.reduce(s1 as i64 + 4),
        t1,
        t2: m.reduce(t1 as i64 + 1),
        t3: m.reduce(t1 as i64 + 2),
        d1x: m.reduce(1 - t1 as i64),
        d2x: m.reduce(-2 - t1 as i64),
        dx: m.reduce(-(t1 as i64)),
        d1y: m.reduce(s1 as i64 - 1),
        d2y: m.reduce(s1 as i64 + 5),
    })
}

/// Invariant violations of a raw B-table evaluation. Empty means valid.
pub fn params_b_violations(p: &ParamsB) -> Vec<String> {
    let m = p.m;
    let k1 = m.k() + 1;
    let mut out = Vec::new();
    if gcd(m.m(), p.t1) != 3 {
        out.push(format!("gcd(m={}, t1={}) = {} != 3", m.m(), p.t1, gcd(m.m(), p.t1)));
    }
    for (name, v) in [("d1x", p.d1x), ("d2x", p.d2x), ("d1y", p.d1y), ("d2y", p.d2y)] {
        if v == k1 {
            out.push(format!("{name} = {v} collides with k+1"));
        }
    }
    out
}

/// Branch-B parameters with all invariants enforced, for `m ≥ 15`.
pub fn params_zero(m: Modulus) -> Result<ParamsB, ParamsError> {
    if m.m() < 15 {
        return Err(ParamsError::OutOfScope(m.m()));
    }
    let p = params_b_raw(m)?;
    let violations = params_b_violations(&p);
    if !violations.is_empty() {
        return Err(ParamsError::Invariant { m: m.m(), detail: violations.join("; ") });
    }
    Ok(p)
}
