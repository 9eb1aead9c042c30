//! Heath-Brown's identity with `K = 3` and cutoff `z = ceil((2N)^{1/3})`.
//!
//! For `n <= z^3`:
//!
//! ```text
//! Λ(n) = Σ_{j=1}^{3} (-1)^{j-1} C(3,j) Σ_{n = r_1⋯r_{2j}, r_{j+1..2j} <= z} log(r_1) μ(r_{j+1})⋯μ(r_{2j})
//! μ(n) = Σ_{j=2}^{3} (-1)^{j-1} C(3,j) Σ_{n = r_2⋯r_{2j}, r_{j+1..2j} <= z} μ(r_{j+1})⋯μ(r_{2j})     (n > z)
//! ```
//!
//! The μ form comes from expanding `(1 - ζM)^3 / ζ` with `M` the Dirichlet
//! polynomial of μ truncated at `z`; the `j = 1` term is `μ(n) 1_{n<=z}` and
//! is dropped. Both identities are checked on every `n` of the window and a
//! failing window is refused.
//!
//! Components are indexed by `j` and the dyadic exponents `e_i = ceil(log2 r_i)`
//! of the variables, so `r_i ∈ (2^{e_i - 1}, 2^{e_i}]`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_complex::Complex64;

use super::{Accumulator, ComplexAccumulator, Summation};
use crate::arith::iroot;
use crate::error::{Error, Result};
use crate::phase::PolynomialPhase;
use crate::sieve::ArithmeticTable;

const K: usize = 3;
const BINOM: [f64; 4] = [1.0, 3.0, 3.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Lambda,
    Mobius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    /// Some smooth variable is longer than `z`.
    TypeI,
    TypeII,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub j: u8,
    /// Dyadic exponents: smooth variables first, then the μ variables.
    pub exponents: Vec<u8>,
    pub kind: ComponentKind,
    /// `Σ_n (Σ_{tuples of n} weight) e(g(n))`, without the `(-1)^{j-1} C(3,j)` factor.
    pub value: Complex64,
    /// `Σ_n Σ_{tuples of n} weight`.
    pub weight_sum: f64,
    pub tuples: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub target: Target,
    pub z: u64,
    pub components: Vec<Component>,
    /// `Σ_j (-1)^{j-1} C(3,j) Σ_{components of j} value`.
    pub total: Complex64,
    /// Exact integer total of the μ target at zero phase, i.e. `Σ μ(n)`.
    pub integer_total: Option<i64>,
    pub tuples: u64,
    /// Integers whose per-n identity was verified.
    pub checked: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HbOptions {
    /// Maximum number of enumerated tuples.
    pub budget: u64,
    pub summation: Summation,
}

impl Default for HbOptions {
    fn default() -> Self {
        HbOptions {
            budget: 200_000_000,
            summation: Summation::Compensated,
        }
    }
}

/// `ceil((2N)^{1/3})`, at least 1.
pub fn cutoff(n: u64) -> u64 {
    let two_n = 2 * n as u128;
    let r = iroot(two_n, 3);
    let z = if r * r * r < two_n { r + 1 } else { r };
    z.max(1) as u64
}

fn dyadic_exponent(r: u64) -> u8 {
    if r <= 1 {
        0
    } else {
        (64 - (r - 1).leading_zeros()) as u8
    }
}

type Key = (u8, [u8; 2 * K]);

/// Divisors of `n` with their Möbius values.
fn divisors(fact: &[(u64, u32)]) -> Vec<(u64, i8)> {
    let mut out = alloc::vec![(1u64, 1i8)];
    for &(p, e) in fact {
        let len = out.len();
        let mut pk = 1u64;
        for k in 1..=e {
            pk *= p;
            for i in 0..len {
                let (d, m) = out[i];
                let mu = if k == 1 { -m } else { 0 };
                out.push((d * pk, mu));
            }
        }
    }
    out.sort_unstable();
    out
}

struct Enumerator<'a> {
    divs: &'a [(u64, i8)],
    z: u64,
    target: Target,
    j: usize,
    smooth: usize,
    vars: [u64; 2 * K],
    local: &'a mut HashMap<Key, (f64, u64)>,
    count: u64,
}

impl Enumerator<'_> {
    /// Fills μ slots `smooth..smooth+j`, then the smooth slots.
    fn mu_slots(&mut self, slot: usize, rest: u64, sign: i8) {
        if slot == self.smooth + self.j {
            self.smooth_slots(0, rest, sign);
            return;
        }
        for &(d, mu) in self.divs {
            if d > self.z || d > rest {
                break;
            }
            if mu != 0 && rest.is_multiple_of(d) {
                self.vars[slot] = d;
                self.mu_slots(slot + 1, rest / d, sign * mu);
            }
        }
    }

    fn smooth_slots(&mut self, slot: usize, rest: u64, sign: i8) {
        if slot + 1 == self.smooth {
            self.vars[slot] = rest;
            self.record(sign);
            return;
        }
        for &(d, _) in self.divs {
            if d > rest {
                break;
            }
            if rest.is_multiple_of(d) {
                self.vars[slot] = d;
                self.smooth_slots(slot + 1, rest / d, sign);
            }
        }
    }

    fn record(&mut self, sign: i8) {
        let weight = match self.target {
            Target::Lambda => libm::log(self.vars[0] as f64) * sign as f64,
            Target::Mobius => sign as f64,
        };
        let mut e = [0u8; 2 * K];
        let used = self.smooth + self.j;
        for (slot, &v) in self.vars[..used].iter().enumerate() {
            e[slot] = dyadic_exponent(v);
        }
        let key = (self.j as u8, e);
        self.count += 1;
        let entry = self.local.entry(key).or_insert((0.0, 0));
        entry.0 += weight;
        entry.1 += 1;
    }
}

fn j_range(target: Target) -> core::ops::RangeInclusive<usize> {
    match target {
        Target::Lambda => 1..=K,
        Target::Mobius => 2..=K,
    }
}

fn smooth_count(target: Target, j: usize) -> usize {
    match target {
        Target::Lambda => j,
        Target::Mobius => j - 1,
    }
}

/// Per-integer enumeration; returns the number of tuples visited.
fn enumerate_n(
    n: u64,
    fact: &[(u64, u32)],
    z: u64,
    target: Target,
    local: &mut HashMap<Key, (f64, u64)>,
) -> u64 {
    let divs = divisors(fact);
    debug_assert_eq!(divs.last().map(|d| d.0), Some(n));
    let mut total = 0;
    for j in j_range(target) {
        let mut en = Enumerator {
            divs: &divs,
            z,
            target,
            j,
            smooth: smooth_count(target, j),
            vars: [0; 2 * K],
            local,
            count: 0,
        };
        en.mu_slots(en.smooth, n, 1);
        total += en.count;
    }
    total
}

struct ComponentAcc {
    value: ComplexAccumulator,
    weight: Accumulator,
    tuples: u64,
}

pub fn heath_brown_decompose(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    target: Target,
) -> Result<Decomposition> {
    heath_brown_decompose_with(table, phase, target, HbOptions::default())
}

pub fn heath_brown_decompose_with(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    target: Target,
    options: HbOptions,
) -> Result<Decomposition> {
    let window = table.window();
    let z = cutoff(window.start());
    let mut comps: BTreeMap<Key, ComponentAcc> = BTreeMap::new();
    let mut local = HashMap::new();
    let mut tuples = 0u64;
    let mut integer_total = 0i64;
    let mut checked = 0u64;
    let stream = phase.stream(window)?;
    for (i, (n, g)) in window.iter().zip(stream).enumerate() {
        let fact: Vec<(u64, u32)> = table.factorization(i).collect();
        local.clear();
        tuples += enumerate_n(n, &fact, z, target, &mut local);

        let mut per_n = 0.0;
        for (key, (w, _)) in &local {
            let j = key.0 as usize;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            per_n += sign * BINOM[j] * w;
        }
        let expected = match target {
            Target::Lambda => table.lambda()[i],
            Target::Mobius => table.mu()[i] as f64,
        };
        let ok = match target {
            Target::Lambda => libm::fabs(per_n - expected) <= 1e-9 * expected.max(1.0),
            Target::Mobius => per_n == expected,
        };
        if !ok {
            return Err(Error::Identity {
                n,
                got: per_n,
                expected,
            });
        }
        checked += 1;
        if target == Target::Mobius {
            integer_total += per_n as i64;
        }

        let phase_n = g.e();
        for (key, (w, count)) in &local {
            let acc = comps.entry(*key).or_insert_with(|| ComponentAcc {
                value: ComplexAccumulator::new(options.summation),
                weight: Accumulator::new(options.summation),
                tuples: 0,
            });
            if *w != 0.0 {
                acc.value.add(phase_n * *w);
                acc.weight.add(*w);
            }
            acc.tuples += count;
        }

        if tuples > options.budget {
            let partial = assemble(target, z, &comps, None, tuples, checked, options.summation);
            return Err(Error::Partial {
                completed: checked,
                total: window.len(),
                partial: Box::new(partial),
            });
        }
    }
    let integer = (target == Target::Mobius).then_some(integer_total);
    Ok(assemble(target, z, &comps, integer, tuples, checked, options.summation))
}

fn assemble(
    target: Target,
    z: u64,
    comps: &BTreeMap<Key, ComponentAcc>,
    integer_total: Option<i64>,
    tuples: u64,
    checked: u64,
    mode: Summation,
) -> Decomposition {
    let mut total = ComplexAccumulator::new(mode);
    let components: Vec<Component> = comps
        .iter()
        .map(|(&(j, e), acc)| {
            let smooth = smooth_count(target, j as usize);
            let exponents = e[..smooth + j as usize].to_vec();
            let long_smooth = exponents[..smooth]
                .iter()
                .any(|&x| x >= 1 && (1u64 << (x - 1)) >= z);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let value = acc.value.value();
            total.add(value * (sign * BINOM[j as usize]));
            Component {
                j,
                exponents,
                kind: if long_smooth {
                    ComponentKind::TypeI
                } else {
                    ComponentKind::TypeII
                },
                value,
                weight_sum: acc.weight.value(),
                tuples: acc.tuples,
            }
        })
        .collect();
    Decomposition {
        target,
        z,
        components,
        total: total.value(),
        integer_total,
        tuples,
        checked,
    }
}
