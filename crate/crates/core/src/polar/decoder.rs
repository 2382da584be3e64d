//! Successive-cancellation decoding: plain SC, the stack decoder (SCS) and
//! the biased sequential decoder. The two tree-search decoders share one
//! priority queue and differ only in the check-node rule and path score.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::code::PolarCode;
use super::encode::bit_reverse_permute;
use super::ga::BiasTable;
use crate::detect::FlopCount;
use crate::{Error, Result};

/// Check-node (`f`) update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckRule {
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated as `max*(0, a+b) − max*(a, b)`.
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
}

impl CheckRule {
    fn apply(self, a: f64, b: f64, flops: &mut FlopCount) -> f64 {
        match self {
            CheckRule::Exact => {
                // Each ln(1 + e^{-x}) correction is counted as one multiplication.
                flops.add(4);
                flops.mul(2);
                flops.cmp(2);
                // max(0, a+b) − max(a, b) = sgn(a) sgn(b) min(|a|, |b|).
                let s = a + b;
                let d = a - b;
                let base = if (a >= 0.0) == (b >= 0.0) { a.abs().min(b.abs()) } else { -a.abs().min(b.abs()) };
                base + (-s.abs()).exp().ln_1p() - (-d.abs()).exp().ln_1p()
            }
            CheckRule::MinSum => {
                flops.cmp(1);
                let m = a.abs().min(b.abs());
                if (a < 0.0) != (b < 0.0) {
                    -m
                } else {
                    m
                }
            }
        }
    }
}

/// Why a tree search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    CrcPass,
    CrcFail,
    StackExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStats {
    /// Path extensions (queue pops that grow a path; `η` for SC).
    pub iterations: u64,
    pub flops: FlopCount,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    /// Decoded input word `û` (all zeros when the stack was exhausted).
    pub u: Vec<u8>,
    pub stats: DecodeStats,
}

/// SC tree state for one path: LLRs and left-sibling partial sums at every
/// depth below the root, stored level after level in flat buffers.
#[derive(Debug, Clone)]
pub(crate) struct ScState {
    n: usize,
    eta: usize,
    alpha: Vec<f64>,
    beta_left: Vec<u8>,
    scratch: Vec<u8>,
    pub(crate) u: Vec<u8>,
}

impl ScState {
    pub(crate) fn new(eta: usize) -> Self {
        Self {
            n: eta.trailing_zeros() as usize,
            eta,
            alpha: vec![0.0; eta - 1],
            beta_left: vec![0; eta - 1],
            scratch: vec![0; eta],
            u: Vec::with_capacity(eta),
        }
    }

    /// Start of depth `d ≥ 1` in the flat buffers; depth `d` holds `η >> d` values.
    fn offset(&self, d: usize) -> usize {
        self.eta - 2 * (self.eta >> d)
    }

    pub(crate) fn depth(&self) -> usize {
        self.u.len()
    }

    /// LLR of the next input bit `u_i`, `i = depth()`, given the prefix.
    pub(crate) fn leaf_llr(&mut self, channel: &[f64], rule: CheckRule, flops: &mut FlopCount) -> f64 {
        let n = self.n;
        let i = self.u.len();
        let start = if i == 0 {
            1
        } else {
            let h = (usize::BITS - 1 - (i ^ (i - 1)).leading_zeros()) as usize;
            n - h
        };
        for d in start..=n {
            let sz = self.eta >> d;
            let cur = self.offset(d);
            let (parent_buf, child_buf) = if d == 1 {
                (channel, &mut self.alpha[..sz])
            } else {
                let par = self.offset(d - 1);
                let (lo, hi) = self.alpha.split_at_mut(cur);
                (&lo[par..par + 2 * sz], &mut hi[..sz])
            };
            if d == start && i != 0 {
                let beta = &self.beta_left[cur..cur + sz];
                flops.add(sz);
                for j in 0..sz {
                    let a = parent_buf[j];
                    let b = parent_buf[j + sz];
                    child_buf[j] = if beta[j] == 0 { b + a } else { b - a };
                }
            } else {
                for j in 0..sz {
                    child_buf[j] = rule.apply(parent_buf[j], parent_buf[j + sz], flops);
                }
            }
        }
        if n == 0 {
            channel[0]
        } else {
            self.alpha[self.eta - 2]
        }
    }

    /// Appends `bit` as `u_i` and propagates partial sums towards the root.
    pub(crate) fn commit(&mut self, bit: u8) {
        let i = self.u.len();
        self.u.push(bit);
        let mut size = 1;
        self.scratch[0] = bit;
        let mut d = self.n;
        while d > 0 {
            let off = self.offset(d);
            if (i >> (self.n - d)) & 1 == 0 {
                self.beta_left[off..off + size].copy_from_slice(&self.scratch[..size]);
                return;
            }
            for j in 0..size {
                let cur = self.scratch[j];
                self.scratch[j + size] = cur;
                self.scratch[j] = cur ^ self.beta_left[off + j];
            }
            size *= 2;
            d -= 1;
        }
    }
}

/// Increment of the log path probability `ln P(u_i | y, u_1^{i−1})`.
fn scs_increment(llr: f64, bit: u8, flops: &mut FlopCount) -> f64 {
    flops.add(2);
    flops.mul(1);
    let x = if bit == 0 { llr } else { -llr };
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Hard decision on an LLR: 1 iff negative.
fn hard(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// Increment of `log R`: `−|λ|` when the bit disagrees with the hard decision.
fn sequential_increment(llr: f64, bit: u8, flops: &mut FlopCount) -> f64 {
    flops.cmp(1);
    flops.add(1);
    if bit != hard(llr) {
        -llr.abs()
    } else {
        0.0
    }
}

fn check_llrs(llr: &[f64], code: &PolarCode) -> Result<()> {
    if llr.len() != code.len() {
        return Err(Error::Shape(format!("{} LLRs for a code of length {}", llr.len(), code.len())));
    }
    Ok(())
}

fn crc_outcome(code: &PolarCode, u: &[u8]) -> Outcome {
    if code.crc_passes(u) {
        Outcome::CrcPass
    } else {
        Outcome::CrcFail
    }
}

/// Plain SC decoding with the exact check-node rule.
pub fn decode_sc(llr: &[f64], code: &PolarCode) -> Result<DecodeOutput> {
    decode_sc_with(llr, code, CheckRule::Exact)
}

pub fn decode_sc_with(llr: &[f64], code: &PolarCode, rule: CheckRule) -> Result<DecodeOutput> {
    check_llrs(llr, code)?;
    let mut flops = FlopCount::default();
    let mut state = ScState::new(code.len());
    let root = bit_reverse_permute(llr);
    let frozen = code.frozen_mask();
    for &is_frozen in frozen {
        let l = state.leaf_llr(&root, rule, &mut flops);
        flops.cmp(1);
        let bit = if is_frozen { 0 } else { hard(l) };
        state.commit(bit);
    }
    let u = state.u;
    let outcome = crc_outcome(code, &u);
    Ok(DecodeOutput {
        u,
        stats: DecodeStats {
            iterations: code.len() as u64,
            flops,
            outcome,
        },
    })
}

/// Stack (SCS) decoding with the exact path probability as score.
pub fn decode_scs(llr: &[f64], code: &PolarCode, list: usize) -> Result<DecodeOutput> {
    check_llrs(llr, code)?;
    stack_decode(llr, code, list, Score::Probability)
}

/// Sequential decoding with score `log R + log Ω̂(i)`, where `log R` follows
/// the min-sum recursions so only additions and comparisons are used.
pub fn decode_sequential(llr: &[f64], code: &PolarCode, bias: &BiasTable, list: usize) -> Result<DecodeOutput> {
    check_llrs(llr, code)?;
    if bias.log_omega.len() != code.len() + 1 {
        return Err(Error::Shape(format!("bias table of length {} for a code of length {}", bias.log_omega.len() - 1, code.len())));
    }
    stack_decode(llr, code, list, Score::Biased(&bias.log_omega))
}

#[derive(Clone, Copy)]
enum Score<'a> {
    Probability,
    Biased(&'a [f64]),
}

impl Score<'_> {
    fn rule(self) -> CheckRule {
        match self {
            Score::Probability => CheckRule::Exact,
            Score::Biased(_) => CheckRule::MinSum,
        }
    }

    fn increment(self, llr: f64, bit: u8, flops: &mut FlopCount) -> f64 {
        match self {
            Score::Probability => scs_increment(llr, bit, flops),
            Score::Biased(_) => sequential_increment(llr, bit, flops),
        }
    }

    fn score(self, metric: f64, depth: usize, flops: &mut FlopCount) -> f64 {
        match self {
            Score::Probability => metric,
            Score::Biased(log_omega) => {
                flops.add(1);
                metric + log_omega[depth]
            }
        }
    }
}

struct Path {
    state: ScState,
    metric: f64,
}

/// Queue key: best score first, then the longer path, then the smaller prefix.
#[derive(Debug, Clone)]
struct Key {
    score: f64,
    depth: usize,
    prefix: Vec<u64>,
    slot: usize,
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        o.score
            .total_cmp(&self.score)
            .then(o.depth.cmp(&self.depth))
            .then_with(|| self.prefix.cmp(&o.prefix))
            .then(self.slot.cmp(&o.slot))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Key {}

/// Packs a bit prefix MSB-first so that word order is lexicographic order.
fn pack(bits: &[u8]) -> Vec<u64> {
    bits.chunks(64)
        .map(|c| c.iter().enumerate().fold(0u64, |w, (k, &b)| w | ((b as u64) << (63 - k))))
        .collect()
}

struct Stack {
    queue: BTreeSet<Key>,
    arena: Vec<Option<Path>>,
    free: Vec<usize>,
    capacity: usize,
}

impl Stack {
    fn push(&mut self, path: Path, score: f64) {
        let key_prefix = pack(&path.state.u);
        let depth = path.state.depth();
        let slot = match self.free.pop() {
            Some(s) => {
                self.arena[s] = Some(path);
                s
            }
            None => {
                self.arena.push(Some(path));
                self.arena.len() - 1
            }
        };
        self.queue.insert(Key {
            score,
            depth,
            prefix: key_prefix,
            slot,
        });
        if self.queue.len() > self.capacity {
            let worst = self.queue.pop_last().expect("queue is non-empty");
            self.release(worst.slot);
        }
    }

    fn release(&mut self, slot: usize) -> Path {
        self.free.push(slot);
        self.arena[slot].take().expect("slot in use")
    }

    fn eliminate_shorter(&mut self, depth: usize) {
        let dropped: Vec<Key> = self.queue.iter().filter(|k| k.depth < depth).cloned().collect();
        for k in dropped {
            self.queue.remove(&k);
            self.release(k.slot);
        }
    }
}

fn stack_decode(llr: &[f64], code: &PolarCode, list: usize, score: Score) -> Result<DecodeOutput> {
    if list == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    let eta = code.len();
    let root = bit_reverse_permute(llr);
    let frozen = code.frozen_mask();
    let rule = score.rule();
    let mut flops = FlopCount::default();
    let mut stack = Stack {
        queue: BTreeSet::new(),
        arena: Vec::new(),
        free: Vec::new(),
        capacity: list.saturating_mul(eta),
    };
    let mut constructed = vec![0usize; eta + 1];
    let mut iterations = 0u64;
    let root_score = score.score(0.0, 0, &mut flops);
    stack.push(
        Path {
            state: ScState::new(eta),
            metric: 0.0,
        },
        root_score,
    );
    while let Some(top) = stack.queue.pop_first() {
        let Path { mut state, metric } = stack.release(top.slot);
        let i = state.depth();
        if i == eta {
            let outcome = crc_outcome(code, &state.u);
            return Ok(DecodeOutput {
                u: state.u,
                stats: DecodeStats {
                    iterations,
                    flops,
                    outcome,
                },
            });
        }
        iterations += 1;
        let l = state.leaf_llr(&root, rule, &mut flops);
        if frozen[i] {
            let m = metric + score.increment(l, 0, &mut flops);
            state.commit(0);
            let s = score.score(m, i + 1, &mut flops);
            stack.push(Path { state, metric: m }, s);
            constructed[i + 1] += 1;
        } else {
            let mut one = state.clone();
            let m0 = metric + score.increment(l, 0, &mut flops);
            let m1 = metric + score.increment(l, 1, &mut flops);
            state.commit(0);
            one.commit(1);
            let s0 = score.score(m0, i + 1, &mut flops);
            let s1 = score.score(m1, i + 1, &mut flops);
            stack.push(Path { state, metric: m0 }, s0);
            stack.push(Path { state: one, metric: m1 }, s1);
            constructed[i + 1] += 2;
        }
        if constructed[i + 1] >= list {
            stack.eliminate_shorter(i + 1);
        }
    }
    Ok(DecodeOutput {
        u: vec![0; eta],
        stats: DecodeStats {
            iterations,
            flops,
            outcome: Outcome::StackExhausted,
        },
    })
}
