//! Parallel intersection with output identical to the sequential walk.
//!
//! The joint descent splits naturally: disjoint subtrees of the traversal
//! never interact, so they can run on different threads. A short
//! sequential planning phase expands the tuple frontier breadth-first,
//! level by level, until it holds at least one live tuple per thread
//! (stopping at twice `lg t` levels below the root, or at the trie
//! bottom). Tuples that resolve during planning are recorded in place:
//! pruned, a full-interval run, or a single-trie verbatim copy. The rest
//! become seeds.
//!
//! Seeds and copies run as independent jobs on a small scoped thread
//! pool, each driving the ordinary sequential walker from its tuple.
//! Assembly then walks the plan in depth-first order, stitching the
//! per-level outputs of the jobs between the codes of the plan's own
//! frames. Because planning, the per-seed walks, and the stitch order
//! are all deterministic, the result (elements, trie bytes, and even the
//! work counters) is the same no matter how many threads ran or how the
//! scheduler interleaved them; the tests hold the parallel path to
//! byte-for-byte equality with the sequential one.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::bintrie::{BinaryTrie, BuildOptions};
use crate::intersect::{
    ac_intersect, ac_intersect_runs, codes_to_levels, common_universe_plain, common_universe_runs,
    Intersection, OutputMode, PlainWalk, RunWalk, TraversalStats,
};
use crate::runtrie::RunTrie;
use crate::Result;

/// One node of the planning tree.
enum Frame {
    /// The AND of the codes was 00: nothing below.
    Pruned,
    /// Run tries only: every set covers the whole interval.
    Run00 { pfx: u64 },
    /// Subtree handed to a job (a seed walk or a verbatim copy).
    Job { job: usize },
    /// Expanded during planning; children live one level deeper.
    Steered {
        left: Option<usize>,
        right: Option<usize>,
    },
}

enum PlainJob {
    Seed { level: u32, pfx: u64, pairs: Vec<u64> },
}

enum RunJob {
    Seed {
        level: u32,
        pfx: u64,
        pairs: Vec<u64>,
        excl: u64,
    },
    Copy {
        level: u32,
        pfx: u64,
        trie: usize,
        pair: u64,
    },
}

struct JobOut {
    nonempty: bool,
    elems: Vec<u64>,
    codes: Vec<Vec<u8>>,
    stats: TraversalStats,
}

fn resolve_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    }
}

fn add_stats(total: &mut TraversalStats, part: &TraversalStats) {
    total.nodes_visited += part.nodes_visited;
    total.expanded_nodes += part.expanded_nodes;
    total.rank1_calls += part.rank1_calls;
    total.copied_nodes += part.copied_nodes;
    total.emitted += part.emitted;
}

/// Runs `f` over the jobs on up to `threads` scoped threads, returning
/// results in job order regardless of scheduling.
fn run_jobs<J: Sync, F>(jobs: &[J], threads: usize, f: F) -> Vec<JobOut>
where
    F: Fn(&J) -> JobOut + Sync,
{
    let n = jobs.len();
    let workers = threads.min(n);
    if workers <= 1 {
        return jobs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut out: Vec<Option<JobOut>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        local.push((i, f(&jobs[i])));
                    }
                    local
                })
            })
            .collect();
        for handle in handles {
            for (i, r) in handle.join().expect("intersection worker panicked") {
                out[i] = Some(r);
            }
        }
    });
    out.into_iter().map(|o| o.unwrap()).collect()
}

/// Stitches plan frames and job outputs back into one result, in the
/// exact depth-first order the sequential walk would have produced.
fn assemble(
    frames: &[Vec<Frame>],
    outs: &[JobOut],
    mode: OutputMode,
    ell: u32,
) -> (bool, Vec<u64>, Vec<Vec<u8>>) {
    let mut nonempty: Vec<Vec<bool>> = frames.iter().map(|fl| vec![false; fl.len()]).collect();
    for l in (0..frames.len()).rev() {
        for i in 0..frames[l].len() {
            nonempty[l][i] = match &frames[l][i] {
                Frame::Pruned => false,
                Frame::Run00 { .. } => true,
                Frame::Job { job } => outs[*job].nonempty,
                Frame::Steered { left, right } => {
                    left.is_some_and(|c| nonempty[l + 1][c])
                        || right.is_some_and(|c| nonempty[l + 1][c])
                }
            };
        }
    }
    let mut elems = Vec::new();
    let mut codes = vec![Vec::new(); ell as usize];
    if nonempty[0][0] {
        emit(
            frames, outs, &nonempty, mode, ell, 0, 0, &mut elems, &mut codes,
        );
    }
    (nonempty[0][0], elems, codes)
}

#[allow(clippy::too_many_arguments)]
fn emit(
    frames: &[Vec<Frame>],
    outs: &[JobOut],
    nonempty: &[Vec<bool>],
    mode: OutputMode,
    ell: u32,
    l: usize,
    i: usize,
    elems: &mut Vec<u64>,
    codes: &mut [Vec<u8>],
) {
    match &frames[l][i] {
        Frame::Pruned => {}
        Frame::Run00 { pfx } => {
            let shift = ell - l as u32;
            match mode {
                OutputMode::Elements => {
                    let base = pfx << shift;
                    elems.extend(base..base + (1 << shift));
                }
                OutputMode::Trie => codes[l].push(0b00),
            }
        }
        Frame::Job { job } => {
            let out = &outs[*job];
            match mode {
                OutputMode::Elements => elems.extend_from_slice(&out.elems),
                OutputMode::Trie => {
                    for (dst, src) in codes.iter_mut().zip(&out.codes) {
                        dst.extend_from_slice(src);
                    }
                }
            }
        }
        Frame::Steered { left, right } => {
            if mode == OutputMode::Trie {
                let lb = left.is_some_and(|c| nonempty[l + 1][c]);
                let rb = right.is_some_and(|c| nonempty[l + 1][c]);
                codes[l].push((lb as u8) << 1 | rb as u8);
            }
            if let Some(c) = *left {
                if nonempty[l + 1][c] {
                    emit(frames, outs, nonempty, mode, ell, l + 1, c, elems, codes);
                }
            }
            if let Some(c) = *right {
                if nonempty[l + 1][c] {
                    emit(frames, outs, nonempty, mode, ell, l + 1, c, elems, codes);
                }
            }
        }
    }
}

/// How deep planning may expand: enough levels that up to `t * t` tuples
/// can exist, never past the trie bottom.
fn max_plan_level(t: usize, ell: u32) -> u32 {
    (1 + 2 * t.ilog2()).min(ell)
}

/// Parallel intersection of plain binary tries. `threads == 0` picks the
/// machine's available parallelism; `threads == 1` is the sequential
/// walk. The result and the work counters match [`ac_intersect`] exactly.
pub fn par_intersect(
    tries: &[&BinaryTrie],
    mode: OutputMode,
    threads: usize,
) -> Result<(Intersection<BinaryTrie>, TraversalStats)> {
    let u = common_universe_plain(tries)?;
    let t = resolve_threads(threads);
    if t <= 1 {
        return ac_intersect(tries, mode);
    }
    let k = tries.len();
    let ell = tries[0].ell();
    let mut stats = TraversalStats::default();
    let mut frames: Vec<Vec<Frame>> = vec![vec![Frame::Pruned]];
    let mut jobs: Vec<PlainJob> = Vec::new();
    let mut frontier: Vec<(usize, u64, Vec<u64>)> = vec![(0, 0, vec![0u64; k])];
    let mut level = 1u32;
    let max_level = max_plan_level(t, ell);
    while level < max_level && !frontier.is_empty() && frontier.len() < t {
        let li = (level - 1) as usize;
        frames.push(Vec::new());
        let mut next = Vec::new();
        for (fi, pfx, pairs) in std::mem::take(&mut frontier) {
            stats.nodes_visited += 1;
            let mut s = 0b11u8;
            for (i, tr) in tries.iter().enumerate() {
                s &= tr.pair_code(level, pairs[i]);
            }
            if s == 0 {
                continue;
            }
            stats.expanded_nodes += 1;
            stats.rank1_calls += k as u64;
            let mut lp = Vec::with_capacity(k);
            let mut rp = Vec::with_capacity(k);
            for (i, tr) in tries.iter().enumerate() {
                match s {
                    0b10 => lp.push(tr.child_pair(level, pairs[i], false)),
                    0b01 => rp.push(tr.child_pair(level, pairs[i], true)),
                    _ => {
                        let lc = tr.child_pair(level, pairs[i], false);
                        lp.push(lc);
                        rp.push(lc + 1);
                    }
                }
            }
            let mut left = None;
            let mut right = None;
            if s & 0b10 != 0 {
                let ci = frames[li + 1].len();
                frames[li + 1].push(Frame::Pruned);
                next.push((ci, pfx << 1, lp));
                left = Some(ci);
            }
            if s & 0b01 != 0 {
                let ci = frames[li + 1].len();
                frames[li + 1].push(Frame::Pruned);
                next.push((ci, pfx << 1 | 1, rp));
                right = Some(ci);
            }
            frames[li][fi] = Frame::Steered { left, right };
        }
        frontier = next;
        level += 1;
    }
    for (fi, pfx, pairs) in frontier {
        let job = jobs.len();
        jobs.push(PlainJob::Seed { level, pfx, pairs });
        frames[(level - 1) as usize][fi] = Frame::Job { job };
    }
    let outs = run_jobs(&jobs, t, |job| {
        let PlainJob::Seed { level, pfx, pairs } = job;
        let mut walk = PlainWalk::new(tries, mode);
        let nonempty = walk.descend(*level, *pfx, pairs);
        JobOut {
            nonempty,
            elems: walk.elems,
            codes: walk.codes,
            stats: walk.stats,
        }
    });
    for out in &outs {
        add_stats(&mut stats, &out.stats);
    }
    let (nonempty, elems, codes) = assemble(&frames, &outs, mode, ell);
    let result = match mode {
        OutputMode::Elements => Intersection::Elements(elems),
        OutputMode::Trie => {
            if nonempty {
                Intersection::Trie(BinaryTrie::from_levels(
                    codes_to_levels(codes),
                    u,
                    BuildOptions::default(),
                ))
            } else {
                Intersection::EmptyTrie
            }
        }
    };
    Ok((result, stats))
}

/// Parallel intersection of run tries; see [`par_intersect`]. Verbatim
/// copies discovered during planning become jobs of their own.
pub fn par_intersect_runs(
    tries: &[&RunTrie],
    mode: OutputMode,
    threads: usize,
) -> Result<(Intersection<RunTrie>, TraversalStats)> {
    let u = common_universe_runs(tries)?;
    let t = resolve_threads(threads);
    if t <= 1 {
        return ac_intersect_runs(tries, mode);
    }
    let k = tries.len();
    let ell = tries[0].ell();
    let mut stats = TraversalStats::default();
    let mut frames: Vec<Vec<Frame>> = vec![vec![Frame::Pruned]];
    let mut jobs: Vec<RunJob> = Vec::new();
    let mut frontier: Vec<(usize, u64, Vec<u64>, u64)> = vec![(0, 0, vec![0u64; k], 0)];
    let mut level = 1u32;
    let max_level = max_plan_level(t, ell);
    while level < max_level && !frontier.is_empty() && frontier.len() < t {
        let li = (level - 1) as usize;
        frames.push(Vec::new());
        let mut next = Vec::new();
        for (fi, pfx, pairs, excl0) in std::mem::take(&mut frontier) {
            stats.nodes_visited += 1;
            let mut excl = excl0;
            let mut s = 0b11u8;
            for (i, tr) in tries.iter().enumerate() {
                if excl >> i & 1 != 0 {
                    continue;
                }
                let c = tr.pair_code(level, pairs[i]);
                if c == 0b00 {
                    excl |= 1 << i;
                } else {
                    s &= c;
                }
            }
            let active = k - excl.count_ones() as usize;
            if active == 0 {
                stats.emitted += 1 << (ell - level + 1);
                frames[li][fi] = Frame::Run00 { pfx };
                continue;
            }
            if active == 1 {
                let i = (0..k).find(|&j| excl >> j & 1 == 0).unwrap();
                let job = jobs.len();
                jobs.push(RunJob::Copy {
                    level,
                    pfx,
                    trie: i,
                    pair: pairs[i],
                });
                frames[li][fi] = Frame::Job { job };
                continue;
            }
            if s == 0 {
                continue;
            }
            stats.expanded_nodes += 1;
            stats.rank1_calls += active as u64;
            let mut lp = Vec::with_capacity(k);
            let mut rp = Vec::with_capacity(k);
            for (i, tr) in tries.iter().enumerate() {
                if excl >> i & 1 != 0 {
                    lp.push(pairs[i]);
                    rp.push(pairs[i]);
                    continue;
                }
                match s {
                    0b10 => {
                        lp.push(tr.child_pair(level, pairs[i], false));
                        rp.push(0);
                    }
                    0b01 => {
                        lp.push(0);
                        rp.push(tr.child_pair(level, pairs[i], true));
                    }
                    _ => {
                        let lc = tr.child_pair(level, pairs[i], false);
                        lp.push(lc);
                        rp.push(lc + 1);
                    }
                }
            }
            let mut left = None;
            let mut right = None;
            if s & 0b10 != 0 {
                let ci = frames[li + 1].len();
                frames[li + 1].push(Frame::Pruned);
                next.push((ci, pfx << 1, lp, excl));
                left = Some(ci);
            }
            if s & 0b01 != 0 {
                let ci = frames[li + 1].len();
                frames[li + 1].push(Frame::Pruned);
                next.push((ci, pfx << 1 | 1, rp, excl));
                right = Some(ci);
            }
            frames[li][fi] = Frame::Steered { left, right };
        }
        frontier = next;
        level += 1;
    }
    for (fi, pfx, pairs, excl) in frontier {
        let job = jobs.len();
        jobs.push(RunJob::Seed {
            level,
            pfx,
            pairs,
            excl,
        });
        frames[(level - 1) as usize][fi] = Frame::Job { job };
    }
    let outs = run_jobs(&jobs, t, |job| {
        let mut walk = RunWalk::new(tries, mode);
        let nonempty = match job {
            RunJob::Seed {
                level,
                pfx,
                pairs,
                excl,
            } => walk.descend(*level, *pfx, pairs, *excl),
            RunJob::Copy {
                level,
                pfx,
                trie,
                pair,
            } => {
                walk.copy_subtree(tries[*trie], *level, *pair, *pfx);
                true
            }
        };
        JobOut {
            nonempty,
            elems: walk.elems,
            codes: walk.codes,
            stats: walk.stats,
        }
    });
    for out in &outs {
        add_stats(&mut stats, &out.stats);
    }
    let (nonempty, elems, codes) = assemble(&frames, &outs, mode, ell);
    let result = match mode {
        OutputMode::Elements => Intersection::Elements(elems),
        OutputMode::Trie => {
            if nonempty {
                Intersection::Trie(RunTrie::from_levels(
                    codes_to_levels(codes),
                    u,
                    BuildOptions::default(),
                ))
            } else {
                Intersection::EmptyTrie
            }
        }
    };
    Ok((result, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::SortedSet;

    fn xorshift(state: &mut u64) -> u64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        *state
    }

    fn random_elems(u: u64, approx_n: usize, seed: u64) -> Vec<u64> {
        let mut s = seed.max(1);
        let mut elems: Vec<u64> = (0..approx_n.max(1))
            .map(|_| xorshift(&mut s) % u)
            .collect();
        elems.sort_unstable();
        elems.dedup();
        elems
    }

    fn run_heavy_elems(u: u64, seed: u64) -> Vec<u64> {
        let mut s = seed.max(1);
        let mut elems = Vec::new();
        let mut x = xorshift(&mut s) % 8;
        while x < u {
            let len = 1 + xorshift(&mut s) % 22;
            for v in x..(x + len).min(u) {
                elems.push(v);
            }
            x += len + 1 + xorshift(&mut s) % 30;
        }
        if elems.is_empty() {
            elems.push(0);
        }
        elems
    }

    fn plain(elems: &[u64], u: u64) -> BinaryTrie {
        BinaryTrie::build(
            &SortedSet::new(elems.to_vec(), u).unwrap(),
            BuildOptions::default(),
        )
        .unwrap()
    }

    fn runt(elems: &[u64], u: u64) -> RunTrie {
        RunTrie::build(
            &SortedSet::new(elems.to_vec(), u).unwrap(),
            BuildOptions::default(),
        )
        .unwrap()
    }

    fn wire_plain(out: &Intersection<BinaryTrie>) -> Option<Vec<u8>> {
        match out {
            Intersection::Trie(t) => {
                let mut buf = Vec::new();
                t.write_into(&mut buf).unwrap();
                Some(buf)
            }
            Intersection::EmptyTrie => None,
            Intersection::Elements(_) => unreachable!(),
        }
    }

    fn wire_run(out: &Intersection<RunTrie>) -> Option<Vec<u8>> {
        match out {
            Intersection::Trie(t) => {
                let mut buf = Vec::new();
                t.write_into(&mut buf).unwrap();
                Some(buf)
            }
            Intersection::EmptyTrie => None,
            Intersection::Elements(_) => unreachable!(),
        }
    }

    #[test]
    fn plain_parallel_is_byte_identical_to_sequential() {
        for seed in 1..10u64 {
            let u = 1 << 12;
            let k = 2 + (seed as usize % 3);
            let tries: Vec<BinaryTrie> = (0..k)
                .map(|i| plain(&random_elems(u, 700, seed * 53 + i as u64), u))
                .collect();
            let refs: Vec<&BinaryTrie> = tries.iter().collect();
            let (seq_el, seq_stats) = ac_intersect(&refs, OutputMode::Elements).unwrap();
            let (seq_tr, _) = ac_intersect(&refs, OutputMode::Trie).unwrap();
            let seq_el = match seq_el {
                Intersection::Elements(v) => v,
                _ => unreachable!(),
            };
            for threads in [2usize, 3, 4, 8, 64] {
                let (par_el, par_stats) =
                    par_intersect(&refs, OutputMode::Elements, threads).unwrap();
                let par_el = match par_el {
                    Intersection::Elements(v) => v,
                    _ => unreachable!(),
                };
                assert_eq!(par_el, seq_el, "seed {seed} threads {threads}");
                assert_eq!(par_stats, seq_stats, "seed {seed} threads {threads}");
                let (par_tr, _) = par_intersect(&refs, OutputMode::Trie, threads).unwrap();
                assert_eq!(
                    wire_plain(&par_tr),
                    wire_plain(&seq_tr),
                    "seed {seed} threads {threads}"
                );
            }
        }
    }

    #[test]
    fn run_parallel_is_byte_identical_to_sequential() {
        for seed in 1..10u64 {
            let u = 1 << 11;
            let k = 2 + (seed as usize % 3);
            let tries: Vec<RunTrie> = (0..k)
                .map(|i| runt(&run_heavy_elems(u, seed * 71 + i as u64 * 13), u))
                .collect();
            let refs: Vec<&RunTrie> = tries.iter().collect();
            let (seq_el, seq_stats) = ac_intersect_runs(&refs, OutputMode::Elements).unwrap();
            let (seq_tr, _) = ac_intersect_runs(&refs, OutputMode::Trie).unwrap();
            let seq_el = match seq_el {
                Intersection::Elements(v) => v,
                _ => unreachable!(),
            };
            for threads in [2usize, 3, 4, 8, 64] {
                let (par_el, par_stats) =
                    par_intersect_runs(&refs, OutputMode::Elements, threads).unwrap();
                let par_el = match par_el {
                    Intersection::Elements(v) => v,
                    _ => unreachable!(),
                };
                assert_eq!(par_el, seq_el, "seed {seed} threads {threads}");
                assert_eq!(par_stats, seq_stats, "seed {seed} threads {threads}");
                let (par_tr, _) = par_intersect_runs(&refs, OutputMode::Trie, threads).unwrap();
                assert_eq!(
                    wire_run(&par_tr),
                    wire_run(&seq_tr),
                    "seed {seed} threads {threads}"
                );
            }
        }
    }

    #[test]
    fn empty_results_and_tiny_universes() {
        let a = plain(&[0], 16);
        let b = plain(&[1], 16);
        let (out, _) = par_intersect(&[&a, &b], OutputMode::Trie, 4).unwrap();
        assert!(matches!(out, Intersection::EmptyTrie));
        let (out, _) = par_intersect(&[&a, &b], OutputMode::Elements, 4).unwrap();
        assert!(out.into_elements().is_empty());
        // Universe 2: one level, nothing to plan.
        let c = plain(&[0, 1], 2);
        let d = plain(&[1], 2);
        let (out, _) = par_intersect(&[&c, &d], OutputMode::Elements, 8).unwrap();
        assert_eq!(out.into_elements(), vec![1]);
    }

    #[test]
    fn copies_found_during_planning_run_as_jobs() {
        // First set covers [0..2048) entirely: the root resolves to a
        // copy of the second trie during planning.
        let u = 2048;
        let full: Vec<u64> = (0..u).collect();
        let other = run_heavy_elems(u, 31);
        let a = runt(&full, u);
        let b = runt(&other, u);
        let (seq, seq_stats) = ac_intersect_runs(&[&a, &b], OutputMode::Elements).unwrap();
        let (par, par_stats) = par_intersect_runs(&[&a, &b], OutputMode::Elements, 4).unwrap();
        assert_eq!(par.into_elements(), seq.into_elements());
        assert_eq!(par_stats, seq_stats);
        assert!(par_stats.copied_nodes > 0);
    }

    #[test]
    fn thread_count_zero_resolves() {
        let a = plain(&random_elems(1 << 10, 300, 5), 1 << 10);
        let b = plain(&random_elems(1 << 10, 300, 6), 1 << 10);
        let (seq, _) = ac_intersect(&[&a, &b], OutputMode::Elements).unwrap();
        let (auto, _) = par_intersect(&[&a, &b], OutputMode::Elements, 0).unwrap();
        assert_eq!(auto.into_elements(), seq.into_elements());
    }
}
