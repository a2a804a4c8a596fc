use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{ExhaustionPolicy, Fate, LossTrigger, RunOutcome, Simulator, SpareCount};
use crate::codes::{ArrayScheme, ErasureTracker};
use crate::rng::{Lane, Stream};

const NO_DISK: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskStatus {
    /// In the spare pool.
    Idle,
    /// Serving position `.0`.
    Active(u32),
    /// Committed to position `.0`, rebuild in progress.
    Rebuilding(u32),
    Dead,
}

/// A physical disk. Every disk is born at commissioning (age 0), so its age
/// equals the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskRecord {
    pub fail_at: f64,
    pub status: DiskStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Fail { disk: u32 },
    RebuildDone { position: u32, disk: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap pops the earliest (time, seq) first
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending events, ordered by `(time, seq)`.
///
/// Three sources are merged: failures drawn at commissioning (sorted once),
/// rebuild completions (scheduled at `now + repair_time`, so they arrive in
/// order and fit a FIFO) and failures of disks drawn later from an unlimited
/// pool (a heap).
#[derive(Debug, Clone, Default)]
struct EventQueue {
    initial: Vec<Event>,
    next_initial: usize,
    rebuilds: VecDeque<Event>,
    late: BinaryHeap<Event>,
    seq: u64,
}

impl EventQueue {
    fn clear(&mut self) {
        self.initial.clear();
        self.next_initial = 0;
        self.rebuilds.clear();
        self.late.clear();
        self.seq = 0;
    }

    #[inline]
    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn push_initial(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq();
        self.initial.push(Event { time, seq, kind });
    }

    fn seal_initial(&mut self) {
        self.initial.sort_unstable_by(|a, b| b.cmp(a));
    }

    fn push_rebuild(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq();
        debug_assert!(self.rebuilds.back().is_none_or(|b| b.time <= time));
        self.rebuilds.push_back(Event { time, seq, kind });
    }

    fn push_late(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq();
        self.late.push(Event { time, seq, kind });
    }

    #[inline]
    fn pop(&mut self) -> Option<Event> {
        // `Event`'s ordering is reversed, so the earliest event is the greatest
        let a = self.initial.get(self.next_initial);
        let b = self.rebuilds.front();
        let c = self.late.peek();
        let mut best = 0u8;
        let mut top = a;
        if let Some(e) = b {
            if top.is_none_or(|t| e > t) {
                top = Some(e);
                best = 1;
            }
        }
        if let Some(e) = c {
            if top.is_none_or(|t| e > t) {
                best = 2;
            }
        }
        match best {
            0 => {
                let e = self.initial.get(self.next_initial).copied();
                self.next_initial += 1;
                e
            }
            1 => self.rebuilds.pop_front(),
            _ => self.late.pop(),
        }
    }
}

/// State visible to an [`Observer`] after each processed event.
#[derive(Debug)]
pub struct Snapshot<'s> {
    pub time: f64,
    pub disks: &'s [DiskRecord],
    /// Disk mapped to each position (active or rebuilding), if any.
    pub holders: &'s [u32],
    pub erased: &'s [usize],
    /// Disks that exist before any unlimited-pool draw.
    pub initial_disks: usize,
}

impl Snapshot<'_> {
    pub fn holder(&self, position: usize) -> Option<u32> {
        let h = self.holders[position];
        (h != NO_DISK).then_some(h)
    }
}

/// Hook for inspecting a run event by event; the default does nothing.
pub trait Observer {
    fn after_event(&mut self, _snapshot: &Snapshot<'_>) {}
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoObserver;

impl Observer for NoObserver {}

/// Per-worker buffers, reused across runs.
#[derive(Debug, Clone)]
pub struct Workspace<'a> {
    tracker: ErasureTracker<'a>,
    disks: Vec<DiskRecord>,
    holders: Vec<u32>,
    queue: EventQueue,
}

impl<'a> Workspace<'a> {
    pub(super) fn new(scheme: &'a ArrayScheme) -> Self {
        Workspace {
            tracker: scheme.tracker(),
            disks: Vec::with_capacity(scheme.len() * 2),
            holders: Vec::with_capacity(scheme.len()),
            queue: EventQueue::default(),
        }
    }
}

struct RunState {
    spare_cursor: usize,
    exhausted_at: Option<f64>,
    peak: usize,
}

impl Simulator {
    /// One mission with an observer attached.
    pub fn run_observed<O: Observer>(&self, run_index: u64, ws: &mut Workspace<'_>, observer: &mut O) -> RunOutcome {
        let cfg = &self.config;
        let mission = cfg.mission;
        let n = self.scheme.len();
        let mut disk_stream = Stream::new(cfg.seed, run_index, Lane::Disks);

        ws.tracker.reset();
        ws.disks.clear();
        ws.holders.clear();
        ws.queue.clear();

        // disk draws happen in a fixed order: positions, then finite spares
        let finite_spares = match cfg.spares {
            SpareCount::Finite(s) => s as usize,
            SpareCount::Unlimited => 0,
        };
        for d in 0..(n + finite_spares) {
            let u = disk_stream.open01();
            let fail_at = if u <= self.survive_mission {
                f64::INFINITY
            } else {
                self.law.invert(0.0, -libm::log(u))
            };
            let status = if d < n { DiskStatus::Active(d as u32) } else { DiskStatus::Idle };
            ws.disks.push(DiskRecord { fail_at, status });
            if d < n {
                ws.holders.push(d as u32);
            }
            if fail_at < mission {
                ws.queue.push_initial(fail_at, EventKind::Fail { disk: d as u32 });
            }
        }
        ws.queue.seal_initial();
        let initial_disks = ws.disks.len();

        let mut survival_stream: Option<Stream> = None;
        let mut st = RunState { spare_cursor: n, exhausted_at: None, peak: 0 };

        let outcome = |fate, st: &RunState| RunOutcome {
            fate,
            spares_exhausted_at: st.exhausted_at,
            peak_concurrent_failures: st.peak,
        };

        while let Some(ev) = ws.queue.pop() {
            let t = ev.time;
            match ev.kind {
                EventKind::Fail { disk } => {
                    let d = disk as usize;
                    match ws.disks[d].status {
                        DiskStatus::Idle => ws.disks[d].status = DiskStatus::Dead,
                        DiskStatus::Active(p) => {
                            ws.disks[d].status = DiskStatus::Dead;
                            ws.holders[p as usize] = NO_DISK;
                            let recoverable = ws.tracker.erase(p as usize);
                            st.peak = st.peak.max(ws.tracker.len());
                            let survives = match self.step_survival {
                                None => recoverable,
                                Some(steps) => {
                                    let stream = survival_stream
                                        .get_or_insert_with(|| Stream::new(cfg.seed, run_index, Lane::Survival));
                                    self.profile_survives(ws.tracker.len(), &steps, stream)
                                }
                            };
                            if !survives {
                                let fate = Fate::DataLoss { time: t, trigger: LossTrigger::FatalPattern };
                                return outcome(fate, &st);
                            }
                            if let Err(fate) = self.repair(ws, &mut st, &mut disk_stream, p, t) {
                                return outcome(fate, &st);
                            }
                        }
                        DiskStatus::Rebuilding(p) => {
                            // the position is already erased; the erased set does not change
                            ws.disks[d].status = DiskStatus::Dead;
                            ws.holders[p as usize] = NO_DISK;
                            if let Err(fate) = self.repair(ws, &mut st, &mut disk_stream, p, t) {
                                return outcome(fate, &st);
                            }
                        }
                        DiskStatus::Dead => unreachable!("disk {d} failed twice"),
                    }
                }
                EventKind::RebuildDone { position, disk } => {
                    let d = disk as usize;
                    if ws.disks[d].status == DiskStatus::Rebuilding(position) {
                        ws.disks[d].status = DiskStatus::Active(position);
                        ws.tracker.restore(position as usize);
                    }
                }
            }
            observer.after_event(&Snapshot {
                time: t,
                disks: &ws.disks,
                holders: &ws.holders,
                erased: ws.tracker.erased(),
                initial_disks,
            });
        }
        outcome(Fate::Survived, &st)
    }

    /// Count-based loss rule; `count` is the erased count after the failure.
    fn profile_survives(&self, count: usize, steps: &[f64; 4], stream: &mut Stream) -> bool {
        let tolerated = self.scheme.tolerated();
        if count <= tolerated {
            return true;
        }
        let level = count - tolerated;
        if level > 3 {
            return false;
        }
        let p = steps[level];
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            stream.open01() < p
        }
    }

    /// Commits a spare to `position` at time `t`.
    fn repair(
        &self,
        ws: &mut Workspace<'_>,
        st: &mut RunState,
        disk_stream: &mut Stream,
        position: u32,
        t: f64,
    ) -> Result<(), Fate> {
        let cfg = &self.config;
        let spare = match cfg.spares {
            SpareCount::Finite(_) => {
                // lowest-numbered idle spare; everything below the cursor is committed or dead
                while st.spare_cursor < ws.disks.len() && ws.disks[st.spare_cursor].status != DiskStatus::Idle {
                    st.spare_cursor += 1;
                }
                (st.spare_cursor < ws.disks.len()).then_some(st.spare_cursor)
            }
            SpareCount::Unlimited => {
                // a fresh pool disk, alive at age t
                let u = disk_stream.open01();
                let fail_at = self.law.invert(t, -libm::log(u));
                let id = ws.disks.len();
                ws.disks.push(DiskRecord { fail_at, status: DiskStatus::Idle });
                if fail_at < cfg.mission {
                    ws.queue.push_late(fail_at, EventKind::Fail { disk: id as u32 });
                }
                Some(id)
            }
        };
        let Some(spare) = spare else {
            st.exhausted_at.get_or_insert(t);
            return match cfg.exhaustion {
                ExhaustionPolicy::ContinueUnrepaired => Ok(()),
                ExhaustionPolicy::ImmediateLoss => Err(Fate::DataLoss { time: t, trigger: LossTrigger::PolicyExhaustion }),
            };
        };
        ws.disks[spare].status = DiskStatus::Rebuilding(position);
        ws.holders[position as usize] = spare as u32;
        let done = t + cfg.repair_time;
        if done < cfg.mission {
            ws.queue.push_rebuild(done, EventKind::RebuildDone { position, disk: spare as u32 });
        }
        Ok(())
    }
}
