//! Truncated long-range contact process from its graphical construction.
//!
//! Every site carries rate-1 death marks and every ordered pair
//! `(x, x + i e_m)` carries infection arrows at rate `lambda_|i|`. A
//! space-time point `(y, t)` is infected from `(x, s)` when a path moves
//! forward in time avoiding death marks and jumps only along arrows of range
//! at most `k`. Time is continuous: a [`Timeline`] holds the exact event times
//! inside a finite box, and arrows leaving the box are dropped.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::bondfield::{BondField, ProcessId};
use crate::sequences::{SequenceSpec, TruncatedSequence};
use crate::stats::EstimateWithCI;
use crate::{Error, Result, Site, MAX_DIM};

/// Infection rates `lambda_i = scale * s_i` truncated at `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLaw {
    seq: TruncatedSequence,
    scale: f64,
}

impl RateLaw {
    pub fn new(spec: &SequenceSpec, k: u64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::param(
                "rate_scale",
                format!("must be finite and nonnegative, got {scale}"),
            ));
        }
        Ok(RateLaw {
            seq: spec.truncate(k),
            scale,
        })
    }

    pub fn k(&self) -> u64 {
        self.seq.k()
    }

    pub fn spec(&self) -> &SequenceSpec {
        self.seq.base()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `lambda^k_{|i|}`, zero at range 0.
    pub fn rate(&self, i: i64) -> f64 {
        self.scale * self.seq.term_signed(i)
    }

    pub fn with_k(&self, k: u64) -> Self {
        RateLaw {
            seq: self.seq.base().truncate(k),
            scale: self.scale,
        }
    }
}

/// Axis-aligned box `lo <= x <= hi` in the first `dim` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceBox {
    pub dim: usize,
    pub lo: Site,
    pub hi: Site,
}

impl SpaceBox {
    pub fn centered(half_width: i64, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param(
                "dim",
                format!("must be in 1..={MAX_DIM}, got {dim}"),
            ));
        }
        if half_width < 0 {
            return Err(Error::param(
                "window",
                format!("must be nonnegative, got {half_width}"),
            ));
        }
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for j in 0..dim {
            lo[j] = -half_width;
            hi[j] = half_width;
        }
        Ok(SpaceBox { dim, lo, hi })
    }

    pub fn contains(&self, x: &Site) -> bool {
        (0..MAX_DIM).all(|j| {
            if j < self.dim {
                self.lo[j] <= x[j] && x[j] <= self.hi[j]
            } else {
                x[j] == 0
            }
        })
    }

    fn extent(&self, j: usize) -> usize {
        (self.hi[j] - self.lo[j] + 1) as usize
    }

    pub fn volume(&self) -> usize {
        (0..self.dim).map(|j| self.extent(j)).product()
    }

    /// Row-major position; increasing index is increasing `Site` order.
    fn index(&self, x: &Site) -> usize {
        (0..self.dim).fold(0, |idx, j| {
            idx * self.extent(j) + (x[j] - self.lo[j]) as usize
        })
    }

    fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.volume()).map(move |mut idx| {
            let mut x = [0; MAX_DIM];
            for j in (0..self.dim).rev() {
                let e = self.extent(j);
                x[j] = self.lo[j] + (idx % e) as i64;
                idx /= e;
            }
            x
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Death { site: Site },
    Arrow { from: Site, to: Site, range: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// Poisson marks on `[0, horizon]` inside a box.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub horizon: f64,
    pub space: SpaceBox,
    /// Largest arrow range present.
    pub k: u64,
    deaths: FxHashMap<Site, Vec<f64>>,
    arrows: FxHashMap<(Site, usize, i64), Vec<f64>>,
    /// All marks sorted by time.
    events: Vec<Event>,
}

fn poisson_times(field: &BondField, process: &ProcessId, rate: f64, horizon: f64) -> Vec<f64> {
    let mut times = Vec::new();
    if rate <= 0.0 {
        return times;
    }
    let mut stream = field.stream(process);
    let mut t = 0.0;
    loop {
        t += stream.next_exp(rate);
        if t > horizon {
            return times;
        }
        times.push(t);
    }
}

/// Samples every death process in `space` and every arrow process whose
/// target lies in `space`, on `[0, horizon]`. Each process draws from its own
/// keyed stream, so the marks of a pair do not depend on `k` or on the box.
pub fn sample_timeline(
    field: &BondField,
    rates: &RateLaw,
    space: SpaceBox,
    horizon: f64,
) -> Result<Timeline> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param(
            "horizon",
            format!("must be positive, got {horizon}"),
        ));
    }
    let k = rates.k() as i64;
    let mut deaths = FxHashMap::default();
    let mut arrows = FxHashMap::default();
    let mut events = Vec::new();

    for x in space.sites() {
        let d = poisson_times(field, &ProcessId::Death { x }, 1.0, horizon);
        events.extend(d.iter().map(|&time| Event {
            time,
            kind: EventKind::Death { site: x },
        }));
        if !d.is_empty() {
            deaths.insert(x, d);
        }
        for axis in 0..space.dim {
            for i in 1..=k {
                for disp in [i, -i] {
                    let mut y = x;
                    y[axis] += disp;
                    if !space.contains(&y) {
                        continue;
                    }
                    let a = poisson_times(
                        field,
                        &ProcessId::Arrow {
                            tail: x,
                            axis,
                            disp,
                        },
                        rates.rate(disp),
                        horizon,
                    );
                    if a.is_empty() {
                        continue;
                    }
                    let range = i as u64;
                    events.extend(a.iter().map(|&time| Event {
                        time,
                        kind: EventKind::Arrow {
                            from: x,
                            to: y,
                            range,
                        },
                    }));
                    arrows.insert((x, axis, disp), a);
                }
            }
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(Timeline {
        horizon,
        space,
        k: rates.k(),
        deaths,
        arrows,
        events,
    })
}

/// Samples replica `replica`, resampling with a bumped replica index while
/// two marks share a time. Returns the timeline and the number of resamples.
pub fn sample_replica(
    field: &BondField,
    replica: u64,
    rates: &RateLaw,
    space: SpaceBox,
    horizon: f64,
) -> Result<(Timeline, u64)> {
    let mut attempt = 0u64;
    loop {
        let tl = sample_timeline(
            &field.derive_replica(replica.wrapping_add(attempt << 40)),
            rates,
            space,
            horizon,
        )?;
        if !tl.has_simultaneous_events() {
            return Ok((tl, attempt));
        }
        attempt += 1;
    }
}

impl Timeline {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn death_times(&self, x: &Site) -> &[f64] {
        self.deaths.get(x).map_or(&[], Vec::as_slice)
    }

    pub fn arrow_times(&self, from: &Site, axis: usize, disp: i64) -> &[f64] {
        self.arrows
            .get(&(*from, axis, disp))
            .map_or(&[], Vec::as_slice)
    }

    pub fn has_simultaneous_events(&self) -> bool {
        self.events.windows(2).any(|w| w[0].time == w[1].time)
    }

    /// Builds a timeline from explicit marks; used for constructed instances.
    pub fn from_marks(
        space: SpaceBox,
        horizon: f64,
        deaths: &[(Site, f64)],
        arrows: &[(Site, usize, i64, f64)],
    ) -> Timeline {
        let mut tl = Timeline {
            horizon,
            space,
            k: 0,
            deaths: FxHashMap::default(),
            arrows: FxHashMap::default(),
            events: Vec::new(),
        };
        for &(x, t) in deaths {
            tl.deaths.entry(x).or_default().push(t);
            tl.events.push(Event {
                time: t,
                kind: EventKind::Death { site: x },
            });
        }
        for &(x, axis, disp, t) in arrows {
            let mut y = x;
            y[axis] += disp;
            tl.k = tl.k.max(disp.unsigned_abs());
            tl.arrows.entry((x, axis, disp)).or_default().push(t);
            tl.events.push(Event {
                time: t,
                kind: EventKind::Arrow {
                    from: x,
                    to: y,
                    range: disp.unsigned_abs(),
                },
            });
        }
        for v in tl.deaths.values_mut().chain(tl.arrows.values_mut()) {
            v.sort_by(f64::total_cmp);
        }
        tl.events.sort_by(|a, b| a.time.total_cmp(&b.time));
        tl
    }
}

/// Infected sets of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Infected sites at each requested checkpoint, sorted.
    pub snapshots: Vec<Vec<Site>>,
    /// Sites infected at some time in `[start, end]`, sorted.
    pub ever: Vec<Site>,
}

/// Sweeps the marks in `[start, checkpoints.last()]` from the sites in `initial`
/// infected at time `start`, using arrows of range at most `k`.
///
/// A death mark at time `t` on an infected site removes it; an arrow at time
/// `t > start` from an infected site infects its target. Checkpoints must be
/// nondecreasing and at least `start`; the snapshot at `c` includes every mark
/// at times `<= c`.
pub fn propagate(
    tl: &Timeline,
    k: u64,
    initial: &[Site],
    start: f64,
    checkpoints: &[f64],
) -> Propagation {
    let space = &tl.space;
    let mut infected = vec![false; space.volume()];
    let mut ever = vec![false; space.volume()];
    let mut count = 0usize;
    for x in initial.iter().filter(|x| space.contains(x)) {
        let idx = space.index(x);
        if !infected[idx] {
            infected[idx] = true;
            ever[idx] = true;
            count += 1;
        }
    }

    let collect = |flags: &[bool]| -> Vec<Site> {
        space
            .sites()
            .zip(flags)
            .filter(|(_, &f)| f)
            .map(|(x, _)| x)
            .collect()
    };

    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let first = tl.events.partition_point(|e| e.time < start);
    let mut events = tl.events[first..].iter().peekable();
    for &checkpoint in checkpoints {
        while let Some(e) = events.next_if(|e| e.time <= checkpoint) {
            if count == 0 {
                continue;
            }
            match e.kind {
                EventKind::Death { site } => {
                    let idx = space.index(&site);
                    if infected[idx] {
                        infected[idx] = false;
                        count -= 1;
                    }
                }
                EventKind::Arrow { from, to, range } => {
                    if range > k || e.time == start {
                        continue;
                    }
                    if infected[space.index(&from)] {
                        let idx = space.index(&to);
                        if !infected[idx] {
                            infected[idx] = true;
                            ever[idx] = true;
                            count += 1;
                        }
                    }
                }
            }
        }
        snapshots.push(if count == 0 {
            Vec::new()
        } else {
            collect(&infected)
        });
    }
    Propagation {
        snapshots,
        ever: collect(&ever),
    }
}

/// `(from.0, from.1)` k-connected to `(to.0, to.1)`; requires `from.1 <= to.1`.
pub fn k_connected(tl: &Timeline, from: (Site, f64), to: (Site, f64), k: u64) -> bool {
    assert!(from.1 <= to.1, "k_connected needs from.time <= to.time");
    let run = propagate(tl, k, &[from.0], from.1, &[to.1]);
    run.snapshots[0].binary_search(&to.0).is_ok()
}

/// Time step `delta`, branching displacement `b` along axis 2, truncation `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonParams {
    pub delta: f64,
    pub b: i64,
    pub k: u64,
}

impl SkeletonParams {
    /// Requires `delta > 0` and a positive untruncated rate at range `b`.
    pub fn new(delta: f64, b: i64, k: u64, rates: &RateLaw) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        if b == 0 || rates.scale * rates.spec().eval(b.unsigned_abs())? <= 0.0 {
            return Err(Error::param(
                "b",
                format!("rate at range {b} must be positive"),
            ));
        }
        Ok(SkeletonParams { delta, b, k })
    }
}

/// Closed form of the skeleton event probability:
///
/// `e^-delta (1 - prod_{1<=|a|<=k} (1 - e^{-2 delta} (1 - e^{-lambda_|a| delta/2}) (1 - e^{-lambda_b delta/2})))`.
pub fn f_probability(params: &SkeletonParams, rates: &RateLaw) -> f64 {
    let rates = rates.with_k(params.k);
    let d = params.delta;
    let up = 1.0 - (-rates.rate(params.b) * d / 2.0).exp();
    let miss: f64 = (1..=params.k as i64)
        .map(|i| {
            let f = 1.0 - (-2.0 * d).exp() * (1.0 - (-rates.rate(i) * d / 2.0).exp()) * up;
            f * f
        })
        .product();
    (-d).exp() * (1.0 - miss)
}

fn none_in(times: &[f64], lo: f64, hi: f64) -> bool {
    let i = times.partition_point(|&t| t < lo);
    i == times.len() || times[i] > hi
}

/// Skeleton event at site `x` and step `n`, with `t_n = n delta`: no death at
/// `x` on `[t_n, t_{n+1}]`, and for some `1 <= |a| <= k` no death at
/// `y = x + a e1` or `y + b e2` on that interval, an arrow `x -> y` in
/// `[t_n, t_n + delta/2]` and an arrow `y -> y + b e2` in
/// `[t_n + delta/2, t_{n+1}]`. Returns the witness `a` (smallest `|a|`,
/// positive first).
pub fn check_f_event(tl: &Timeline, x: &Site, n: u64, params: &SkeletonParams) -> Option<i64> {
    let t0 = n as f64 * params.delta;
    let t1 = t0 + params.delta;
    let mid = t0 + params.delta / 2.0;
    assert!(
        t1 <= tl.horizon * (1.0 + 1e-12),
        "skeleton step beyond the timeline horizon"
    );
    if params.b.unsigned_abs() > params.k || !none_in(tl.death_times(x), t0, t1) {
        return None;
    }
    (1..=params.k as i64).flat_map(|i| [i, -i]).find(|&a| {
        let mut y = *x;
        y[0] += a;
        let mut z = y;
        z[1] += params.b;
        none_in(tl.death_times(&y), t0, t1)
            && none_in(tl.death_times(&z), t0, t1)
            && !none_in(tl.arrow_times(x, 0, a), t0, mid)
            && !none_in(tl.arrow_times(&y, 1, params.b), mid, t1)
    })
}

/// Box containing every site an event at the origin can touch.
pub fn skeleton_box(params: &SkeletonParams) -> SpaceBox {
    let k = params.k as i64;
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    lo[0] = -k;
    hi[0] = k;
    lo[1] = params.b.min(0);
    hi[1] = params.b.max(0);
    SpaceBox { dim: 2, lo, hi }
}

/// Monte Carlo frequency of the skeleton event at the origin over `trials`
/// independent timelines.
pub fn f_event_frequency(
    params: &SkeletonParams,
    rates: &RateLaw,
    seed: u64,
    trials: u64,
    z: f64,
) -> Result<EstimateWithCI> {
    if trials == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let rates = rates.with_k(params.k);
    let field = process_field(seed);
    let space = skeleton_box(params);
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|r| {
            let (tl, _) = sample_replica(&field, r, &rates, space, params.delta)?;
            Ok(check_f_event(&tl, &[0; MAX_DIM], 0, params).is_some())
        })
        .collect::<Result<_>>()?;
    Ok(EstimateWithCI::from_counts(
        hits.iter().filter(|&&h| h).count() as u64,
        trials,
        z,
    ))
}

/// Key source for Poisson processes.
pub fn process_field(seed: u64) -> BondField {
    BondField::new(seed, crate::bondfield::BondLaws::site(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactParams {
    pub dim: usize,
    pub rates: SequenceSpec,
    pub rate_scale: f64,
    pub window: i64,
    pub horizon: f64,
}

impl ContactParams {
    pub fn space(&self) -> Result<SpaceBox> {
        SpaceBox::centered(self.window, self.dim)
    }
}

/// Survival estimates for several truncations; every replica's timeline is
/// sampled once at the largest `k` and shared by all truncations.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSweep {
    pub ks: Vec<u64>,
    pub estimates: Vec<EstimateWithCI>,
    /// Timelines resampled because of simultaneous marks.
    pub resampled: u64,
}

pub fn estimate_contact_survival(
    params: &ContactParams,
    ks: &[u64],
    seed: u64,
    reps: u64,
    z: f64,
) -> Result<ContactSweep> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let rates = RateLaw::new(&params.rates, kmax, params.rate_scale)?;
    let space = params.space()?;
    let field = process_field(seed);
    let origin = [0; MAX_DIM];
    let per_rep: Vec<(Vec<bool>, u64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let (tl, resampled) = sample_replica(&field, r, &rates, space, params.horizon)?;
            let alive = ks
                .iter()
                .map(|&k| {
                    !propagate(&tl, k, &[origin], 0.0, &[params.horizon]).snapshots[0].is_empty()
                })
                .collect();
            Ok((alive, resampled))
        })
        .collect::<Result<_>>()?;

    let estimates = (0..ks.len())
        .map(|j| {
            let hits = per_rep.iter().filter(|(alive, _)| alive[j]).count() as u64;
            EstimateWithCI::from_counts(hits, reps, z)
        })
        .collect();
    Ok(ContactSweep {
        ks: ks.to_vec(),
        estimates,
        resampled: per_rep.iter().map(|(_, r)| r).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::wilson_interval;

    fn s(x: i64, y: i64) -> Site {
        [x, y, 0, 0]
    }

    fn harmonic(k: u64) -> RateLaw {
        RateLaw::new(&SequenceSpec::Harmonic, k, 1.0).unwrap()
    }

    #[test]
    fn zero_rates_give_no_arrows() {
        let rates = RateLaw::new(&SequenceSpec::Constant(0.0), 5, 1.0).unwrap();
        let tl = sample_timeline(
            &process_field(1),
            &rates,
            SpaceBox::centered(3, 2).unwrap(),
            2.0,
        )
        .unwrap();
        assert!(tl
            .events()
            .iter()
            .all(|e| matches!(e.kind, EventKind::Death { .. })));
    }

    #[test]
    fn death_counts_have_poisson_mean() {
        let space = SpaceBox::centered(49, 2).unwrap();
        let t = 3.0;
        let tl = sample_timeline(&process_field(2), &harmonic(0), space, t).unwrap();
        let n = space.volume() as f64;
        let mean = tl.events().len() as f64 / n;
        // variance of a Poisson count equals its mean
        assert!((mean - t).abs() < 3.0 * (t / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn arrow_counts_have_poisson_mean() {
        let space = SpaceBox::centered(49, 2).unwrap();
        let t = 2.0;
        let rates = RateLaw::new(&SequenceSpec::Harmonic, 1, 0.7).unwrap();
        let tl = sample_timeline(&process_field(3), &rates, space, t).unwrap();
        let mut pairs = 0.0;
        let mut arrows = 0.0;
        for x in space.sites() {
            let mut y = x;
            y[0] += 1;
            if space.contains(&y) {
                pairs += 1.0;
                arrows += tl.arrow_times(&x, 0, 1).len() as f64;
            }
        }
        let mean = arrows / pairs;
        let lt = 0.7 * t;
        assert!((mean - lt).abs() < 3.0 * (lt / pairs).sqrt(), "mean {mean}");
    }

    #[test]
    fn timelines_are_deterministic_and_coupled_in_k() {
        let space = SpaceBox::centered(4, 2).unwrap();
        let f = process_field(9);
        let a = sample_timeline(&f, &harmonic(2), space, 1.5).unwrap();
        let b = sample_timeline(&f, &harmonic(2), space, 1.5).unwrap();
        assert_eq!(a.events(), b.events());
        let c = sample_timeline(&f, &harmonic(4), space, 1.5).unwrap();
        let short: Vec<Event> = c
            .events()
            .iter()
            .filter(|e| !matches!(e.kind, EventKind::Arrow { range, .. } if range > 2))
            .copied()
            .collect();
        assert_eq!(a.events(), &short[..]);
    }

    #[test]
    fn single_arrow_connects_after_its_time() {
        let space = SpaceBox::centered(3, 2).unwrap();
        let tl = Timeline::from_marks(space, 5.0, &[], &[(s(0, 0), 0, 2, 1.0)]);
        assert!(k_connected(&tl, (s(0, 0), 0.0), (s(2, 0), 1.5), 2));
        assert!(!k_connected(&tl, (s(0, 0), 0.0), (s(2, 0), 0.5), 2));
        assert!(!k_connected(&tl, (s(0, 0), 0.0), (s(2, 0), 1.5), 1));
        assert!(k_connected(&tl, (s(0, 0), 0.0), (s(0, 0), 4.0), 2));
    }

    #[test]
    fn death_before_first_arrow_blocks_everything() {
        let space = SpaceBox::centered(3, 2).unwrap();
        let tl = Timeline::from_marks(space, 5.0, &[(s(0, 0), 0.5)], &[(s(0, 0), 0, 1, 1.0)]);
        assert!(!k_connected(&tl, (s(0, 0), 0.0), (s(0, 0), 1.0), 3));
        assert!(!k_connected(&tl, (s(0, 0), 0.0), (s(1, 0), 2.0), 3));
        assert!(k_connected(&tl, (s(0, 0), 0.0), (s(0, 0), 0.4), 3));
    }

    #[test]
    fn reflexive_at_mark_free_points() {
        let space = SpaceBox::centered(2, 2).unwrap();
        let tl = sample_timeline(&process_field(4), &harmonic(2), space, 3.0).unwrap();
        for x in space.sites() {
            for t in [0.3, 1.7, 2.9] {
                if !tl.death_times(&x).contains(&t) {
                    assert!(k_connected(&tl, (x, t), (x, t), 2));
                }
            }
        }
    }

    #[test]
    fn f_probability_examples() {
        let zero = RateLaw::new(&SequenceSpec::Constant(0.0), 3, 1.0).unwrap();
        let p = SkeletonParams {
            delta: 0.5,
            b: 1,
            k: 3,
        };
        assert_eq!(f_probability(&p, &zero), 0.0);

        let one = harmonic(1);
        let p = SkeletonParams::new(1.0, 1, 1, &one).unwrap();
        let e = std::f64::consts::E;
        let expected =
            (1.0 / e) * (1.0 - (1.0 - e.powi(-2) * (1.0 - e.powf(-0.5)).powi(2)).powi(2));
        assert!((f_probability(&p, &one) - expected).abs() < 1e-15);
        assert!((f_probability(&p, &one) - 0.015254).abs() < 5e-7);

        let huge = RateLaw::new(&SequenceSpec::Constant(1.0), 1, 1e9).unwrap();
        let p = SkeletonParams::new(0.3, 1, 1, &huge).unwrap();
        let limit = (-0.3f64).exp() * (1.0 - (1.0 - (-0.6f64).exp()).powi(2));
        assert!((f_probability(&p, &huge) - limit).abs() < 1e-12);
    }

    #[test]
    fn skeleton_params_validation() {
        let r = RateLaw::new(&"list:0.5,0".parse().unwrap(), 2, 1.0).unwrap();
        assert!(SkeletonParams::new(1.0, 1, 2, &r).is_ok());
        assert!(SkeletonParams::new(1.0, 2, 2, &r).is_err());
        assert!(SkeletonParams::new(0.0, 1, 2, &r).is_err());
        assert!(RateLaw::new(&SequenceSpec::Harmonic, 2, -1.0).is_err());
    }

    #[test]
    fn f_event_on_constructed_timelines() {
        let p = SkeletonParams {
            delta: 1.0,
            b: 1,
            k: 2,
        };
        let space = skeleton_box(&p);
        let empty = Timeline::from_marks(space, 1.0, &[], &[]);
        assert_eq!(check_f_event(&empty, &s(0, 0), 0, &p), None);

        let good = Timeline::from_marks(
            space,
            1.0,
            &[(s(-1, 0), 0.5)],
            &[(s(0, 0), 0, 1, 0.2), (s(1, 0), 1, 1, 0.7)],
        );
        assert_eq!(check_f_event(&good, &s(0, 0), 0, &p), Some(1));

        // second arrow in the wrong half
        let early = Timeline::from_marks(
            space,
            1.0,
            &[],
            &[(s(0, 0), 0, 1, 0.2), (s(1, 0), 1, 1, 0.3)],
        );
        assert_eq!(check_f_event(&early, &s(0, 0), 0, &p), None);
        // death on the landing site
        let dead = Timeline::from_marks(
            space,
            1.0,
            &[(s(1, 1), 0.9)],
            &[(s(0, 0), 0, 1, 0.2), (s(1, 0), 1, 1, 0.7)],
        );
        assert_eq!(check_f_event(&dead, &s(0, 0), 0, &p), None);
        // witness order prefers +a at equal range
        let both = Timeline::from_marks(
            space,
            1.0,
            &[],
            &[
                (s(0, 0), 0, -2, 0.1),
                (s(-2, 0), 1, 1, 0.8),
                (s(0, 0), 0, 2, 0.4),
                (s(2, 0), 1, 1, 0.9),
            ],
        );
        assert_eq!(check_f_event(&both, &s(0, 0), 0, &p), Some(2));
    }

    #[test]
    fn f_frequency_matches_closed_form() {
        let rates = harmonic(5);
        let p = SkeletonParams::new(0.5, 1, 3, &rates).unwrap();
        let est = f_event_frequency(&p, &rates, 11, 100_000, 3.0).unwrap();
        let exact = f_probability(&p, &rates);
        assert!(est.contains(exact), "{est:?} vs {exact}");
    }

    #[test]
    fn no_infection_survival_is_exponential() {
        let params = ContactParams {
            dim: 2,
            rates: SequenceSpec::Constant(0.0),
            rate_scale: 1.0,
            window: 2,
            horizon: 0.7,
        };
        let sweep = estimate_contact_survival(&params, &[1], 5, 20_000, 3.0).unwrap();
        let e = sweep.estimates[0];
        let (lo, hi) = wilson_interval(e.successes, e.trials, 3.0);
        let exact = (-0.7f64).exp();
        assert!(lo <= exact && exact <= hi, "{e:?}");
    }

    #[test]
    fn fast_infection_survives_short_horizons() {
        let params = ContactParams {
            dim: 2,
            rates: SequenceSpec::Constant(1.0),
            rate_scale: 50.0,
            window: 3,
            horizon: 0.5,
        };
        let sweep = estimate_contact_survival(&params, &[1], 6, 400, 1.96).unwrap();
        assert!(
            sweep.estimates[0].estimate >= 0.9,
            "{:?}",
            sweep.estimates[0]
        );
    }

    #[test]
    fn box_indexing_round_trips() {
        let b = skeleton_box(&SkeletonParams {
            delta: 1.0,
            b: -2,
            k: 3,
        });
        assert_eq!(b.volume(), 7 * 3);
        for (i, x) in b.sites().enumerate() {
            assert!(b.contains(&x));
            assert_eq!(b.index(&x), i);
        }
        let sites: Vec<Site> = SpaceBox::centered(2, 3).unwrap().sites().collect();
        assert!(sites.windows(2).all(|w| w[0] < w[1]));
    }
}
