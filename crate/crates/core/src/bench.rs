//! Benchmark instances: Li & Lim PDPTW files, the two-LSP offset merge,
//! a small many-vehicle mock generator and the two-vehicle toy instance.
//!
//! All generated instances use Euclidean distances with travel time equal
//! to distance, scaled to fixed point.

use crate::model::{
    Instance, Location, LocationId, LspId, LspParams, Money, Order, OrderId, TimeDistanceMatrix, Vehicle, VehicleId,
    Waypoint, INSTANCE_SCHEMA_VERSION, SCALE,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no file for {name} in {}", dir.display())]
    NotFound { name: String, dir: PathBuf },
    #[error("cannot synthesize {0}: expected a name like LC1_2_4 or LR1_2_8")]
    UnknownName(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn fx(v: f64) -> i64 {
    (v * SCALE as f64).round() as i64
}

/// Euclidean matrix in fixed point, time equal to distance.
pub fn euclidean_matrix(points: &[(f64, f64)]) -> TimeDistanceMatrix {
    TimeDistanceMatrix::from_fn(points.len(), |i, j| {
        let d = fx((points[i].0 - points[j].0).hypot(points[i].1 - points[j].1));
        (d, d)
    })
    .expect("a generated matrix is square")
}

// ---------------------------------------------------------------------------
// Li & Lim format

#[derive(Clone, Debug, PartialEq)]
pub struct LiLimRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: i64,
    pub earliest: f64,
    pub latest: f64,
    pub service: f64,
    /// For a delivery, the id of its pickup; 0 otherwise.
    pub pickup_ref: usize,
    /// For a pickup, the id of its delivery; 0 otherwise.
    pub delivery_ref: usize,
}

/// A parsed benchmark file. `rows[0]` is the depot.
#[derive(Clone, Debug, PartialEq)]
pub struct LiLimInstance {
    pub vehicle_count: usize,
    pub capacity: i64,
    /// Present in the header, unused.
    pub speed: f64,
    pub rows: Vec<LiLimRow>,
}

impl LiLimInstance {
    /// (pickup row, delivery row) index pairs in pickup-row order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let pos = |id: usize| self.rows.iter().position(|r| r.id == id).expect("validated");
        self.rows.iter().enumerate().filter(|(_, r)| r.demand > 0).map(|(i, r)| (i, pos(r.delivery_ref))).collect()
    }

    /// Same text layout as the published files.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\t{}\t{}\n", self.vehicle_count, self.capacity, self.speed);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.id, r.x, r.y, r.demand, r.earliest, r.latest, r.service, r.pickup_ref, r.delivery_ref
            );
        }
        s
    }

    /// Every coordinate, depot included, moved by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> LiLimInstance {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.x += dx;
            r.y += dy;
        }
        out
    }
}

pub fn parse_li_lim(text: &str) -> Result<LiLimInstance, BenchError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: String| BenchError::Parse { line, msg };
    let nums = |line: usize, l: &str, want: usize| -> Result<Vec<f64>, BenchError> {
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("not a number: {t:?}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != want {
            return Err(err(line, format!("expected {want} fields, found {}", v.len())));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(err(line, format!("non-finite value {bad}")));
        }
        Ok(v)
    };
    let as_int = |line: usize, v: f64, what: &str| -> Result<i64, BenchError> {
        if v.fract() != 0.0 {
            return Err(err(line, format!("{what} must be an integer, found {v}")));
        }
        Ok(v as i64)
    };
    let as_ref = |line: usize, v: f64, what: &str| -> Result<usize, BenchError> {
        let i = as_int(line, v, what)?;
        usize::try_from(i).map_err(|_| err(line, format!("{what} must be non-negative, found {i}")))
    };

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let h = nums(hline, header, 3)?;
    let vehicle_count = as_ref(hline, h[0], "vehicle count")?;
    let capacity = as_int(hline, h[1], "capacity")?;
    if capacity <= 0 {
        return Err(err(hline, format!("capacity must be positive, found {capacity}")));
    }

    let mut rows = Vec::new();
    let mut line_of = Vec::new();
    for (line, l) in lines {
        let v = nums(line, l, 9)?;
        let row = LiLimRow {
            id: as_ref(line, v[0], "id")?,
            x: v[1],
            y: v[2],
            demand: as_int(line, v[3], "demand")?,
            earliest: v[4],
            latest: v[5],
            service: v[6],
            pickup_ref: as_ref(line, v[7], "pickup reference")?,
            delivery_ref: as_ref(line, v[8], "delivery reference")?,
        };
        if row.earliest > row.latest || row.service < 0.0 {
            return Err(err(line, format!("window [{}, {}] with service {}", row.earliest, row.latest, row.service)));
        }
        rows.push(row);
        line_of.push(line);
    }
    if rows.is_empty() {
        return Err(err(hline, "no depot row".into()));
    }
    if rows[0].demand != 0 {
        return Err(err(line_of[0], "depot row must have zero demand".into()));
    }
    let mut by_id = std::collections::HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        if by_id.insert(r.id, i).is_some() {
            return Err(err(line_of[i], format!("duplicate id {}", r.id)));
        }
    }
    for (i, r) in rows.iter().enumerate().skip(1) {
        let line = line_of[i];
        let (partner_id, back): (usize, fn(&LiLimRow) -> usize) = match r.demand {
            d if d > 0 => (r.delivery_ref, |p| p.pickup_ref),
            d if d < 0 => (r.pickup_ref, |p| p.delivery_ref),
            _ => return Err(err(line, format!("customer {} has zero demand", r.id))),
        };
        let Some(&j) = by_id.get(&partner_id).filter(|&&j| j != 0) else {
            return Err(err(line, format!("customer {} references missing partner {partner_id}", r.id)));
        };
        let partner = &rows[j];
        if back(partner) != r.id {
            return Err(err(line, format!("customer {} and {} do not reference each other", r.id, partner.id)));
        }
        if partner.demand + r.demand != 0 {
            return Err(err(line, format!("paired demands {} and {} do not cancel", r.demand, partner.demand)));
        }
    }
    Ok(LiLimInstance { vehicle_count, capacity, speed: h[2], rows })
}

pub fn read_li_lim(path: &Path) -> Result<LiLimInstance, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.into(), source })?;
    parse_li_lim(&text)
}

/// Finds `name` (e.g. `LC1_2_2`) in `dir`, trying the name as given, with
/// `.txt`, and both lowercased.
pub fn find_li_lim(dir: &Path, name: &str) -> Result<PathBuf, BenchError> {
    let lower = name.to_lowercase();
    [name.to_string(), format!("{name}.txt"), lower.clone(), format!("{lower}.txt")]
        .into_iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file())
        .ok_or_else(|| BenchError::NotFound { name: name.into(), dir: dir.into() })
}

// ---------------------------------------------------------------------------
// Synthetic stand-ins for the published files

struct Family {
    clustered: bool,
    random: bool,
    series: u32,
    size: usize,
    index: u32,
}

fn parse_family(name: &str) -> Option<Family> {
    let rest = name.strip_prefix('L')?;
    let (clustered, random, rest) = if let Some(r) = rest.strip_prefix("RC") {
        (true, true, r)
    } else if let Some(r) = rest.strip_prefix('C') {
        (true, false, r)
    } else {
        (false, true, rest.strip_prefix('R')?)
    };
    let mut parts = rest.split('_');
    let series: u32 = parts.next()?.parse().ok()?;
    let size: usize = parts.next()?.parse().ok()?;
    let index: u32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !(1..=2).contains(&series) || size == 0 || size > 10 {
        return None;
    }
    Some(Family { clustered, random, series, size, index })
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generates a file shaped like the published instance `name`: same depot
/// placement, horizon, service time, capacity, fleet size and number of
/// customers, with clustered (`LC`), uniform (`LR`) or mixed (`LRC`)
/// customers. Files of one family (`LC1_2_*`) share coordinates and differ
/// in pairing and time windows, like the originals.
///
/// Windows are cut around the arrival times of hidden reference routes, so
/// every order is servable and the fleet suffices.
pub fn surrogate_li_lim(name: &str) -> Result<LiLimInstance, BenchError> {
    let fam = parse_family(name).ok_or_else(|| BenchError::UnknownName(name.into()))?;
    let n_customers = 100 * fam.size;
    let (side, horizon, service) = match (fam.clustered && !fam.random, fam.series) {
        (true, 1) => (140.0 * (fam.size as f64 / 2.0).sqrt(), 1351.0, 90.0),
        (true, _) => (140.0 * (fam.size as f64 / 2.0).sqrt(), 3390.0, 90.0),
        (false, 1) => (200.0 * (fam.size as f64 / 2.0).sqrt(), 1000.0, 10.0),
        (false, _) => (200.0 * (fam.size as f64 / 2.0).sqrt(), 3000.0, 10.0),
    };
    let capacity = 200i64;
    let pairs_per_route = if fam.series == 1 { 5 } else { 15 };
    let depot = (side / 2.0, side / 2.0);

    let family_key = name.rsplit_once('_').map_or(name, |(f, _)| f);
    let mut geo = ChaCha8Rng::seed_from_u64(fnv1a(family_key));
    let n_clusters = 10 * fam.size;
    let centers: Vec<(f64, f64)> = (0..n_clusters)
        .map(|_| (geo.gen_range(0.1 * side..0.9 * side), geo.gen_range(0.1 * side..0.9 * side)))
        .collect();
    let mut points: Vec<((f64, f64), usize)> = (0..n_customers)
        .map(|i| {
            let uniform = fam.random && (!fam.clustered || i % 2 == 1);
            let p = if uniform {
                (geo.gen_range(0.0..side), geo.gen_range(0.0..side))
            } else {
                let c = centers[i % n_clusters];
                let r = side / 30.0;
                ((c.0 + geo.gen_range(-r..r)).clamp(0.0, side), (c.1 + geo.gen_range(-r..r)).clamp(0.0, side))
            };
            ((p.0.round(), p.1.round()), i % n_clusters)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(name));
    // Visit order: by cluster for clustered files, by polar angle otherwise,
    // both sweeping around the depot.
    let angle = |p: (f64, f64)| (p.1 - depot.1).atan2(p.0 - depot.0);
    if fam.clustered && !fam.random {
        points.sort_by(|a, b| {
            angle(centers[a.1]).total_cmp(&angle(centers[b.1])).then(angle(a.0).total_cmp(&angle(b.0)))
        });
    } else {
        points.sort_by(|a, b| angle(a.0).total_cmp(&angle(b.0)));
    }
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    // Window structure follows the file index the way the published sets
    // do: 1 is tight, 2-4 leave a quarter to three quarters of customers
    // unconstrained, 5-8 widen every window, 9+ mix widths.
    let half_width = match (fam.clustered && !fam.random, fam.series) {
        (true, 1) => (20.0, 40.0),
        (false, 1) => (5.0, 15.0),
        _ => (60.0, 240.0),
    };
    let (free_share, widen) = match fam.index {
        0 | 1 => (0.0, 1.0),
        k @ 2..=4 => ((k - 1) as f64 * 0.25, 1.0),
        k @ 5..=8 => (0.0, (k - 3) as f64),
        _ => (0.0, 0.0),
    };

    // Customer rows in visit order, before ids are assigned.
    struct Pending {
        xy: (f64, f64),
        demand: i64,
        window: (f64, f64),
        partner: usize,
    }
    let mut pending: Vec<Pending> = Vec::with_capacity(n_customers);
    let mut start = 0;
    let mut routes = 0;
    while start < points.len() {
        // Extend the route two customers at a time while it still returns
        // to the depot in time.
        let mut t = 0.0;
        let mut at = depot;
        let mut arrivals = Vec::new();
        let mut end = start;
        while end + 1 < points.len() && (end - start) / 2 < pairs_per_route {
            let (mut tt, mut a) = (t, at);
            let mut arr = Vec::new();
            for &(p, _) in &points[end..end + 2] {
                tt += dist(a, p);
                arr.push(tt);
                tt += service;
                a = p;
            }
            if tt + dist(a, depot) + 2.0 > horizon && end > start {
                break;
            }
            t = tt;
            at = a;
            arrivals.extend(arr);
            end += 2;
        }
        routes += 1;
        let m = (end - start) / 2;
        let mut labels: Vec<usize> = (0..m).flat_map(|k| [k, k]).collect();
        labels.shuffle(&mut rng);
        let mut first: Vec<Option<usize>> = vec![None; m];
        let demands: Vec<i64> = (0..m).map(|_| rng.gen_range(10..=capacity / pairs_per_route as i64)).collect();
        for (k, &label) in labels.iter().enumerate() {
            let idx = start + k;
            let a = arrivals[k];
            let w = if widen > 0.0 { widen } else { rng.gen_range(1.0..6.0) };
            let (lo, hi) = if rng.gen_bool(free_share) {
                (0.0, horizon)
            } else {
                (
                    (a - w * rng.gen_range(half_width.0..half_width.1)).max(0.0).floor(),
                    (a + w * rng.gen_range(half_width.0..half_width.1)).min(horizon).ceil() + 1.0,
                )
            };
            let (demand, partner) = match first[label] {
                None => {
                    first[label] = Some(idx);
                    (demands[label], usize::MAX)
                }
                Some(p) => {
                    pending[p].partner = idx;
                    (-demands[label], p)
                }
            };
            pending.push(Pending { xy: points[idx].0, demand, window: (lo, hi.min(horizon)), partner });
        }
        start = end;
    }
    debug_assert!(routes <= 25 * fam.size, "reference plan needs {routes} vehicles");

    let mut ids: Vec<usize> = (1..=pending.len()).collect();
    ids.shuffle(&mut rng);
    let mut rows = vec![LiLimRow {
        id: 0,
        x: depot.0,
        y: depot.1,
        demand: 0,
        earliest: 0.0,
        latest: horizon,
        service: 0.0,
        pickup_ref: 0,
        delivery_ref: 0,
    }];
    for (k, p) in pending.iter().enumerate() {
        let partner_id = ids[p.partner];
        let (pickup_ref, delivery_ref) = if p.demand > 0 { (0, partner_id) } else { (partner_id, 0) };
        rows.push(LiLimRow {
            id: ids[k],
            x: p.xy.0,
            y: p.xy.1,
            demand: p.demand,
            earliest: p.window.0,
            latest: p.window.1,
            service,
            pickup_ref,
            delivery_ref,
        });
    }
    rows[1..].sort_by_key(|r| r.id);
    Ok(LiLimInstance { vehicle_count: 25 * fam.size, capacity, speed: 1.0, rows })
}

/// Where a benchmark file came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    File,
    Surrogate,
}

/// Reads `name` from `data_dir` when given (a missing file is an error),
/// otherwise synthesizes it.
pub fn load_li_lim(name: &str, data_dir: Option<&Path>) -> Result<(LiLimInstance, Provenance), BenchError> {
    match data_dir {
        Some(dir) => Ok((read_li_lim(&find_li_lim(dir, name)?)?, Provenance::File)),
        None => Ok((surrogate_li_lim(name)?, Provenance::Surrogate)),
    }
}

// ---------------------------------------------------------------------------
// Offset merge

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RevenueMode {
    #[default]
    Zero,
    /// Every order earns `revenue`.
    Fixed,
    /// Every order earns `revenue` per unit of direct pickup-to-drop-off
    /// distance.
    PerDistance,
}

fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}

/// Two benchmark files merged into a two-LSP instance, the second one
/// translated by `offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSpec {
    pub file_a: String,
    pub file_b: String,
    #[serde(default)]
    pub offset: (f64, f64),
    /// Per-LSP cost per distance unit.
    #[serde(default = "unit_pair")]
    pub alpha: [f64; 2],
    /// Per-LSP fixed cost of a used vehicle.
    #[serde(default)]
    pub beta: [f64; 2],
    #[serde(default)]
    pub revenue_mode: RevenueMode,
    #[serde(default)]
    pub revenue: f64,
}

impl MergeSpec {
    pub fn new(file_a: &str, file_b: &str, offset: (f64, f64)) -> MergeSpec {
        MergeSpec {
            file_a: file_a.into(),
            file_b: file_b.into(),
            offset,
            alpha: unit_pair(),
            beta: [0.0; 2],
            revenue_mode: RevenueMode::Zero,
            revenue: 0.0,
        }
    }

    pub fn label(&self) -> String {
        format!("{}+{}({},{})", self.file_a, self.file_b, self.offset.0, self.offset.1)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let finite = [self.offset.0, self.offset.1, self.revenue]
            .iter()
            .chain(&self.alpha)
            .chain(&self.beta)
            .all(|v| v.is_finite());
        if !finite {
            return Err(BenchError::Config(format!("{}: non-finite parameter", self.label())));
        }
        if self.alpha.iter().chain(&self.beta).any(|&v| v < 0.0) || self.revenue < 0.0 {
            return Err(BenchError::Config(format!("{}: negative cost or revenue", self.label())));
        }
        Ok(())
    }

    /// Loads both files (see [`load_li_lim`]) and merges them.
    pub fn build(&self, data_dir: Option<&Path>) -> Result<Instance, BenchError> {
        let (a, pa) = load_li_lim(&self.file_a, data_dir)?;
        let (b, pb) = load_li_lim(&self.file_b, data_dir)?;
        let mut inst = offset_merge(self, &a, &b)?;
        if pa == Provenance::Surrogate || pb == Provenance::Surrogate {
            inst.name.push_str(" [surrogate]");
        }
        Ok(inst)
    }
}

/// LSP 0 gets `a`'s fleet and orders, LSP 1 gets `b`'s with every
/// coordinate (depot included) moved by the merge offset.
pub fn offset_merge(spec: &MergeSpec, a: &LiLimInstance, b: &LiLimInstance) -> Result<Instance, BenchError> {
    spec.validate()?;
    let b = b.translated(spec.offset.0, spec.offset.1);
    let parts = [a, &b];
    let points: Vec<(f64, f64)> = parts.iter().flat_map(|p| p.rows.iter().map(|r| (r.x, r.y))).collect();
    let matrix = euclidean_matrix(&points);

    let mut locations = Vec::with_capacity(points.len());
    let mut vehicles = Vec::new();
    let mut orders = Vec::new();
    let mut lsps = Vec::new();
    let mut base = 0usize;
    for (l, part) in parts.iter().enumerate() {
        let lsp = LspId(l as u32);
        for (i, r) in part.rows.iter().enumerate() {
            locations.push(Location { id: LocationId::from_index(base + i), x: r.x, y: r.y });
        }
        let wp = |i: usize, order: Option<OrderId>| {
            let r = &part.rows[i];
            Waypoint {
                loc: LocationId::from_index(base + i),
                st: fx(r.earliest),
                et: fx(r.latest),
                service: fx(r.service),
                vol: r.demand,
                order,
            }
        };
        let depot = wp(0, None);
        let mut fleet = Vec::new();
        for _ in 0..part.vehicle_count {
            let id = VehicleId::from_index(vehicles.len());
            fleet.push(id);
            vehicles.push(Vehicle { id, lspid: lsp, cap: part.capacity, depot: depot.clone() });
        }
        for (p, d) in part.pairs() {
            let id = OrderId::from_index(orders.len());
            let direct = (part.rows[p].x - part.rows[d].x).hypot(part.rows[p].y - part.rows[d].y);
            let rev = match spec.revenue_mode {
                RevenueMode::Zero => Money::ZERO,
                RevenueMode::Fixed => Money::from_units(spec.revenue),
                RevenueMode::PerDistance => Money::from_units(spec.revenue * direct),
            };
            orders.push(Order { id, owner: lsp, rev, pickup: wp(p, Some(id)), dropoff: wp(d, Some(id)) });
        }
        lsps.push(LspParams {
            id: lsp,
            alpha: Money::from_units(spec.alpha[l]),
            beta: Money::from_units(spec.beta[l]),
            fleet,
        });
        base += part.rows.len();
    }
    let inst = Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        scale: SCALE,
        name: spec.label(),
        locations,
        matrix,
        orders,
        vehicles,
        lsps,
    };
    inst.validate().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(inst)
}

/// A list of merge specs, as in `configs/table1.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSuite {
    pub merge: Vec<MergeSpec>,
}

impl MergeSuite {
    pub fn from_toml(text: &str) -> Result<MergeSuite, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }
}

/// Parses a single spec from TOML or JSON, picked by the first
/// non-blank character.
pub fn parse_merge_spec(text: &str) -> Result<MergeSpec, BenchError> {
    let spec: MergeSpec = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?
    };
    spec.validate()?;
    Ok(spec)
}

/// The ten two-LSP configurations of the synthetic benchmark.
pub fn table1_specs() -> Vec<MergeSpec> {
    [
        ("LC1_2_2", "LC1_2_6", (42.0, -42.0)),
        ("LC1_2_2", "LC1_2_7", (-32.0, -32.0)),
        ("LC1_2_4", "LC1_2_7", (-30.0, 0.0)),
        ("LC1_2_4", "LC1_2_8", (-30.0, 0.0)),
        ("LC1_2_10", "LC1_2_4", (30.0, 0.0)),
        ("LR1_2_3", "LR1_2_8", (0.0, 30.0)),
        ("LR1_2_5", "LR1_2_8", (0.0, 30.0)),
        ("LR1_2_8", "LR1_2_9", (0.0, -30.0)),
        ("LR1_2_10", "LR1_2_3", (0.0, -30.0)),
        ("LR1_2_10", "LR1_2_8", (0.0, 30.0)),
    ]
    .into_iter()
    .map(|(a, b, off)| MergeSpec::new(a, b, off))
    .collect()
}

// ---------------------------------------------------------------------------
// Mock multi-LSP instances

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MockParams {
    pub lsps: usize,
    pub vehicles_per_lsp: usize,
    pub orders: usize,
}

impl Default for MockParams {
    fn default() -> Self {
        MockParams { lsps: 6, vehicles_per_lsp: 10, orders: 40 }
    }
}

/// Many LSPs with more vehicles than orders. Orders go to LSPs
/// round-robin; each is servable on a direct trip from its owner's depot.
/// Revenues are positive, so welfare is measured on profit.
pub fn generate_mock_small(seed: u64, params: MockParams) -> Result<Instance, BenchError> {
    let MockParams { lsps: n_lsps, vehicles_per_lsp, orders: n_orders } = params;
    if n_lsps == 0 || vehicles_per_lsp == 0 || n_orders == 0 {
        return Err(BenchError::Config("mock counts must be positive".into()));
    }
    const SIDE: f64 = 100.0;
    const HORIZON: f64 = 1000.0;
    const SERVICE: f64 = 5.0;
    const CAP: i64 = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);

    let depots: Vec<(f64, f64)> =
        (0..n_lsps).map(|_| (rng.gen_range(20.0..80.0_f64).round(), rng.gen_range(20.0..80.0_f64).round())).collect();
    let mut points = depots.clone();
    let mut orders = Vec::with_capacity(n_orders);
    for k in 0..n_orders {
        let owner = k % n_lsps;
        let home = depots[owner];
        let p = (rng.gen_range(0.0..SIDE).round(), rng.gen_range(0.0..SIDE).round());
        let d = (
            (p.0 + rng.gen_range(-30.0..30.0_f64)).clamp(0.0, SIDE).round(),
            (p.1 + rng.gen_range(-30.0..30.0_f64)).clamp(0.0, SIDE).round(),
        );
        // Windows in whole units around a direct trip from the owner's
        // depot, with one unit of slack against fixed-point rounding.
        let reach_p = dist(home, p).ceil() + 1.0;
        let p_st = rng.gen_range(0.0..250.0_f64).floor();
        let p_et = (p_st + rng.gen_range(60.0..200.0_f64)).max(reach_p).ceil();
        let at_d = p_st.max(reach_p) + SERVICE + dist(p, d).ceil() + 1.0;
        let d_st = (at_d - rng.gen_range(0.0..60.0)).max(0.0).floor();
        let d_et = (at_d + rng.gen_range(60.0..200.0)).ceil();
        debug_assert!(at_d + SERVICE + dist(d, home) <= HORIZON);
        let vol = rng.gen_range(5..=15);
        let rev = (rng.gen_range(10.0..30.0) + 0.5 * dist(p, d)).round();
        let base = points.len();
        points.push(p);
        points.push(d);
        let id = OrderId::from_index(k);
        let wp = |loc: usize, st: f64, et: f64, vol: i64| Waypoint {
            loc: LocationId::from_index(loc),
            st: fx(st),
            et: fx(et),
            service: fx(SERVICE),
            vol,
            order: Some(id),
        };
        orders.push(Order {
            id,
            owner: LspId::from_index(owner),
            rev: Money::from_units(rev),
            pickup: wp(base, p_st, p_et, vol),
            dropoff: wp(base + 1, d_st, d_et, -vol),
        });
    }

    let mut vehicles = Vec::new();
    let mut lsps = Vec::new();
    for l in 0..n_lsps {
        let fleet: Vec<VehicleId> =
            (0..vehicles_per_lsp).map(|k| VehicleId::from_index(l * vehicles_per_lsp + k)).collect();
        for &id in &fleet {
            vehicles.push(Vehicle {
                id,
                lspid: LspId::from_index(l),
                cap: CAP,
                depot: Waypoint::depot(LocationId::from_index(l), 0, fx(HORIZON)),
            });
        }
        lsps.push(LspParams {
            id: LspId::from_index(l),
            alpha: Money::from_units(1.0),
            beta: Money::from_units(rng.gen_range(40.0..60.0_f64).round()),
            fleet,
        });
    }
    let inst = Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        scale: SCALE,
        name: format!("mock-small-{seed}"),
        locations: points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Location { id: LocationId::from_index(i), x, y })
            .collect(),
        matrix: euclidean_matrix(&points),
        orders,
        vehicles,
        lsps,
    };
    inst.validate().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Toy instance

/// Two LSPs with one vehicle each, depots 20 apart. Each vehicle carries
/// one order next to its own depot and one next to the other depot:
/// LSP 0 owns orders 0 (home) and 1 (away), LSP 1 owns orders 2 (home)
/// and 3 (away). Swapping the away orders is optimal, but no single
/// one-directional transfer helps both LSPs. Zero revenue, alpha 1,
/// beta 0.
pub fn toy_instance() -> Instance {
    let depots = [(0.0, 0.0), (20.0, 0.0)];
    let legs = [
        ((0.0, 2.0), (2.0, 2.0)),
        ((20.0, 2.0), (18.0, 2.0)),
        ((20.0, -2.0), (18.0, -2.0)),
        ((0.0, -2.0), (2.0, -2.0)),
    ];
    let mut points = depots.to_vec();
    let mut orders = Vec::new();
    for (k, (p, d)) in legs.iter().enumerate() {
        let id = OrderId::from_index(k);
        let base = points.len();
        points.extend([*p, *d]);
        let wp = |loc: usize, vol: i64| Waypoint {
            loc: LocationId::from_index(loc),
            st: 0,
            et: fx(1000.0),
            service: 0,
            vol,
            order: Some(id),
        };
        orders.push(Order {
            id,
            owner: LspId::from_index(k / 2),
            rev: Money::ZERO,
            pickup: wp(base, 1),
            dropoff: wp(base + 1, -1),
        });
    }
    let vehicles = (0..2)
        .map(|l| Vehicle {
            id: VehicleId::from_index(l),
            lspid: LspId::from_index(l),
            cap: 10,
            depot: Waypoint::depot(LocationId::from_index(l), 0, fx(1000.0)),
        })
        .collect();
    let lsps = (0..2)
        .map(|l| LspParams {
            id: LspId::from_index(l),
            alpha: Money::from_units(1.0),
            beta: Money::ZERO,
            fleet: vec![VehicleId::from_index(l)],
        })
        .collect();
    Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        scale: SCALE,
        name: "toy".into(),
        locations: points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Location { id: LocationId::from_index(i), x, y })
            .collect(),
        matrix: euclidean_matrix(&points),
        orders,
        vehicles,
        lsps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "2 10 1\n0 0 0 0 0 100 0 0 0\n1 3 4 5 0 50 2 0 2\n2 6 8 -5 10 60 2 1 0\n";

    #[test]
    fn tiny_file_has_one_order() {
        let li = parse_li_lim(TINY).unwrap();
        assert_eq!(li.vehicle_count, 2);
        assert_eq!(li.capacity, 10);
        assert_eq!(li.pairs(), vec![(1, 2)]);
    }

    #[test]
    fn text_round_trip() {
        let li = parse_li_lim(TINY).unwrap();
        assert_eq!(parse_li_lim(&li.to_text()).unwrap(), li);
        let s = surrogate_li_lim("LR1_2_3").unwrap();
        assert_eq!(parse_li_lim(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn unbalanced_pair_reports_line() {
        let bad = TINY.replace("-5 10", "-4 10");
        match parse_li_lim(&bad) {
            Err(BenchError::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("cancel"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_reference_and_garbage_rejected() {
        let dangling = TINY.replace("0 50 2 0 2", "0 50 2 0 7");
        assert!(matches!(parse_li_lim(&dangling), Err(BenchError::Parse { line: 3, .. })));
        let garbage = TINY.replace("3 4 5", "3 x 5");
        assert!(matches!(parse_li_lim(&garbage), Err(BenchError::Parse { line: 3, .. })));
        let short = TINY.replace("6 8 -5 10 60 2 1 0", "6 8 -5");
        assert!(matches!(parse_li_lim(&short), Err(BenchError::Parse { line: 4, .. })));
    }

    #[test]
    fn surrogate_shapes() {
        let lc = surrogate_li_lim("LC1_2_2").unwrap();
        assert_eq!(lc.rows.len(), 201);
        assert_eq!(lc.pairs().len(), 100);
        assert_eq!((lc.rows[0].x, lc.rows[0].y, lc.rows[0].latest), (70.0, 70.0, 1351.0));
        assert_eq!(lc, surrogate_li_lim("LC1_2_2").unwrap());
        // same family, same coordinates
        let mut a: Vec<_> = lc.rows.iter().map(|r| (r.x as i64, r.y as i64)).collect();
        let mut b: Vec<_> =
            surrogate_li_lim("LC1_2_6").unwrap().rows.iter().map(|r| (r.x as i64, r.y as i64)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(matches!(surrogate_li_lim("foo"), Err(BenchError::UnknownName(_))));
    }

    #[test]
    fn merge_counts_and_offset() {
        let a = parse_li_lim(TINY).unwrap();
        let inst = offset_merge(&MergeSpec::new("a", "b", (10.0, 0.0)), &a, &a).unwrap();
        assert_eq!(inst.orders.len(), 2);
        assert_eq!(inst.locations.len(), 6);
        assert_eq!(inst.vehicles.len(), 4);
        assert_eq!(inst.locations[3].x, 10.0);
        // depot of LSP 1 sits 10 units from depot of LSP 0
        assert_eq!(inst.matrix.distance(LocationId(0), LocationId(3)), 10 * SCALE);
        assert_eq!(inst.orders[1].owner, LspId(1));
        assert!(inst.all_revenue_zero());
    }

    #[test]
    fn revenue_modes() {
        let a = parse_li_lim(TINY).unwrap();
        let mut spec = MergeSpec::new("a", "b", (0.0, 0.0));
        spec.revenue_mode = RevenueMode::PerDistance;
        spec.revenue = 2.0;
        // pickup (3,4) to drop-off (6,8) is 5 units
        assert_eq!(offset_merge(&spec, &a, &a).unwrap().orders[0].rev, Money::from_units(10.0));
        spec.revenue_mode = RevenueMode::Fixed;
        assert_eq!(offset_merge(&spec, &a, &a).unwrap().orders[1].rev, Money::from_units(2.0));
    }

    #[test]
    fn spec_parses_from_toml_and_json() {
        let t = parse_merge_spec("file_a = \"LC1_2_2\"\nfile_b = \"LC1_2_6\"\noffset = [42, -42]\n").unwrap();
        assert_eq!(t, MergeSpec::new("LC1_2_2", "LC1_2_6", (42.0, -42.0)));
        let j = parse_merge_spec(
            r#"{"file_a":"A","file_b":"B","offset":[1,2],"beta":[5,5],"revenue_mode":"per-distance","revenue":1}"#,
        )
        .unwrap();
        assert_eq!(j.revenue_mode, RevenueMode::PerDistance);
        assert_eq!(j.beta, [5.0, 5.0]);
        assert!(parse_merge_spec("file_a = \"A\"\nfile_b = \"B\"\noffset = [nan, 0]\n").is_err());
    }

    #[test]
    fn mock_defaults() {
        let inst = generate_mock_small(3, MockParams::default()).unwrap();
        assert_eq!(inst.vehicles.len(), 60);
        assert_eq!(inst.orders.len(), 40);
        assert_eq!(inst.lsps.len(), 6);
        assert!(inst.orders.iter().all(|o| o.rev > Money::ZERO));
        assert_eq!(inst.orders[7].owner, LspId(1));
        assert_eq!(inst, generate_mock_small(3, MockParams::default()).unwrap());
        assert_ne!(inst, generate_mock_small(4, MockParams::default()).unwrap());
    }

    #[test]
    fn toy_is_valid() {
        let inst = toy_instance();
        inst.validate().unwrap();
        assert!(inst.all_revenue_zero());
        assert_eq!(inst.orders_of(LspId(1)).count(), 2);
    }
}
