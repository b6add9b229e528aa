//! Planar fixtures for unit tests.

use crate::model::*;

#[derive(Clone, Debug)]
pub struct OrderSpec {
    pub pickup: (f64, f64),
    pub dropoff: (f64, f64),
    pub pickup_window: (f64, f64),
    pub dropoff_window: (f64, f64),
    pub owner: u32,
    pub vol: i64,
}

impl OrderSpec {
    pub fn new(pickup: (f64, f64), dropoff: (f64, f64)) -> OrderSpec {
        OrderSpec { pickup, dropoff, pickup_window: (0.0, 1000.0), dropoff_window: (0.0, 1000.0), owner: 0, vol: 1 }
    }

    pub fn owner(mut self, owner: u32) -> OrderSpec {
        self.owner = owner;
        self
    }
}

/// One LSP (alpha = 1, beta = 0) with one vehicle per depot, Euclidean
/// distances, time equal to distance, every order worth `rev`.
pub fn grid_instance(depots: &[(f64, f64)], orders: &[OrderSpec], cap: i64, rev: f64) -> Instance {
    let lsp_count = orders.iter().map(|o| o.owner + 1).max().unwrap_or(1).max(1) as usize;
    let mut points: Vec<(f64, f64)> = depots.to_vec();
    for o in orders {
        points.push(o.pickup);
        points.push(o.dropoff);
    }
    let matrix = TimeDistanceMatrix::from_fn(points.len(), |i, j| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        let d = ((dx * dx + dy * dy).sqrt() * SCALE as f64).round() as i64;
        (d, d)
    })
    .unwrap();
    let fx = |v: f64| (v * SCALE as f64).round() as i64;
    let mut lsps: Vec<LspParams> = (0..lsp_count)
        .map(|i| LspParams { id: LspId(i as u32), alpha: Money::from_units(1.0), beta: Money::ZERO, fleet: vec![] })
        .collect();
    let vehicles = depots
        .iter()
        .enumerate()
        .map(|(i, _)| {
            lsps[0].fleet.push(VehicleId(i as u32));
            Vehicle {
                id: VehicleId(i as u32),
                lspid: LspId(0),
                cap,
                depot: Waypoint::depot(LocationId(i as u32), 0, fx(10_000.0)),
            }
        })
        .collect();
    let orders = orders
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let id = OrderId(i as u32);
            let base = depots.len() + 2 * i;
            Order {
                id,
                owner: LspId(o.owner),
                rev: Money::from_units(rev),
                pickup: Waypoint {
                    loc: LocationId::from_index(base),
                    st: fx(o.pickup_window.0),
                    et: fx(o.pickup_window.1),
                    service: 0,
                    vol: o.vol,
                    order: Some(id),
                },
                dropoff: Waypoint {
                    loc: LocationId::from_index(base + 1),
                    st: fx(o.dropoff_window.0),
                    et: fx(o.dropoff_window.1),
                    service: 0,
                    vol: -o.vol,
                    order: Some(id),
                },
            }
        })
        .collect();
    Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        scale: SCALE,
        name: "grid".into(),
        locations: points.iter().enumerate().map(|(i, &(x, y))| Location { id: LocationId(i as u32), x, y }).collect(),
        matrix,
        orders,
        vehicles,
        lsps,
    }
}
