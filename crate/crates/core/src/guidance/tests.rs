use super::*;
use crate::propagate::{evolve_1d_series, kinetic_dt};
use crate::qfield::{build_packet, superpose, PacketSpec};
use crate::Grid1D;

fn crossing_series(weight: f64) -> Series1D<f64> {
    let g = Grid1D::new(-48.0, 48.0, 2048).unwrap();
    let specs = [
        PacketSpec::gaussian(-19.2, 3.2, 20.0),
        PacketSpec::gaussian(19.2, 3.2, -20.0).with_weight(weight),
    ];
    let psi = superpose(&g, &specs).unwrap();
    let dt = kinetic_dt(&psi, 1.0, 0.5);
    evolve_1d_series(&psi, None, 0.0, 1.92, dt, 10).unwrap()
}

#[test]
fn free_gaussian_center_stays_put() {
    let g = Grid1D::new(-20.0, 20.0, 512).unwrap();
    let psi = build_packet(&g, &PacketSpec::gaussian(0.0, 1.0, 0.0)).unwrap().normalized().unwrap();
    let series = evolve_1d_series(&psi, None, 0.0, 2.0, 5e-3, 2).unwrap();
    let tr = integrate_trajectory(&series, 0.0, Integration::default()).unwrap();
    assert!(tr.xs().iter().all(|x| x.abs() < 1e-3));
    // off-center starts ride the spreading: x(t) = x0 sqrt(1 + t^2)
    let tr = integrate_trajectory(&series, 0.5, Integration::default()).unwrap();
    assert!((tr.last()[0] - 0.5 * 5f64.sqrt()).abs() < 1e-4, "{}", tr.last()[0]);
}

#[test]
fn crossing_packets_turn_the_particle_around() {
    let series = crossing_series(1.0);
    let starts = [19.2, 18.0, 21.0, -19.2];
    let paths: Vec<_> = integrate_ensemble(&series, &starts, Integration::default())
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    for tr in &paths[..3] {
        assert!(tr.last()[0] > 0.0);
        assert!((tr.final_velocity(0) - 20.0).abs() < 0.5, "v = {}", tr.final_velocity(0));
        let min = tr.xs().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "crossed the midpoint");
    }
    // mirror start gives the mirrored path
    for i in 0..paths[0].len() {
        assert!((paths[0].x(i) + paths[3].x(i)).abs() < 1e-6);
    }
}

#[test]
fn single_packet_moves_uniformly() {
    let series = crossing_series(0.0);
    let tr = integrate_trajectory(&series, -19.2, Integration::default()).unwrap();
    for (t, x) in tr.times().iter().zip(tr.xs()) {
        assert!((x - (-19.2 + 20.0 * t)).abs() < 1e-3);
    }
}

#[test]
fn trajectories_do_not_cross() {
    let series = crossing_series(1.0);
    let starts: Vec<f64> = (0..40).map(|i| -26.0 + 0.35 * i as f64).chain((0..40).map(|i| 12.4 + 0.35 * i as f64)).collect();
    let paths: Vec<_> = integrate_ensemble(&series, &starts, Integration::default())
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    assert!(ordering_preserved(&paths));
    let pair = [10.0, 10.0 + 1e-6];
    let paths: Vec<_> = integrate_ensemble(&series, &pair, Integration::default())
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    assert!(ordering_preserved(&paths));
}

#[test]
fn halving_the_step_barely_moves_endpoints() {
    let series = crossing_series(1.0);
    let starts = [15.0, 19.2, 23.0];
    let coarse = integrate_ensemble(&series, &starts, Integration { substeps: 4, ..Integration::default() }).unwrap();
    let fine = integrate_ensemble(&series, &starts, Integration { substeps: 8, ..Integration::default() }).unwrap();
    for (a, b) in coarse.iter().zip(&fine) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert!((a.last()[0] - b.last()[0]).abs() < 1e-4);
    }
}

#[test]
fn ensemble_stays_distributed_as_the_density() {
    let series = crossing_series(1.0);
    let spec = EnsembleSpec::new(2000, 5, Sampling::Density).unwrap();
    let starts = sample_initial(SampleSource::Wave(&series.fields[0]), &spec).unwrap();
    let finals: Vec<f64> = integrate_ensemble(&series, &starts, Integration::default())
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap().last()[0])
        .collect();
    let last = series.fields.last().unwrap();
    let g = last.grid();
    let rho = last.density();
    let total: f64 = rho.iter().sum();
    let cdf = |x: f64| {
        let u = (x - g.x_min()) / g.dx();
        let i = u.floor() as usize;
        let below: f64 = rho[..i.min(rho.len())].iter().sum();
        (below + (u - i as f64) * rho.get(i).copied().unwrap_or(0.0)) / total
    };
    let d = ks_statistic(&finals, cdf);
    assert!(d < 0.035, "KS {d}");
}

struct Wall;

impl VelocityField<f64, 1> for Wall {
    fn velocity(&self, p: [f64; 1]) -> Option<[f64; 1]> {
        (p[0] < 1.0).then_some([1.0])
    }
}

#[test]
fn paths_halt_at_nodes() {
    let mut tracker = Tracker::new(0.0, &[[0.0], [-5.0]], Integration::default());
    for k in 0..4 {
        let t = k as f64 * 0.5;
        tracker.advance(&Wall, &Wall, t, t + 0.5, k == 3);
    }
    let out = tracker.finish();
    match &out[0] {
        Err(Error::NodeEncounter { time, point }) => {
            assert!(*time > 0.5 && *time <= 1.0);
            assert!(point[0] > 0.5 && point[0] <= 1.0);
        }
        other => panic!("expected a node report, got {other:?}"),
    }
    let free = out[1].as_ref().unwrap();
    assert!((free.last()[0] + 3.0).abs() < 1e-12);
    assert_eq!(free.len(), 5);
}

#[test]
fn start_below_floor_is_rejected() {
    let series = crossing_series(1.0);
    assert!(matches!(integrate_trajectory(&series, 47.0, Integration::default()), Err(Error::Domain(_))));
}

