//! Path construction from straight/arc/clothoid segments, acceleration-limited
//! speed-profile planning, straight-section detection, and the six-trajectory
//! benchmark suite.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrajectoryError {
    #[error("arclength step must be positive")]
    InvalidStep,
    #[error("invalid segment: {0}")]
    InvalidSegment(&'static str),
    #[error("path is empty")]
    EmptyPath,
    #[error("speed profile length does not match path length")]
    SpeedLengthMismatch,
}

/// One sampled point of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    /// Arclength from the path start, m.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// Tangent heading, rad.
    pub heading: f64,
    /// Signed curvature, 1/m (positive curves left).
    pub kappa: f64,
}

/// Path primitive. Each segment starts at the previous segment's end pose,
/// so the chained path is tangent-continuous by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Straight { length: f64 },
    /// Signed radius (positive curves left), positive sweep angle.
    Arc { radius: f64, angle: f64 },
    /// Curvature ramps linearly from `k0` to `k1` over `length`.
    Clothoid { k0: f64, k1: f64, length: f64 },
}

impl Segment {
    pub fn straight(length: f64) -> Self {
        Segment::Straight { length }
    }

    pub fn arc(radius: f64, angle: f64) -> Self {
        Segment::Arc { radius, angle }
    }

    pub fn clothoid(k0: f64, k1: f64, length: f64) -> Self {
        Segment::Clothoid { k0, k1, length }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Straight { length } => length,
            Segment::Arc { radius, angle } => radius.abs() * angle,
            Segment::Clothoid { length, .. } => length,
        }
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        let finite = match *self {
            Segment::Straight { length } => length.is_finite(),
            Segment::Arc { radius, angle } => radius.is_finite() && angle.is_finite(),
            Segment::Clothoid { k0, k1, length } => {
                k0.is_finite() && k1.is_finite() && length.is_finite()
            }
        };
        if !finite {
            return Err(TrajectoryError::InvalidSegment("non-finite parameter"));
        }
        if let Segment::Arc { radius, angle } = *self {
            if radius == 0.0 {
                return Err(TrajectoryError::InvalidSegment("zero arc radius"));
            }
            if angle <= 0.0 {
                return Err(TrajectoryError::InvalidSegment("non-positive arc angle"));
            }
        }
        if self.length() <= 0.0 {
            return Err(TrajectoryError::InvalidSegment("non-positive length"));
        }
        Ok(())
    }

    /// Curvature at local arclength `u`.
    fn kappa_at(&self, u: f64) -> f64 {
        match *self {
            Segment::Straight { .. } => 0.0,
            Segment::Arc { radius, .. } => 1.0 / radius,
            Segment::Clothoid { k0, k1, length } => k0 + (k1 - k0) * u / length,
        }
    }

    /// Heading change from the segment start to local arclength `u`.
    fn heading_at(&self, u: f64) -> f64 {
        match *self {
            Segment::Straight { .. } => 0.0,
            Segment::Arc { radius, .. } => u / radius,
            Segment::Clothoid { k0, k1, length } => k0 * u + (k1 - k0) * u * u / (2.0 * length),
        }
    }

    /// Position offset from the segment start pose `(x0, y0, h0)` at local
    /// arclength `u`. Closed form for straights and arcs, composite Simpson
    /// for clothoids.
    fn position_at(&self, x0: f64, y0: f64, h0: f64, u: f64) -> (f64, f64) {
        match *self {
            Segment::Straight { .. } => (x0 + u * h0.cos(), y0 + u * h0.sin()),
            Segment::Arc { radius, .. } => {
                let h = h0 + u / radius;
                (x0 + radius * (h.sin() - h0.sin()), y0 - radius * (h.cos() - h0.cos()))
            }
            Segment::Clothoid { .. } => {
                let steps = ((u / 0.125).ceil() as usize).max(1);
                let h = u / steps as f64;
                let theta = |t: f64| h0 + self.heading_at(t);
                let mut x = x0;
                let mut y = y0;
                for i in 0..steps {
                    let a = i as f64 * h;
                    let m = a + 0.5 * h;
                    let b = a + h;
                    x += h / 6.0 * (theta(a).cos() + 4.0 * theta(m).cos() + theta(b).cos());
                    y += h / 6.0 * (theta(a).sin() + 4.0 * theta(m).sin() + theta(b).sin());
                }
                (x, y)
            }
        }
    }
}

/// Chain segments into a path sampled at arclength step `ds`, starting at
/// the origin with zero heading. The exact path endpoint is always included.
pub fn build_path(segments: &[Segment], ds: f64) -> Result<Vec<PathPoint>, TrajectoryError> {
    if !(ds > 0.0) || !ds.is_finite() {
        return Err(TrajectoryError::InvalidStep);
    }
    if segments.is_empty() {
        return Err(TrajectoryError::EmptyPath);
    }
    for seg in segments {
        seg.validate()?;
    }
    let total: f64 = segments.iter().map(Segment::length).sum();

    let mut points = Vec::new();
    // pose at the start of the current segment
    let (mut sx, mut sy, mut sh) = (0.0, 0.0, 0.0);
    let mut seg_start = 0.0;
    let mut iter = segments.iter();
    let mut seg = iter.next().unwrap();
    let mut k = 0usize;
    loop {
        let s = (k as f64 * ds).min(total);
        // advance to the segment containing s (attribute boundaries to the
        // earlier segment so clothoid endpoints keep their curvature)
        while s - seg_start > seg.length() + 1e-12 {
            let l = seg.length();
            let (nx, ny) = seg.position_at(sx, sy, sh, l);
            sh += seg.heading_at(l);
            (sx, sy) = (nx, ny);
            seg_start += l;
            seg = iter.next().expect("s within total length");
        }
        let u = (s - seg_start).min(seg.length());
        let (x, y) = seg.position_at(sx, sy, sh, u);
        points.push(PathPoint {
            s,
            x,
            y,
            heading: sh + seg.heading_at(u),
            kappa: seg.kappa_at(u),
        });
        if s >= total {
            break;
        }
        k += 1;
    }
    Ok(points)
}

/// Speed and acceleration limits of one benchmark trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingLimits {
    /// Maximum speed, km/h.
    pub v_max_kmh: f64,
    /// Maximum longitudinal acceleration, m/s^2.
    pub a_x_max: f64,
    /// Maximum longitudinal deceleration (positive), m/s^2.
    pub a_x_min: f64,
    /// Maximum lateral acceleration, m/s^2.
    pub a_y_max: f64,
}

impl DrivingLimits {
    pub fn v_max_ms(&self) -> f64 {
        self.v_max_kmh / 3.6
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.v_max_kmh > 0.0 && self.a_x_max > 0.0 && self.a_x_min > 0.0 && self.a_y_max > 0.0 {
            Ok(())
        } else {
            Err(TrajectoryError::InvalidSegment("limits must be positive"))
        }
    }
}

/// A benchmark trajectory: sampled path, planned speed per point, the limits
/// the profile was planned under, and a driving-purpose label.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path: Vec<PathPoint>,
    pub speed: Vec<f64>,
    pub limits: DrivingLimits,
    pub purpose: String,
}

impl Trajectory {
    pub fn length(&self) -> f64 {
        self.path.last().map(|p| p.s).unwrap_or(0.0)
    }

    pub fn max_speed(&self) -> f64 {
        self.speed.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Acceleration-limited speed planning with zero boundary speed.
pub fn plan_speed_profile(path: &[PathPoint], limits: &DrivingLimits) -> Vec<f64> {
    plan_speed_profile_with_boundary(path, limits, 0.0)
}

/// Curvature cap `min(v_max, sqrt(a_y_max/|kappa|))`, then a forward pass
/// bounding acceleration and a backward pass bounding deceleration.
pub fn plan_speed_profile_with_boundary(
    path: &[PathPoint],
    limits: &DrivingLimits,
    boundary: f64,
) -> Vec<f64> {
    let v_max = limits.v_max_ms();
    let mut v: Vec<f64> = path
        .iter()
        .map(|p| {
            if p.kappa.abs() > 1e-12 {
                v_max.min((limits.a_y_max / p.kappa.abs()).sqrt())
            } else {
                v_max
            }
        })
        .collect();
    if v.is_empty() {
        return v;
    }
    let n = v.len();
    v[0] = v[0].min(boundary);
    for i in 1..n {
        let ds = path[i].s - path[i - 1].s;
        let reach = (v[i - 1] * v[i - 1] + 2.0 * limits.a_x_max * ds).sqrt();
        v[i] = v[i].min(reach);
    }
    v[n - 1] = v[n - 1].min(boundary);
    for i in (0..n - 1).rev() {
        let ds = path[i + 1].s - path[i].s;
        let reach = (v[i + 1] * v[i + 1] + 2.0 * limits.a_x_min * ds).sqrt();
        v[i] = v[i].min(reach);
    }
    v
}

/// Curvature threshold below which the path counts as straight, 1/m.
pub const STRAIGHT_KAPPA_MAX: f64 = 0.01;
/// Minimum traversal time for a straight section to qualify, s.
pub const STRAIGHT_MIN_SECONDS: f64 = 5.0;

/// Maximal `(s_start, s_end)` intervals where `|kappa| < 0.01` and the
/// traversal time under the speed profile exceeds 5 s.
pub fn straight_sections(trajectory: &Trajectory) -> Vec<(f64, f64)> {
    let path = &trajectory.path;
    let speed = &trajectory.speed;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=path.len() {
        let straight = i < path.len() && path[i].kappa.abs() < STRAIGHT_KAPPA_MAX;
        match (straight, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                let b = i - 1;
                if b > a && section_time(path, speed, a, b) > STRAIGHT_MIN_SECONDS {
                    out.push((path[a].s, path[b].s));
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn section_time(path: &[PathPoint], speed: &[f64], a: usize, b: usize) -> f64 {
    let mut t = 0.0;
    for i in a..b {
        let ds = path[i + 1].s - path[i].s;
        let v = 0.5 * (speed[i] + speed[i + 1]);
        t += ds / v.max(1e-3);
    }
    t
}

/// Arclength sampling step used throughout the benchmark suite, m.
pub const SUITE_DS: f64 = 0.5;

struct SuiteSpec {
    limits: DrivingLimits,
    purpose: &'static str,
    target_length: f64,
    /// Everything but the final straight, which is sized to hit the target.
    segments: Vec<Segment>,
}

fn curve(radius: f64, angle: f64, ramp: f64) -> [Segment; 3] {
    let k = 1.0 / radius;
    [
        Segment::clothoid(0.0, k, ramp),
        Segment::arc(radius, angle),
        Segment::clothoid(k, 0.0, ramp),
    ]
}

fn suite_specs() -> Vec<SuiteSpec> {
    let mut specs = Vec::new();

    // low-speed trajectory: gentle limits, short curves
    {
        let mut segs = alloc::vec![Segment::straight(170.0)];
        for i in 0..4 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            segs.extend(curve(sign * 40.0, 0.5236, 8.0));
            if i < 3 {
                segs.push(Segment::straight(20.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 35.0, a_x_max: 0.4, a_x_min: 0.7, a_y_max: 1.0 },
            purpose: "Quiet",
            target_length: 471.0,
            segments: segs,
        });
    }

    // moderate trajectory, long
    {
        let mut segs = alloc::vec![Segment::straight(260.0)];
        for i in 0..6 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            segs.extend(curve(sign * 80.0, 0.6981, 15.0));
            if i < 5 {
                segs.push(Segment::straight(60.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 71.0, a_x_max: 1.0, a_x_min: 2.0, a_y_max: 2.0 },
            purpose: "Moderate",
            target_length: 1391.8,
            segments: segs,
        });
    }

    // aggressive medium-speed trajectory: tight curves, short
    {
        let mut segs = alloc::vec![Segment::straight(120.0)];
        for i in 0..4 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            segs.extend(curve(sign * 30.0, 0.7854, 6.0));
            if i < 3 {
                segs.push(Segment::straight(15.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 66.0, a_x_max: 2.2, a_x_min: 3.0, a_y_max: 4.0 },
            purpose: "Aggressive-medium speed",
            target_length: 354.3,
            segments: segs,
        });
    }

    // high-speed trajectory: curves early at low speed, then a long straight
    // sized so the speed limit is actually reachable within 500 m
    {
        let mut segs = alloc::vec![Segment::straight(25.0)];
        segs.extend(curve(20.0, 0.3491, 5.0));
        segs.push(Segment::straight(8.0));
        for i in 0..3 {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            segs.extend(curve(sign * 60.0, 0.2618, 5.0));
            if i < 2 {
                segs.push(Segment::straight(6.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 120.0, a_x_max: 2.5, a_x_min: 3.5, a_y_max: 4.0 },
            purpose: "High speed",
            target_length: 500.0,
            segments: segs,
        });
    }

    // aggressive high-speed trajectory, longest
    {
        let mut segs = alloc::vec![Segment::straight(400.0)];
        for i in 0..8 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            segs.extend(curve(sign * 70.0, 0.6981, 12.0));
            if i < 7 {
                segs.push(Segment::straight(80.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 100.0, a_x_max: 1.5, a_x_min: 2.0, a_y_max: 4.0 },
            purpose: "Aggressive-high speed",
            target_length: 2119.6,
            segments: segs,
        });
    }

    // second moderate trajectory
    {
        let mut segs = alloc::vec![Segment::straight(150.0)];
        for i in 0..8 {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            segs.extend(curve(sign * 90.0, 0.7854, 15.0));
            if i < 7 {
                segs.push(Segment::straight(70.0));
            }
        }
        specs.push(SuiteSpec {
            limits: DrivingLimits { v_max_kmh: 70.0, a_x_max: 2.0, a_x_min: 2.0, a_y_max: 2.0 },
            purpose: "Moderate",
            target_length: 1959.3,
            segments: segs,
        });
    }

    specs
}

/// The six benchmark trajectories. Lengths match the published values
/// within 2% (a final straight is sized exactly to the target), planned
/// speed maxima within 5%.
pub fn benchmark_suite() -> Vec<Trajectory> {
    suite_specs()
        .into_iter()
        .map(|spec| {
            let mut segs = spec.segments;
            let used: f64 = segs.iter().map(Segment::length).sum();
            let tail = spec.target_length - used;
            debug_assert!(tail > 0.0, "curvy part longer than target");
            segs.push(Segment::straight(tail));
            let path = build_path(&segs, SUITE_DS).expect("suite segments valid");
            let speed = plan_speed_profile(&path, &spec.limits);
            Trajectory { path, speed, limits: spec.limits, purpose: String::from(spec.purpose) }
        })
        .collect()
}
