use crate::geometry::Vec3;

/// Arc-length table resolution per spline segment.
const SAMPLES_PER_SEGMENT: usize = 256;

/// Centripetal Catmull-Rom spline through a polyline, with an arc-length
/// lookup table for uniform resampling.
///
/// End tangents come from reflected phantom points `2*P0 - P1` and
/// `2*Pn - Pn-1`.
#[derive(Debug, Clone)]
pub struct CatmullRom {
    points: Vec<Vec3>,
    /// Cumulative arc length at table sample `k` of segment `k / SAMPLES`.
    table: Vec<f64>,
}

impl CatmullRom {
    pub fn new(points: &[Vec3]) -> Self {
        assert!(points.len() >= 2, "spline needs at least two points");
        let n = points.len();
        let mut padded = Vec::with_capacity(n + 2);
        padded.push(points[0] * 2.0 - points[1]);
        padded.extend_from_slice(points);
        padded.push(points[n - 1] * 2.0 - points[n - 2]);

        let mut spline = CatmullRom {
            points: padded,
            table: Vec::with_capacity((n - 1) * SAMPLES_PER_SEGMENT + 1),
        };
        spline.build_table();
        spline
    }

    fn segments(&self) -> usize {
        self.points.len() - 3
    }

    fn build_table(&mut self) {
        let mut total = 0.0;
        self.table.push(0.0);
        for seg in 0..self.segments() {
            let mut prev = self.eval(seg, 0.0);
            for k in 1..=SAMPLES_PER_SEGMENT {
                let p = self.eval(seg, k as f64 / SAMPLES_PER_SEGMENT as f64);
                total += (p - prev).norm();
                self.table.push(total);
                prev = p;
            }
        }
    }

    /// Evaluate segment `seg` (between input points `seg` and `seg + 1`)
    /// at local parameter `u` in [0, 1] using the Barry-Goldman pyramid.
    pub fn eval(&self, seg: usize, u: f64) -> Vec3 {
        let [p0, p1, p2, p3] = [
            self.points[seg],
            self.points[seg + 1],
            self.points[seg + 2],
            self.points[seg + 3],
        ];
        if u <= 0.0 {
            return p1;
        }
        if u >= 1.0 {
            return p2;
        }
        let knot = |a: &Vec3, b: &Vec3| (b - a).norm().sqrt().max(1e-12);
        let t0 = 0.0;
        let t1 = t0 + knot(&p0, &p1);
        let t2 = t1 + knot(&p1, &p2);
        let t3 = t2 + knot(&p2, &p3);
        let t = t1 + (t2 - t1) * u;

        let lerp = |a: &Vec3, b: &Vec3, ta: f64, tb: f64| a * ((tb - t) / (tb - ta)) + b * ((t - ta) / (tb - ta));
        let a1 = lerp(&p0, &p1, t0, t1);
        let a2 = lerp(&p1, &p2, t1, t2);
        let a3 = lerp(&p2, &p3, t2, t3);
        let b1 = lerp(&a1, &a2, t0, t2);
        let b2 = lerp(&a2, &a3, t1, t3);
        lerp(&b1, &b2, t1, t2)
    }

    pub fn total_length(&self) -> f64 {
        *self.table.last().expect("table is never empty")
    }

    /// Arc length at each input point.
    pub fn knot_arc_lengths(&self) -> Vec<f64> {
        (0..=self.segments())
            .map(|seg| self.table[seg * SAMPLES_PER_SEGMENT])
            .collect()
    }

    /// Point at arc length `s`, clamped to the spline's extent.
    pub fn point_at_arc_length(&self, s: f64) -> Vec3 {
        let s = s.clamp(0.0, self.total_length());
        let idx = self.table.partition_point(|&x| x < s);
        if idx == 0 {
            return self.eval(0, 0.0);
        }
        let (lo, hi) = (self.table[idx - 1], self.table[idx.min(self.table.len() - 1)]);
        let frac = if hi > lo { (s - lo) / (hi - lo) } else { 0.0 };
        let global = (idx - 1) as f64 + frac;
        let seg = ((global as usize) / SAMPLES_PER_SEGMENT).min(self.segments() - 1);
        let u = global / SAMPLES_PER_SEGMENT as f64 - seg as f64;
        self.eval(seg, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn passes_through_control_points() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 2.0, 0.0),
            Vec3::new(3.0, 2.5, 1.0),
            Vec3::new(4.0, 0.0, 0.5),
        ];
        let s = CatmullRom::new(&pts);
        for (i, p) in pts.iter().enumerate().take(3) {
            assert_relative_eq!(s.eval(i, 0.0), *p);
        }
        assert_relative_eq!(s.eval(2, 1.0), pts[3]);
        let knots = s.knot_arc_lengths();
        for (i, k) in knots.iter().enumerate() {
            assert_relative_eq!(s.point_at_arc_length(*k), pts[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn tight_turn_does_not_loop() {
        // Centripetal parameterization stays within the control hull at a cusp.
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.05, 0.05, 0.0),
            Vec3::new(0.0, 0.1, 0.0),
        ];
        let s = CatmullRom::new(&pts);
        for k in 0..=100 {
            let p = s.eval(1, k as f64 / 100.0);
            assert!(p.x < 1.2 && p.y > -0.05 && p.y < 0.15, "{p:?}");
        }
    }
}
