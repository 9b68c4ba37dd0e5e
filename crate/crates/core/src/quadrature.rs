//! One-dimensional quadrature: Gauss–Legendre rules, geometrically graded
//! composite rules, and integrals with algebraic endpoint singularities.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, started from the Tricomi guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over a list of panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, panels: &[(f64, f64)], mut f: F) -> f64 {
        panels.iter().map(|&(a, b)| self.integrate(a, b, &mut f)).sum()
    }
}

/// `(P_n(x), P_n′(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels of `[a, b]` shrinking geometrically by half toward `a`, the last one
/// of width at most `finest`.
pub fn graded_toward_left(a: f64, b: f64, finest: f64) -> Vec<(f64, f64)> {
    let mut panels = Vec::new();
    let mut hi = b;
    while hi - a > finest && panels.len() < 200 {
        let mid = a + 0.5 * (hi - a);
        panels.push((mid, hi));
        hi = mid;
    }
    panels.push((a, hi));
    panels.reverse();
    panels
}

/// Mirror image of [`graded_toward_left`].
pub fn graded_toward_right(a: f64, b: f64, finest: f64) -> Vec<(f64, f64)> {
    let mut panels: Vec<(f64, f64)> = graded_toward_left(0.0, b - a, finest)
        .into_iter()
        .rev()
        .map(|(lo, hi)| (b - hi, b - lo))
        .collect();
    panels[0].0 = a;
    panels
}

/// Panels graded toward both ends of `[a, b]`.
pub fn graded_both(a: f64, b: f64, finest: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let mut panels = graded_toward_left(a, mid, finest);
    panels.extend(graded_toward_right(mid, b, finest));
    panels
}

/// `∫_0^1 x^α (1 − x)^β g(x) dx` for `α, β > −1`.
///
/// Each half is mapped so the endpoint power becomes the identity
/// (`x = y^{1/(α+1)}` on the left, `1 − x = y^{1/(β+1)}` on the right) and the
/// remaining integrand is summed on panels graded toward the endpoint. This is
/// exact for the weight and robust when `g` is nearly singular at either end.
pub fn jacobi_integral<F: Fn(f64) -> f64>(rule: &GaussLegendre, alpha: f64, beta: f64, finest: f64, g: F) -> f64 {
    assert!(alpha > -1.0 && beta > -1.0, "endpoint powers must exceed -1");
    let (ea, eb) = (alpha + 1.0, beta + 1.0);

    let ya = 0.5f64.powf(ea);
    let left = rule.integrate_panels(&graded_both(0.0, ya, finest * ya), |y| {
        let x = y.powf(1.0 / ea);
        (1.0 - x).powf(beta) * g(x)
    }) / ea;

    let yb = 0.5f64.powf(eb);
    let right = rule.integrate_panels(&graded_both(0.0, yb, finest * yb), |y| {
        let s = y.powf(1.0 / eb);
        let x = 1.0 - s;
        x.powf(alpha) * g(x)
    }) / eb;

    left + right
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rules_stay_accurate() {
        let rule = GaussLegendre::new(120);
        let got = rule.integrate(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn panels_cover_interval() {
        for panels in [graded_toward_left(0.0, 1.0, 1e-6), graded_toward_right(0.2, 1.0, 1e-9), graded_both(0.0, 2.0, 1e-3)] {
            assert!(panels.windows(2).all(|w| (w[0].1 - w[1].0).abs() < 1e-15));
        }
        let p = graded_toward_right(0.2, 1.0, 1e-9);
        assert_eq!(p.first().unwrap().0, 0.2);
        assert_eq!(p.last().unwrap().1, 1.0);
        assert!(p.last().unwrap().1 - p.last().unwrap().0 <= 1e-9);
    }

    #[test]
    fn jacobi_integral_matches_beta_function() {
        let rule = GaussLegendre::new(12);
        for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (1.5, -0.9), (-0.95, 2.0)] {
            let got = jacobi_integral(&rule, a, b, 1e-12, |_| 1.0);
            let exact = statrs::function::beta::beta(a + 1.0, b + 1.0);
            assert!((got / exact - 1.0).abs() < 1e-12, "({a},{b}): {got} vs {exact}");
        }
    }

    #[test]
    fn jacobi_integral_resolves_near_singular_factor() {
        // ∫_0^1 (1-x)^{-1/2} / (1 - 0.999999 x) dx has a sharp peak at x = 1.
        let rule = GaussLegendre::new(12);
        let r: f64 = 0.999999;
        let got = jacobi_integral(&rule, 0.0, -0.5, 1e-14, |x| 1.0 / (1.0 - r * x));
        // substitute 1 - x = s²: 2 ∫_0^1 ds / ((1-r) + r s²)
        let exact = 2.0 / (r * (1.0 - r)).sqrt() * ((r / (1.0 - r)).sqrt()).atan();
        assert!((got / exact - 1.0).abs() < 1e-10, "{got} vs {exact}");
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x - 1.0).collect();
        assert!((ls_slope(&xs, &ys) - 0.3).abs() < 1e-14);
    }
}
