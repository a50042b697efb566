use num_complex::Complex64;

/// A point of C^n for n = 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [Complex64; 2],
    n: usize,
}

impl Point {
    pub fn one(z: Complex64) -> Self {
        Point { coords: [z, Complex64::new(0.0, 0.0)], n: 1 }
    }

    pub fn two(z1: Complex64, z2: Complex64) -> Self {
        Point { coords: [z1, z2], n: 2 }
    }

    pub fn from_slice(zs: &[Complex64]) -> Self {
        match zs {
            [z] => Point::one(*z),
            [z1, z2] => Point::two(*z1, *z2),
            _ => panic!("only n = 1, 2 supported"),
        }
    }

    pub fn real(x: f64) -> Self {
        Point::one(Complex64::new(x, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords[..self.n]
    }

    /// Squared Euclidean norm |z|^2 = sum |z_i|^2.
    pub fn norm_sqr(&self) -> f64 {
        self.coords().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean distance in C^n = R^{2n}.
    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// The log-radial coordinates v_i = ln |z_i|^2.
    pub fn log_radial(&self) -> Vec<f64> {
        self.coords().iter().map(|z| z.norm_sqr().ln()).collect()
    }

    /// Real coordinates (x_1, y_1, ..., x_n, y_n).
    pub fn to_real(&self) -> Vec<f64> {
        self.coords().iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real(xs: &[f64]) -> Self {
        match xs {
            [x, y] => Point::one(Complex64::new(*x, *y)),
            [x1, y1, x2, y2] => Point::two(Complex64::new(*x1, *y1), Complex64::new(*x2, *y2)),
            _ => panic!("expected 2 or 4 real coordinates"),
        }
    }
}

impl std::ops::Index<usize> for Point {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.coords()[i]
    }
}
