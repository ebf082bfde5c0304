//! Exact arithmetic in the ring Z[omega]/2^k where omega = e^{i pi/4}.
//!
//! Every amplitude a Clifford+T circuit can produce lives in this ring, so
//! equality tests and magnitude computations are exact. The representation is
//! four signed integer coefficients over a power-of-two denominator:
//! `(c0 + c1 w + c2 w^2 + c3 w^3) / 2^den_pow` with `w^4 = -1`. The exponent
//! is signed: values far above one keep small coefficients and a negative
//! `den_pow` rather than overflowing the coefficients.

/// Exact amplitude value. Construct via [`ExactAmplitude::zero`],
/// [`ExactAmplitude::one`], [`ExactAmplitude::from_int`] or
/// [`ExactAmplitude::phase_form`].
#[derive(Clone, Copy, Debug)]
pub struct ExactAmplitude {
    c: [i64; 4],
    den_pow: i64,
}

impl ExactAmplitude {
    #[must_use]
    pub fn zero() -> Self {
        Self { c: [0; 4], den_pow: 0 }
    }

    #[must_use]
    pub fn one() -> Self {
        Self::from_int(1)
    }

    #[must_use]
    pub fn from_int(v: i64) -> Self {
        Self { c: [v, 0, 0, 0], den_pow: 0 }
    }

    #[must_use]
    pub fn from_coeffs(c: [i64; 4], den_pow: i64) -> Self {
        Self { c, den_pow }.normalized()
    }

    /// The value `2^{s/2} * w^m`. This is the shape of every nonzero
    /// amplitude of a stabilizer state.
    #[must_use]
    pub fn phase_form(s: i64, m: i64) -> Self {
        let mut out = Self::root8(m);
        out.den_pow = -s.div_euclid(2);
        if s.rem_euclid(2) != 0 {
            out = out.mul(&Self::sqrt2());
        }
        out.normalized()
    }

    /// `w^m` for any integer exponent.
    #[must_use]
    pub fn root8(m: i64) -> Self {
        let m = m.rem_euclid(8) as usize;
        let mut c = [0i64; 4];
        c[m % 4] = if m < 4 { 1 } else { -1 };
        Self { c, den_pow: 0 }
    }

    /// `sqrt(2) = w - w^3`.
    #[must_use]
    pub fn sqrt2() -> Self {
        Self { c: [0, 1, 0, -1], den_pow: 0 }
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    fn normalized(mut self) -> Self {
        if self.is_zero() {
            self.den_pow = 0;
            return self;
        }
        while self.c.iter().all(|&x| x % 2 == 0) {
            self.c.iter_mut().for_each(|x| *x /= 2);
            self.den_pow -= 1;
        }
        self
    }

    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        let dp = self.den_pow.max(other.den_pow);
        let (sa, sb) = (dp - self.den_pow, dp - other.den_pow);
        let mut c = [0i64; 4];
        for i in 0..4 {
            c[i] = (self.c[i] << sa) + (other.c[i] << sb);
        }
        Self { c, den_pow: dp }.normalized()
    }

    #[must_use]
    pub fn neg(&self) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x = -*x);
        Self { c, den_pow: self.den_pow }
    }

    #[must_use]
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        let mut c = [0i64; 4];
        for i in 0..4 {
            if self.c[i] == 0 {
                continue;
            }
            for j in 0..4 {
                let k = i + j;
                let term = self.c[i] * other.c[j];
                if k < 4 {
                    c[k] += term;
                } else {
                    c[k - 4] -= term;
                }
            }
        }
        Self { c, den_pow: self.den_pow + other.den_pow }.normalized()
    }

    /// Complex conjugate: `conj(w^k) = w^{-k}`.
    #[must_use]
    pub fn conj(&self) -> Self {
        Self {
            c: [self.c[0], -self.c[3], -self.c[2], -self.c[1]],
            den_pow: self.den_pow,
        }
    }

    /// `|z|^2`, exact (a real element of the ring: `a + b sqrt(2)`).
    #[must_use]
    pub fn mag2(&self) -> Self {
        self.mul(&self.conj())
    }

    /// Recover `(s, m)` with value `2^{s/2} w^m`, if the value has that form.
    /// Returns `None` for zero and for non-stabilizer values.
    #[must_use]
    pub fn to_phase_form(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            return None;
        }
        let n = self.normalized();
        let mag = n.mag2();
        // |z|^2 = 2^s is rational for every integer s, so the squared
        // magnitude must come out as a pure power of two.
        if mag.c[1] != 0 || mag.c[2] != 0 || mag.c[3] != 0 || mag.c[0] <= 0 {
            return None;
        }
        if mag.c[0].count_ones() != 1 {
            return None;
        }
        let s = i64::from(mag.c[0].trailing_zeros()) - mag.den_pow;
        let unit = n.mul(&Self::phase_form(-s, 0));
        (0..8).find(|&m| unit == Self::root8(m)).map(|m| (s, m))
    }

    /// Exact quotient of two values in phase form.
    #[must_use]
    pub fn div_phase_form(&self, other: &Self) -> Option<Self> {
        let (s1, m1) = self.to_phase_form()?;
        let (s2, m2) = other.to_phase_form()?;
        Some(Self::phase_form(s1 - s2, m1 - m2))
    }

    /// Numerator coefficients and denominator exponent of the normalized
    /// value. The exponent is negative for values scaled above the odd
    /// coefficient range.
    #[must_use]
    pub fn parts(&self) -> ([i64; 4], i64) {
        let n = self.normalized();
        (n.c, n.den_pow)
    }

    #[must_use]
    pub fn to_complex(&self) -> num_complex::Complex64 {
        use num_complex::Complex64;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = [
            Complex64::new(1.0, 0.0),
            Complex64::new(h, h),
            Complex64::new(0.0, 1.0),
            Complex64::new(-h, h),
        ];
        let scale = (self.den_pow as f64).exp2().recip();
        let mut z = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            z += w[i] * self.c[i] as f64;
        }
        z * scale
    }
}

impl PartialEq for ExactAmplitude {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.c == b.c && a.den_pow == b.den_pow
    }
}

impl Eq for ExactAmplitude {}

impl std::fmt::Display for ExactAmplitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (c, dp) = self.parts();
        write!(f, "({} {} {} {}) / 2^{}", c[0], c[1], c[2], c[3], dp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighth_root_cycles() {
        let w = ExactAmplitude::root8(1);
        let mut acc = ExactAmplitude::one();
        for _ in 0..8 {
            acc = acc.mul(&w);
        }
        assert_eq!(acc, ExactAmplitude::one());
        let mut acc4 = ExactAmplitude::one();
        for _ in 0..4 {
            acc4 = acc4.mul(&w);
        }
        assert_eq!(acc4, ExactAmplitude::from_int(-1));
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let r = ExactAmplitude::sqrt2();
        assert_eq!(r.mul(&r), ExactAmplitude::from_int(2));
        assert_eq!(ExactAmplitude::phase_form(1, 0), r);
        assert_eq!(
            ExactAmplitude::phase_form(-1, 0).mul(&r),
            ExactAmplitude::one()
        );
    }

    #[test]
    fn phase_form_roundtrip() {
        for s in -7i64..8 {
            for m in 0..8 {
                let v = ExactAmplitude::phase_form(s, m);
                assert_eq!(v.to_phase_form(), Some((s, m)), "s={s} m={m}");
            }
        }
    }

    #[test]
    fn huge_exponents_stay_in_the_denominator_power() {
        let big = ExactAmplitude::phase_form(401, 3);
        let small = ExactAmplitude::phase_form(-400, 5);
        assert_eq!(big.to_phase_form(), Some((401, 3)));
        assert_eq!(big.mul(&small), ExactAmplitude::sqrt2());
        let two_k = ExactAmplitude::phase_form(256, 0);
        assert_eq!(two_k.parts(), ([1, 0, 0, 0], -128));
        assert_eq!(
            two_k.add(&two_k.neg()).add(&ExactAmplitude::one()),
            ExactAmplitude::one()
        );
    }

    #[test]
    fn non_stabilizer_value_has_no_phase_form() {
        // 1 + w has |z|^2 = 2 + sqrt(2), not a power of two
        let v = ExactAmplitude::one().add(&ExactAmplitude::root8(1));
        assert_eq!(v.to_phase_form(), None);
    }

    #[test]
    fn conjugate_matches_complex() {
        let v = ExactAmplitude::from_coeffs([3, -1, 2, 5], 2);
        let z = v.to_complex();
        let zc = v.conj().to_complex();
        assert!((z.conj() - zc).norm() < 1e-12);
        let m = v.mag2().to_complex();
        assert!((m.re - z.norm_sqr()) < 1e-9 && m.im.abs() < 1e-12);
    }
}
