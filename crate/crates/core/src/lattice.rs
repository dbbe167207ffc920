//! Exact integer kernel for ellipses `a x^2 + b xy + c y^2 <= level`.

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{Signed, ToPrimitive, Zero};

/// Positive definite binary form with integer coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl IntForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        debug_assert!(a > 0 && c > 0 && 4 * (a as i128) * (c as i128) > (b as i128) * (b as i128));
        IntForm { a, b, c }
    }

    pub fn disc(&self) -> i128 {
        4 * self.a as i128 * self.c as i128 - self.b as i128 * self.b as i128
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    /// Form with the roles of x and y swapped.
    pub fn transposed(&self) -> IntForm {
        IntForm { a: self.c, b: self.b, c: self.a }
    }

    /// Walks every column of the ellipse, handing `(x, y_lo, y_hi)` with
    /// `y_lo <= y_hi` to `f`. Exact for any level.
    pub fn for_each_column<F: FnMut(i64, i64, i64)>(&self, level: &BigUint, mut f: F) {
        match level.to_i128().and_then(|l| l.checked_mul(4 * self.c as i128)) {
            Some(four_cl) => self.columns_small(four_cl, &mut f),
            None => self.columns_big(level, &mut f),
        }
    }

    fn columns_small<F: FnMut(i64, i64, i64)>(&self, four_cl: i128, f: &mut F) {
        let d = self.disc();
        let two_c = 2 * self.c as i128;
        let x_max = (four_cl / d).sqrt();
        let x_max = i64::try_from(x_max).expect("column bound exceeds i64");
        for x in -x_max..=x_max {
            let bx = self.b as i128 * x as i128;
            let disc = four_cl - d * (x as i128) * (x as i128);
            if disc < 0 {
                continue;
            }
            let s = disc.sqrt();
            let hi = Integer::div_floor(&(s - bx), &two_c);
            let lo = -Integer::div_floor(&(s + bx), &two_c);
            if lo <= hi {
                f(x, lo as i64, hi as i64);
            }
        }
    }

    fn columns_big<F: FnMut(i64, i64, i64)>(&self, level: &BigUint, f: &mut F) {
        let d = BigInt::from(self.disc());
        let four_cl = BigInt::from(4 * self.c) * BigInt::from(level.clone());
        let two_c = BigInt::from(2 * self.c);
        let x_max = (&four_cl / &d).sqrt();
        let x_max = x_max.to_i64().expect("column bound exceeds i64");
        for x in -x_max..=x_max {
            let xb = BigInt::from(x);
            let bx = BigInt::from(self.b) * &xb;
            let disc = &four_cl - &d * &xb * &xb;
            if disc.is_negative() {
                continue;
            }
            let s = disc.sqrt();
            let hi = (&s - &bx).div_floor(&two_c);
            let lo = -(&s + &bx).div_floor(&two_c);
            if lo <= hi {
                f(x, lo.to_i64().unwrap(), hi.to_i64().unwrap());
            }
        }
    }

    /// Number of integer points with `Q(x, y) <= level`.
    pub fn count(&self, level: &BigUint) -> u128 {
        let mut total = 0u128;
        self.for_each_column(level, |_, lo, hi| total += (hi - lo + 1) as u128);
        total
    }

    /// Number of points with `x >= 1`, `y >= 1` and `Q(x, y) <= level`.
    pub fn count_quadrant(&self, level: &BigUint) -> u128 {
        let mut total = 0u128;
        self.for_each_column(level, |x, lo, hi| {
            if x >= 1 {
                let lo = lo.max(1);
                if lo <= hi {
                    total += (hi - lo + 1) as u128;
                }
            }
        });
        total
    }

    /// Histogram of form values over all points with value `<= level`,
    /// index = value. Only for levels that fit a dense table.
    pub fn value_histogram(&self, level: u64) -> Vec<u64> {
        let mut hist = vec![0u64; level as usize + 1];
        self.for_each_column(&BigUint::from(level), |x, lo, hi| {
            let (x, b, c) = (x as i128, self.b as i128, self.c as i128);
            let mut v = self.a as i128 * x * x + b * x * lo as i128 + c * (lo as i128) * (lo as i128);
            for y in lo..hi + 1 {
                hist[v as usize] += 1;
                v += b * x + c * (2 * y as i128 + 1);
            }
        });
        hist
    }

    /// Sorted form values over all points with value `<= level`.
    pub fn sorted_values(&self, level: u64) -> Vec<u64> {
        let mut out = Vec::new();
        self.for_each_column(&BigUint::from(level), |x, lo, hi| {
            let (x, b, c) = (x as i128, self.b as i128, self.c as i128);
            let mut v = self.a as i128 * x * x + b * x * lo as i128 + c * (lo as i128) * (lo as i128);
            for y in lo..hi + 1 {
                out.push(v as u64);
                v += b * x + c * (2 * y as i128 + 1);
            }
        });
        out.sort_unstable();
        out
    }
}

/// `floor(r^2 * num / den)` computed exactly from the binary expansion of `r`.
pub fn floor_scaled_square(r: f64, num: u64, den: u64) -> BigUint {
    assert!(r.is_finite() && r >= 0.0, "radius must be finite and nonnegative");
    if r == 0.0 {
        return BigUint::zero();
    }
    let bits = r.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let mut top = BigUint::from(mant) * BigUint::from(mant) * BigUint::from(num);
    let mut bottom = BigUint::from(den);
    if e >= 0 {
        top <<= (2 * e) as usize;
    } else {
        bottom <<= (-2 * e) as usize;
    }
    top / bottom
}

/// `floor(x * num / den)` computed exactly from the binary expansion of `x`.
pub fn floor_scaled(x: f64, num: u64, den: u64) -> BigUint {
    assert!(x.is_finite() && x >= 0.0, "bound must be finite and nonnegative");
    if x == 0.0 {
        return BigUint::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let mut top = BigUint::from(mant) * BigUint::from(num);
    let mut bottom = BigUint::from(den);
    if e >= 0 {
        top <<= e as usize;
    } else {
        bottom <<= (-e) as usize;
    }
    top / bottom
}

/// Fast path for [`floor_scaled_square`] when the float product is far
/// from an integer.
pub fn floor_scaled_square_u64(r: f64, num: u64, den: u64) -> Option<u64> {
    let v = r * r * (num as f64 / den as f64);
    if !(v < 9.0e15) {
        return floor_scaled_square(r, num, den).to_u64();
    }
    let k = v.floor();
    let frac = v - k;
    let margin = 1e-9 * v.max(1.0);
    if frac > margin && 1.0 - frac > margin {
        Some(k as u64)
    } else {
        floor_scaled_square(r, num, den).to_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &IntForm, level: i128, bound: i64) -> u128 {
        let mut n = 0;
        for x in -bound..=bound {
            for y in -bound..=bound {
                if f.eval(x, y) <= level {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn small_counts_match_brute_force() {
        for f in [IntForm::new(1, 0, 1), IntForm::new(1, 1, 1), IntForm::new(3, -2, 5), IntForm::new(7, 6, 2)] {
            for level in 0..60i128 {
                let big = BigUint::from(level as u64);
                assert_eq!(f.count(&big), brute(&f, level, 20), "{f:?} level {level}");
                let mut big_path = 0u128;
                f.columns_big(&big, &mut |_, lo, hi| big_path += (hi - lo + 1) as u128);
                assert_eq!(big_path, f.count(&big));
            }
        }
    }

    #[test]
    fn histogram_sums_to_count() {
        let f = IntForm::new(3, 1, 2);
        let h = f.value_histogram(500);
        assert_eq!(h.iter().sum::<u64>() as u128, f.count(&BigUint::from(500u32)));
        let v = f.sorted_values(500);
        for (level, &m) in h.iter().enumerate() {
            assert_eq!(v.iter().filter(|&&x| x == level as u64).count() as u64, m);
        }
    }

    #[test]
    fn scaled_square_is_exact_at_integers() {
        assert_eq!(floor_scaled_square(2.0, 1, 1), BigUint::from(4u32));
        assert_eq!(floor_scaled_square(3.0, 1, 3), BigUint::from(3u32));
        assert_eq!(floor_scaled_square(0.5, 4, 1), BigUint::from(1u32));
        assert_eq!(floor_scaled_square(0.1, 100, 1), BigUint::from(1u32));
        assert_eq!(floor_scaled_square_u64(0.1, 100, 1), Some(1));
        assert_eq!(floor_scaled_square_u64(1e-3, 1, 1), Some(0));
        assert_eq!(floor_scaled(2.5, 2, 1), BigUint::from(5u32));
        assert_eq!(floor_scaled(0.3, 10, 1), BigUint::from(2u32));
        assert_eq!(floor_scaled(4.0, 1, 3), BigUint::from(1u32));
    }
}
