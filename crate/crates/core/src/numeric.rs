//! Compensated accumulation used where results must be reproducible to the last few ulps.

/// Sum carried as an unevaluated pair `hi + lo` (Neumaier with exact products).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accum {
    hi: f64,
    lo: f64,
}

impl Accum {
    pub(crate) fn add(&mut self, x: f64) {
        let s = self.hi + x;
        if self.hi.abs() >= x.abs() {
            self.lo += (self.hi - s) + x;
        } else {
            self.lo += (x - s) + self.hi;
        }
        self.hi = s;
    }

    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.lo += e;
    }

    pub(crate) fn value(&self) -> f64 {
        self.hi + self.lo
    }

    /// Square root of the accumulated value with one Newton correction against the tail.
    pub(crate) fn sqrt(&self) -> f64 {
        let v = self.value();
        if v <= 0.0 {
            return 0.0;
        }
        let r = v.sqrt();
        let residual = (-r).mul_add(r, self.hi) + self.lo;
        r + residual / (2.0 * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let mut a = Accum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            a.add(x);
        }
        assert_eq!(a.value(), 2.0);
    }

    #[test]
    fn exact_products() {
        let mut a = Accum::default();
        let x = 1.0 + f64::EPSILON;
        a.add_product(x, x);
        a.add(-1.0);
        assert_eq!(a.value(), 2.0 * f64::EPSILON + f64::EPSILON * f64::EPSILON);
        let mut s = Accum::default();
        s.add_product(3.0, 3.0);
        s.add_product(4.0, 4.0);
        assert_eq!(s.sqrt(), 5.0);
    }
}
