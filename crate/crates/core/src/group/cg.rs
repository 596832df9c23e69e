//! Clebsch-Gordan coefficients (Condon-Shortley phase) via the Racah sum.

use std::sync::OnceLock;

const TABLE_LEN: usize = 4096;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        t.push(0.0);
        for n in 1..TABLE_LEN {
            t.push(t[n - 1] + (n as f64).ln());
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    let t = table();
    if (n as usize) < t.len() {
        t[n as usize]
    } else {
        t[t.len() - 1] + (t.len() as u64..=n).map(|k| (k as f64).ln()).sum::<f64>()
    }
}

fn lf(n: i64) -> f64 {
    debug_assert!(n >= 0);
    ln_factorial(n as u64)
}

/// `<j1 m1; j2 m2 | j m>` with every argument doubled. Zero whenever a
/// selection rule fails.
pub fn clebsch_gordan(two_j1: u32, two_m1: i32, two_j2: u32, two_m2: i32, two_j: u32, two_m: i32) -> f64 {
    let (j1, j2, j) = (two_j1 as i64, two_j2 as i64, two_j as i64);
    let (m1, m2, m) = (two_m1 as i64, two_m2 as i64, two_m as i64);
    let in_range = |jj: i64, mm: i64| mm.abs() <= jj && (jj + mm) % 2 == 0;
    if m1 + m2 != m || !in_range(j1, m1) || !in_range(j2, m2) || !in_range(j, m) {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    // Halve everything: all combinations below are integers.
    let a = (j1 + j2 - j) / 2;
    let b = (j1 - m1) / 2;
    let c = (j2 + m2) / 2;
    let d = (j - j2 + m1) / 2;
    let e = (j - j1 - m2) / 2;
    let ln_pre = 0.5
        * (((j + 1) as f64).ln() + lf((j + j1 - j2) / 2) + lf((j - j1 + j2) / 2) + lf(a) - lf((j1 + j2 + j) / 2 + 1)
            + lf((j + m) / 2)
            + lf((j - m) / 2)
            + lf(b)
            + lf((j1 + m1) / 2)
            + lf((j2 - m2) / 2)
            + lf(c));
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = lf(k) + lf(a - k) + lf(b - k) + lf(c - k) + lf(d + k) + lf(e + k);
        let term = (ln_pre - ln_den).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}
