//! Time reversal, translation and integration on level-major records.
//!
//! Levels outside the record read as zero, so every operation is total.

use super::{BoundaryTimeSeries, FieldMovie};

/// `out[n] = in[about − n]` on a movie (levels `0..=nt`).
pub fn reverse(movie: &FieldMovie, about: usize) -> FieldMovie {
    let nt = movie.nt();
    let mut out = FieldMovie::zeros(movie.dofs(), nt);
    for n in 0..=nt.min(about) {
        if about - n <= nt {
            out.level_mut(n).copy_from_slice(movie.level(about - n));
        }
    }
    out
}

/// `out[n] = in[about − n]` on a boundary series; level 0 reads as zero.
pub fn reverse_series(s: &BoundaryTimeSeries, about: usize) -> BoundaryTimeSeries {
    map_levels(s, |n| about.checked_sub(n))
}

/// `out[n] = in[n − by]`, zero-filled.
pub fn translate(s: &BoundaryTimeSeries, by: usize) -> BoundaryTimeSeries {
    map_levels(s, |n| n.checked_sub(by))
}

fn map_levels(s: &BoundaryTimeSeries, src: impl Fn(usize) -> Option<usize>) -> BoundaryTimeSeries {
    let (dofs, nt) = (s.dofs(), s.nt());
    let mut values = vec![0.0; dofs * nt];
    for n in 1..=nt {
        if let Some(m) = src(n).filter(|m| (1..=nt).contains(m)) {
            values[(n - 1) * dofs..n * dofs].copy_from_slice(s.level(m));
        }
    }
    BoundaryTimeSeries::from_values(dofs, nt, values).expect("shape preserved")
}

/// Cumulative trapezoid `∫_{t_from}^{t_n}`, zero at and before `from`.
pub fn integrate(movie: &FieldMovie, dt: f64, from: usize) -> FieldMovie {
    let (dofs, nt) = (movie.dofs(), movie.nt());
    let mut out = FieldMovie::zeros(dofs, nt);
    for n in from + 1..=nt {
        let (lo, hi) = (movie.level(n - 1), movie.level(n));
        let acc: Vec<f64> = out.level(n - 1).iter().zip(lo.iter().zip(hi)).map(|(a, (x, y))| a + 0.5 * dt * (x + y)).collect();
        out.level_mut(n).copy_from_slice(&acc);
    }
    out
}

/// [`integrate`] for a boundary series, whose level 0 is zero.
pub fn integrate_series(s: &BoundaryTimeSeries, dt: f64, from: usize) -> BoundaryTimeSeries {
    let (dofs, nt) = (s.dofs(), s.nt());
    let mut movie = FieldMovie::zeros(dofs, nt);
    for n in 1..=nt {
        movie.level_mut(n).copy_from_slice(s.level(n));
    }
    let int = integrate(&movie, dt, from);
    BoundaryTimeSeries::from_values(dofs, nt, int.values()[dofs..].to_vec()).expect("shape preserved")
}
