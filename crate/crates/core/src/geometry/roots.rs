/// Root of a decreasing function on a bracket, by Illinois regula falsi.
///
/// Requires `f(pos) > 0 >= f(nonpos)`. The bracket is kept throughout, and the
/// returned endpoint is the one with `f <= 0`, so callers that need the
/// constraint-satisfying side get it without a final correction.
pub(crate) fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    mut pos: f64,
    mut nonpos: f64,
    rel_xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> f64 {
    let mut fp = f(pos);
    let mut fn_ = f(nonpos);
    debug_assert!(fp > 0.0 && fn_ <= 0.0, "root not bracketed");
    if fn_ == 0.0 {
        return nonpos;
    }
    // Which side moved last; the stale side has its value halved.
    let mut last = 0i8;
    for _ in 0..max_iter {
        if (nonpos - pos).abs() <= rel_xtol * nonpos.abs().max(pos.abs()) || -fn_ <= ftol {
            break;
        }
        let mut x = nonpos - fn_ * (nonpos - pos) / (fn_ - fp);
        let (lo, hi) = if pos < nonpos { (pos, nonpos) } else { (nonpos, pos) };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            if !(x > lo && x < hi) {
                break;
            }
        }
        let fx = f(x);
        if fx > 0.0 {
            pos = x;
            fp = fx;
            if last == 1 {
                fn_ *= 0.5;
            }
            last = 1;
        } else {
            nonpos = x;
            fn_ = fx;
            if fx == 0.0 {
                break;
            }
            if last == -1 {
                fp *= 0.5;
            }
            last = -1;
        }
    }
    nonpos
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root_from_the_nonpositive_side() {
        let x = illinois(|x| 2.0 - x * x * x, 0.0, 2.0, 1e-15, 0.0, 200);
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
        assert!(2.0 - x.powi(3) <= 0.0);
    }
}
