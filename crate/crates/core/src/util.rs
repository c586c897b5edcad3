/// Call `f` on every integer vector of the box `[lo, hi]`, in lexicographic
/// order (last coordinate fastest).
pub(crate) fn for_each_index(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let d = lo.len();
    let mut v = lo.to_vec();
    loop {
        f(&v);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if v[i] < hi[i] {
                v[i] += 1;
                v[i + 1..].copy_from_slice(&lo[i + 1..]);
                break;
            }
        }
    }
}
