/// Bilinear resize of channel-major planes using half-pixel centers and edge
/// clamping.
///
/// Interpolation is written as `a + (b - a) * t` so that constant inputs stay
/// exactly constant and a same-size resize is the identity.
pub fn resize_bilinear(
    planes: &[f32],
    channels: usize,
    src_h: usize,
    src_w: usize,
    dst_h: usize,
    dst_w: usize,
) -> Vec<f32> {
    assert_eq!(planes.len(), channels * src_h * src_w, "plane size");
    let taps = |src: usize, dst: usize| -> Vec<(usize, usize, f32)> {
        let scale = src as f64 / dst as f64;
        (0..dst)
            .map(|d| {
                let pos = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(src - 1);
                (lo, hi, (pos - lo as f64) as f32)
            })
            .collect()
    };
    let rows = taps(src_h, dst_h);
    let cols = taps(src_w, dst_w);
    let mut out = Vec::with_capacity(channels * dst_h * dst_w);
    for c in 0..channels {
        let plane = &planes[c * src_h * src_w..(c + 1) * src_h * src_w];
        for &(y0, y1, fy) in &rows {
            let r0 = &plane[y0 * src_w..(y0 + 1) * src_w];
            let r1 = &plane[y1 * src_w..(y1 + 1) * src_w];
            for &(x0, x1, fx) in &cols {
                let top = r0[x0] + (r0[x1] - r0[x0]) * fx;
                let bottom = r1[x0] + (r1[x1] - r1[x0]) * fx;
                out.push(top + (bottom - top) * fy);
            }
        }
    }
    out
}
