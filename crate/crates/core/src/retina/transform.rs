use super::field::ScalarField;
use super::kernel::CenterSurroundKernel;
use crate::error::{Error, Result};

/// Riemann-sum discretisation of the center-surround integral transform:
/// `out(x) = h² · Σ_u K(u − x) · F(u)`.
///
/// Only points whose full kernel support lies inside the field are
/// produced, so the result is the field cropped by `R` cells on each side,
/// with its origin shifted to keep the cell-to-coordinate map unchanged.
pub fn ganglionic_transform(field: &ScalarField, kernel: &CenterSurroundKernel) -> Result<ScalarField> {
    let h = field.spacing();
    if (kernel.spacing() - h).abs() > 1e-12 * h {
        return Err(Error::Parameter(format!(
            "kernel spacing {} differs from field spacing {h}",
            kernel.spacing()
        )));
    }
    let side = kernel.side();
    if side > field.width() || side > field.height() {
        return Err(Error::Parameter(format!(
            "kernel of {side}x{side} cells larger than {}x{} field",
            field.width(),
            field.height()
        )));
    }
    let (out_w, out_h) = (field.width() - side + 1, field.height() - side + 1);
    let (w, k, v) = (field.width(), kernel.grid(), field.values());
    let area = h * h;
    let mut out = Vec::with_capacity(out_w * out_h);
    for i in 0..out_h {
        for j in 0..out_w {
            let mut acc = 0.0;
            for a in 0..side {
                let row = &v[(i + a) * w + j..][..side];
                let krow = &k[a * side..(a + 1) * side];
                acc += krow.iter().zip(row).map(|(kv, fv)| kv * fv).sum::<f64>();
            }
            out.push(area * acc);
        }
    }
    let r = kernel.radius_cells();
    let (x0, y0) = field.coords(r, r);
    Ok(ScalarField::new(out_w, out_h, h, out)?.with_origin((x0, y0)))
}
