use std::time::Instant;
fn main() {
    let t = Instant::now();
    let r = toric_heights::resultants::sylvester_resultant_form(6).unwrap();
    println!(
        "PRS n=6: {} terms, max|c|={}, h/36={:.6}, {:?}",
        r.terms.len(),
        r.max_abs_coeff(),
        toric_heights::resultants::form_height(&r).unwrap() / 36.0,
        t.elapsed()
    );
}
