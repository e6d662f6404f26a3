use std::time::Instant;
fn main() {
    for n in 4..=6u32 {
        let t = Instant::now();
        let r = toric_heights::resultants::sylvester_resultant_form(n).unwrap();
        let h = toric_heights::resultants::form_height(&r).unwrap();
        println!(
            "PRS n={n}: {} terms, max|c|={}, h={:.6}, h/n^2={:.6}, {:?}",
            r.terms.len(), r.max_abs_coeff(), h, h / (n * n) as f64, t.elapsed()
        );
    }
    // cross-check PRS against Bareiss for n ≤ 4
    for n in 1..=4u32 {
        let a = toric_heights::resultants::sylvester_resultant_form(n).unwrap();
        let b = toric_heights::resultants::sylvester_resultant_form_bareiss(n).unwrap();
        assert_eq!(a, b, "n={n}");
    }
    println!("PRS == Bareiss for n ≤ 4");
}
