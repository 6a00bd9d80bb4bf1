use hamgrad::checks::{sign_convention, sign_convention_error};
use hamgrad_core::games::{BilinearGame, Game};
use hamgrad_core::numerics::{streams, RngStream};

/// A game whose `ξ` has the second player's block negated.
struct FlippedSign(BilinearGame);

impl Game for FlippedSign {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn d1(&self) -> usize {
        self.0.d1()
    }
    fn d2(&self) -> usize {
        self.0.d2()
    }
    fn label(&self) -> &str {
        "flipped"
    }
    fn xi_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        self.0.xi_into(i, x, out);
        for v in &mut out[self.d1()..] {
            *v = -*v;
        }
    }
    fn jtv_add(&self, i: usize, x: &[f64], v: &[f64], scale: f64, out: &mut [f64]) {
        self.0.jtv_add(i, x, v, scale, out);
    }
    fn player_losses(&self, i: usize, x: &[f64]) -> (f64, f64) {
        self.0.player_losses(i, x)
    }
}

#[test]
fn flipped_sign_is_detected() {
    let base = BilinearGame::random_dense(4, 3, 5, 9).unwrap();
    assert!(sign_convention(&base).pass);
    let flipped = FlippedSign(base);
    assert!(!sign_convention(&flipped).pass);
    let mut rng = RngStream::new(1, streams::PROBE);
    assert!(sign_convention_error(&flipped, 5, &mut rng) > 1e-2);
}
